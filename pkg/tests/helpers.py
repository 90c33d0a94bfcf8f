"""Shared generators and brute-force oracles for the test suite."""

from __future__ import annotations

import random

from mbasim.expr import (
    Expr,
    add,
    bit_and,
    bit_or,
    bit_xor,
    const,
    make_evaluator,
    mul,
    neg,
    power,
    var,
    variables_of,
)

NAMES = ("x", "y", "z", "w", "a", "b")


def random_expr(rng: random.Random, depth: int, width: int = 64,
                t: int = 3, allow_power: bool = True) -> Expr:
    """Random normalized AST; depth bounds nesting, t bounds the variable pool."""
    if depth == 0 or rng.random() < 0.25:
        roll = rng.random()
        if roll < 0.55:
            return var(NAMES[rng.randrange(t)], width)
        if roll < 0.8:
            return const(rng.choice((0, 1, 2, 3, 5, 7, 42, (1 << width) - 1,
                                     rng.randrange(1 << width))), width)
        return neg(var(NAMES[rng.randrange(t)], width))
    ops = [add, mul, bit_and, bit_xor, bit_or, neg]
    if allow_power:
        ops.append(power)
    op = rng.choice(ops)
    if op is neg:
        return neg(random_expr(rng, depth - 1, width, t, allow_power))
    if op is power:
        base = random_expr(rng, depth - 1, width, t, allow_power=False)
        return power(base, const(rng.randint(2, 4), width))
    k = rng.randint(2, 3)
    return op(*(random_expr(rng, depth - 1, width, t, allow_power) for _ in range(k)))


def random_bitwise(rng: random.Random, depth: int, width: int = 64, t: int = 3) -> Expr:
    if depth == 0 or rng.random() < 0.3:
        v = var(NAMES[rng.randrange(t)], width)
        return neg(v) if rng.random() < 0.3 else v
    op = rng.choice((bit_and, bit_or, bit_xor, neg))
    if op is neg:
        return neg(random_bitwise(rng, depth - 1, width, t))
    return op(*(random_bitwise(rng, depth - 1, width, t) for _ in range(rng.randint(2, 3))))


def eval_on(e: Expr, names: tuple[str, ...], values: tuple[int, ...],
            width: int) -> int:
    return make_evaluator(e, names, width)(values)


def agree_on_01(e1: Expr, e2: Expr, width: int) -> bool:
    names = tuple(sorted(set(variables_of(e1)) | set(variables_of(e2))))
    f1 = make_evaluator(e1, names, width)
    f2 = make_evaluator(e2, names, width)
    return all(
        f1(tuple((i >> j) & 1 for j in range(len(names))))
        == f2(tuple((i >> j) & 1 for j in range(len(names))))
        for i in range(1 << len(names))
    )


def agree_exhaustive(e1: Expr, e2: Expr, width: int) -> bool:
    """All assignments at the given (small) width."""
    names = tuple(sorted(set(variables_of(e1)) | set(variables_of(e2))))
    f1 = make_evaluator(e1, names, width)
    f2 = make_evaluator(e2, names, width)
    size = 1 << width
    total = size ** len(names)
    for i in range(total):
        vals = []
        v = i
        for _ in names:
            vals.append(v % size)
            v //= size
        values = tuple(vals)
        if f1(values) != f2(values):
            return False
    return True


def agree_random(e1: Expr, e2: Expr, width: int, samples: int, seed: int) -> bool:
    names = tuple(sorted(set(variables_of(e1)) | set(variables_of(e2))))
    f1 = make_evaluator(e1, names, width)
    f2 = make_evaluator(e2, names, width)
    rng = random.Random(seed)
    modulus = 1 << width
    return all(
        f1(values) == f2(values)
        for values in (
            tuple(rng.randrange(modulus) for _ in names) for _ in range(samples)
        )
    )
