"""Bitwise expression synthesis from truth tables, plus structural refinement.

Quine-McCluskey covers any variable count (up to a hard capacity limit) and
is the fallback when the shipped lookup tables stop at three variables.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .expr import (
    Classification,
    Expr,
    Op,
    bit_and,
    bit_or,
    bit_xor,
    classify,
    const,
    neg,
    node_count,
    rebuild,
    var,
)

#: Quine-McCluskey is exponential in the variable count; refuse beyond this.
MAX_VARIABLES = 12

#: Exact Petrick-style cover selection is used up to this many prime implicants.
PETRICK_LIMIT = 16


class CapacityError(ValueError):
    """Raised when a synthesis request exceeds the supported variable count."""


def _default_names(t: int) -> tuple[str, ...]:
    if t <= 3:
        return ("x", "y", "z")[:t]
    return tuple(f"x{i}" for i in range(t))


@dataclass(frozen=True)
class TruthTable:
    """2**t Boolean entries, indexed like a result vector (x first, LSB)."""

    t: int
    bits: tuple[int, ...]
    vars: tuple[str, ...] = ()
    width: int = 64

    def __post_init__(self):
        if len(self.bits) != 1 << self.t:
            raise ValueError(f"expected {1 << self.t} entries, got {len(self.bits)}")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("truth table entries must be 0 or 1")
        if not self.vars:
            object.__setattr__(self, "vars", _default_names(self.t))
        elif len(self.vars) != self.t:
            raise ValueError("variable list does not match variable count")

    @classmethod
    def from_index(cls, t: int, index: int, **kw) -> "TruthTable":
        return cls(t, tuple((index >> i) & 1 for i in range(1 << t)), **kw)


# A cube fixes the variables in `mask` to the bits of `value`.
_Cube = tuple[int, int]


def _prime_implicants(t: int, minterms: list[int]) -> list[_Cube]:
    full = (1 << t) - 1
    level: set[_Cube] = {(full, m) for m in minterms}
    primes: set[_Cube] = set()
    while level:
        merged: set[_Cube] = set()
        used: set[_Cube] = set()
        by_mask: dict[int, list[_Cube]] = {}
        for cube in level:
            by_mask.setdefault(cube[0], []).append(cube)
        for mask, cubes in by_mask.items():
            values = {v for _, v in cubes}
            for _, v in cubes:
                for j in range(t):
                    bit = 1 << j
                    if not mask & bit:
                        continue
                    if (v ^ bit) in values:
                        merged.add((mask ^ bit, v & ~bit))
                        used.add((mask, v))
                        used.add((mask, v ^ bit))
        primes.update(level - used)
        level = merged
    return sorted(primes, key=lambda c: (c[1], c[0]))


def _covers(cube: _Cube, minterm: int) -> bool:
    mask, value = cube
    return minterm & mask == value


def _select_cover(primes: list[_Cube], minterms: list[int]) -> list[_Cube]:
    remaining = set(minterms)
    chosen: list[_Cube] = []

    # Essential primes: the only cover of some minterm.
    changed = True
    while changed and remaining:
        changed = False
        for m in sorted(remaining):
            covering = [c for c in primes if _covers(c, m)]
            if len(covering) == 1:
                c = covering[0]
                if c not in chosen:
                    chosen.append(c)
                remaining -= {m2 for m2 in remaining if _covers(c, m2)}
                changed = True
                break
    if not remaining:
        return chosen

    rest = [c for c in primes if c not in chosen and any(_covers(c, m) for m in remaining)]
    if len(rest) <= PETRICK_LIMIT:
        # Exact: smallest completing subset, deterministic order.
        for size in range(1, len(rest) + 1):
            for combo in itertools.combinations(rest, size):
                if all(any(_covers(c, m) for c in combo) for m in remaining):
                    return chosen + list(combo)
    # Greedy set cover for large instances.
    while remaining:
        best = max(rest, key=lambda c: (sum(_covers(c, m) for m in remaining), c[1] * -1))
        chosen.append(best)
        remaining -= {m for m in remaining if _covers(best, m)}
        rest.remove(best)
    return chosen


def _cube_expr(cube: _Cube, names: tuple[str, ...], width: int) -> Expr:
    mask, value = cube
    literals = []
    for j, name in enumerate(names):
        if mask & (1 << j):
            v = var(name, width)
            literals.append(v if value & (1 << j) else neg(v))
    if not literals:
        return const(-1, width)
    if len(literals) == 1:
        return literals[0]
    return bit_and(*literals)


def quine_mccluskey(tt: TruthTable) -> Expr:
    """Minimal-cover disjunctive normal form reproducing the table exactly."""
    if tt.t > MAX_VARIABLES:
        raise CapacityError(
            f"Quine-McCluskey supports at most {MAX_VARIABLES} variables, got {tt.t}"
        )
    minterms = [i for i, b in enumerate(tt.bits) if b]
    if not minterms:
        return const(0, tt.width)
    if len(minterms) == 1 << tt.t:
        return const(-1, tt.width)
    primes = _prime_implicants(tt.t, minterms)
    cover = sorted(_select_cover(primes, minterms), key=lambda c: (c[1], c[0]))
    terms = [_cube_expr(c, tt.vars, tt.width) for c in cover]
    return terms[0] if len(terms) == 1 else bit_or(*terms)


# ---------------------------------------------------------------------------
# Iterative refinement of bitwise expressions.


def _xor_from_or_pair(a: Expr, b: Expr) -> Expr | None:
    # (X&~Y)|(~X&Y) -> X^Y.  The all-negated conjunction may already have
    # been folded to ~(U|V) by De Morgan; recognize that spelling too.
    if a.op is Op.AND and b.op is Op.AND and len(a.args) == 2 and len(b.args) == 2:
        for x, ny in (a.args, a.args[::-1]):
            if ny.op is Op.NEG and frozenset(b.args) == frozenset((neg(x), ny.args[0])):
                return bit_xor(x, ny.args[0])
    for p, q in ((a, b), (b, a)):
        if (
            p.op is Op.NEG
            and p.args[0].op is Op.OR
            and len(p.args[0].args) == 2
            and q.op is Op.AND
            and frozenset(q.args) == frozenset(p.args[0].args)
        ):
            u, v = q.args
            return bit_xor(neg(u), v)
    return None


def _xor_from_and_pair(a: Expr, b: Expr) -> Expr | None:
    # (X|Y)&(~X|~Y) -> X^Y, with (~X|~Y) possibly spelled ~(X&Y).
    if a.op is Op.OR and b.op is Op.OR and len(a.args) == 2 and len(b.args) == 2:
        for x, y in (a.args, a.args[::-1]):
            if frozenset(b.args) == frozenset((neg(x), neg(y))):
                return bit_xor(x, y)
    for p, q in ((a, b), (b, a)):
        if (
            p.op is Op.OR
            and len(p.args) == 2
            and q.op is Op.NEG
            and q.args[0].op is Op.AND
            and frozenset(q.args[0].args) == frozenset(p.args)
        ):
            return bit_xor(*p.args)
    return None


def _insert_xors(e: Expr) -> Expr:
    if e.op not in (Op.OR, Op.AND):
        return e
    match = _xor_from_or_pair if e.op is Op.OR else _xor_from_and_pair
    args = list(e.args)
    for i, j in itertools.combinations(range(len(args)), 2):
        merged = match(args[i], args[j])
        if merged is not None:
            rest = [a for k, a in enumerate(args) if k not in (i, j)]
            return rebuild(e.op, tuple(rest + [merged])) if rest else merged
    return e


def _flip_negations(e: Expr) -> Expr:
    if e.op is Op.XOR:
        # ~X ^ ~Y == X ^ Y: strip negations pairwise.
        negs = [i for i, a in enumerate(e.args) if a.op is Op.NEG]
        if len(negs) >= 2:
            args = list(e.args)
            for i in negs[: len(negs) // 2 * 2]:
                args[i] = args[i].args[0]
            return bit_xor(*args)
        return e
    if e.op is Op.NEG and e.args[0].op in (Op.AND, Op.OR):
        # De Morgan, applied only when it strictly shrinks the tree.
        inner = e.args[0]
        flipped = tuple(neg(a) for a in inner.args)
        dual = Op.OR if inner.op is Op.AND else Op.AND
        candidate = rebuild(dual, flipped)
        if node_count(candidate) < node_count(e):
            return candidate
        return e
    if e.op in (Op.AND, Op.OR):
        negated = [a for a in e.args if a.op is Op.NEG]
        if len(negated) == len(e.args) and len(e.args) >= 2:
            dual = Op.OR if e.op is Op.AND else Op.AND
            return neg(rebuild(dual, tuple(a.args[0] for a in e.args)))
    return e


def _factor_common(e: Expr) -> Expr:
    if e.op not in (Op.OR, Op.AND) or len(e.args) < 2:
        return e
    inner = Op.AND if e.op is Op.OR else Op.OR
    first = e.args[0].args if e.args[0].op is inner else (e.args[0],)
    for x in first:
        cofactors = []
        for a in e.args:
            operands = a.args if a.op is inner else (a,)
            if x not in operands:
                break
            rest = [o for o in operands if o is not x and o != x]
            if not rest:
                # The operand is X itself: its cofactor is the inner identity,
                # which collapses the whole factorization to X.
                cofactors.append(const(0 if inner is Op.OR else -1, e.width))
            else:
                cofactors.append(rest[0] if len(rest) == 1 else rebuild(inner, tuple(rest)))
        else:
            folded = rebuild(e.op, tuple(cofactors))
            return rebuild(inner, (x, folded))
    return e


def bitwise_refine(e: Expr) -> Expr:
    """Shrink a bitwise expression by XOR insertion, negation flipping and
    distributive factoring, repeated until nothing changes."""
    if classify(e) is not Classification.BITWISE:
        raise ValueError("bitwise_refine expects a purely bitwise expression")

    def pass_once(node: Expr) -> Expr:
        if not node.args:
            return node
        node = rebuild(node.op, tuple(pass_once(a) for a in node.args))
        for rule in (_insert_xors, _flip_negations, _factor_common):
            if not node.args:
                break
            node = rule(node)
        return node

    while True:
        refined = pass_once(e)
        if refined == e:
            return e
        e = refined
