"""Minimal bitwise expressions for every truth table over up to 3 variables.

A table maps the truth-table index (bit i of the index is the function value
on assignment i, least significant variable first) to a node-count-minimal
expression over {~, &, ^, |}.  Tables are generated once by exhaustive
relaxation and shipped as text files, one `<index>:<expression>` line each;
`python -m mbasim.tables` rewrites them.
"""

from __future__ import annotations

import functools
from importlib import resources
from pathlib import Path

from .expr import (
    Expr,
    Op,
    bit_and,
    bit_or,
    bit_xor,
    canonicalize,
    const,
    neg,
    node_count,
    parse,
    to_string,
    var,
)

_TEMPLATE_VARS = ("x0", "x1", "x2")
_GEN_WIDTH = 64


def _truth_masks(t: int) -> list[int]:
    # Bit i of mask j is the value of variable j on assignment i.
    size = 1 << (1 << t)
    masks = []
    for j in range(t):
        m = 0
        for i in range(1 << t):
            if (i >> j) & 1:
                m |= 1 << i
        masks.append(m)
    return masks


def generate_table(t: int) -> dict[int, Expr]:
    """Exhaustively build minimal expressions for all 2**(2**t) functions.

    Combines known minimal representatives with every operator until no
    function's node count improves; sizes are those of the flattened n-ary
    ASTs, so e.g. x0&x1&x2 counts 4 nodes.
    """
    if not 1 <= t <= 3:
        raise ValueError("tables cover 1 to 3 variables")
    full = (1 << (1 << t)) - 1
    best: dict[int, Expr] = {}

    def offer(func: int, e: Expr) -> bool:
        cur = best.get(func)
        if cur is None or node_count(e) < node_count(cur):
            best[func] = e
            return True
        return False

    offer(0, const(0, _GEN_WIDTH))
    offer(full, const(-1, _GEN_WIDTH))
    for j, mask in enumerate(_truth_masks(t)):
        offer(mask, var(_TEMPLATE_VARS[j], _GEN_WIDTH))

    ops = (
        (lambda a, b: a & b, bit_and),
        (lambda a, b: a ^ b, bit_xor),
        (lambda a, b: a | b, bit_or),
    )
    changed = True
    while changed:
        changed = False
        snapshot = sorted(best.items())
        for f1, e1 in snapshot:
            if offer(f1 ^ full, neg(e1)):
                changed = True
            for f2, e2 in snapshot:
                for tt_op, build in ops:
                    func = tt_op(f1, f2)
                    cur = best.get(func)
                    # Cheap size bound before constructing the node.
                    if cur is not None and node_count(cur) <= 1:
                        continue
                    e = build(e1, e2)
                    if offer(func, e):
                        changed = True
    assert len(best) == full + 1
    return {func: canonicalize(e) for func, e in best.items()}


def _data_path(t: int) -> str:
    return f"bitwise_{t}.txt"


def save_table(table: dict[int, Expr], path: Path) -> None:
    lines = [f"{idx}:{to_string(table[idx])}" for idx in sorted(table)]
    path.write_text("\n".join(lines) + "\n")


@functools.lru_cache(maxsize=None)
def load_table(t: int) -> tuple[Expr, ...]:
    """Table for t variables as a tuple indexed by truth-table index."""
    try:
        text = resources.files(__package__).joinpath("data").joinpath(_data_path(t)).read_text()
    except FileNotFoundError:
        generated = generate_table(t)
        return tuple(generated[i] for i in range(len(generated)))
    entries: dict[int, Expr] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        idx, _, src = line.partition(":")
        entries[int(idx)] = parse(src, _GEN_WIDTH)
    size = 1 << (1 << t)
    if sorted(entries) != list(range(size)):
        raise ValueError(f"table for {t} variables is incomplete")
    return tuple(entries[i] for i in range(size))


def instantiate(template: Expr, variables: tuple[str, ...], width: int) -> Expr:
    """Rewrite a stored template onto concrete variable names and width."""
    mapping = {_TEMPLATE_VARS[i]: name for i, name in enumerate(variables)}

    def walk(node: Expr) -> Expr:
        if node.op is Op.CONST:
            return const(node.value if node.value != node.modulus - 1 else -1, width)
        if node.op is Op.VAR:
            return var(mapping[node.name], width)
        if node.op is Op.NEG:
            return neg(walk(node.args[0]))
        rebuilt = [walk(a) for a in node.args]
        if node.op is Op.AND:
            return bit_and(*rebuilt)
        if node.op is Op.XOR:
            return bit_xor(*rebuilt)
        return bit_or(*rebuilt)

    return walk(template)


def bitwise_from_truth(bits: int, variables: tuple[str, ...], width: int) -> Expr:
    """Minimal stored expression for a truth-table index over len(variables) <= 3."""
    t = len(variables)
    return instantiate(load_table(t)[bits], variables, width)


def write_all(directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for t in (1, 2, 3):
        save_table(generate_table(t), directory / _data_path(t))


if __name__ == "__main__":
    import sys

    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent / "data"
    write_all(target)
    print(f"wrote bitwise tables to {target}")
