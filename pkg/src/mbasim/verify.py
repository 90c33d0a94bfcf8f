"""Equivalence checking and outcome classification.

The positive direction is layered: structural identity, identity after
simplifying the ground truth, a zero simplified difference, and finally
exhaustive reduced-width plus randomized full-width evaluation.  A reported
counterexample always distinguishes the two expressions, so the negative
direction is absolute.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_CONFIG, SimplifyConfig
from .expr import Expr, Op, canonicalize, make_evaluator, sub, variables_of

#: Reduced-width exhaustive checking is skipped when t * n' exceeds this
#: (the assignment grid would pass 2**24 evaluations).
GRID_BITS_LIMIT = 24


class OutcomeClass(enum.Enum):
    IDENTICAL = "identical"      # the paper's ≡ column
    EQUIVALENT = "equivalent"    # ≈
    UNPROVEN = "unproven"        # ×

    @property
    def symbol(self) -> str:
        return {"identical": "==", "equivalent": "~=", "unproven": "xx"}[self.value]


@dataclass(frozen=True)
class Outcome:
    klass: OutcomeClass
    evidence: str
    counterexample: dict[str, int] | None = None


# ---------------------------------------------------------------------------
# Batched evaluation.  Lanes are uint64, which wraps mod 2**64 natively; for
# narrower widths every arithmetic step is masked.  Constants in exponent
# position keep their stored residue even at reduced width, so width-generic
# rewrites stay comparable on truncated words.


def _pow_lanes(base: np.ndarray, exponent, mask: int, modulus: int) -> np.ndarray:
    result = np.ones_like(base)
    if isinstance(exponent, int):
        # Scalar exponent: let Python ints drive the square-and-multiply.
        b = base.copy()
        e = exponent
        while e:
            if e & 1:
                result = (result * b) & mask
            b = (b * b) & mask
            e >>= 1
        return result
    b = base.copy()
    e = exponent.copy()
    while e.any():
        odd = (e & 1).astype(bool)
        result[odd] = (result[odd] * b[odd]) & mask
        b = (b * b) & mask
        e = e >> 1
    return result


def _batch_eval(e: Expr, columns: dict[str, np.ndarray], width: int) -> np.ndarray:
    mask = (1 << width) - 1 if width < 64 else np.uint64(0xFFFFFFFFFFFFFFFF)
    modulus = 1 << width

    def ev(node: Expr, exponent_pos: bool = False):
        if node.op is Op.CONST:
            if exponent_pos:
                return node.value
            return np.uint64(node.value & int(mask)) if width < 64 else np.uint64(node.value)
        if node.op is Op.VAR:
            return columns[node.name]
        if node.op is Op.NEG:
            return ev(node.args[0]) ^ mask
        if node.op is Op.POW:
            base = ev(node.args[0])
            exp = ev(node.args[1], exponent_pos=True)
            return _pow_lanes(base, exp, mask, modulus)
        acc = ev(node.args[0])
        for a in node.args[1:]:
            v = ev(a)
            if node.op is Op.SUM:
                acc = (acc + v) & mask
            elif node.op is Op.MUL:
                acc = (acc * v) & mask
            elif node.op is Op.AND:
                acc = acc & v
            elif node.op is Op.XOR:
                acc = acc ^ v
            else:
                acc = acc | v
        return acc

    out = ev(e)
    if not isinstance(out, np.ndarray):
        out = np.full(len(next(iter(columns.values()))) if columns else 1, out, dtype=np.uint64)
    return out


def _grid_columns(names: tuple[str, ...], bits: int) -> dict[str, np.ndarray]:
    total = 1 << (bits * len(names))
    idx = np.arange(total, dtype=np.uint64)
    cols = {}
    for j, name in enumerate(names):
        cols[name] = (idx >> np.uint64(bits * j)) & np.uint64((1 << bits) - 1)
    return cols


def grid_counterexample(e1: Expr, e2: Expr, reduced_width: int) -> dict[str, int] | None:
    """Exhaustively compare on all reduced-width assignments; None if equal.

    Returns None without checking when the grid exceeds the evaluation limit.
    """
    names = tuple(sorted(set(variables_of(e1)) | set(variables_of(e2))))
    if len(names) * reduced_width > GRID_BITS_LIMIT:
        return None
    cols = _grid_columns(names, reduced_width) if names else {}
    v1 = _batch_eval(e1, cols, reduced_width)
    v2 = _batch_eval(e2, cols, reduced_width)
    diff = np.nonzero(v1 != v2)[0]
    if diff.size == 0:
        return None
    i = int(diff[0])
    return {name: int(cols[name][i]) for name in names} if names else {}


def random_equivalence(e1: Expr, e2: Expr, width: int | None = None,
                       samples: int = DEFAULT_CONFIG.check_samples,
                       seed: int = DEFAULT_CONFIG.sample_seed) -> dict[str, int] | None:
    """First differing random assignment at full width, or None.

    Deterministic for a given seed; equality of linear MBAs with equal result
    vectors is guaranteed, so absence of a counterexample there is exact.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    w = e1.width if width is None else width
    names = tuple(sorted(set(variables_of(e1)) | set(variables_of(e2))))
    f1 = make_evaluator(e1, names, w)
    f2 = make_evaluator(e2, names, w)
    rng = random.Random(seed)
    modulus = 1 << w
    small = (0, 1, 2, modulus - 1, modulus - 2, 3, 5, 8)
    for k in range(samples):
        if k < len(small) ** min(len(names), 3) and len(names) <= 3:
            # Lead with small corner values; they catch most slips.
            combo = []
            idx = k
            for _ in names:
                combo.append(small[idx % len(small)])
                idx //= len(small)
            values = tuple(combo)
        else:
            values = tuple(rng.randrange(modulus) for _ in names)
        if f1(values) != f2(values):
            return dict(zip(names, values))
    return None


def equivalent_on_01(e1: Expr, e2: Expr, width: int | None = None) -> bool:
    """Agreement on all 0/1 assignments (exact equivalence for linear MBAs)."""
    w = e1.width if width is None else width
    names = tuple(sorted(set(variables_of(e1)) | set(variables_of(e2))))
    if len(names) > 20:
        raise ValueError("too many variables for the 0/1 grid")
    f1 = make_evaluator(e1, names, w)
    f2 = make_evaluator(e2, names, w)
    for i in range(1 << len(names)):
        values = tuple((i >> j) & 1 for j in range(len(names)))
        if f1(values) != f2(values):
            return False
    return True


def quick_equivalent(e1: Expr, e2: Expr, cfg: SimplifyConfig = DEFAULT_CONFIG,
                     samples: int = 32, grid_bits: int = 10) -> bool:
    """Cheap but sharp step check: 0/1 grid, reduced-width grid, random probes.

    grid_bits caps the exhaustive grid at 2**grid_bits assignments; the final
    pipeline gate passes a higher cap than the per-step calls.
    """
    names = tuple(sorted(set(variables_of(e1)) | set(variables_of(e2))))
    t = len(names)
    if t <= 10 and not equivalent_on_01(e1, e2, cfg.width):
        return False
    for bits in (cfg.check_width, 2, 1):
        if t * bits <= grid_bits:
            if grid_counterexample(e1, e2, bits) is not None:
                return False
            break
    return random_equivalence(e1, e2, cfg.width, samples, cfg.sample_seed) is None


def check(e_simplified: Expr, ground_truth: Expr,
          cfg: SimplifyConfig = DEFAULT_CONFIG) -> Outcome:
    """Classify a simplification against its ground truth.

    Strategies run in a fixed order: (i) polished structural equality,
    (ii) equality after simplifying the ground truth, (iii) the simplified
    difference is zero, (iv) exhaustive reduced-width plus random full-width
    evaluation.  The evidence field names the first strategy that succeeded.
    """
    if e_simplified.width != ground_truth.width:
        raise ValueError("expressions must share one bit width")
    a = canonicalize(e_simplified)
    b = canonicalize(ground_truth)
    if a == b:
        return Outcome(OutcomeClass.IDENTICAL, "identical")

    from . import pipeline  # deferred: check() sits above the simplifier

    simplified_gt = canonicalize(pipeline.simplify_general(ground_truth, cfg))
    if a == simplified_gt:
        return Outcome(OutcomeClass.IDENTICAL, "identical-after-simplifying-gt")

    difference = pipeline.simplify_general(sub(e_simplified, ground_truth), cfg)
    if difference.is_const(0):
        return Outcome(OutcomeClass.EQUIVALENT, "difference-zero")

    cex = grid_counterexample(e_simplified, ground_truth, cfg.check_width)
    if cex is not None:
        return Outcome(OutcomeClass.UNPROVEN, "evaluation", cex)
    cex = random_equivalence(e_simplified, ground_truth, cfg.width,
                             cfg.check_samples, cfg.sample_seed)
    if cex is not None:
        return Outcome(OutcomeClass.UNPROVEN, "evaluation", cex)
    return Outcome(OutcomeClass.EQUIVALENT, "evaluation")
