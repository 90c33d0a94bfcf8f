import random

import pytest

from mbasim.config import SimplifyConfig
from mbasim.expr import evaluate, parse, to_string
from mbasim.linear import result_vector, simplify_linear
from mbasim.verify import (
    OutcomeClass,
    check,
    grid_counterexample,
    quick_equivalent,
    random_equivalence,
)

from helpers import random_expr


def test_check_identical():
    out = check(parse("x+y"), parse("x+y"))
    assert out.klass is OutcomeClass.IDENTICAL
    assert out.evidence == "identical"
    assert out.counterexample is None


def test_check_identical_modulo_order():
    out = check(parse("y+x"), parse("x+y"))
    assert out.klass is OutcomeClass.IDENTICAL


def test_check_e3_unproven_with_counterexample():
    e3 = parse("(x&y)*(x|y)+(x&~y)*(~x&y)")
    simba_out = simplify_linear(e3)
    assert to_string(simba_out) == "x&y"
    out = check(simba_out, e3)
    assert out.klass is OutcomeClass.UNPROVEN
    cex = out.counterexample
    assert cex is not None
    w = 4  # counterexamples from the reduced-width grid live at check_width
    assert evaluate(simba_out, cex, w) != evaluate(e3, cex, w)


def test_check_difference_zero():
    out = check(parse("~x+1"), parse("-x"))
    assert out.klass is OutcomeClass.EQUIVALENT
    assert out.evidence == "difference-zero"


def test_check_requires_same_width():
    with pytest.raises(ValueError):
        check(parse("x", 8), parse("x", 16))


def test_random_equivalence_trivial():
    assert random_equivalence(parse("x"), parse("x"), samples=5, seed=1) is None
    cex = random_equivalence(parse("x"), parse("x+1"), samples=1, seed=1)
    assert cex is not None


def test_random_equivalence_rejects_bad_samples():
    with pytest.raises(ValueError):
        random_equivalence(parse("x"), parse("x"), samples=0)


def test_random_equivalence_linear_with_equal_vectors():
    # Equal result vectors of linear MBAs imply equality everywhere, so no
    # seed can find a counterexample; cross-check exhaustively at width 4.
    rng = random.Random(2)
    for _ in range(30):
        e = parse("x+(x&y)-2*(x|y)+42")
        out = simplify_linear(e)
        assert result_vector(out, ("x", "y")).values == result_vector(e, ("x", "y")).values
        for seed in range(5):
            assert random_equivalence(e, out, samples=200, seed=seed) is None
    assert grid_counterexample(parse("x+y", 4), parse("y+x", 4), 4) is None


def test_negative_direction_is_absolute():
    # check() must never classify a reduced-width-distinguishable pair as
    # Identical or Equivalent.
    rng = random.Random(13)
    cfg = SimplifyConfig()
    for _ in range(40):
        e1 = random_expr(rng, rng.randint(0, 4), t=3)
        e2 = random_expr(rng, rng.randint(0, 4), t=3)
        cex = grid_counterexample(e1, e2, cfg.check_width)
        if cex is None:
            continue
        out = check(e1, e2, cfg)
        assert out.klass is OutcomeClass.UNPROVEN
        assert out.counterexample is not None


def test_grid_counterexample_skips_oversize():
    names = " ".join(f"v{i}" for i in range(30)).split()
    big = parse("+".join(names))
    other = parse("+".join(names) + "+1")
    # 30 variables * 4 bits blows the grid limit; the caller must fall back.
    assert grid_counterexample(big, other, 4) is None


def test_quick_equivalent():
    assert quick_equivalent(parse("~x+1"), parse("-x"))
    assert not quick_equivalent(parse("x"), parse("x+1"))
    assert quick_equivalent(parse("x*(y+z)"), parse("x*y+x*z"))
