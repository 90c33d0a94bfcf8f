import random

import pytest

from mbasim.expr import (
    Classification,
    Metric,
    Op,
    ParseError,
    add,
    canonicalize,
    classify,
    collect_linear_subtrees,
    const,
    evaluate,
    make_evaluator,
    metric_value,
    mul,
    parse,
    to_string,
    var,
)

from helpers import random_expr

W = 64
M = 1 << W


def test_parse_linear_example_shape():
    e = parse("x+(x&y)-2*(x|y)+42")
    assert e.op is Op.SUM
    assert [a.op for a in e.args] == [Op.VAR, Op.AND, Op.MUL, Op.CONST]
    coeff = e.args[2].args[0]
    assert coeff.value == (-2) % M
    assert e.args[3].value == 42


def test_parse_identity():
    assert parse("x") == var("x", W)


def test_parse_polynomial_roundtrip():
    e = parse("y*(x^y) - (x&y)**2 - 1")
    assert parse(to_string(e)) == e


def test_parse_errors():
    with pytest.raises(ParseError):
        parse("")
    with pytest.raises(ParseError):
        parse("x +")
    with pytest.raises(ParseError):
        parse("(x+y")
    with pytest.raises(ParseError):
        parse("x $ y")
    err = None
    try:
        parse("x + * y")
    except ParseError as exc:
        err = exc
    assert err is not None and err.pos == 4


def test_large_literal_reduced_not_error():
    e = parse(str(2**64 + 5))
    assert e == const(5, W)


def test_hex_and_shift():
    assert parse("0x2a") == const(42, W)
    assert parse("x << 2") == parse("4*x")
    assert evaluate(parse("x << y"), {"x": 3, "y": 2}) == 12


def test_print_signed_style():
    e = add(var("x", W), var("y", W), mul(const(-1, W), var("z", W)))
    assert to_string(e) == "x+y-z"
    assert to_string(const(0, W)) == "0"
    assert to_string(const(-1, W)) == "-1"
    assert to_string(const(-1, W), signed=False) == str(M - 1)


def test_print_parse_roundtrip_random():
    rng = random.Random(20140)
    for _ in range(10_000):
        e = random_expr(rng, rng.randint(1, 8))
        assert parse(to_string(e), W) == e


def test_unary_and_power_parens():
    assert to_string(parse("(~x)**2")) == "(~x)**2"
    assert parse(to_string(parse("~(x**2)"))) == parse("~x**2")
    assert to_string(parse("-(x&y)")) == "-(x&y)"
    assert parse(to_string(parse("x**(y**z)"))) == parse("x**y**z")


def test_metric_alternation_zero_on_pure_trees():
    assert metric_value(parse("x&y"), Metric.MBA_ALTERNATION) == 0
    assert metric_value(parse("x+y*z"), Metric.MBA_ALTERNATION) == 0
    assert metric_value(parse("(x&y)+1"), Metric.MBA_ALTERNATION) == 1


def test_metric_basics():
    x = parse("x")
    assert metric_value(x, Metric.NODE_COUNT) == 1
    assert metric_value(x, Metric.TERM_COUNT) == 1
    e4 = parse("2*((y&~z)|(x&(y|~z)))-(x^y^z)")
    assert metric_value(e4, Metric.TERM_COUNT) == 2
    assert metric_value(parse("x+y-z"), Metric.TERM_COUNT) == 3


def test_node_count_at_least_term_count():
    rng = random.Random(7)
    for _ in range(500):
        e = random_expr(rng, rng.randint(0, 6))
        assert metric_value(e, Metric.NODE_COUNT) >= metric_value(e, Metric.TERM_COUNT)


def test_classify_examples():
    assert classify(parse("x+(x&y)-2*(x|y)+42")) is Classification.LINEAR
    assert classify(parse("5+(x|3)-(5&y)")) is Classification.NONLINEAR
    assert classify(parse("~(x|z)")) is Classification.BITWISE
    assert classify(parse("y*(x^y)-(x&y)**2-1")) is Classification.NONLINEAR
    assert classify(const(0, W)) is Classification.BITWISE
    assert classify(const(-1, W)) is Classification.BITWISE
    assert classify(const(7, W)) is Classification.LINEAR


def test_classify_permutation_invariant():
    rng = random.Random(99)
    for _ in range(300):
        e = random_expr(rng, rng.randint(1, 5))
        assert classify(e) is classify(canonicalize(e))


def _subtree_classes(e):
    out = [(e, classify(e))]
    for a in e.args:
        out.extend(_subtree_classes(a))
    return out


def test_collect_linear_subtrees_examples():
    found = collect_linear_subtrees(parse("(x&3)*(x+y-(x|y))"))
    assert len(found) == 1
    assert found[0][1] == parse("x+y-(x|y)")

    whole = collect_linear_subtrees(parse("x+y"))
    assert whole == [((), parse("x+y"))]

    assert collect_linear_subtrees(parse("y*(x^y)")) == []


def test_collect_linear_subtrees_oracle():
    # Every reported subtree must classify Linear, and no Linear subtree may
    # sit strictly above a reported one (maximality, checked exhaustively).
    rng = random.Random(4)
    for _ in range(200):
        e = random_expr(rng, rng.randint(1, 5))
        reported = collect_linear_subtrees(e)
        for _, sub in reported:
            assert classify(sub) is Classification.LINEAR
        if classify(e) is Classification.LINEAR and e.args:
            assert reported == [((), e)]


def test_eval_paper_values():
    e3 = parse("(x&y)*(x|y)+(x&~y)*(~x&y)")
    assert evaluate(e3, {"x": 1, "y": 2}) == 2
    assert evaluate(parse("x&y"), {"x": 1, "y": 2}) == 0
    assert evaluate(parse("x^x"), {"x": 12345}) == 0


def test_eval_unbound_variable():
    with pytest.raises(ValueError):
        evaluate(parse("x+y"), {"x": 1})


def test_eval_compiled_matches_interpreter():
    rng = random.Random(17)
    for _ in range(300):
        e = random_expr(rng, rng.randint(0, 5))
        names = ("x", "y", "z")
        fn = make_evaluator(e, names)
        for _ in range(5):
            values = tuple(rng.randrange(M) for _ in names)
            assert fn(values) == evaluate(e, dict(zip(names, values)))


def test_eval_width_semantics():
    assert evaluate(parse("~x", 8), {"x": 1}, 8) == 254
    assert evaluate(parse("x**y", 8), {"x": 2, "y": 9}, 8) == 0
    assert evaluate(parse("255+1", 8), {}, 8) == 0


def test_canonicalize_idempotent_and_sorted():
    rng = random.Random(31)
    for _ in range(300):
        e = random_expr(rng, rng.randint(0, 6))
        c = canonicalize(e)
        assert canonicalize(c) == c
    assert to_string(canonicalize(parse("y+x"))) == "x+y"
    assert to_string(canonicalize(parse("b|a"))) == "a|b"
    assert to_string(canonicalize(parse("x*2"))) == "2*x"
