"""Expression ASTs over n-bit words: grammar, parser, printer, metrics.

Constants are stored as residues in [0, 2**width); the printer renders a
residue c > 2**(width-1) as -(2**width - c) by default (signed style).
Expressions are immutable and hashable, so they can be shared freely.
"""

from __future__ import annotations

import enum
import functools
import re
from dataclasses import dataclass


class Op(enum.Enum):
    CONST = "const"
    VAR = "var"
    NEG = "~"
    POW = "**"
    MUL = "*"
    SUM = "+"
    AND = "&"
    XOR = "^"
    OR = "|"


ARITH_OPS = frozenset({Op.SUM, Op.MUL, Op.POW})
BITWISE_OPS = frozenset({Op.NEG, Op.AND, Op.XOR, Op.OR})
NARY_OPS = frozenset({Op.SUM, Op.MUL, Op.AND, Op.XOR, Op.OR})

# Operand order inside commutative nodes, used by sort_key(): variables first,
# then bitwise subtrees, then arithmetic ones.  Constants are placed per node
# kind (first in products and bitwise operations, last in sums).
_KIND_RANK = {
    Op.VAR: 0,
    Op.NEG: 1,
    Op.AND: 2,
    Op.XOR: 3,
    Op.OR: 4,
    Op.POW: 5,
    Op.MUL: 6,
    Op.SUM: 7,
    Op.CONST: 8,
}


@dataclass(frozen=True)
class Expr:
    op: Op
    width: int
    value: int = 0
    name: str = ""
    args: tuple["Expr", ...] = ()

    def __hash__(self) -> int:
        # Structural hash, memoized: trees are immutable and deeply shared.
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.op, self.width, self.value, self.name, self.args))
            object.__setattr__(self, "_hash", h)
        return h

    def __str__(self) -> str:
        return to_string(self)

    def __repr__(self) -> str:
        return f"Expr<{to_string(self)}>"

    @property
    def modulus(self) -> int:
        return 1 << self.width

    def is_const(self, value: int | None = None) -> bool:
        if self.op is not Op.CONST:
            return False
        return value is None or self.value == value % self.modulus


class ParseError(ValueError):
    """Syntax error with the offending position in the source string."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


# ---------------------------------------------------------------------------
# Smart constructors.  These establish the structural invariants: n-ary nodes
# are flattened, hold at least two operands and at most one constant, and
# trivial powers/negations are folded away.


def _check_width(width: int) -> None:
    if width < 1:
        raise ValueError(f"bit width must be positive, got {width}")


def const(value: int, width: int) -> Expr:
    _check_width(width)
    return Expr(Op.CONST, width, value=value % (1 << width))


def var(name: str, width: int) -> Expr:
    _check_width(width)
    return Expr(Op.VAR, width, name=name)


def _common_width(args: tuple[Expr, ...]) -> int:
    width = args[0].width
    for a in args[1:]:
        if a.width != width:
            raise ValueError(f"mixed widths {width} and {a.width}")
    return width


def neg(x: Expr) -> Expr:
    if x.op is Op.NEG:
        return x.args[0]
    if x.op is Op.CONST:
        return const(~x.value, x.width)
    return Expr(Op.NEG, x.width, args=(x,))


def _flatten(op: Op, operands: tuple[Expr, ...]) -> list[Expr]:
    flat: list[Expr] = []
    for a in operands:
        if a.op is op:
            flat.extend(a.args)
        else:
            flat.append(a)
    return flat


def add(*terms: Expr) -> Expr:
    width = _common_width(terms)
    modulus = 1 << width
    rest: list[Expr] = []
    acc = 0
    for t in _flatten(Op.SUM, terms):
        if t.op is Op.CONST:
            acc = (acc + t.value) % modulus
        else:
            rest.append(t)
    if not rest:
        return const(acc, width)
    if acc:
        rest.append(const(acc, width))
    if len(rest) == 1:
        return rest[0]
    return Expr(Op.SUM, width, args=tuple(rest))


def mul(*factors: Expr) -> Expr:
    width = _common_width(factors)
    modulus = 1 << width
    rest: list[Expr] = []
    acc = 1
    for f in _flatten(Op.MUL, factors):
        if f.op is Op.CONST:
            acc = (acc * f.value) % modulus
        else:
            rest.append(f)
    if acc == 0 or not rest:
        return const(acc, width)
    if acc != 1:
        rest.insert(0, const(acc, width))
    if len(rest) == 1:
        return rest[0]
    return Expr(Op.MUL, width, args=tuple(rest))


def sub(a: Expr, b: Expr) -> Expr:
    return add(a, mul(const(-1, b.width), b))


def power(base: Expr, exponent: Expr) -> Expr:
    width = _common_width((base, exponent))
    if exponent.is_const(0):
        return const(1, width)
    if exponent.is_const(1):
        return base
    if base.op is Op.CONST and exponent.op is Op.CONST:
        return const(pow(base.value, exponent.value, 1 << width), width)
    if base.is_const(1):
        return base
    return Expr(Op.POW, width, args=(base, exponent))


def _bitwise(op: Op, operands: tuple[Expr, ...], unit: int, absorb: int) -> Expr:
    width = _common_width(operands)
    modulus = 1 << width
    unit %= modulus
    absorb %= modulus
    rest: list[Expr] = []
    acc = unit
    for a in _flatten(op, operands):
        if a.op is Op.CONST:
            if op is Op.AND:
                acc &= a.value
            elif op is Op.OR:
                acc |= a.value
            else:
                acc ^= a.value
        else:
            rest.append(a)
    if acc == absorb and op is not Op.XOR:
        return const(absorb, width)
    if not rest:
        return const(acc, width)
    if acc != unit:
        rest.insert(0, const(acc, width))
    if len(rest) == 1:
        return rest[0]
    return Expr(op, width, args=tuple(rest))


def bit_and(*operands: Expr) -> Expr:
    return _bitwise(Op.AND, operands, unit=-1, absorb=0)


def bit_or(*operands: Expr) -> Expr:
    return _bitwise(Op.OR, operands, unit=0, absorb=-1)


def bit_xor(*operands: Expr) -> Expr:
    # XOR has no absorbing element; the unused argument keeps _bitwise uniform.
    return _bitwise(Op.XOR, operands, unit=0, absorb=0)


_BUILDERS = {Op.SUM: add, Op.MUL: mul, Op.AND: bit_and, Op.XOR: bit_xor, Op.OR: bit_or}


def rebuild(op: Op, args: tuple[Expr, ...]) -> Expr:
    """Reconstruct a node of the given kind through the smart constructors."""
    if op is Op.NEG:
        return neg(args[0])
    if op is Op.POW:
        return power(args[0], args[1])
    return _BUILDERS[op](*args)


@functools.lru_cache(maxsize=1 << 15)
def _variables_cached(e: Expr) -> tuple[str, ...]:
    if e.op is Op.VAR:
        return (e.name,)
    seen: set[str] = set()
    for a in e.args:
        seen.update(_variables_cached(a))
    return tuple(sorted(seen))


def variables_of(e: Expr) -> list[str]:
    """Variable names occurring in e, sorted."""
    return list(_variables_cached(e))


# ---------------------------------------------------------------------------
# Parser.  Precedence, loosest to tightest: | ^ & << (+,-) * (~,unary -) **.
# A left shift a << b is rewritten as a * 2**b at parse time.

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>0[xX][0-9a-fA-F]+|\d+)|(?P<name>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<op>\*\*|<<|[~*+\-&^|()]))"
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if not m or m.end() == pos:
            if source[pos:].strip():
                raise ParseError(f"unexpected character {source[pos:].strip()[0]!r}", pos)
            break
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, source: str, width: int):
        self.tokens = _tokenize(source)
        self.width = width
        self.idx = 0
        self.end = len(source)

    def peek(self) -> tuple[str, str, int]:
        if self.idx < len(self.tokens):
            return self.tokens[self.idx]
        return ("end", "", self.end)

    def take(self) -> tuple[str, str, int]:
        tok = self.peek()
        self.idx += 1
        return tok

    def expect_op(self, text: str) -> None:
        kind, val, pos = self.take()
        if kind != "op" or val != text:
            raise ParseError(f"expected {text!r}", pos)

    def at_op(self, *texts: str) -> bool:
        kind, val, _ = self.peek()
        return kind == "op" and val in texts

    def parse(self) -> Expr:
        if not self.tokens:
            raise ParseError("empty input", 0)
        e = self.or_expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"trailing input {val!r}", pos)
        return e

    def or_expr(self) -> Expr:
        operands = [self.xor_expr()]
        while self.at_op("|"):
            self.take()
            operands.append(self.xor_expr())
        return bit_or(*operands) if len(operands) > 1 else operands[0]

    def xor_expr(self) -> Expr:
        operands = [self.and_expr()]
        while self.at_op("^"):
            self.take()
            operands.append(self.and_expr())
        return bit_xor(*operands) if len(operands) > 1 else operands[0]

    def and_expr(self) -> Expr:
        operands = [self.shift_expr()]
        while self.at_op("&"):
            self.take()
            operands.append(self.shift_expr())
        return bit_and(*operands) if len(operands) > 1 else operands[0]

    def shift_expr(self) -> Expr:
        e = self.sum_expr()
        while self.at_op("<<"):
            self.take()
            amount = self.sum_expr()
            e = mul(e, power(const(2, self.width), amount))
        return e

    def sum_expr(self) -> Expr:
        terms = [self.term()]
        while self.at_op("+", "-"):
            _, op, _ = self.take()
            t = self.term()
            terms.append(t if op == "+" else mul(const(-1, self.width), t))
        return add(*terms) if len(terms) > 1 else terms[0]

    def term(self) -> Expr:
        factors = [self.factor()]
        while self.at_op("*"):
            self.take()
            factors.append(self.factor())
        return mul(*factors) if len(factors) > 1 else factors[0]

    def factor(self) -> Expr:
        if self.at_op("~"):
            self.take()
            return neg(self.factor())
        if self.at_op("-"):
            self.take()
            return mul(const(-1, self.width), self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.at_op("**"):
            self.take()
            return power(base, self.factor())
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            return const(int(val, 0), self.width)
        if kind == "name":
            return var(val, self.width)
        if kind == "op" and val == "(":
            e = self.or_expr()
            self.expect_op(")")
            return e
        raise ParseError(f"expected a term, got {val!r}" if val else "unexpected end of input", pos)


def parse(source: str, width: int = 64) -> Expr:
    """Parse an MBA over width-bit words; literals are reduced mod 2**width."""
    _check_width(width)
    return _Parser(source, width).parse()


# ---------------------------------------------------------------------------
# Printer.  Emits operands in stored order with minimal parentheses; parsing
# the result reproduces the AST exactly.

_LEVEL = {Op.OR: 1, Op.XOR: 2, Op.AND: 3, Op.SUM: 4, Op.MUL: 5, Op.NEG: 6, Op.POW: 7}
_ATOM_LEVEL = 8


def signed_value(e: Expr) -> int:
    """Constant as a signed integer: residues above 2**(w-1) print negative."""
    half = 1 << (e.width - 1)
    return e.value - (e.modulus if e.value > half else 0)


def _wrap(text: str, level: int, needed: int) -> str:
    return f"({text})" if level < needed else text


def _term_string(t: Expr, signed: bool) -> str:
    # Renders a sum operand, using a leading '-' for negative coefficients.
    if t.op is Op.CONST and signed:
        return str(signed_value(t))
    if t.op is Op.MUL and t.args[0].op is Op.CONST and signed:
        c = signed_value(t.args[0])
        if c < 0:
            rest = mul(*t.args[1:]) if c == -1 else mul(const(-c, t.width), *t.args[1:])
            body, level = _render(rest, signed)
            return "-" + _wrap(body, level, _LEVEL[Op.MUL])
    body, level = _render(t, signed)
    return _wrap(body, level, _LEVEL[Op.SUM] + 1)


def _render(e: Expr, signed: bool) -> tuple[str, int]:
    if e.op is Op.CONST:
        v = signed_value(e) if signed else e.value
        return str(v), _ATOM_LEVEL if v >= 0 else _LEVEL[Op.NEG]
    if e.op is Op.VAR:
        return e.name, _ATOM_LEVEL
    if e.op is Op.NEG:
        body, level = _render(e.args[0], signed)
        return "~" + _wrap(body, level, _LEVEL[Op.POW]), _LEVEL[Op.NEG]
    if e.op is Op.POW:
        base, blevel = _render(e.args[0], signed)
        exp, elevel = _render(e.args[1], signed)
        text = _wrap(base, blevel, _ATOM_LEVEL) + "**" + _wrap(exp, elevel, _LEVEL[Op.NEG])
        return text, _LEVEL[Op.POW]
    if e.op is Op.SUM:
        parts = [_term_string(t, signed) for t in e.args]
        text = parts[0]
        for p in parts[1:]:
            text += p if p.startswith("-") else "+" + p
        return text, _LEVEL[Op.SUM]
    level = _LEVEL[e.op]
    parts = []
    for i, a in enumerate(e.args):
        if i == 0 and e.op is Op.MUL and a.op is Op.CONST and signed:
            c = signed_value(a)
            if c < 0:
                # Fold the sign into a leading unary minus: -2*x, -x.
                prefix = "-" if c == -1 else f"-{-c}*"
                rest = [_wrap(*_render(x, signed), level + 1) for x in e.args[1:]]
                return prefix + "*".join(rest), _LEVEL[Op.NEG]
        body, alevel = _render(a, signed)
        parts.append(_wrap(body, alevel, level + 1))
    return e.op.value.join(parts), level


def to_string(e: Expr, signed: bool = True) -> str:
    """Infix form; parse(to_string(e), e.width) is structurally equal to e."""
    return _render(e, signed)[0]


# ---------------------------------------------------------------------------
# Evaluation under mod-2**width semantics.


def evaluate(e: Expr, assignment: dict[str, int], width: int | None = None) -> int:
    """Evaluate with all variables bound; ~v is 2**w-1-v, ** is modular pow."""
    w = e.width if width is None else width
    modulus = 1 << w
    mask = modulus - 1

    def ev(node: Expr) -> int:
        if node.op is Op.CONST:
            return node.value & mask
        if node.op is Op.VAR:
            try:
                return assignment[node.name] & mask
            except KeyError:
                raise ValueError(f"unbound variable {node.name!r}") from None
        if node.op is Op.NEG:
            return ev(node.args[0]) ^ mask
        if node.op is Op.POW:
            return pow(ev(node.args[0]), ev(node.args[1]), modulus)
        vals = [ev(a) for a in node.args]
        acc = vals[0]
        for v in vals[1:]:
            if node.op is Op.SUM:
                acc = (acc + v) & mask
            elif node.op is Op.MUL:
                acc = (acc * v) & mask
            elif node.op is Op.AND:
                acc &= v
            elif node.op is Op.XOR:
                acc ^= v
            else:
                acc |= v
        return acc

    return ev(e)


def make_evaluator(e: Expr, variables: list[str] | tuple[str, ...], width: int | None = None):
    """Compile e into a callable on value tuples (positional per variables).

    The compiled form is checked against evaluate() in the test suite; reuse
    it whenever one expression is evaluated on many assignments.
    """
    return _make_evaluator_cached(e, tuple(variables), e.width if width is None else width)


@functools.lru_cache(maxsize=1 << 13)
def _make_evaluator_cached(e: Expr, variables: tuple[str, ...], width: int):
    w = width
    modulus = 1 << w
    mask = modulus - 1
    index = {name: i for i, name in enumerate(variables)}

    def code(node: Expr) -> str:
        if node.op is Op.CONST:
            return repr(node.value & mask)
        if node.op is Op.VAR:
            if node.name not in index:
                raise ValueError(f"unbound variable {node.name!r}")
            return f"v[{index[node.name]}]"
        if node.op is Op.NEG:
            return f"({code(node.args[0])}^{mask})"
        if node.op is Op.POW:
            return f"pow({code(node.args[0])},{code(node.args[1])},{modulus})"
        joined = node.op.value.join(code(a) for a in node.args)
        if node.op in (Op.SUM, Op.MUL):
            return f"(({joined})&{mask})"
        return f"({joined})"

    fn = eval(f"lambda v: {code(e)}", {"pow": pow})  # noqa: S307 - generated source
    fn.mask = mask
    return fn


# ---------------------------------------------------------------------------
# Complexity metrics.


class Metric(enum.Enum):
    NODE_COUNT = "nodes"
    MBA_ALTERNATION = "alternation"
    TERM_COUNT = "terms"
    STRING_LENGTH = "length"


#: Default lexicographic comparison order for candidate solutions.
DEFAULT_METRIC_ORDER: tuple[Metric, ...] = (
    Metric.NODE_COUNT,
    Metric.MBA_ALTERNATION,
    Metric.TERM_COUNT,
    Metric.STRING_LENGTH,
)


@functools.lru_cache(maxsize=1 << 16)
def node_count(e: Expr) -> int:
    return 1 + sum(node_count(a) for a in e.args)


def term_count(e: Expr) -> int:
    return len(e.args) if e.op is Op.SUM else 1


def alternation(e: Expr) -> int:
    """Edges joining an arithmetic operator node and a bitwise operator node."""
    total = 0
    for a in e.args:
        if (e.op in ARITH_OPS and a.op in BITWISE_OPS) or (
            e.op in BITWISE_OPS and a.op in ARITH_OPS
        ):
            total += 1
        total += alternation(a)
    return total


def metric_value(e: Expr, metric: Metric) -> int:
    if metric is Metric.NODE_COUNT:
        return node_count(e)
    if metric is Metric.MBA_ALTERNATION:
        return alternation(e)
    if metric is Metric.TERM_COUNT:
        return term_count(e)
    return len(to_string(e))


@functools.lru_cache(maxsize=1 << 15)
def metric_key(e: Expr, order: tuple[Metric, ...] = DEFAULT_METRIC_ORDER) -> tuple[int, ...]:
    """Lexicographic complexity key: lower compares as simpler."""
    return tuple(metric_value(e, m) for m in order)


# ---------------------------------------------------------------------------
# Canonical operand ordering (used by pipeline.polish and for tie-breaking).


@functools.lru_cache(maxsize=1 << 16)
def sort_key(e: Expr):
    if e.op is Op.CONST:
        return (_KIND_RANK[Op.CONST], e.value)
    if e.op is Op.VAR:
        return (_KIND_RANK[Op.VAR], e.name)
    if e.op is Op.NEG:
        # A negated subtree sorts right after the subtree itself, so literal
        # orderings like x&~y and ~x&y both follow variable-name order.
        return sort_key(e.args[0]) + ("~",)
    return (_KIND_RANK[e.op], len(e.args), tuple(sort_key(a) for a in e.args))


@functools.lru_cache(maxsize=1 << 16)
def canonicalize(e: Expr) -> Expr:
    """Sort commutative operands into the canonical total order (idempotent).

    Constants stay last in sums and first in products and bitwise operations,
    matching the printing convention.
    """
    if not e.args:
        return e
    args = tuple(canonicalize(a) for a in e.args)
    if e.op in (Op.NEG, Op.POW):
        return rebuild(e.op, args)
    consts = [a for a in args if a.op is Op.CONST]
    rest = sorted((a for a in args if a.op is not Op.CONST), key=sort_key)
    ordered = rest + consts if e.op is Op.SUM else consts + rest
    return rebuild(e.op, tuple(ordered))


# ---------------------------------------------------------------------------
# Linear / bitwise / nonlinear classification.


class Classification(enum.Enum):
    BITWISE = "bitwise"
    LINEAR = "linear"
    NONLINEAR = "nonlinear"


@functools.lru_cache(maxsize=1 << 16)
def classify(e: Expr) -> Classification:
    """Inductive classification; stable under operand permutation.

    Constants count as bitwise only when they are 0 or all ones.  A product
    is linear exactly when it is a constant times a linear or bitwise factor;
    powers are always nonlinear.
    """
    if e.op is Op.VAR:
        return Classification.BITWISE
    if e.op is Op.CONST:
        if e.value == 0 or e.value == e.modulus - 1:
            return Classification.BITWISE
        return Classification.LINEAR
    if e.op in BITWISE_OPS:
        if all(classify(a) is Classification.BITWISE for a in e.args):
            return Classification.BITWISE
        return Classification.NONLINEAR
    if e.op is Op.SUM:
        if any(classify(a) is Classification.NONLINEAR for a in e.args):
            return Classification.NONLINEAR
        return Classification.LINEAR
    if e.op is Op.MUL:
        if len(e.args) == 2 and e.args[0].op is Op.CONST:
            if classify(e.args[1]) is not Classification.NONLINEAR:
                return Classification.LINEAR
        return Classification.NONLINEAR
    return Classification.NONLINEAR


#: Address of a subtree: child indices, optionally ending in a sum-term group.
Path = tuple


def collect_linear_subtrees(e: Expr) -> list[tuple[Path, Expr]]:
    """Maximal subtrees classified Linear, with replacement-ready paths.

    Inside a nonlinear sum the non-nonlinear terms are grouped into a single
    subtree addressed as (..., ("terms", indices)).  Bare leaves are omitted.
    """
    out: list[tuple[Path, Expr]] = []

    def walk(node: Expr, path: tuple) -> None:
        cls = classify(node)
        if cls is Classification.LINEAR:
            if node.args:
                out.append((path, node))
            return
        if cls is Classification.BITWISE:
            return
        if node.op is Op.SUM:
            simple = [i for i, t in enumerate(node.args)
                      if classify(t) is not Classification.NONLINEAR]
            if len(simple) > 1:
                grouped = add(*(node.args[i] for i in simple))
                out.append((path + (("terms", tuple(simple)),), grouped))
            elif len(simple) == 1:
                t = node.args[simple[0]]
                if classify(t) is Classification.LINEAR and t.args:
                    out.append((path + (simple[0],), t))
            for i, t in enumerate(node.args):
                if classify(t) is Classification.NONLINEAR:
                    walk(t, path + (i,))
            return
        for i, a in enumerate(node.args):
            walk(a, path + (i,))

    walk(e, ())
    return out


def replace_at(e: Expr, path: Path, replacement: Expr) -> Expr:
    """Rebuild e with the subtree at path swapped for replacement."""
    if not path:
        return replacement
    step = path[0]
    if isinstance(step, tuple) and step and step[0] == "terms":
        indices = set(step[1])
        kept = [t for i, t in enumerate(e.args) if i not in indices]
        return add(replacement, *kept) if kept else replacement
    args = list(e.args)
    args[step] = replace_at(args[step], path[1:], replacement)
    return rebuild(e.op, tuple(args))
