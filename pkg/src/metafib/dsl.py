"""Text syntax for nested recurrences.

A definition is three clauses separated by semicolons::

    A(n)=A(n-A(n-1))+A(n-A(n-2)); init ceil(n/2); start 2

The rule gives A(n) as a signed sum of self-calls, ``init`` gives the first
terms either as a closed form in ``n`` or as ``list 1,1,...``, and ``start k``
says the rule applies for n > k.  Whatever name the rule uses is normalized
to ``A``.  The constant ``phi`` is the golden ratio and may only occur inside
``floor(x/y)`` or ``ceil(x/y)``, which are evaluated exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterator, Union

from .surd import Surd

SEQ_NAME = "A"
RESERVED = frozenset({"n", "phi", "floor", "ceil", "init", "list", "start"})


# --- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    """The index variable n."""


@dataclass(frozen=True)
class Int:
    value: int


@dataclass(frozen=True)
class Phi:
    """The golden ratio (1 + sqrt 5) / 2."""


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - *
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Round:
    mode: str  # "floor" or "ceil"
    num: "Expr"
    den: "Expr"


@dataclass(frozen=True)
class Call:
    arg: "Expr"


Expr = Union[Var, Int, Phi, BinOp, Round, Call]


@dataclass(frozen=True)
class Summand:
    sign: int  # +1 or -1
    call: Call


@dataclass(frozen=True)
class ClosedForm:
    expr: Expr


InitPattern = Union[ClosedForm, tuple]


@dataclass(frozen=True)
class RecurrenceSpec:
    rhs: tuple[Summand, ...]
    init: InitPattern
    start_after: int
    name: str = SEQ_NAME


@dataclass(frozen=True)
class ValidatedSpec:
    """A checked spec whose initial terms are materialized as integers.

    ``label`` is free-form metadata (e.g. the family name) and does not take
    part in equality.
    """

    rhs: tuple[Summand, ...]
    init: tuple[int, ...]
    start_after: int
    name: str = SEQ_NAME
    label: str = field(default="", compare=False)


# --- errors ----------------------------------------------------------------


class SpecError(ValueError):
    """Raised for any malformed or invalid recurrence definition."""

    def __init__(self, diagnostics: list[str] | str) -> None:
        if isinstance(diagnostics, str):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


class ParseError(SpecError):
    def __init__(self, message: str, position: int, expected: tuple[str, ...] = ()) -> None:
        self.position = position
        self.expected = expected
        text = f"at column {position + 1}: {message}"
        if expected:
            text += f" (expected {' or '.join(expected)})"
        super().__init__(text)


class ArityError(ParseError):
    pass


# --- tokenizer -------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))?")


@dataclass(frozen=True)
class Token:
    kind: str  # INT, NAME, SYM, EOF
    text: str
    pos: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m.lastindex is None:  # only trailing whitespace left
            break
        if m.group(1) is not None:
            tokens.append(Token("INT", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            tokens.append(Token("NAME", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch not in "()=+-*/;,":
                raise ParseError(f"unexpected character {ch!r}", m.start(3))
            tokens.append(Token("SYM", ch, m.start(3)))
        pos = m.end()
    tokens.append(Token("EOF", "", len(source)))
    return tokens


# --- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, source: str) -> None:
        self.tokens = tokenize(source)
        self.i = 0
        self.name: str | None = None

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def _describe(self, tok: Token) -> str:
        return "end of input" if tok.kind == "EOF" else repr(tok.text)

    def fail(self, *expected: str) -> ParseError:
        return ParseError(f"unexpected {self._describe(self.tok)}", self.tok.pos, expected)

    def accept(self, text: str) -> bool:
        if self.tok.kind in ("SYM", "NAME") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.tok
        if not self.accept(text):
            raise self.fail(repr(text))
        return tok

    def expect_int(self) -> int:
        tok = self.tok
        if tok.kind != "INT":
            raise self.fail("integer")
        self.i += 1
        return int(tok.text)

    def spec(self) -> RecurrenceSpec:
        rhs = self.rule()
        self.expect(";")
        self.expect("init")
        init = self.init()
        self.expect(";")
        self.expect("start")
        start = self.expect_int()
        if self.tok.kind != "EOF":
            raise self.fail("end of input")
        return RecurrenceSpec(rhs=rhs, init=init, start_after=start)

    def rule(self) -> tuple[Summand, ...]:
        tok = self.tok
        if tok.kind != "NAME" or tok.text in RESERVED:
            raise self.fail("sequence name")
        self.name = tok.text
        self.i += 1
        self.expect("(")
        self.expect("n")
        self.expect(")")
        self.expect("=")
        sign = 1
        if self.accept("-"):
            sign = -1
        else:
            self.accept("+")
        summands = [Summand(sign, self.signed_term())]
        while True:
            if self.accept("+"):
                summands.append(Summand(1, self.signed_term()))
            elif self.accept("-"):
                summands.append(Summand(-1, self.signed_term()))
            else:
                return tuple(summands)

    def signed_term(self) -> Call:
        tok = self.tok
        if tok.kind != "NAME" or tok.text in RESERVED:
            raise self.fail(f"call {self.name}(...)")
        node = self.atom()
        assert isinstance(node, Call)
        return node

    def init(self) -> InitPattern:
        if self.accept("list"):
            values = [self.expect_int()]
            while self.accept(","):
                values.append(self.expect_int())
            return tuple(values)
        pos = self.tok.pos
        expr = self.expr()
        if _contains(expr, Call):
            raise ParseError("initial conditions may not reference the sequence", pos)
        return ClosedForm(expr)

    def expr(self) -> Expr:
        node = self.term()
        while True:
            if self.accept("+"):
                node = BinOp("+", node, self.term())
            elif self.accept("-"):
                node = BinOp("-", node, self.term())
            else:
                return node

    def term(self) -> Expr:
        node = self.atom()
        while self.accept("*"):
            node = BinOp("*", node, self.atom())
        return node

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "INT":
            self.i += 1
            return Int(int(tok.text))
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind != "NAME":
            raise self.fail("n", "integer", "phi", "floor", "ceil", "(", f"{self.name}(...)")
        self.i += 1
        if tok.text == "n":
            return Var()
        if tok.text == "phi":
            return Phi()
        if tok.text in ("floor", "ceil"):
            self.expect("(")
            num = self.expr()
            if not self.accept("/"):
                raise ArityError(f"{tok.text} takes a quotient x/y", self.tok.pos, ("'/'",))
            den = self.expr()
            self.expect(")")
            return Round(tok.text, num, den)
        if tok.text != self.name:
            raise ParseError(f"unknown identifier {tok.text!r}", tok.pos)
        self.expect("(")
        arg = self.expr()
        if self.tok.text == ",":
            raise ArityError(f"{tok.text}(...) takes exactly one argument", self.tok.pos)
        self.expect(")")
        return Call(arg)


def parse(source: str) -> RecurrenceSpec:
    """Parse and check a definition; raises :class:`SpecError` on any problem."""
    spec = _Parser(source).spec()
    problems = check(spec)
    if problems:
        raise SpecError(problems)
    return spec


# --- traversal helpers -----------------------------------------------------


def _children(node: Expr) -> tuple[Expr, ...]:
    if isinstance(node, BinOp):
        return (node.left, node.right)
    if isinstance(node, Round):
        return (node.num, node.den)
    if isinstance(node, Call):
        return (node.arg,)
    return ()


def walk(node: Expr) -> Iterator[Expr]:
    yield node
    for child in _children(node):
        yield from walk(child)


def _contains(node: Expr, kind: type) -> bool:
    return any(isinstance(x, kind) for x in walk(node))


def _bare_phi(node: Expr) -> bool:
    """True if phi occurs outside every floor/ceil."""
    if isinstance(node, Phi):
        return True
    if isinstance(node, Round):
        return False
    return any(_bare_phi(c) for c in _children(node))


def _affine(node: Expr) -> tuple[int, int] | None:
    """(coefficient of n, constant) when ``node`` is affine in n, else None."""
    if isinstance(node, Var):
        return (1, 0)
    if isinstance(node, Int):
        return (0, node.value)
    if isinstance(node, BinOp):
        left, right = _affine(node.left), _affine(node.right)
        if left is None or right is None:
            return None
        if node.op == "+":
            return (left[0] + right[0], left[1] + right[1])
        if node.op == "-":
            return (left[0] - right[0], left[1] - right[1])
        if left[0] and right[0]:
            return None
        return (left[0] * right[1] + right[0] * left[1], left[1] * right[1])
    return None


def literal_offsets(spec: RecurrenceSpec | ValidatedSpec) -> list[int]:
    """Backward offsets c of every self-call argument of the form n - c."""
    offsets = []
    for s in spec.rhs:
        for node in walk(s.call):
            if isinstance(node, Call):
                form = _affine(node.arg)
                if form is not None and form[0] == 1:
                    offsets.append(-form[1])
    return offsets


# --- checking --------------------------------------------------------------


def evaluate(node: Expr, n: int, lookup: Callable[[int], int] | None = None) -> int | Surd:
    """Exact value of ``node`` at index ``n``.

    Integer-valued subtrees stay Python ints; anything touching phi becomes a
    :class:`Surd` until a floor/ceil brings it back.
    """
    if isinstance(node, Var):
        return n
    if isinstance(node, Int):
        return node.value
    if isinstance(node, Phi):
        return Surd.phi()
    if isinstance(node, BinOp):
        a = evaluate(node.left, n, lookup)
        b = evaluate(node.right, n, lookup)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        return a * b
    if isinstance(node, Round):
        num = evaluate(node.num, n, lookup)
        den = evaluate(node.den, n, lookup)
        if isinstance(num, int) and isinstance(den, int):
            if den == 0:
                raise ZeroDivisionError("division by zero")
            return num // den if node.mode == "floor" else -(-num // den)
        q = Surd.lift(num) / den
        return q.__floor__() if node.mode == "floor" else q.__ceil__()
    if isinstance(node, Call):
        if lookup is None:
            raise SpecError("self-call in a context without sequence values")
        arg = evaluate(node.arg, n, lookup)
        return lookup(arg)
    raise TypeError(f"not an expression node: {node!r}")


def check(spec: RecurrenceSpec) -> list[str]:
    """Return every diagnostic for ``spec``; an empty list means it is valid."""
    problems: list[str] = []
    if not spec.rhs:
        problems.append("rule needs at least one summand")
    if spec.start_after < 1:
        problems.append(f"start must be a positive integer, got {spec.start_after}")
    for s in spec.rhs:
        if s.sign not in (1, -1):
            problems.append(f"bad summand sign {s.sign}")
        if _bare_phi(s.call):
            problems.append("phi may only appear inside floor(x/y) or ceil(x/y)")
    for c in literal_offsets(spec):
        if c <= 0:
            problems.append(f"argument n{-c:+d} refers to a term not yet defined")
        elif c > spec.start_after:
            problems.append(
                f"start {spec.start_after} is too small for literal offset n-{c}"
            )
    if isinstance(spec.init, ClosedForm):
        if _contains(spec.init.expr, Call):
            problems.append("initial conditions may not reference the sequence")
        elif _bare_phi(spec.init.expr):
            problems.append("phi may only appear inside floor(x/y) or ceil(x/y)")
        elif spec.start_after >= 1:
            for n in range(1, spec.start_after + 1):
                try:
                    v = evaluate(spec.init.expr, n)
                except ZeroDivisionError:
                    problems.append(f"initial condition divides by zero at n={n}")
                    break
                if not isinstance(v, int):
                    problems.append(f"initial condition is not an integer at n={n}")
                    break
                if v < 1:
                    problems.append(f"initial condition {v} at n={n} is not positive")
                    break
    else:
        values = tuple(spec.init)
        if len(values) != spec.start_after:
            problems.append(
                f"init list has {len(values)} values but start is {spec.start_after}"
            )
        bad = [v for v in values if not isinstance(v, int) or v < 1]
        if bad:
            problems.append(f"init values must be positive integers, got {bad[0]!r}")
    return problems


def materialize(spec: RecurrenceSpec) -> tuple[int, ...]:
    if isinstance(spec.init, ClosedForm):
        return tuple(int(evaluate(spec.init.expr, n)) for n in range(1, spec.start_after + 1))
    return tuple(spec.init)


def validate(spec: RecurrenceSpec, label: str = "") -> ValidatedSpec:
    problems = check(spec)
    if problems:
        raise SpecError(problems)
    return ValidatedSpec(
        rhs=spec.rhs, init=materialize(spec), start_after=spec.start_after, label=label
    )


def load(source: str, label: str = "") -> ValidatedSpec:
    """Parse and validate in one go."""
    return validate(parse(source), label=label)


# --- printing --------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2}


def format_expr(node: Expr, name: str = SEQ_NAME) -> str:
    if isinstance(node, Var):
        return "n"
    if isinstance(node, Int):
        return str(node.value)
    if isinstance(node, Phi):
        return "phi"
    if isinstance(node, Round):
        return f"{node.mode}({format_expr(node.num, name)}/{format_expr(node.den, name)})"
    if isinstance(node, Call):
        return f"{name}({format_expr(node.arg, name)})"
    prec = _PREC[node.op]
    left = format_expr(node.left, name)
    right = format_expr(node.right, name)
    if isinstance(node.left, BinOp) and _PREC[node.left.op] < prec:
        left = f"({left})"
    if isinstance(node.right, BinOp) and _PREC[node.right.op] <= prec:
        right = f"({right})"
    return f"{left}{node.op}{right}"


def pretty(spec: RecurrenceSpec | ValidatedSpec) -> str:
    """Canonical one-line form.  Closed-form initial conditions are printed as is
    for a raw spec and as the materialized list for a validated one."""
    parts = []
    for idx, s in enumerate(spec.rhs):
        text = format_expr(s.call, spec.name)
        if s.sign < 0:
            parts.append("-" + text)
        else:
            parts.append(("+" if idx else "") + text)
    rule = f"{spec.name}(n)={''.join(parts)}"
    if isinstance(spec.init, ClosedForm):
        init = format_expr(spec.init.expr, spec.name)
    else:
        init = "list " + ",".join(str(v) for v in spec.init)
    return f"{rule}; init {init}; start {spec.start_after}"
