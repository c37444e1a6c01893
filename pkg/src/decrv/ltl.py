"""LTL abstract syntax, parser, and desugaring.

The surface syntax accepts bounded windows ``F<=n`` / ``G<=n`` and
implication; :func:`desugar` lowers all three so that downstream code only
sees the classic connectives plus ``X``/``U``/``G``/``F``.

Propositions and monitor references share one namespace here; the registry
decides which identifiers name monitors.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Formula:
    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Const(Formula):
    value: bool


@dataclass(frozen=True)
class Prop(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    operand: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Globally(Formula):
    operand: Formula


@dataclass(frozen=True)
class Finally(Formula):
    operand: Formula


@dataclass(frozen=True)
class FinallyWithin(Formula):
    bound: int
    operand: Formula

    def __post_init__(self) -> None:
        if self.bound < 0:
            raise ValueError(f"negative bound {self.bound}")


@dataclass(frozen=True)
class GloballyWithin(Formula):
    bound: int
    operand: Formula

    def __post_init__(self) -> None:
        if self.bound < 0:
            raise ValueError(f"negative bound {self.bound}")


TRUE = Const(True)
FALSE = Const(False)


class ParseError(ValueError):
    """Syntax error with source position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


_PUNCT = {
    "(": "LPAREN",
    ")": "RPAREN",
    "!": "NOT",
    "&": "AND",
    "|": "OR",
}


def _tokenize(text: str) -> list[tuple[str, str, int, int]]:
    tokens = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            col += 1
            i += 1
            continue
        if c in _PUNCT:
            tokens.append((_PUNCT[c], c, line, col))
            i += 1
            col += 1
            continue
        if text.startswith("->", i):
            tokens.append(("ARROW", "->", line, col))
            i += 2
            col += 2
            continue
        if text.startswith("<=", i):
            tokens.append(("LE", "<=", line, col))
            i += 2
            col += 2
            continue
        if c.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(("INT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("IDENT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    tokens.append(("EOF", "", line, col))
    return tokens


class _Parser:
    """Recursive descent; precedence ! > unary temporal > U > & > | > ->."""

    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> tuple[str, str, int, int]:
        return self.tokens[self.pos]

    def advance(self) -> tuple[str, str, int, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int, int]:
        tok = self.peek()
        if tok[0] != kind:
            raise ParseError(f"expected {kind}, found {tok[1]!r}", tok[2], tok[3])
        return self.advance()

    def parse(self) -> Formula:
        f = self.implication()
        tok = self.peek()
        if tok[0] != "EOF":
            raise ParseError(f"unexpected token {tok[1]!r}", tok[2], tok[3])
        return f

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek()[0] == "ARROW":
            self.advance()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek()[0] == "OR":
            self.advance()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.until()
        while self.peek()[0] == "AND":
            self.advance()
            f = And(f, self.until())
        return f

    def until(self) -> Formula:
        left = self.unary()
        tok = self.peek()
        if tok[0] == "IDENT" and tok[1] == "U":
            self.advance()
            return Until(left, self.until())
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok[0] == "NOT":
            self.advance()
            return Not(self.unary())
        if tok[0] == "IDENT" and tok[1] in ("X", "G", "F"):
            self.advance()
            if self.peek()[0] == "LE":
                if tok[1] == "X":
                    raise ParseError("X takes no bound", tok[2], tok[3])
                self.advance()
                bound = self.bound()
                sub = self.unary()
                return (FinallyWithin if tok[1] == "F" else GloballyWithin)(bound, sub)
            sub = self.unary()
            if tok[1] == "X":
                return Next(sub)
            if tok[1] == "G":
                return Globally(sub)
            return Finally(sub)
        return self.atom()

    def bound(self) -> int:
        tok = self.peek()
        if tok[0] != "INT":
            raise ParseError("expected a non-negative bound", tok[2], tok[3])
        self.advance()
        return int(tok[1])

    def atom(self) -> Formula:
        tok = self.advance()
        if tok[0] == "LPAREN":
            f = self.implication()
            self.expect("RPAREN")
            return f
        if tok[0] == "IDENT":
            if tok[1] == "true":
                return TRUE
            if tok[1] == "false":
                return FALSE
            if tok[1] in ("X", "G", "F", "U"):
                raise ParseError(f"operator {tok[1]} needs an operand", tok[2], tok[3])
            return Prop(tok[1])
        raise ParseError(f"unexpected token {tok[1]!r}", tok[2], tok[3])


def parse(text: str) -> Formula:
    """Parse a formula string, raising :class:`ParseError` with position."""
    return _Parser(text).parse()


def desugar(f: Formula) -> Formula:
    """Lower F<=n, G<=n and -> to the core connectives."""
    match f:
        case Const() | Prop():
            return f
        case Not(a):
            return Not(desugar(a))
        case And(a, b):
            return And(desugar(a), desugar(b))
        case Or(a, b):
            return Or(desugar(a), desugar(b))
        case Implies(a, b):
            return Or(Not(desugar(a)), desugar(b))
        case Next(a):
            return Next(desugar(a))
        case Until(a, b):
            return Until(desugar(a), desugar(b))
        case Globally(a):
            return Globally(desugar(a))
        case Finally(a):
            return Finally(desugar(a))
        case FinallyWithin(bound, a):
            return _window(Or, bound, desugar(a))
        case GloballyWithin(bound, a):
            return _window(And, bound, desugar(a))
    raise TypeError(f"unknown node {f!r}")


def _window(op, bound: int, sub: Formula) -> Formula:
    terms = []
    for i in range(bound + 1):
        t = sub
        for _ in range(i):
            t = Next(t)
        terms.append(t)
    result = terms[-1]
    for t in reversed(terms[:-1]):
        result = op(t, result)
    return result


def propositions(f: Formula) -> frozenset[str]:
    """All proposition / monitor-reference names occurring in the formula."""
    match f:
        case Const():
            return frozenset()
        case Prop(name):
            return frozenset((name,))
        case Not(a) | Next(a) | Globally(a) | Finally(a):
            return propositions(a)
        case FinallyWithin(_, a) | GloballyWithin(_, a):
            return propositions(a)
        case And(a, b) | Or(a, b) | Implies(a, b) | Until(a, b):
            return propositions(a) | propositions(b)
    raise TypeError(f"unknown node {f!r}")


def substitute(f: Formula, mapping: dict[str, Formula]) -> Formula:
    """Replace named leaves by formulas (used to inline monitor references)."""
    match f:
        case Const():
            return f
        case Prop(name):
            return mapping.get(name, f)
        case Not(a):
            return Not(substitute(a, mapping))
        case Next(a):
            return Next(substitute(a, mapping))
        case Globally(a):
            return Globally(substitute(a, mapping))
        case Finally(a):
            return Finally(substitute(a, mapping))
        case FinallyWithin(bound, a):
            return FinallyWithin(bound, substitute(a, mapping))
        case GloballyWithin(bound, a):
            return GloballyWithin(bound, substitute(a, mapping))
        case And(a, b):
            return And(substitute(a, mapping), substitute(b, mapping))
        case Or(a, b):
            return Or(substitute(a, mapping), substitute(b, mapping))
        case Implies(a, b):
            return Implies(substitute(a, mapping), substitute(b, mapping))
        case Until(a, b):
            return Until(substitute(a, mapping), substitute(b, mapping))
    raise TypeError(f"unknown node {f!r}")


def bounded_horizon(f: Formula) -> int | None:
    """Max X-nesting depth after desugaring, or None if G/F/U make it unbounded."""
    match f:
        case Const() | Prop():
            return 0
        case Not(a):
            return bounded_horizon(a)
        case Next(a):
            h = bounded_horizon(a)
            return None if h is None else h + 1
        case FinallyWithin(bound, a) | GloballyWithin(bound, a):
            h = bounded_horizon(a)
            return None if h is None else h + bound
        case And(a, b) | Or(a, b) | Implies(a, b):
            ha, hb = bounded_horizon(a), bounded_horizon(b)
            return None if ha is None or hb is None else max(ha, hb)
        case Until() | Globally() | Finally():
            return None
    raise TypeError(f"unknown node {f!r}")


def render(f: Formula) -> str:
    """Re-render as parseable concrete syntax."""

    def go(g: Formula, parent: int) -> str:
        # precedence levels: -> 0, | 1, & 2, U 3, unary 4, atom 5
        match g:
            case Const(v):
                return "true" if v else "false"
            case Prop(name):
                return name
            case Not(a):
                return "!" + go(a, 4)
            case Next(a):
                return "X " + go(a, 4)
            case Globally(a):
                return "G " + go(a, 4)
            case Finally(a):
                return "F " + go(a, 4)
            case FinallyWithin(b, a):
                return f"F<={b} " + go(a, 4)
            case GloballyWithin(b, a):
                return f"G<={b} " + go(a, 4)
            case Until(a, b):
                s = go(a, 4) + " U " + go(b, 3)
                return f"({s})" if parent > 3 else s
            case And(a, b):
                s = go(a, 3) + " & " + go(b, 3)
                return f"({s})" if parent > 2 else s
            case Or(a, b):
                s = go(a, 2) + " | " + go(b, 2)
                return f"({s})" if parent > 1 else s
            case Implies(a, b):
                s = go(a, 1) + " -> " + go(b, 0)
                return f"({s})" if parent > 0 else s
        raise TypeError(f"unknown node {g!r}")

    return go(f, 0)
