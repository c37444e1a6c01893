"""Atoms and Boolean expressions over them, with counted simplification.

Expressions are immutable and hash-consed: structurally equal expressions
are the same object, so equality checks and set membership are O(1) no
matter how large the tree is.  Connectives are binary; chain-level rules
(idempotence, absorption, complement) flatten transparently.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Optional


class Atom(NamedTuple):
    """A (timestamp, proposition-or-reference) observation key."""

    time: int
    name: str

    def __str__(self) -> str:
        return f"<{self.time},{self.name}>"


class SimplifyStats:
    """Counts applied rewrite-rule instances (one count per rule application)."""

    __slots__ = ("simplifications",)

    def __init__(self) -> None:
        self.simplifications = 0

    def bump(self, n: int = 1) -> None:
        self.simplifications += n


class BoolExpr:
    __slots__ = ("size",)


class BConst(BoolExpr):
    __slots__ = ("value",)

    def __str__(self) -> str:
        return "true" if self.value else "false"


class BAtom(BoolExpr):
    __slots__ = ("atom",)

    def __str__(self) -> str:
        return str(self.atom)


class BNot(BoolExpr):
    __slots__ = ("operand",)

    def __str__(self) -> str:
        return f"!{_wrap(self.operand)}"


class BAnd(BoolExpr):
    __slots__ = ("left", "right")

    def __str__(self) -> str:
        return " & ".join(_wrap(t) for t in flatten(self, BAnd))


class BOr(BoolExpr):
    __slots__ = ("left", "right")

    def __str__(self) -> str:
        return " | ".join(_wrap(t) for t in flatten(self, BOr))


def _wrap(e: BoolExpr) -> str:
    if isinstance(e, (BAnd, BOr)):
        return f"({e})"
    return str(e)


_interned: dict[tuple, BoolExpr] = {}


def _intern(key: tuple, build) -> BoolExpr:
    node = _interned.get(key)
    if node is None:
        node = build()
        _interned[key] = node
    return node


def _make_const(value: bool) -> BConst:
    node = BConst()
    node.value = value
    node.size = 1
    return node


BTRUE: BConst = _make_const(True)
BFALSE: BConst = _make_const(False)


def bconst(value: bool) -> BConst:
    return BTRUE if value else BFALSE


def batom(atom: Atom) -> BAtom:
    def build():
        node = BAtom()
        node.atom = atom
        node.size = 1
        return node

    return _intern(("a", atom), build)


def bnot(operand: BoolExpr) -> BNot:
    def build():
        node = BNot()
        node.operand = operand
        node.size = operand.size + 1
        return node

    return _intern(("n", id(operand)), build)


def band(left: BoolExpr, right: BoolExpr) -> BAnd:
    def build():
        node = BAnd()
        node.left = left
        node.right = right
        node.size = left.size + right.size + 1
        return node

    return _intern(("&", id(left), id(right)), build)


def bor(left: BoolExpr, right: BoolExpr) -> BOr:
    def build():
        node = BOr()
        node.left = left
        node.right = right
        node.size = left.size + right.size + 1
        return node

    return _intern(("|", id(left), id(right)), build)


def conj(terms: Iterable[BoolExpr]) -> BoolExpr:
    """Right-assoc conjunction of a term list (empty -> true)."""
    terms = list(terms)
    if not terms:
        return BTRUE
    result = terms[-1]
    for t in reversed(terms[:-1]):
        result = band(t, result)
    return result


def disj(terms: Iterable[BoolExpr]) -> BoolExpr:
    """Right-assoc disjunction of a term list (empty -> false)."""
    terms = list(terms)
    if not terms:
        return BFALSE
    result = terms[-1]
    for t in reversed(terms[:-1]):
        result = bor(t, result)
    return result


def size(e: BoolExpr) -> int:
    """Total node count of the tree."""
    return e.size


def flatten(e: BoolExpr, cls) -> list[BoolExpr]:
    """Operands of a same-connective chain, left to right."""
    out: list[BoolExpr] = []
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, cls):
            stack.append(node.right)
            stack.append(node.left)
        else:
            out.append(node)
    return out


def atoms(e: BoolExpr) -> set[Atom]:
    found: set[Atom] = set()
    stack = [e]
    seen: set[int] = set()
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, BAtom):
            found.add(node.atom)
        elif isinstance(node, BNot):
            stack.append(node.operand)
        elif isinstance(node, (BAnd, BOr)):
            stack.append(node.left)
            stack.append(node.right)
    return found


def evaluate(e: BoolExpr, assignment: dict[Atom, bool]) -> bool:
    """Truth-table evaluation under a total assignment of the atoms."""
    if isinstance(e, BConst):
        return e.value
    if isinstance(e, BAtom):
        return assignment[e.atom]
    if isinstance(e, BNot):
        return not evaluate(e.operand, assignment)
    if isinstance(e, BAnd):
        return evaluate(e.left, assignment) and evaluate(e.right, assignment)
    if isinstance(e, BOr):
        return evaluate(e.left, assignment) or evaluate(e.right, assignment)
    raise TypeError(f"unknown node {e!r}")


def simplify(e: BoolExpr, stats: Optional[SimplifyStats] = None) -> BoolExpr:
    """Rewrite to a fixed point: constant folding, double negation,
    idempotence, absorption, and complement.  Never grows the tree."""
    while True:
        e2 = _pass(e, stats)
        if e2 is e:
            return e2
        e = e2


def _pass(e: BoolExpr, stats: Optional[SimplifyStats]) -> BoolExpr:
    if isinstance(e, (BConst, BAtom)):
        return e
    if isinstance(e, BNot):
        a = _pass(e.operand, stats)
        if isinstance(a, BConst):
            if stats:
                stats.bump()
            return bconst(not a.value)
        if isinstance(a, BNot):
            if stats:
                stats.bump()
            return a.operand
        return e if a is e.operand else bnot(a)

    is_and = isinstance(e, BAnd)
    cls = BAnd if is_and else BOr
    identity, annihilator = (BTRUE, BFALSE) if is_and else (BFALSE, BTRUE)
    operands = [_pass(t, stats) for t in flatten(e, cls)]

    kept: list[BoolExpr] = []
    present: set[BoolExpr] = set()
    for t in operands:
        if t is annihilator:
            if stats:
                stats.bump()
            return annihilator
        if t is identity:
            if stats:
                stats.bump()
            continue
        if t in present:  # idempotence
            if stats:
                stats.bump()
            continue
        present.add(t)
        kept.append(t)

    for t in kept:  # complement
        comp = t.operand if isinstance(t, BNot) else bnot(t)
        if comp in present:
            if stats:
                stats.bump()
            return annihilator

    # absorption: in a disjunction, drop a conjunction containing another
    # operand (and dually)
    inner_cls = BOr if is_and else BAnd
    absorbed: list[BoolExpr] = []
    for t in kept:
        if isinstance(t, inner_cls) and any(
            u in present and u is not t for u in flatten(t, inner_cls)
        ):
            if stats:
                stats.bump()
            present.discard(t)
            continue
        absorbed.append(t)

    if not absorbed:
        return identity
    if len(absorbed) == 1:
        return absorbed[0]
    rebuilt = conj(absorbed) if is_and else disj(absorbed)
    return e if rebuilt is e else rebuilt


def substitute_atoms(e: BoolExpr, lookup) -> BoolExpr:
    """Replace atoms for which ``lookup(atom)`` returns a bool; leave others."""
    memo: dict[int, BoolExpr] = {}

    def go(node: BoolExpr) -> BoolExpr:
        cached = memo.get(id(node))
        if cached is not None:
            return cached
        if isinstance(node, BConst):
            out = node
        elif isinstance(node, BAtom):
            v = lookup(node.atom)
            out = node if v is None else bconst(v)
        elif isinstance(node, BNot):
            a = go(node.operand)
            out = node if a is node.operand else bnot(a)
        elif isinstance(node, BAnd):
            l, r = go(node.left), go(node.right)
            out = node if (l is node.left and r is node.right) else band(l, r)
        else:
            l, r = go(node.left), go(node.right)
            out = node if (l is node.left and r is node.right) else bor(l, r)
        memo[id(node)] = out
        return out

    return go(e)


def seval(e: BoolExpr, memory, stats: Optional[SimplifyStats] = None) -> BoolExpr:
    """Substitute every atom the memory knows, then simplify."""
    return simplify(substitute_atoms(e, memory.get), stats)


def stamp(e: BoolExpr, offset: int) -> BoolExpr:
    """Shift every atom timestamp by ``offset`` (guard templates use time 0)."""
    if offset == 0:
        return e
    memo: dict[int, BoolExpr] = {}

    def go(node: BoolExpr) -> BoolExpr:
        cached = memo.get(id(node))
        if cached is not None:
            return cached
        if isinstance(node, BConst):
            out = node
        elif isinstance(node, BAtom):
            out = batom(Atom(node.atom.time + offset, node.atom.name))
        elif isinstance(node, BNot):
            out = bnot(go(node.operand))
        elif isinstance(node, BAnd):
            out = band(go(node.left), go(node.right))
        else:
            out = bor(go(node.left), go(node.right))
        memo[id(node)] = out
        return out

    return go(e)
