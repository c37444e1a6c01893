"""Boolean expression engine: hash-consing, simplification, seval."""

import itertools

from hypothesis import given, strategies as st

from decrv import expr
from decrv.expr import Atom, SimplifyStats
from decrv.memory import Memory

A = expr.batom(Atom(1, "a"))
B = expr.batom(Atom(1, "b"))
C = expr.batom(Atom(2, "c"))


def test_atom_rendering():
    assert str(Atom(23, "s1")) == "<23,s1>"
    assert str(expr.band(A, expr.bnot(B))) == "<1,a> & !<1,b>"


def test_hash_consing_gives_identity():
    assert expr.batom(Atom(1, "a")) is A
    assert expr.band(A, B) is expr.band(A, B)
    assert expr.bnot(expr.band(A, B)) is expr.bnot(expr.band(A, B))
    assert expr.band(A, B) is not expr.band(B, A)


def test_size():
    assert expr.size(expr.BTRUE) == 1
    assert expr.size(expr.bor(A, B)) == 3
    assert expr.size(expr.bnot(expr.band(A, expr.bor(B, C)))) == 6


def test_flatten_orders_left_to_right():
    chain = expr.band(A, expr.band(B, C))
    assert expr.flatten(chain, expr.BAnd) == [A, B, C]
    assert expr.flatten(expr.band(expr.band(A, B), C), expr.BAnd) == [A, B, C]
    assert expr.flatten(A, expr.BAnd) == [A]


def test_simplify_constant_folding():
    assert expr.simplify(expr.band(expr.BTRUE, A)) is A
    assert expr.simplify(expr.bor(expr.BFALSE, A)) is A
    assert expr.simplify(expr.band(expr.BFALSE, A)) is expr.BFALSE
    assert expr.simplify(expr.bor(expr.BTRUE, A)) is expr.BTRUE
    assert expr.simplify(expr.bnot(expr.BTRUE)) is expr.BFALSE


def test_simplify_double_negation():
    assert expr.simplify(expr.bnot(expr.bnot(A))) is A


def test_simplify_idempotence():
    assert expr.simplify(expr.band(A, A)) is A
    assert expr.simplify(expr.bor(A, expr.bor(A, A))) is A


def test_simplify_complement():
    assert expr.simplify(expr.band(A, expr.bnot(A))) is expr.BFALSE
    assert expr.simplify(expr.bor(A, expr.bnot(A))) is expr.BTRUE


def test_simplify_absorption():
    # a | (a & b) -> a   and dually
    assert expr.simplify(expr.bor(A, expr.band(A, B))) is A
    assert expr.simplify(expr.band(A, expr.bor(A, B))) is A


def test_simplify_counts_rule_applications():
    stats = SimplifyStats()
    expr.simplify(expr.band(expr.BTRUE, A), stats)
    assert stats.simplifications == 1
    stats = SimplifyStats()
    expr.simplify(A, stats)
    assert stats.simplifications == 0


def _memory(pairs):
    m = Memory()
    for atom, value in pairs:
        m.store(atom, value)
    return m


def test_seval_example():
    # <23,s1> | <23,l1> with s1 known true collapses to true
    e = expr.bor(expr.batom(Atom(23, "s1")), expr.batom(Atom(23, "l1")))
    m = _memory([(Atom(23, "s1"), True)])
    assert expr.seval(e, m) is expr.BTRUE


def test_seval_empty_memory_is_simplify():
    e = expr.batom(Atom(5, "a"))
    assert expr.seval(e, Memory()) is e


def test_stamp_shifts_timestamps():
    e = expr.band(expr.batom(Atom(0, "s")), expr.bnot(expr.batom(Atom(0, "l"))))
    shifted = expr.stamp(e, 7)
    assert expr.atoms(shifted) == {Atom(7, "s"), Atom(7, "l")}
    assert expr.stamp(e, 0) is e


@st.composite
def exprs(draw, depth=4):
    if depth == 0 or draw(st.booleans()) and depth < 3:
        return draw(
            st.sampled_from([A, B, C, expr.batom(Atom(2, "d")), expr.batom(Atom(3, "e")),
                             expr.BTRUE, expr.BFALSE])
        )
    kind = draw(st.integers(0, 2))
    if kind == 0:
        return expr.bnot(draw(exprs(depth=depth - 1)))
    left = draw(exprs(depth=depth - 1))
    right = draw(exprs(depth=depth - 1))
    return (expr.band if kind == 1 else expr.bor)(left, right)


@given(exprs())
def test_simplify_preserves_truth_table(e):
    simplified = expr.simplify(e)
    names = sorted(expr.atoms(e) | expr.atoms(simplified))
    for bits in itertools.product((False, True), repeat=len(names)):
        assignment = dict(zip(names, bits))
        assert expr.evaluate(e, assignment) == expr.evaluate(simplified, assignment)


@given(exprs())
def test_simplify_never_grows(e):
    assert expr.size(expr.simplify(e)) <= expr.size(e)


@given(exprs())
def test_simplify_fixed_point(e):
    once = expr.simplify(e)
    assert expr.simplify(once) is once


@given(exprs())
def test_seval_total_memory_matches_truth_table(e):
    names = sorted(expr.atoms(e))
    for bits in itertools.product((False, True), repeat=min(len(names), 5)):
        if len(names) > 5:
            break
        assignment = dict(zip(names, bits))
        m = _memory(assignment.items())
        assert expr.seval(e, m) is expr.bconst(expr.evaluate(e, assignment))


@given(exprs())
def test_seval_idempotent(e):
    m = _memory([(Atom(1, "a"), True), (Atom(2, "c"), False)])
    once = expr.seval(e, m)
    assert expr.seval(once, m) is once


@given(exprs())
def test_seval_composes_over_disjoint_memories(e):
    m1 = _memory([(Atom(1, "a"), True), (Atom(2, "d"), False)])
    m2 = _memory([(Atom(1, "b"), False), (Atom(3, "e"), True)])
    both = _memory(
        [(Atom(1, "a"), True), (Atom(2, "d"), False), (Atom(1, "b"), False), (Atom(3, "e"), True)]
    )
    assert expr.seval(e, both) is expr.seval(expr.seval(e, m1), m2)
