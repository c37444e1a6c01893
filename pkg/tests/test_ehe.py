"""Execution history encoding: expansion, resolution, triggers."""

import itertools
import random

from decrv import ehe, expr, ltl, synthesis
from decrv.ehe import EHE, TriggerAnd, TriggerLit, TriggerOr, sadv, sadvs
from decrv.expr import Atom
from decrv.memory import Memory
from decrv.verdicts import Verdict

from conftest import all_events, random_formula, random_trace


def fig2a():
    return synthesis.build(ltl.parse("G(s -> X(light U !s))"))


def test_initial_entry():
    e = EHE(fig2a(), 0)
    assert e.expr_at(0, e.monitor.initial) is expr.BTRUE
    assert e.t_last == 0


def test_smove_one_step_matches_hand_expansion():
    e = EHE(fig2a(), 0)
    e.smove(1)
    s = expr.batom(Atom(0, "s"))
    assert e.expr_at(1, 0) is expr.bnot(s)
    assert e.expr_at(1, 1) is s
    # the violation state is unreachable in one step and therefore omitted
    assert e.expr_at(1, 2) is None


def test_smove_same_round_is_noop():
    e = EHE(fig2a(), 0)
    e.smove(2)
    before = e.dump()
    e.smove(2)
    assert e.dump() == before


def _check_exhaustive_and_exclusive(e):
    for t, row in e.entries.items():
        names = sorted({a for ex in row.values() for a in expr.atoms(ex)})
        if len(names) > 12:
            continue
        for bits in itertools.product((False, True), repeat=len(names)):
            assignment = dict(zip(names, bits))
            hits = [
                q for q, ex in row.items() if expr.evaluate(ex, assignment)
            ]
            assert len(hits) == 1, (t, assignment, e.dump())


def test_entries_exhaustive_and_mutually_exclusive():
    rng = random.Random(3)
    for _ in range(15):
        f = random_formula(rng, ["a", "b"], rng.randint(1, 3))
        e = EHE(synthesis.build(f), 0)
        e.smove(rng.randint(1, 4))
        _check_exhaustive_and_exclusive(e)


def test_resolve_fig2a_after_switch():
    e = EHE(fig2a(), 0)
    e.smove(1)
    m = Memory()
    m.store(Atom(0, "s"), True)
    assert e.resolve(m) == (1, 1, Verdict.UNKNOWN)


def test_resolve_nothing_on_empty_memory():
    e = EHE(fig2a(), 0)
    e.smove(3)
    found = e.resolve(Memory())
    # only the origin entry is constant-true, nothing beyond
    assert found == (0, 0, Verdict.UNKNOWN)


def test_resolve_narrows_entries():
    e = EHE(fig2a(), 0)
    e.smove(1)
    m = Memory()
    m.store(Atom(0, "s"), True)
    e.resolve(m)
    assert e.expr_at(1, 1) is expr.BTRUE
    assert e.expr_at(1, 0) is None  # simplified to false and dropped


def test_resolve_matches_run_under_full_memory():
    rng = random.Random(9)
    for _ in range(20):
        f = random_formula(rng, ["a", "b"], rng.randint(1, 3))
        monitor = synthesis.build(f)
        props = sorted(monitor.alphabet)
        trace = random_trace(rng, props, 5)
        e = EHE(monitor, 0)
        e.smove(len(trace))
        m = Memory()
        for t, event in enumerate(trace):
            for p in props:
                m.store(Atom(t, p), event[p])
        found = e.resolve(m)
        assert found is not None
        t, q, verdict = found
        assert t == len(trace)
        expected = monitor.run(trace)[-1] if trace else monitor.labels[monitor.initial]
        assert verdict is expected
        # certainty must point at the very state run() reaches
        state = monitor.initial
        for event in trace:
            state = monitor.step(state, monitor.event_mask(event))
        assert q == state


def test_resolve_monotone_under_growing_memory():
    e = EHE(fig2a(), 0)
    e.smove(2)
    m = Memory()
    m.store(Atom(0, "s"), True)
    m.store(Atom(1, "s"), True)
    m.store(Atom(1, "light"), False)
    first = e.resolve(m)
    assert first == (2, 2, Verdict.FALSE)
    m.store(Atom(0, "light"), True)
    assert e.resolve(m) == first


def test_resolve_cached_when_memory_unchanged():
    e = EHE(fig2a(), 0)
    e.smove(1)
    m = Memory()
    m.store(Atom(0, "s"), True)
    stats = expr.SimplifyStats()
    e.resolve(m, stats)
    work = stats.simplifications
    e.resolve(m, stats)
    assert stats.simplifications == work


def test_sadv_polarity():
    m = Memory()
    m.store(Atom(5, "M0"), False)
    cond = TriggerOr(TriggerLit("M0", False), TriggerLit("M1", False))
    assert sadv(cond, m, 5)
    assert not sadv(TriggerLit("M0", True), m, 5)
    assert not sadv(cond, Memory(), 5)


def test_sadv_conjunction():
    m = Memory()
    m.store(Atom(2, "M0"), True)
    m.store(Atom(2, "M1"), False)
    assert sadv(TriggerAnd(TriggerLit("M0", True), TriggerLit("M1", False)), m, 2)
    assert not sadv(TriggerAnd(TriggerLit("M0", True), TriggerLit("M1", True)), m, 2)


def test_sadvs_collects_matching_rounds():
    cond = TriggerOr(TriggerLit("M0", False), TriggerLit("M1", False))
    m = Memory()
    m.store(Atom(5, "M0"), False)
    assert sadvs(cond, m, 2, 5) == {5}
    assert sadvs(cond, Memory(), 2, 5) == set()
    m2 = Memory()
    m2.store(Atom(3, "M0"), False)
    m2.store(Atom(7, "M0"), False)
    assert sadvs(cond, m2, 0, 7) == {3, 7}


def test_dump_rows():
    e = EHE(fig2a(), 0)
    e.smove(1)
    rows = e.dump().splitlines()
    assert rows[0] == "0 | q0 | true"
    assert all(" | " in row for row in rows)
