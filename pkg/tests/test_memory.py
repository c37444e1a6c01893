"""Observation store: conflicts, timestamp index, garbage collection."""

import pytest

from decrv.expr import Atom
from decrv.memory import ConflictingObservationError, Memory


def test_store_and_get():
    m = Memory()
    m.store(Atom(23, "s1"), True)
    assert m.get(Atom(23, "s1")) is True
    assert m.get(Atom(23, "l1")) is None
    assert Atom(23, "s1") in m
    assert len(m) == 1


def test_store_is_idempotent():
    m = Memory()
    m.store(Atom(23, "s1"), True)
    version = m.version
    m.store(Atom(23, "s1"), True)
    assert len(m) == 1
    assert m.version == version


def test_conflicting_store_raises():
    m = Memory()
    m.store(Atom(23, "s1"), True)
    with pytest.raises(ConflictingObservationError):
        m.store(Atom(23, "s1"), False)


def test_timestamp_index():
    m = Memory()
    m.store(Atom(3, "a"), True)
    m.store(Atom(3, "b"), False)
    m.store(Atom(5, "b"), False)
    assert m.at_time(3) == {Atom(3, "a"), Atom(3, "b")}
    assert m.at_time(4) == frozenset()
    assert m.max_time() == 5
    assert Memory().max_time() is None


def test_gc_removes_at_or_before():
    m = Memory()
    m.store(Atom(3, "a"), True)
    m.store(Atom(5, "b"), False)
    m.gc(4)
    assert m.get(Atom(3, "a")) is None
    assert m.get(Atom(5, "b")) is False
    assert m.at_time(3) == frozenset()


def test_gc_boundary_inclusive():
    m = Memory()
    m.store(Atom(4, "a"), True)
    m.gc(4)
    assert len(m) == 0


def test_gc_before_all_entries_is_noop():
    m = Memory()
    m.store(Atom(3, "a"), True)
    version = m.version
    m.gc(-1)
    assert len(m) == 1
    assert m.version == version


def test_gc_idempotent():
    m = Memory()
    m.store(Atom(3, "a"), True)
    m.store(Atom(5, "b"), False)
    m.gc(3)
    snapshot = sorted(m)
    m.gc(3)
    assert sorted(m) == snapshot


def test_version_tracks_mutations():
    m = Memory()
    v0 = m.version
    m.store(Atom(1, "a"), True)
    assert m.version > v0
    v1 = m.version
    m.gc(1)
    assert m.version > v1


def test_dump_format():
    m = Memory()
    m.store(Atom(5, "b"), False)
    m.store(Atom(3, "a"), True)
    assert m.dump() == "3,a,TRUE\n5,b,FALSE"
