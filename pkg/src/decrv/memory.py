"""Timestamp-indexed observation store with garbage collection."""

from __future__ import annotations

from typing import Iterator, Optional

from .expr import Atom


class ConflictingObservationError(ValueError):
    """Same atom stored twice with different verdicts."""

    def __init__(self, atom: Atom, old: bool, new: bool):
        super().__init__(f"{atom} already {old}, refusing {new}")
        self.atom = atom


class Memory:
    """Partial function from atoms to final verdicts (True/False).

    A version counter increments on every mutation so callers can cache
    evaluation results against a memory snapshot.
    """

    __slots__ = ("_data", "_by_time", "version")

    def __init__(self) -> None:
        self._data: dict[Atom, bool] = {}
        self._by_time: dict[int, set[Atom]] = {}
        self.version = 0

    def __len__(self) -> int:
        return len(self._data)

    def __contains__(self, atom: Atom) -> bool:
        return atom in self._data

    def __iter__(self) -> Iterator[Atom]:
        return iter(self._data)

    def get(self, atom: Atom) -> Optional[bool]:
        return self._data.get(atom)

    def store(self, atom: Atom, value: bool) -> None:
        old = self._data.get(atom)
        if old is not None:
            if old != value:
                raise ConflictingObservationError(atom, old, value)
            return
        self._data[atom] = value
        self._by_time.setdefault(atom.time, set()).add(atom)
        self.version += 1

    def at_time(self, t: int) -> frozenset[Atom]:
        return frozenset(self._by_time.get(t, ()))

    def max_time(self) -> Optional[int]:
        return max(self._by_time) if self._by_time else None

    def gc(self, t: int) -> None:
        """Drop every atom with timestamp <= t."""
        stale = [ts for ts in self._by_time if ts <= t]
        for ts in stale:
            for atom in self._by_time.pop(ts):
                del self._data[atom]
        if stale:
            self.version += 1

    def dump(self) -> str:
        """One ``t,name,verdict`` line per entry, sorted by (t, name)."""
        lines = [
            f"{a.time},{a.name},{'TRUE' if v else 'FALSE'}"
            for a, v in sorted(self._data.items())
        ]
        return "\n".join(lines)
