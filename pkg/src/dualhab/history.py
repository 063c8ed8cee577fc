"""Bounded undo/redo over immutable world snapshots.

Because world states are immutable value objects, history is just a bounded
stack of references: undo/redo restore a snapshot byte-for-byte (including
the RNG cursor), so a re-executed command after undo redraws the same
outcome the original draw produced.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NothingToRedo, NothingToUndo
from .world import WorldState

DEFAULT_CAPACITY = 64


@dataclass
class HistoryStack:
    """Snapshot ring for a single episode.

    ``record`` pushes the state that resulted from a state-advancing command;
    older entries beyond ``capacity`` fall off the bottom. Any new recording
    discards the redo tail.
    """

    initial: WorldState
    capacity: int = DEFAULT_CAPACITY
    _undo: list = field(default_factory=list)
    _redo: list = field(default_factory=list)
    _current: WorldState = None

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        if self._current is None:
            self._current = self.initial

    @property
    def current(self) -> WorldState:
        return self._current

    def record(self, state: WorldState) -> None:
        self._undo.append(self._current)
        if len(self._undo) > self.capacity:
            del self._undo[0]
        self._current = state
        self._redo.clear()

    def undo(self) -> WorldState:
        if not self._undo:
            raise NothingToUndo("no earlier state recorded")
        self._redo.append(self._current)
        self._current = self._undo.pop()
        return self._current

    def redo(self) -> WorldState:
        if not self._redo:
            raise NothingToRedo("no undone state to restore")
        self._undo.append(self._current)
        self._current = self._redo.pop()
        return self._current

    def depth(self) -> tuple[int, int]:
        return len(self._undo), len(self._redo)

    def dump(self) -> list[dict]:
        """Chronological list of recorded snapshots, oldest first."""
        return [state.to_dict() for state in (*self._undo, self._current)]
