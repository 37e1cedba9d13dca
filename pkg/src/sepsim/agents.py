"""Mobile leukocyte agents stored as flat arrays for vectorized updates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import CELL_KINDS, CellKind

__all__ = ["AgentPool", "CellAgent", "CellKind"]


@dataclass
class CellAgent:
    """Read-only view of a single agent, mainly for inspection and tests."""

    kind: str
    age: int
    activation: float
    receptor_state: tuple[float, float]
    position: tuple[int, int]


class AgentPool:
    """Structure-of-arrays store for every mobile immune cell on the grid.

    Slots are recycled lazily: dead rows stay in place until the insertion
    cursor reaches capacity, at which point live rows are compacted to the
    front. All updates operate on the ``alive`` mask.
    """

    def __init__(self, capacity: int):
        self.capacity = int(capacity)
        self.alive = np.zeros(self.capacity, dtype=bool)
        self.kind = np.zeros(self.capacity, dtype=np.int8)
        self.row = np.zeros(self.capacity, dtype=np.int32)
        self.col = np.zeros(self.capacity, dtype=np.int32)
        self.age = np.zeros(self.capacity, dtype=np.int32)
        self.activation = np.zeros(self.capacity, dtype=np.float64)
        self.receptors = np.zeros((self.capacity, 2), dtype=np.float64)
        self.fuel = np.zeros(self.capacity, dtype=np.int16)
        self._cursor = 0

    def __len__(self) -> int:
        return int(np.count_nonzero(self.alive))

    def compact(self) -> None:
        live = np.flatnonzero(self.alive)
        n = live.size
        for name in ("kind", "row", "col", "age", "activation", "fuel"):
            arr = getattr(self, name)
            arr[:n] = arr[live]
        self.receptors[:n] = self.receptors[live]
        self.alive[:] = False
        self.alive[:n] = True
        self._cursor = n

    def spawn(self, kind: int, rows: np.ndarray, cols: np.ndarray, fuel: int = 0) -> int:
        """Insert agents at the given positions; returns how many fit."""
        n = len(rows)
        if n == 0:
            return 0
        if self._cursor + n > self.capacity:
            self.compact()
        n = min(n, self.capacity - self._cursor)
        if n == 0:
            return 0
        sl = slice(self._cursor, self._cursor + n)
        self.alive[sl] = True
        self.kind[sl] = kind
        self.row[sl] = rows[:n]
        self.col[sl] = cols[:n]
        self.age[sl] = 0
        self.activation[sl] = 0.0
        self.receptors[sl] = 0.0
        self.fuel[sl] = fuel
        self._cursor += n
        return n

    def kill(self, indices: np.ndarray) -> None:
        self.alive[indices] = False

    def of_kind(self, kind: int) -> np.ndarray:
        """Indices of live agents of one kind."""
        return np.flatnonzero(self.alive & (self.kind == kind))

    def counts_by_kind(self) -> np.ndarray:
        """Live-agent count per kind, indexed like ``CELL_KINDS``."""
        out = np.zeros(len(CELL_KINDS), dtype=np.int64)
        live_kinds = self.kind[self.alive]
        np.add.at(out, live_kinds, 1)
        return out

    def position_counts(self, kind: int, shape: tuple[int, int]) -> np.ndarray:
        """Grid of live-agent counts for one kind."""
        idx = self.of_kind(kind)
        flat = np.bincount(
            self.row[idx] * shape[1] + self.col[idx], minlength=shape[0] * shape[1]
        )
        return flat.reshape(shape)

    def view(self, index: int) -> CellAgent:
        return CellAgent(
            kind=CELL_KINDS[self.kind[index]],
            age=int(self.age[index]),
            activation=float(self.activation[index]),
            receptor_state=(float(self.receptors[index, 0]), float(self.receptors[index, 1])),
            position=(int(self.row[index]), int(self.col[index])),
        )

    def clone(self) -> "AgentPool":
        other = AgentPool(self.capacity)
        other.alive = self.alive.copy()
        other.kind = self.kind.copy()
        other.row = self.row.copy()
        other.col = self.col.copy()
        other.age = self.age.copy()
        other.activation = self.activation.copy()
        other.receptors = self.receptors.copy()
        other.fuel = self.fuel.copy()
        other._cursor = self._cursor
        return other
