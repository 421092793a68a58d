"""Triangular lattice covering a square membrane with a clamped rim.

Junctions sit on staggered rows: row ``r`` lies at height ``r * sqrt(3)/2``
and holds ``side_sections + 1`` junctions at ``x = i + (r % 2) / 2``.  The
outermost layer (first and last row, first and last junction of every row)
is the rim.  Direction index ``d`` points at angle ``d * 60`` degrees, so the
reverse of direction ``d`` is ``(d + 3) % 6``.
"""

from __future__ import annotations

import csv
import io
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, JunctionLookupError

JunctionId = int

ROW_PITCH = math.sqrt(3.0) / 2.0
N_DIRECTIONS = 6

# (row step, column step for even rows, column step for odd rows) per direction
_STEPS = (
    (0, 1, 1),
    (1, 0, 1),
    (1, -1, 0),
    (0, -1, -1),
    (-1, -1, 0),
    (-1, 0, 1),
)


def opposite(direction: int) -> int:
    return (direction + 3) % N_DIRECTIONS


@dataclass(frozen=True, eq=False)
class TriangularLattice:
    """Junction geometry and 6-neighbour adjacency of a square-ish membrane.

    ``neighbors[j, d]`` is the junction reached from ``j`` in direction ``d``
    or ``-1`` when the rim cuts that link.  Arrays are read-only.
    """

    positions: np.ndarray
    neighbors: np.ndarray
    rim: np.ndarray
    side_sections: int
    n_rows: int
    center: JunctionId

    @property
    def size(self) -> int:
        return self.positions.shape[0]

    @property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(~self.rim)

    @property
    def degree(self) -> np.ndarray:
        return (self.neighbors >= 0).sum(axis=1)

    @property
    def height(self) -> float:
        return (self.n_rows - 1) * ROW_PITCH

    def check(self, j: JunctionId) -> JunctionId:
        if not (0 <= int(j) < self.size):
            raise JunctionLookupError(f"junction {j} not in lattice of {self.size}")
        return int(j)

    def neighbors_of(self, j: JunctionId) -> list[tuple[int, JunctionId]]:
        return neighbors(self, j)

    def to_csv(self) -> str:
        return lattice_csv(self)


def build_square_lattice(side_sections: int) -> TriangularLattice:
    """Build the staircase lattice for a ``side_sections`` x ``side_sections`` square.

    The number of rows is chosen so the row span is the closest achievable
    to ``side_sections`` waveguide lengths.
    """
    if int(side_sections) != side_sections or side_sections < 2:
        raise ConfigError(f"side_sections must be an integer >= 2, got {side_sections!r}")
    L = int(side_sections)
    last_row = max(2, round(L / ROW_PITCH))
    n_rows = last_row + 1
    per_row = L + 1
    n = n_rows * per_row

    rows, cols = np.divmod(np.arange(n), per_row)
    positions = np.column_stack((cols + 0.5 * (rows % 2), rows * ROW_PITCH)).astype(float)

    nbr = np.full((n, N_DIRECTIONS), -1, dtype=np.int64)
    odd = rows % 2 == 1
    for d, (dr, dc_even, dc_odd) in enumerate(_STEPS):
        r2 = rows + dr
        c2 = cols + np.where(odd, dc_odd, dc_even)
        ok = (r2 >= 0) & (r2 < n_rows) & (c2 >= 0) & (c2 < per_row)
        nbr[ok, d] = r2[ok] * per_row + c2[ok]

    rim = (rows == 0) | (rows == last_row) | (cols == 0) | (cols == L)

    lo = positions.min(axis=0)
    hi = positions.max(axis=0)
    centroid = 0.5 * (lo + hi)
    interior = np.flatnonzero(~rim)
    dist = np.linalg.norm(positions[interior] - centroid, axis=1)
    # argmin returns the first minimum, i.e. the lowest index on ties
    center = int(interior[np.argmin(np.round(dist, 12))])

    for arr in (positions, nbr, rim):
        arr.setflags(write=False)
    return TriangularLattice(
        positions=positions,
        neighbors=nbr,
        rim=rim,
        side_sections=L,
        n_rows=n_rows,
        center=center,
    )


def neighbors(lattice: TriangularLattice, j: JunctionId) -> list[tuple[int, JunctionId]]:
    """Present neighbours of ``j`` as ``(direction, junction)`` pairs, sorted by direction."""
    j = lattice.check(j)
    row = lattice.neighbors[j]
    return [(d, int(row[d])) for d in range(N_DIRECTIONS) if row[d] >= 0]


def neighbor(lattice: TriangularLattice, j: JunctionId, direction: int) -> JunctionId | None:
    j = lattice.check(j)
    target = int(lattice.neighbors[j, direction % N_DIRECTIONS])
    return None if target < 0 else target


def is_connected(lattice: TriangularLattice) -> bool:
    seen = np.zeros(lattice.size, dtype=bool)
    seen[lattice.center] = True
    queue = deque([lattice.center])
    while queue:
        j = queue.popleft()
        for k in lattice.neighbors[j]:
            if k >= 0 and not seen[k]:
                seen[k] = True
                queue.append(int(k))
    return bool(seen.all())


def lattice_csv(lattice: TriangularLattice) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "x", "y", "is_rim"] + [f"n{d}" for d in range(N_DIRECTIONS)])
    for j in range(lattice.size):
        x, y = lattice.positions[j]
        w.writerow(
            [j, f"{x:.9g}", f"{y:.9g}", int(lattice.rim[j])]
            + [int(k) for k in lattice.neighbors[j]]
        )
    return buf.getvalue()
