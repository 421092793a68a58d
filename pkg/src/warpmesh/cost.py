"""Per-junction operation and memory cost of the four schemes at equal dispersion tolerance.

Costs are exact rationals.  A row is ``base counts x density_factor x rate_factor``:
plain meshes reach the warped mesh's accuracy by shortening the waveguides to a
third (nine times the junctions), warped meshes by raising the sampling rate
by 7/4.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .lattice import TriangularLattice
from .sim import Scheme

DENSE_FACTOR = Fraction(9)
RATE_FACTOR = Fraction(7, 4)

COLUMNS = ("sums", "mults", "memory")


@dataclass(frozen=True)
class CostBasis:
    scheme: Scheme
    sums: Fraction
    mults: Fraction
    memory: Fraction
    density_factor: Fraction = Fraction(1)
    rate_factor: Fraction = Fraction(1)

    def __post_init__(self):
        for name in ("sums", "mults", "memory", "density_factor", "rate_factor"):
            value = Fraction(getattr(self, name))
            if value < 0:
                raise ValueError(f"{name} must be non-negative")
            object.__setattr__(self, name, value)

    def scaled(self) -> "CostRow":
        f = self.density_factor * self.rate_factor
        return CostRow(self.scheme, self.sums * f, self.mults * f, self.memory * f)

    def with_factors(self, density=1, rate=1) -> "CostBasis":
        return CostBasis(self.scheme, self.sums, self.mults, self.memory, Fraction(density), Fraction(rate))


@dataclass(frozen=True)
class CostRow:
    scheme: Scheme
    sums: Fraction
    mults: Fraction
    memory: Fraction

    def as_tuple(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.sums, self.mults, self.memory)


@dataclass(frozen=True)
class CostReport:
    rows: tuple[CostRow, ...]

    def __getitem__(self, scheme) -> CostRow:
        scheme = Scheme.parse(scheme)
        for row in self.rows:
            if row.scheme is scheme:
                return row
        raise KeyError(scheme)

    def csv(self) -> str:
        lines = ["scheme,sums,mults,memory"]
        for r in self.rows:
            lines.append(",".join([r.scheme.name] + [_fmt(v) for v in r.as_tuple()]))
        return "\n".join(lines) + "\n"

    def table(self) -> str:
        head = f"{'':>6} | {'Sums':>7} | {'Mult':>7} | {'Memory':>7}"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            lines.append(f"{r.scheme.name:>6} | " + " | ".join(f"{_fmt(v):>7}" for v in r.as_tuple()))
        return "\n".join(lines) + "\n"


def _fmt(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{float(value):.9g}"


# Per junction and sample.  WTWM memory: 6 wave registers, 6 allpass states and
# one more location the reference accounting counts without itemising it.
_BASE = {
    Scheme.TWM: (11, 1, 6),
    Scheme.WTWM: (23, 13, 13),
    Scheme.FDS: (6, 1, 2),
    Scheme.WFDS: (10, 5, 4),
}

# One-multiply allpass y = a (x - y_prev) + x_prev: one mult, two sums, two states.
_BASE_ONE_MULTIPLY = {
    Scheme.TWM: (11, 1, 6),
    Scheme.WTWM: (23, 7, 19),
    Scheme.FDS: (6, 1, 2),
    Scheme.WFDS: (10, 3, 6),
}

ORDER = (Scheme.TWM, Scheme.WTWM, Scheme.FDS, Scheme.WFDS)


def default_basis(one_multiply: bool = False) -> list[CostBasis]:
    table = _BASE_ONE_MULTIPLY if one_multiply else _BASE
    out = []
    for s in ORDER:
        sums, mults, mem = table[s]
        if s.warped:
            out.append(CostBasis(s, sums, mults, mem, rate_factor=RATE_FACTOR))
        else:
            out.append(CostBasis(s, sums, mults, mem, density_factor=DENSE_FACTOR))
    return out


def cost_report(bases: list[CostBasis] | None = None) -> CostReport:
    bases = default_basis() if bases is None else bases
    return CostReport(tuple(b.scaled() for b in bases))


# --- instrumented counting --------------------------------------------------------


class _Tally:
    def __init__(self):
        self.sums = 0
        self.mults = 0


class Counted:
    """Float stand-in that tallies additions/subtractions and multiplications."""

    __slots__ = ("value", "tally")

    def __init__(self, value, tally):
        self.value = float(value)
        self.tally = tally

    @staticmethod
    def _v(other):
        return other.value if isinstance(other, Counted) else float(other)

    def _sum(self, value):
        self.tally.sums += 1
        return Counted(value, self.tally)

    def __add__(self, other):
        return self._sum(self.value + self._v(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._sum(self.value - self._v(other))

    def __rsub__(self, other):
        return self._sum(self._v(other) - self.value)

    def __mul__(self, other):
        self.tally.mults += 1
        return Counted(self.value * self._v(other), self.tally)

    __rmul__ = __mul__

    def __neg__(self):
        return Counted(-self.value, self.tally)

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class OpCounts:
    sums: float
    mults: float


def _counted(shape, tally, rng):
    arr = np.empty(shape, dtype=object)
    flat = arr.reshape(-1)
    for i in range(flat.size):
        flat[i] = Counted(rng.standard_normal(), tally)
    return arr


def verify_basis_against_simulator(lattice: TriangularLattice, scheme, alpha: float = -0.45) -> OpCounts:
    """Average sums and multiplies per interior junction over one step.

    Runs the same per-junction routines as the compiled kernels, uncompiled,
    on values that count the arithmetic done on them.
    """
    scheme = Scheme.parse(scheme)
    rng = np.random.default_rng(0)
    tally = _Tally()
    n = lattice.size
    nbr = lattice.neighbors
    interior = lattice.interior
    totals = np.zeros(2)
    if scheme.waveguide:
        win, out, ap = (_counted((n, 6), tally, rng) for _ in range(3))
    else:
        p_now, d1, s1, s2, c2 = (_counted(n, tally, rng) for _ in range(5))
        p_next = np.empty(n, dtype=object)
    for j in interior:
        tally.sums = tally.mults = 0
        if scheme.waveguide:
            kernels._py_scatter_junction(j, win, out, lattice.rim, kernels.THIRD)
            if scheme.warped:
                kernels._py_receive_junction_warped(j, nbr, out, win, ap, alpha)
            else:
                kernels._py_receive_junction(j, nbr, out, win)
        elif scheme.warped:
            kernels._py_wfds_chains_junction(j, p_now, d1, s1, s2, c2, alpha)
            kernels._py_fds_junction(j, nbr, d1, c2, p_next, kernels.THIRD)
        else:
            kernels._py_fds_junction(j, nbr, p_now, d1, p_next, kernels.THIRD)
        totals += (tally.sums, tally.mults)
    avg = totals / max(1, interior.size)
    return OpCounts(float(avg[0]), float(avg[1]))
