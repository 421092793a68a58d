"""Time stepping for TWM, FDS and their warped variants WTWM and WFDS.

State layout per scheme (``N`` junctions):

=======  ==========================================================================
TWM      ``waves`` (N, 6): wave arriving at each port, i.e. the edge delay registers
WTWM     ``waves`` plus ``allpass`` (N, 6): one allpass state per edge delay
FDS      ``p_now``, ``p_prev`` (N,)
WFDS     ``p_now``; ``p_prev`` is the register of the first warped delay (holds
         ``D p``), ``chain1``/``chain2`` are the allpass states of the two delays
=======  ==========================================================================

With unit delays ``D = z^-1`` the WFDS layout collapses to the FDS one, which is
why the first-delay register keeps the name ``p_prev``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import ConfigError, SchemeMismatchError
from .lattice import JunctionId, TriangularLattice
from .warp import AllpassSpec


class Scheme(str, enum.Enum):
    TWM = "twm"
    FDS = "fds"
    WTWM = "wtwm"
    WFDS = "wfds"

    @property
    def warped(self) -> bool:
        return self in (Scheme.WTWM, Scheme.WFDS)

    @property
    def waveguide(self) -> bool:
        return self in (Scheme.TWM, Scheme.WTWM)

    @property
    def plain(self) -> "Scheme":
        return {Scheme.WTWM: Scheme.TWM, Scheme.WFDS: Scheme.FDS}.get(self, self)

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigError(f"unknown scheme {value!r}; expected one of twm, fds, wtwm, wfds") from None


@dataclass
class MeshState:
    scheme: Scheme
    alpha: float = 0.0
    waves: np.ndarray | None = None
    allpass: np.ndarray | None = None
    p_now: np.ndarray | None = None
    p_prev: np.ndarray | None = None
    chain1: np.ndarray | None = None
    chain2: np.ndarray | None = None
    step_count: int = 0

    def arrays(self) -> dict[str, np.ndarray]:
        names = ("waves", "allpass", "p_now", "p_prev", "chain1", "chain2")
        return {k: getattr(self, k) for k in names if getattr(self, k) is not None}

    def copy(self) -> "MeshState":
        return replace(self, **{k: v.copy() for k, v in self.arrays().items()})

    def is_rest(self) -> bool:
        return all(not np.any(a) for a in self.arrays().values())


@dataclass(frozen=True)
class ProbeRecord:
    junction: JunctionId
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.samples.setflags(write=False)

    def __len__(self) -> int:
        return self.samples.shape[0]

    def normalized(self) -> np.ndarray:
        peak = np.max(np.abs(self.samples))
        return self.samples / peak if peak > 0 else self.samples.copy()


def _alpha_for(scheme: Scheme, alpha) -> float:
    if scheme.warped:
        if alpha is None:
            raise ConfigError(f"{scheme.value} needs an allpass coefficient")
        return AllpassSpec(alpha).alpha
    if alpha is not None:
        raise ConfigError(f"{scheme.value} is unwarped; alpha must not be given")
    return 0.0


def rest_state(lattice: TriangularLattice, scheme, alpha: float | None = None) -> MeshState:
    scheme = Scheme.parse(scheme)
    a = _alpha_for(scheme, alpha)
    n = lattice.size
    if scheme is Scheme.TWM:
        return MeshState(scheme, a, waves=np.zeros((n, 6)))
    if scheme is Scheme.WTWM:
        return MeshState(scheme, a, waves=np.zeros((n, 6)), allpass=np.zeros((n, 6)))
    if scheme is Scheme.FDS:
        return MeshState(scheme, a, p_now=np.zeros(n), p_prev=np.zeros(n))
    return MeshState(
        scheme, a, p_now=np.zeros(n), p_prev=np.zeros(n), chain1=np.zeros(n), chain2=np.zeros(n)
    )


def _expect(state: MeshState, lattice: TriangularLattice, waveguide: bool) -> None:
    if state.scheme.waveguide != waveguide:
        kind = "waveguide (TWM/WTWM)" if waveguide else "finite-difference (FDS/WFDS)"
        raise SchemeMismatchError(f"expected a {kind} state, got {state.scheme.value}")
    for arr in state.arrays().values():
        if arr.shape[0] != lattice.size:
            raise SchemeMismatchError("state does not match the lattice size")


def scatter(lattice: TriangularLattice, waves: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Junction signals and outgoing waves for the given incoming waves.

    Interior: ``v = (1/3) sum(p_in)``, ``p_out = v - p_in``.  Rim: ``v = 0`` so
    ``p_out = -p_in``.
    """
    return kernels._twm_scatter_np(np.asarray(waves, dtype=float), lattice.rim)


def junction_signals(lattice: TriangularLattice, state: MeshState) -> np.ndarray:
    if state.scheme.waveguide:
        return scatter(lattice, state.waves)[0]
    return state.p_now.copy()


def scatter_step(lattice: TriangularLattice, state: MeshState) -> MeshState:
    """Scatter at every junction, then pass each outgoing wave through its edge delay."""
    _expect(state, lattice, waveguide=True)
    new = state.copy()
    ap = new.allpass if new.allpass is not None else np.zeros_like(new.waves)
    kernels.twm_step_np(lattice.neighbors, lattice.rim, new.waves, ap, new.alpha, new.scheme.warped)
    new.step_count += 1
    return new


def fds_step(lattice: TriangularLattice, state: MeshState) -> MeshState:
    """Advance an FDS/WFDS state: ``p_next = (1/3) sum D[p]_nbr - D^2[p]_self``, rim at zero."""
    _expect(state, lattice, waveguide=False)
    new = state.copy()
    interior = lattice.interior
    if new.scheme is Scheme.FDS:
        kernels.fds_step_np(lattice.neighbors, interior, new.p_now, new.p_prev)
    else:
        kernels.wfds_step_np(
            lattice.neighbors, interior, new.p_now, new.p_prev, new.chain1, new.chain2, new.alpha
        )
    new.step_count += 1
    return new


def step(lattice: TriangularLattice, state: MeshState) -> MeshState:
    if state.scheme.waveguide:
        return scatter_step(lattice, state)
    return fds_step(lattice, state)


def excite_impulse(
    state: MeshState, lattice: TriangularLattice, j: JunctionId, amplitude: float
) -> MeshState:
    """Add an impulse of ``amplitude`` at interior junction ``j``.

    Waveguide forms add ``amplitude / 2`` to each of the six waves arriving at
    ``j``, so the next scatter reads ``v_j = amplitude``.

    Finite-difference forms add ``amplitude`` to ``p_now[j]`` together with the
    term that makes them reproduce the waveguide form exactly: the six
    half-amplitude waves are also outgoing waves of the neighbours, which the
    waveguide mesh subtracts one delay later.  In FDS terms that is
    ``amplitude / 6`` on the first-delay register (``p_prev``) of every interior
    neighbour.  Without it the two forms differ by the input filter
    ``(1 - D^2) / 2``.
    """
    j = lattice.check(j)
    if lattice.rim[j]:
        raise ConfigError(f"junction {j} is on the clamped rim and cannot be excited")
    new = state.copy()
    if amplitude == 0:
        return new
    if new.scheme.waveguide:
        new.waves[j, :] += 0.5 * amplitude
    else:
        new.p_now[j] += amplitude
        for k in lattice.neighbors[j]:
            if k >= 0 and not lattice.rim[k]:
                new.p_prev[k] += amplitude / 6.0
    return new


def advance(
    lattice: TriangularLattice,
    state: MeshState,
    steps: int,
    probe: JunctionId,
    use_numba: bool | None = None,
) -> np.ndarray:
    """Run ``steps`` steps in place on ``state``; return the probe junction signal per step."""
    steps = int(steps)
    if steps < 1:
        raise ConfigError("steps must be >= 1")
    probe = lattice.check(probe)
    nbr = lattice.neighbors
    if state.scheme.waveguide:
        _expect(state, lattice, waveguide=True)
        ap = state.allpass if state.allpass is not None else np.zeros_like(state.waves)
        rec = kernels.twm_run(nbr, lattice.rim, state.waves, ap, state.alpha, state.scheme.warped, steps, probe, use_numba)
    elif state.scheme is Scheme.FDS:
        _expect(state, lattice, waveguide=False)
        rec = kernels.fds_run(nbr, lattice.interior, state.p_now, state.p_prev, steps, probe, use_numba)
    else:
        _expect(state, lattice, waveguide=False)
        rec = kernels.wfds_run(
            nbr, lattice.interior, state.p_now, state.p_prev, state.chain1, state.chain2,
            state.alpha, steps, probe, use_numba,
        )
    state.step_count += steps
    return rec


def run_impulse_response(
    lattice: TriangularLattice,
    scheme,
    alpha: float | None = None,
    steps: int = 16384,
    in_j: JunctionId | None = None,
    out_j: JunctionId | None = None,
    amplitude: float = 1.0,
    use_numba: bool | None = None,
) -> ProbeRecord:
    """Impulse response of a mesh at rest, excited at ``in_j`` and read at ``out_j``.

    Both junctions default to the lattice centre.  Sample ``n`` is the junction
    signal at time ``n``; sample 0 is the excitation itself when ``in_j == out_j``.
    """
    scheme = Scheme.parse(scheme)
    in_j = lattice.center if in_j is None else in_j
    out_j = lattice.center if out_j is None else out_j
    state = excite_impulse(rest_state(lattice, scheme, alpha), lattice, in_j, amplitude)
    samples = advance(lattice, state, steps, out_j, use_numba)
    return ProbeRecord(int(out_j), samples)
