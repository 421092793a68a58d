"""First-order allpass, the warped delay z^-1 A(z), and the frequency maps it induces.

``A(z) = (alpha + z^-1) / (1 + alpha z^-1)`` with ``-1 < alpha <= 0``.  Replacing
every unit delay of a mesh by ``z^-1 A(z)`` moves a mesh-domain frequency
``omega_tilde`` to the implementation frequency ``omega`` with
``omega_tilde = warp_frequency(omega)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalDomainError

_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class AllpassSpec:
    alpha: float

    def __post_init__(self) -> None:
        a = float(self.alpha)
        if not math.isfinite(a) or not (-1.0 < a <= 0.0):
            raise ConfigError(f"allpass coefficient must lie in (-1, 0], got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    def response(self, omega):
        """Complex frequency response ``A(e^{j omega})``."""
        zinv = np.exp(-1j * np.asarray(omega, dtype=float))
        return (self.alpha + zinv) / (1.0 + self.alpha * zinv)

    @property
    def dc_delay(self) -> float:
        """Phase delay of ``A`` at dc, in samples."""
        return (1.0 - self.alpha) / (1.0 + self.alpha)


@dataclass(frozen=True)
class AllpassState:
    s: float = 0.0


@dataclass(frozen=True)
class WarpedDelayState:
    allpass: AllpassState = AllpassState()
    delay: float = 0.0


def _spec(spec) -> AllpassSpec:
    return spec if isinstance(spec, AllpassSpec) else AllpassSpec(spec)


def allpass_step(spec: AllpassSpec, state: AllpassState, x: float) -> tuple[float, AllpassState]:
    """One sample of the canonical one-state allpass: ``y = a x + s``, ``s' = x - a y``."""
    a = spec.alpha
    y = a * x + state.s
    return y, AllpassState(x - a * y)


def warped_delay_step(
    spec: AllpassSpec, state: WarpedDelayState, x: float
) -> tuple[float, WarpedDelayState]:
    """One sample of ``z^-1 A(z)``: emit the register, then load it with ``A(x)``.

    The output never depends on the current input, so meshes built from this
    element stay explicitly computable.
    """
    u, ap = allpass_step(spec, state.allpass, x)
    return state.delay, WarpedDelayState(ap, u)


def allpass_filter(spec: AllpassSpec, x) -> np.ndarray:
    """Run :func:`allpass_step` over a whole signal from rest."""
    a = spec.alpha
    x = np.asarray(x, dtype=float)
    y = np.empty_like(x)
    s = 0.0
    for n, xn in enumerate(x):
        yn = a * xn + s
        s = xn - a * yn
        y[n] = yn
    return y


def _check_omega(omega, hi: float, name: str) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    if np.any(~np.isfinite(w)) or np.any(w < -_EDGE_TOL) or np.any(w > hi + _EDGE_TOL):
        raise NumericalDomainError(f"{name} must lie in [0, {hi:.12g}]")
    return np.clip(w, 0.0, hi)


def _out(value, like):
    return float(value) if np.ndim(like) == 0 else value


def warp_frequency(omega, spec) -> np.ndarray | float:
    """Unwrapped phase lag of ``z^-1 A(z)``: maps ``[0, pi]`` onto ``[0, 2 pi]``.

    ``-arg(e^{-j w} A(e^{j w})) = 2 atan2(sin w, alpha + cos w)``, which has the
    same tangent as the classical arctan expression but stays continuous
    through ``pi/2`` and beyond.
    """
    spec = _spec(spec)
    w = _check_omega(omega, math.pi, "omega")
    return _out(2.0 * np.arctan2(np.sin(w), spec.alpha + np.cos(w)), omega)


def warp_frequency_inverse(omega_tilde, spec) -> np.ndarray | float:
    """Inverse of :func:`warp_frequency` in closed form.

    With ``t = omega_tilde / 2`` the forward map gives ``sin(w - t) = alpha sin t``,
    so ``w = t + arcsin(alpha sin t)``.
    """
    spec = _spec(spec)
    wt = _check_omega(omega_tilde, 2.0 * math.pi, "omega_tilde")
    t = 0.5 * wt
    return _out(t + np.arcsin(spec.alpha * np.sin(t)), omega_tilde)


def phase_delay(omega, spec) -> np.ndarray | float:
    """Phase delay ``-arg A(e^{j w}) / w`` of the allpass alone, in samples.

    The value at ``w = 0`` is the continuous extension ``(1 - a) / (1 + a)``.
    """
    spec = _spec(spec)
    w = _check_omega(omega, math.pi, "omega")
    a = spec.alpha
    lag = w - 2.0 * np.arctan2(a * np.sin(w), 1.0 + a * np.cos(w))
    with np.errstate(divide="ignore", invalid="ignore"):
        pd = np.where(w > 0.0, lag / np.where(w > 0.0, w, 1.0), spec.dc_delay)
    return _out(pd, omega)


def dc_realignment(spec) -> float:
    """Factor restoring low-frequency partials of a warped mesh: ``2 / (1 + alpha)``.

    Near dc ``z^-1 A(z)`` delays by ``1 + (1 - a)/(1 + a)`` samples, so every
    low mode of the warped mesh sits that many times lower than the same mode
    of the plain mesh.
    """
    spec = _spec(spec)
    return 1.0 + spec.dc_delay
