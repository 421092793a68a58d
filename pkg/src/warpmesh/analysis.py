"""Dispersion relations, probe spectra, membrane modes and mode matching."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericalDomainError
from .sim import ProbeRecord, Scheme
from .warp import AllpassSpec, dc_realignment, warp_frequency_inverse

SQRT2 = math.sqrt(2.0)
NOMINAL_SPEED = 1.0 / SQRT2
SPATIAL_BAND_EDGE = 2.0 * math.pi / math.sqrt(3.0)
TEMPORAL_BAND_EDGE = SPATIAL_BAND_EDGE * NOMINAL_SPEED

# waveguide directions of the lattice: 0, 60 and 120 degrees
WAVEGUIDE_DIRECTIONS = np.array(
    [[1.0, 0.0], [0.5, math.sqrt(3.0) / 2.0], [-0.5, math.sqrt(3.0) / 2.0]]
)


def _k_array(k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if k.shape[-1] != 2:
        raise ValueError("spatial frequency must have a trailing axis of length 2 (kx, ky)")
    return k


def twm_dispersion_omega(k) -> np.ndarray | float:
    """Plane-wave temporal frequency of the triangular mesh at spatial frequency ``k``.

    ``cos w = (1/3) sum_i cos(k . d_i)``, evaluated as
    ``w = 2 arcsin(sqrt((1/3) sum_i sin^2(k . d_i / 2)))`` to keep precision near dc.
    """
    k = _k_array(k)
    mag = np.linalg.norm(k, axis=-1)
    if np.any(mag > SPATIAL_BAND_EDGE * (1.0 + 1e-12)):
        raise NumericalDomainError(f"|k| exceeds the spatial band edge 2*pi/sqrt(3)")
    half = 0.5 * (k @ WAVEGUIDE_DIRECTIONS.T)
    q = np.sum(np.sin(half) ** 2, axis=-1) / 3.0
    if np.any(q > 1.0 + 1e-12):
        raise NumericalDomainError("dispersion relation argument outside [-1, 1]")
    w = 2.0 * np.arcsin(np.sqrt(np.clip(q, 0.0, 1.0)))
    return float(w) if w.ndim == 0 else w


def _along(direction: float, mags: np.ndarray) -> np.ndarray:
    return np.column_stack((mags * math.cos(direction), mags * math.sin(direction)))


@dataclass(frozen=True)
class DispersionCurve:
    omega_nominal: np.ndarray
    speed_ratio: np.ndarray
    scheme: Scheme
    direction: float = 0.0
    alpha: float | None = None

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.omega_nominal.tolist(), self.speed_ratio.tolist()))

    def max_deviation(self, band_fraction: float = 1.0) -> float:
        m = self.omega_nominal <= band_fraction * TEMPORAL_BAND_EDGE * (1 + 1e-12)
        return float(np.max(np.abs(self.speed_ratio[m] - 1.0)))

    def tolerance_band(self, tol: float = 0.02) -> float:
        """Fraction of the band below the first point whose deviation reaches ``tol``."""
        bad = np.abs(self.speed_ratio - 1.0) >= tol
        if not bad.any():
            return 1.0
        return float(self.omega_nominal[np.argmax(bad)] / TEMPORAL_BAND_EDGE)


def _k_grid(n_points: int) -> np.ndarray:
    if n_points < 2:
        raise ConfigError("n_points must be >= 2")
    return SPATIAL_BAND_EDGE * np.arange(1, n_points + 1) / n_points


def dispersion_curve(scheme=Scheme.TWM, direction: float = 0.0, n_points: int = 512) -> DispersionCurve:
    """Speed ratio of the unwarped mesh for ``|k|`` in ``(0, 2 pi/sqrt(3)]`` along ``direction``."""
    scheme = Scheme.parse(scheme)
    if scheme.warped:
        raise ConfigError("use warped_dispersion_curve for warped schemes")
    mags = _k_grid(n_points)
    w = twm_dispersion_omega(_along(direction, mags))
    nominal = mags * NOMINAL_SPEED
    return DispersionCurve(nominal, w / nominal, scheme, direction)


def warped_omega(omega_mesh, alpha) -> np.ndarray | float:
    """Mesh-domain frequency -> realigned output frequency ``rho * warp_inverse(omega_mesh)``."""
    spec = AllpassSpec(alpha)
    return dc_realignment(spec) * warp_frequency_inverse(omega_mesh, spec)


def warped_dispersion_curve(alpha: float, direction: float = 0.0, n_points: int = 512) -> DispersionCurve:
    """Speed ratio of the warped mesh after dc realignment."""
    spec = AllpassSpec(alpha)
    mags = _k_grid(n_points)
    w_out = warped_omega(twm_dispersion_omega(_along(direction, mags)), spec.alpha)
    nominal = mags * NOMINAL_SPEED
    return DispersionCurve(nominal, w_out / nominal, Scheme.WTWM, direction, spec.alpha)


def direction_spread(
    band_fraction: float = 0.75, n_points: int = 2048, directions=(0.0, math.pi / 6.0)
) -> float:
    """Largest speed-ratio gap between two directions over the lowest part of the band."""
    a = dispersion_curve(Scheme.TWM, directions[0], n_points)
    b = dispersion_curve(Scheme.TWM, directions[1], n_points)
    m = a.omega_nominal <= band_fraction * TEMPORAL_BAND_EDGE * (1 + 1e-12)
    return float(np.max(np.abs(a.speed_ratio[m] - b.speed_ratio[m])))


# --- membrane modes ---------------------------------------------------------------


@dataclass(frozen=True)
class Mode:
    m: int
    n: int
    side_sections: int
    omega_ideal: float
    multiplicity: int = 1
    omega_predicted: float | None = None

    @property
    def k(self) -> np.ndarray:
        return (math.pi / self.side_sections) * np.array([self.m, self.n], dtype=float)


def theoretical_modes(side_sections: int, max_omega: float = TEMPORAL_BAND_EDGE) -> list[Mode]:
    """Odd modes of a clamped ``L x L`` membrane at the nominal mesh speed.

    ``w_mn = (pi / L) (1/sqrt 2) sqrt(m^2 + n^2)`` for odd ``m <= n``; a pair
    ``(m, n)``/``(n, m)`` appears once with multiplicity 2.
    """
    if side_sections < 2:
        raise ConfigError("side_sections must be >= 2")
    L = int(side_sections)
    scale = math.pi / L * NOMINAL_SPEED
    out = []
    m = 1
    while scale * math.sqrt(2) * m <= max_omega:
        n = m
        while True:
            w = scale * math.hypot(m, n)
            if w > max_omega:
                break
            out.append(Mode(m, n, L, w, 1 if m == n else 2))
            n += 2
        m += 2
    out.sort(key=lambda md: (md.omega_ideal, md.m))
    return out


def predicted_modes(modes: list[Mode], scheme=Scheme.TWM, alpha: float | None = None) -> list[Mode]:
    """Attach the frequency each mode should show in the simulated mesh.

    Unwarped: the dispersion relation at ``k_mn``.  Warped: that mesh-domain
    frequency taken through the inverse warp and multiplied by the dc
    realignment factor, i.e. on the same output axis as :func:`warped_omega`.
    """
    scheme = Scheme.parse(scheme)
    if not modes:
        return []
    k = np.array([md.k for md in modes])
    k_mag = np.linalg.norm(k, axis=1)
    # modes above the spatial band edge have no mesh counterpart
    keep = k_mag <= SPATIAL_BAND_EDGE
    w = np.full(len(modes), np.nan)
    w[keep] = twm_dispersion_omega(k[keep])
    if scheme.warped:
        if alpha is None:
            raise ConfigError("warped prediction needs alpha")
        w[keep] = warped_omega(w[keep], alpha)
    return [
        Mode(md.m, md.n, md.side_sections, md.omega_ideal, md.multiplicity, float(wi))
        for md, wi, ok in zip(modes, w, keep)
        if ok
    ]


# --- spectra and peaks ------------------------------------------------------------


@dataclass(frozen=True)
class Spectrum:
    omega: np.ndarray
    magnitude: np.ndarray
    fft_size: int
    n_samples: int

    @property
    def bin_width(self) -> float:
        return 2.0 * math.pi / self.fft_size

    @property
    def magnitude_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(self.magnitude)


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def spectrum(probe, fft_size: int | None = None) -> Spectrum:
    """Zero-padded, rectangular-window magnitude spectrum on ``[0, pi]``."""
    x = np.asarray(probe.samples if isinstance(probe, ProbeRecord) else probe, dtype=float)
    if fft_size is None:
        fft_size = 1 << max(0, (len(x) - 1).bit_length())
    fft_size = int(fft_size)
    if not _is_pow2(fft_size):
        raise ConfigError(f"fft_size must be a power of two, got {fft_size}")
    if fft_size < len(x):
        raise ConfigError(f"fft_size {fft_size} is shorter than the probe ({len(x)} samples)")
    X = np.fft.rfft(x, fft_size)
    omega = 2.0 * math.pi * np.arange(X.shape[0]) / fft_size
    return Spectrum(omega, np.abs(X), fft_size, len(x))


def spectrum_energy(spec: Spectrum) -> float:
    """Time-domain energy recovered from a one-sided spectrum (Parseval)."""
    mag2 = spec.magnitude**2
    interior = mag2[1:-1].sum() if spec.fft_size > 1 else 0.0
    edges = mag2[0] + (mag2[-1] if spec.fft_size > 1 else 0.0)
    return float((edges + 2.0 * interior) / spec.fft_size)


def _parabolic(y0: float, y1: float, y2: float) -> float:
    den = y0 - 2.0 * y1 + y2
    if den == 0.0:
        return 0.0
    return 0.5 * (y0 - y2) / den


def find_peaks(spec: Spectrum, min_prominence: float = 20.0, max_count: int | None = None) -> list[float]:
    """Local maxima within ``min_prominence`` dB of the strongest one, in rad/sample.

    Each maximum is refined by a parabola through the three dB values around
    it.  When ``max_count`` is set, the strongest ``max_count`` peaks are kept.
    The result is sorted by frequency.  Close peaks are never merged; see
    :func:`twin_flags`.
    """
    db = spec.magnitude_db
    if db.size < 3:
        return []
    finite = np.where(np.isfinite(db), db, -np.inf)
    c = finite[1:-1]
    is_max = (c > finite[:-2]) & (c >= finite[2:])
    idx = np.flatnonzero(is_max) + 1
    if idx.size == 0:
        return []
    top = finite[idx].max()
    idx = idx[finite[idx] >= top - min_prominence]
    if max_count is not None and idx.size > max_count:
        idx = np.sort(idx[np.argsort(finite[idx])[::-1][:max_count]])
    peaks = []
    for i in idx:
        y0, y1, y2 = finite[i - 1], finite[i], finite[i + 1]
        delta = _parabolic(y0, y1, y2) if np.isfinite(y0) and np.isfinite(y2) else 0.0
        peaks.append(float((i + delta) * spec.bin_width))
    return sorted(peaks)


def twin_flags(peaks: list[float], bin_width: float, max_bins: float = 2.0) -> list[bool]:
    """Mark peaks lying within ``max_bins`` spectrum bins of another peak."""
    p = np.asarray(peaks, dtype=float)
    flags = np.zeros(p.size, dtype=bool)
    if p.size > 1:
        close = np.diff(p) <= max_bins * bin_width
        flags[:-1] |= close
        flags[1:] |= close
    return flags.tolist()


# --- matching -----------------------------------------------------------------------


@dataclass(frozen=True)
class ModeMatchEntry:
    m: int
    n: int
    omega_ideal: float
    omega_predicted: float
    omega_measured: float | None
    relative_deviation: float | None


@dataclass(frozen=True)
class ModeMatch:
    entries: list[ModeMatchEntry] = field(default_factory=list)

    @property
    def matched(self) -> list[ModeMatchEntry]:
        return [e for e in self.entries if e.omega_measured is not None]

    @property
    def max_deviation(self) -> float:
        devs = [abs(e.relative_deviation) for e in self.matched]
        return max(devs) if devs else float("nan")


def _windows(freqs: np.ndarray, cluster_tol: float) -> np.ndarray:
    """Half the gap to the neighbouring predictions, per prediction.

    Predictions closer than ``cluster_tol`` (relative) are treated as one site
    so accidental degeneracies such as (1,7)/(5,5) keep a usable window.
    """
    n = freqs.size
    if n == 0:
        return freqs.copy()
    if n == 1:
        return np.array([0.5 * freqs[0]])
    order = np.argsort(freqs)
    f = freqs[order]
    gaps = np.diff(f)
    gaps = np.where(gaps <= cluster_tol * f[1:], np.nan, gaps)
    left = np.empty(n)
    right = np.empty(n)
    # nearest non-clustered gap to the left and right of each site
    last = np.nan
    for i in range(n):
        left[i] = last if i == 0 else (gaps[i - 1] if not np.isnan(gaps[i - 1]) else left[i - 1])
    for i in range(n - 1, -1, -1):
        right[i] = np.nan if i == n - 1 else (gaps[i] if not np.isnan(gaps[i]) else right[i + 1])
    spacing = np.fmin(left, right)
    spacing = np.where(np.isnan(spacing), f, spacing)
    out = np.empty(n)
    out[order] = 0.5 * spacing
    return out


def match_modes(predicted: list[Mode], measured, cluster_tol: float = 2e-3) -> ModeMatch:
    """Pair predicted and measured frequencies one-to-one, closest pairs first.

    A pair is allowed only if the measured peak lies within half the local
    spacing of predicted modes.  Deviations are relative to the prediction.
    """
    pred = np.array([md.omega_predicted for md in predicted], dtype=float)
    meas = np.asarray(sorted(measured), dtype=float)
    win = _windows(pred, cluster_tol)
    pairs = []
    for i, w in enumerate(pred):
        if meas.size == 0:
            break
        dist = np.abs(meas - w)
        for j in np.flatnonzero(dist <= win[i]):
            pairs.append((dist[j], i, int(j)))
    pairs.sort()
    taken_p: dict[int, int] = {}
    taken_m: set[int] = set()
    for _, i, j in pairs:
        if i in taken_p or j in taken_m:
            continue
        taken_p[i] = j
        taken_m.add(j)
    entries = []
    for i, md in enumerate(predicted):
        if i in taken_p:
            wm = float(meas[taken_p[i]])
            dev = (wm - md.omega_predicted) / md.omega_predicted
            entries.append(ModeMatchEntry(md.m, md.n, md.omega_ideal, md.omega_predicted, wm, dev))
        else:
            entries.append(ModeMatchEntry(md.m, md.n, md.omega_ideal, md.omega_predicted, None, None))
    return ModeMatch(entries)


def ideal_as_predicted(modes: list[Mode]) -> list[Mode]:
    """Use the ideal positions as the prediction (for checking warped alignment)."""
    return [Mode(md.m, md.n, md.side_sections, md.omega_ideal, md.multiplicity, md.omega_ideal) for md in modes]


def align_fundamental(measured, modes: list[Mode], predicted_fundamental: float | None = None):
    """Scale measured peaks so the peak nearest the expected (1,1) lands on its ideal value.

    Returns ``(scaled_peaks, scale)``.
    """
    meas = np.asarray(sorted(measured), dtype=float)
    fund = next(md for md in modes if md.m == 1 and md.n == 1)
    guess = fund.omega_ideal if predicted_fundamental is None else predicted_fundamental
    if meas.size == 0:
        raise NumericalDomainError("no measured peaks to align")
    ref = meas[np.argmin(np.abs(meas - guess))]
    scale = fund.omega_ideal / ref
    return meas * scale, float(scale)


def effective_rate_factor(alpha: float) -> dict[str, float]:
    """Sampling-rate factors implied by the dc realignment of a warped mesh.

    * ``rho``: warped mesh rate relative to the plain mesh, ``2 / (1 + alpha)``;
    * ``vs_doubled``: relative to the same mesh with every unit delay doubled
      (the ``alpha = 0`` member of the family), ``rho / 2 = 1 / (1 + alpha)``;
    * ``vs_dense``: relative to a plain mesh with waveguides one third as long,
      which itself must run three times faster, ``rho / 3``.
    """
    rho = dc_realignment(AllpassSpec(alpha))
    return {"rho": rho, "vs_doubled": rho / 2.0, "vs_dense": rho / 3.0}
