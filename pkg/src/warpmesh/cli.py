"""Command-line front end: simulate, dispersion, modes, warp-map, cost, lattice.

Options may also come from a ``key = value`` file given with ``--config``;
command-line flags win.  Exit codes: 0 ok, 2 configuration error, 3 numerical
domain error.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import analysis, export
from .cost import cost_report, default_basis
from .errors import ConfigError, NumericalDomainError
from .lattice import build_square_lattice, lattice_csv
from .sim import Scheme, run_impulse_response
from .warp import AllpassSpec, dc_realignment, warp_frequency

DEFAULT_ALPHA = -0.45
DEFAULT_ALPHAS = "0,-0.15,-0.3,-0.45,-0.6,-0.75,-0.9"


@dataclass(frozen=True)
class RunConfig:
    command: str
    side_sections: int = 24
    scheme: Scheme = Scheme.TWM
    alpha: float | None = None
    steps: int = 16384
    fft_size: int = 65536
    direction: float = 0.0
    n_points: int = 512
    prominence: float = 20.0
    output: str | None = None

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        scheme = Scheme.parse(getattr(args, "scheme", "twm"))
        alpha = getattr(args, "alpha", None)
        if scheme.warped and alpha is None:
            alpha = DEFAULT_ALPHA
        if alpha is not None:
            AllpassSpec(alpha)
            if not scheme.warped and args.command != "dispersion":
                raise ConfigError(f"--alpha given for unwarped scheme {scheme.value}")
        steps = getattr(args, "steps", 16384)
        if steps < 1:
            raise ConfigError("--steps must be >= 1")
        side = getattr(args, "side", 24)
        if side < 2:
            raise ConfigError("--side must be >= 2")
        return cls(
            command=args.command,
            side_sections=side,
            scheme=scheme,
            alpha=alpha,
            steps=steps,
            fft_size=getattr(args, "fft_size", 65536),
            direction=math.radians(getattr(args, "direction", 0.0)),
            n_points=getattr(args, "n_points", 512),
            prominence=getattr(args, "prominence", 20.0),
            output=getattr(args, "output", None),
        )


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _alpha_list(text: str) -> list[float]:
    try:
        values = [float(a) for a in text.split(",") if a.strip()]
    except ValueError:
        raise ConfigError(f"bad alpha list {text!r}") from None
    if not values:
        raise ConfigError("empty alpha list")
    for a in values:
        AllpassSpec(a)
    return values


def _rate_line(alpha: float) -> str:
    f = analysis.effective_rate_factor(alpha)
    return (
        f"alpha={alpha:g} rho={f['rho']:.6g} rate_factor_vs_doubled={f['vs_doubled']:.6g} "
        f"rate_factor_vs_dense={f['vs_dense']:.6g} reference=1.75"
    )


# --- commands ------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    cfg = RunConfig.from_args(args)
    lat = build_square_lattice(cfg.side_sections)
    alpha = cfg.alpha if cfg.scheme.warped else None
    probe = run_impulse_response(
        lat, cfg.scheme, alpha, cfg.steps, args.in_junction, args.out_junction, use_numba=_backend(args)
    )
    _emit(export.probe_csv(probe.samples), cfg.output)
    if args.wav:
        export.write_wav(args.wav, probe.samples, args.sample_rate)
    if args.spectrum:
        _emit(export.spectrum_csv(analysis.spectrum(probe, cfg.fft_size)), args.spectrum)
    return 0


def cmd_dispersion(args) -> int:
    cfg = RunConfig.from_args(args)
    if cfg.scheme.warped:
        curve = analysis.warped_dispersion_curve(cfg.alpha, cfg.direction, cfg.n_points)
    elif cfg.alpha is not None:
        # alpha=0 member of the warped family; same curve as the plain mesh
        curve = analysis.warped_dispersion_curve(cfg.alpha, cfg.direction, cfg.n_points)
    else:
        curve = analysis.dispersion_curve(cfg.scheme, cfg.direction, cfg.n_points)
    _emit(export.curve_csv(curve), cfg.output)
    band = curve.tolerance_band(0.02)
    _note(
        f"scheme={cfg.scheme.value} max_dev_75={curve.max_deviation(0.75):.6g} "
        f"band_fraction_below_2pct={band:.6g} bound_75_holds={curve.max_deviation(0.75) < 0.02}"
    )
    if curve.alpha is not None:
        _note(_rate_line(curve.alpha))
    else:
        _note(f"direction_spread_75={analysis.direction_spread(0.75):.6g}")
    return 0


def cmd_modes(args) -> int:
    cfg = RunConfig.from_args(args)
    lat = build_square_lattice(cfg.side_sections)
    max_omega = args.max_omega if args.max_omega is not None else analysis.TEMPORAL_BAND_EDGE
    ideal = analysis.theoretical_modes(cfg.side_sections, max_omega)
    alpha = cfg.alpha if cfg.scheme.warped else None
    predicted = analysis.predicted_modes(ideal, cfg.scheme, alpha)
    if not predicted:
        _emit(export.modes_csv(analysis.ModeMatch([])), cfg.output)
        _note("no modes below max_omega")
        return 0
    probe = run_impulse_response(lat, cfg.scheme, alpha, cfg.steps, use_numba=_backend(args))
    spec = analysis.spectrum(probe, cfg.fft_size)
    peaks = np.asarray(analysis.find_peaks(spec, cfg.prominence))
    if cfg.scheme.warped:
        # mesh-domain peaks onto the realigned output axis
        peaks = peaks * dc_realignment(AllpassSpec(alpha))
    match = analysis.match_modes(predicted, peaks)
    _emit(export.modes_csv(match), cfg.output)
    if args.spectrum:
        _emit(export.spectrum_csv(spec), args.spectrum)
    band = 0.75 * analysis.TEMPORAL_BAND_EDGE
    low = [e for e in match.matched if e.omega_ideal <= band]
    _note(f"peaks={peaks.size} matched={len(match.matched)}/{len(match.entries)}")
    if low:
        dev_pred = max(abs(e.relative_deviation) for e in low)
        dev_ideal = max(abs(e.omega_measured / e.omega_ideal - 1.0) for e in low)
        _note(f"lowest_75pct: max_dev_vs_predicted={dev_pred:.6g} max_dev_vs_ideal={dev_ideal:.6g}")
    if cfg.scheme.warped:
        scaled, scale = analysis.align_fundamental(peaks, ideal, predicted[0].omega_predicted)
        aligned = analysis.match_modes(
            [m for m in analysis.ideal_as_predicted(ideal) if m.omega_ideal <= band], scaled
        )
        _note(
            f"fundamental_scale={scale:.6g} aligned_matched={len(aligned.matched)} "
            f"aligned_max_dev={aligned.max_deviation:.6g}"
        )
        _note(_rate_line(alpha))
    return 0


def cmd_warp_map(args) -> int:
    alphas = _alpha_list(args.alphas)
    if args.n_points < 2:
        raise ConfigError("--n-points must be >= 2")
    omega = np.linspace(0.0, math.pi, args.n_points)
    rows = []
    for a in alphas:
        wt = warp_frequency(omega, a)
        rows.extend((a, w, t) for w, t in zip(omega, wt))
    _emit(export.csv_text(("alpha", "omega", "omega_tilde"), rows), args.output)
    return 0


def cmd_cost(args) -> int:
    report = cost_report(default_basis(one_multiply=args.one_multiply))
    out = []
    if args.format in ("csv", "both"):
        out.append(report.csv())
    if args.format in ("table", "both"):
        out.append(report.table())
    _emit("\n".join(out), args.output)
    _note(_rate_line(args.alpha if args.alpha is not None else DEFAULT_ALPHA))
    return 0


def cmd_lattice(args) -> int:
    if args.side < 2:
        raise ConfigError("--side must be >= 2")
    lat = build_square_lattice(args.side)
    _emit(lattice_csv(lat), args.output)
    _note(f"junctions={lat.size} interior={lat.interior.size} rows={lat.n_rows} center={lat.center}")
    return 0


def _backend(args):
    b = getattr(args, "backend", "auto")
    return None if b == "auto" else b == "numba"


# --- parser --------------------------------------------------------------------------


def _add_common(p, scheme=True, alpha=True):
    p.add_argument("-o", "--output", default=None, help="output path (default stdout)")
    if scheme:
        p.add_argument("--scheme", default="twm", help="twm, fds, wtwm or wfds")
    if alpha:
        p.add_argument("--alpha", type=float, default=None, help="allpass coefficient in (-1, 0]")


def _add_mesh(p):
    p.add_argument("--side", type=int, default=24, help="membrane side in waveguide sections")
    p.add_argument("--steps", type=int, default=16384)
    p.add_argument("--fft-size", type=int, default=65536)
    p.add_argument("--backend", choices=("auto", "numba", "numpy"), default="auto")
    p.add_argument("--spectrum", default=None, help="also write omega,magnitude_db CSV here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="warpmesh", description=__doc__.splitlines()[0])
    parser.add_argument("--config", default=None, help="key = value file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="impulse response at a probe junction")
    _add_common(p)
    _add_mesh(p)
    p.add_argument("--in-junction", type=int, default=None)
    p.add_argument("--out-junction", type=int, default=None)
    p.add_argument("--wav", default=None, help="write a 16-bit mono WAV too")
    p.add_argument("--sample-rate", type=int, default=44100)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dispersion", help="speed ratio against nominal frequency")
    _add_common(p)
    p.add_argument("--direction", type=float, default=0.0, help="wavevector angle in degrees")
    p.add_argument("--n-points", type=int, default=512)
    p.set_defaults(func=cmd_dispersion)

    p = sub.add_parser("modes", help="measured membrane modes against theory")
    _add_common(p)
    _add_mesh(p)
    p.add_argument("--prominence", type=float, default=20.0, help="dB below the strongest peak")
    p.add_argument("--max-omega", type=float, default=None)
    p.set_defaults(func=cmd_modes)

    p = sub.add_parser("warp-map", help="warped frequency against frequency")
    _add_common(p, scheme=False, alpha=False)
    p.add_argument("--alphas", default=DEFAULT_ALPHAS, help="comma separated coefficients")
    p.add_argument("--n-points", type=int, default=256)
    p.set_defaults(func=cmd_warp_map)

    p = sub.add_parser("cost", help="per-junction cost at equal dispersion tolerance")
    _add_common(p, scheme=False)
    p.add_argument("--format", choices=("csv", "table", "both"), default="both")
    p.add_argument("--one-multiply", action="store_true", help="one-multiply allpass basis")
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("lattice", help="dump junction positions and neighbours")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--side", type=int, default=24)
    p.set_defaults(func=cmd_lattice)
    return parser


def read_config(path: str) -> dict[str, str]:
    values = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _apply_config(parser, args, argv):
    values = read_config(args.config)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, value in values.items():
        if key not in known or key in ("help", "func"):
            raise ConfigError(f"unknown config key {key!r} for {args.command}")
        action = known[key]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            defaults[key] = value
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
        if args.config:
            args = _apply_config(parser, args, argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"warpmesh: error: {exc}", file=sys.stderr)
        return 2
    except NumericalDomainError as exc:
        print(f"warpmesh: numerical domain error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
