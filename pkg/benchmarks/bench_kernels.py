"""Compare the numba and numpy backends on the 24x24 impulse-response run.

    python3 benchmarks/bench_kernels.py --steps 16384 --repeat 3
"""

import argparse
import time

import numpy as np

from warpmesh import kernels
from warpmesh.lattice import build_square_lattice
from warpmesh.sim import Scheme, run_impulse_response


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--side", type=int, default=24)
    ap.add_argument("--steps", type=int, default=16384)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    lat = build_square_lattice(args.side)
    print(f"lattice {args.side}x{args.side}: {lat.size} junctions, {args.steps} steps")
    print(f"{'scheme':>6} {'numba s':>9} {'numpy s':>9} {'speedup':>8} {'max |diff|':>11}")
    for scheme in Scheme:
        alpha = -0.45 if scheme.warped else None
        run_np = lambda: run_impulse_response(lat, scheme, alpha, args.steps, use_numba=False).samples
        t_np, ref = best_time(run_np, args.repeat)
        if kernels.NUMBA_ENABLED:
            run_nb = lambda: run_impulse_response(lat, scheme, alpha, args.steps, use_numba=True).samples
            run_nb()  # compile
            t_nb, out = best_time(run_nb, args.repeat)
            diff = float(np.max(np.abs(out - ref)))
            print(f"{scheme.value:>6} {t_nb:9.3f} {t_np:9.3f} {t_np / t_nb:8.1f} {diff:11.1e}")
        else:
            print(f"{scheme.value:>6} {'-':>9} {t_np:9.3f} {'-':>8} {'-':>11}")


if __name__ == "__main__":
    main()
