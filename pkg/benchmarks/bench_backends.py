"""Wall-clock comparison of the numba kernels and their numpy twins.

Run with ``python3 benchmarks/bench_backends.py [--repeat N]``.  Each
workload is run once on each backend to warm up (and, for numba, to compile
or load the on-disk cache) and then timed ``--repeat`` times; the best time is
reported together with the largest difference between the two backends'
outputs.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from lyapjulia import _accel
from lyapjulia.measure import ProbabilityVector, sample_weighted_lyubich
from lyapjulia.polynomial import PolynomialSpec
from lyapjulia.render import Viewport, render_julia
from lyapjulia.rootfinder import roots_batch
from lyapjulia.series import CoefficientTable, SeriesTruncation


def _roots():
    rng = np.random.default_rng(1)
    c = rng.normal(size=(20_000, 5)) + 1j * rng.normal(size=(20_000, 5))
    c[:, -1] = 1.0
    z, _, _ = roots_batch(c)
    return np.sort_complex(z)


def _chains():
    spec = PolynomialSpec(3, (0.1, 0.1j))
    mu = sample_weighted_lyubich(spec, ProbabilityVector((0.5, 0.3, 0.2)), 4096, burn_in=60, seed=3)
    return mu.points


def _series():
    z = np.exp(1j * np.linspace(0, 2 * np.pi, 4000, endpoint=False))
    tab = CoefficientTable(3, z, SeriesTruncation.for_tolerance(3))
    return np.concatenate([tab.phi_r2(0), tab.phi_rs(0, 1)])


def _render():
    spec = PolynomialSpec(2, (0.1,))
    return render_julia(spec, Viewport(0j, 1.5, 200, 200), 200).counts


WORKLOADS = {
    "roots_batch   20000 x deg 4": _roots,
    "backward chains 4096 x 60": _chains,
    "series 2nd order 4000 pts": _series,
    "render 200x200, 200 iters": _render,
}


def _time(fn, repeat: int):
    out = fn()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'workload':<30} {'numba [s]':>10} {'numpy [s]':>10} {'speedup':>8} {'max |diff|':>11}")
    for name, fn in WORKLOADS.items():
        with _accel.use_backend("numba"):
            t_nb, out_nb = _time(fn, args.repeat)
        with _accel.use_backend("numpy"):
            t_np, out_np = _time(fn, args.repeat)
        diff = float(np.max(np.abs(np.asarray(out_nb) - np.asarray(out_np))))
        print(f"{name:<30} {t_nb:>10.4f} {t_np:>10.4f} {t_np / t_nb:>8.1f} {diff:>11.2e}")


if __name__ == "__main__":
    main()
