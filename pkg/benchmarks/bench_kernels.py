"""Compare the numba and numpy backends of the hot kernels.

    python3 benchmarks/bench_kernels.py [--n 48] [--repeats 5]

Both backends run in one process: the backend flag is switched between
measurements, and each numba kernel is called once before timing so that
compilation is excluded. Results are best-of-``repeats`` milliseconds.
"""
import argparse
import timeit

import numpy as np

from cvples import _jit
from cvples.cases import HelixParams, TgvParams, biot_savart_velocity, helix_curve, init_tgv
from cvples.compact import gradient, solution_filter
from cvples.filters import TestFilterSpec, apply_test_filter
from cvples.sgs import SgsModelConfig
from cvples.cvp import CvpConfig
from cvples.solver import FlowPipeline, compute_primitives, rk3_step, total_fluxes


def cases(n):
    p = TgvParams()
    th = p.thermo()
    g = p.grid(n)
    state = init_tgv(g, p, th)
    u = state.q[1:4] / state.q[0]
    prims = compute_primitives(state.q, g, th)
    mut = np.full(g.shape, 1e-4)
    pipe = FlowPipeline(g, th, SgsModelConfig("smagorinsky"), CvpConfig())
    hp = HelixParams(samples_per_turn=256, image_layers=2)
    X, T, w = helix_curve(hp)
    pts = np.random.default_rng(0).uniform(0.0, 0.5, size=(n * n, 3))
    return {
        "gradient (3 components)": lambda: gradient(u, g),
        "solution filter (5 fields)": lambda: solution_filter(state.q),
        "IMPL6 test filter": lambda: apply_test_filter(u[0], TestFilterSpec("IMPL6")),
        "flux divergence": lambda: total_fluxes(state.q, prims, th, mut),
        "RK3 step, CvP-Smagorinsky": lambda: rk3_step(state, 1e-3, pipe),
        f"Biot-Savart, {n * n} points": lambda: biot_savart_velocity(pts, X, T, w, hp.gamma_circ, hp.r_c),
    }


def best_ms(fn, repeats):
    fn()  # warm-up (compilation for numba)
    number = 1
    while timeit.timeit(fn, number=number) < 0.2 and number < 64:
        number *= 2
    return 1e3 * min(timeit.repeat(fn, number=number, repeat=repeats)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=48, help="grid points per axis")
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args(argv)
    if not _jit.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    timings = {}
    for flag in (True, False):
        _jit.USE_NUMBA = flag
        for name, fn in cases(args.n).items():
            timings.setdefault(name, {})[flag] = best_ms(fn, args.repeats)
    _jit.USE_NUMBA = True

    print(f"grid {args.n}^3, best of {args.repeats}")
    print(f"{'kernel':<30} {'numba ms':>10} {'numpy ms':>10} {'speed-up':>9}")
    for name, t in timings.items():
        print(f"{name:<30} {t[True]:>10.2f} {t[False]:>10.2f} {t[False] / t[True]:>8.1f}x")


if __name__ == "__main__":
    main()
