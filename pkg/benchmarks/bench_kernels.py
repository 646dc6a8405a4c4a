"""Timing of the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--n 4096] [--repeat 20]
"""
import argparse
import timeit

import numpy as np

from maxvel import kernels


def cases(n, rng):
    c = lambda *s: rng.standard_normal(s) + 1j * rng.standard_normal(s)
    hv, cur, prev, accs = c(n), c(n), c(n), c(6, n)
    coefs = rng.standard_normal(6)
    coef, freq, y = c(256), rng.uniform(-8, 8, 256), rng.uniform(-4, 4, n)
    u = c(n)
    return {
        "cheb_step": (lambda: kernels.cheb_step_numpy(hv.copy(), cur, prev.copy(), 1.7, 0.3, coefs, accs, True),
                      lambda: kernels.cheb_step_numba(hv.copy(), cur, prev.copy(), 1.7, 0.3, coefs, accs, True)),
        "odd_project": (lambda: kernels.odd_project_numpy(u.copy()),
                        lambda: kernels.odd_project_numba(u.copy())),
        "trig_eval": (lambda: kernels.trig_eval_numpy(coef, freq, y),
                      lambda: kernels.trig_eval_numba(coef, freq, y)),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<12} {'numpy [ms]':>11} {'numba [ms]':>11} {'speedup':>8}")
    for name, (f_np, f_nb) in cases(args.n, rng).items():
        f_nb()  # compile outside the timing
        t_np = min(timeit.repeat(f_np, number=1, repeat=args.repeat)) * 1e3
        t_nb = min(timeit.repeat(f_nb, number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<12} {t_np:11.3f} {t_nb:11.3f} {t_np / t_nb:8.2f}")


if __name__ == "__main__":
    main()
