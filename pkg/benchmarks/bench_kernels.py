"""Compare the compiled and numpy Bessel-K kernels, and one E-step under each.

    python benchmarks/bench_kernels.py [--n 20000] [--repeat 5]

Prints the best-of-``repeat`` time per call and the compiled speed-up. Also
reports the largest relative disagreement between the two backends, since
a fast kernel that drifts is not useful.
"""

import argparse
import timeit

import numpy as np

from vgmix import _backend
from vgmix.distributions import VGComponent, VGMixtureModel
from vgmix.em import e_step
from vgmix.simulate import make_rng, sample_mixture

ORDERS = (-0.7, 0.3, 1.0, 4.5, 60.0)


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def _rel(a, b):
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a))))


def bench_kernels(x, repeat):
    py, cy = _backend.python_kernels, _backend.compiled_kernels
    print(f"{'kernel':<20}{'nu':>7}{'python ms':>12}{'cython ms':>12}{'speed-up':>10}{'max rel diff':>15}")
    for name in ("log_bessel_k", "bessel_k_ratio", "dlog_bessel_k_dnu", "latent_terms"):
        for nu in ORDERS:
            f_py, f_cy = getattr(py, name), getattr(cy, name)
            t_py = _best(lambda: f_py(nu, x), repeat)
            t_cy = _best(lambda: f_cy(nu, x), repeat)
            a, b = f_py(nu, x), f_cy(nu, x)
            if isinstance(a, tuple):
                diff = max(_rel(u, v) for u, v in zip(a, b))
            else:
                diff = _rel(a, b)
            print(f"{name:<20}{nu:>7}{1e3 * t_py:>12.2f}{1e3 * t_cy:>12.2f}"
                  f"{t_py / t_cy:>10.1f}{diff:>15.2e}")


def bench_estep(n, repeat):
    comps = [VGComponent(2.0, [0.0, 0.0], np.eye(2), [1.0, 0.0]),
             VGComponent(0.8, [6.0, 6.0], np.array([[1.0, 0.3], [0.3, 1.0]]), [0.0, -1.0])]
    model = VGMixtureModel([0.5, 0.5], comps)
    data, _ = sample_mixture(model, n, make_rng(0))
    saved = _backend.kernels
    times = {}
    try:
        for label, k in (("python", _backend.python_kernels), ("cython", _backend.compiled_kernels)):
            _backend.kernels = k
            times[label] = _best(lambda: e_step(data, model), repeat)
    finally:
        _backend.kernels = saved
    print(f"\ne_step, n={n}, G=2, p=2: python {1e3 * times['python']:.1f} ms, "
          f"cython {1e3 * times['cython']:.1f} ms, speed-up {times['python'] / times['cython']:.1f}x")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20000, help="points per kernel call")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _backend.compiled_kernels is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")
    rng = np.random.default_rng(1)
    x = np.exp(rng.uniform(np.log(1e-3), np.log(50.0), args.n))
    bench_kernels(x, args.repeat)
    bench_estep(args.n, args.repeat)


if __name__ == "__main__":
    main()
