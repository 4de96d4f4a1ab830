"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from ionforge import _pykernels
from ionforge.kernels import available_backends


def cases(mod):
    rng = np.random.default_rng(0)
    dim = 3**6 * 4
    amps = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    lower = np.arange(0, dim // 2, dtype=np.int64)
    upper = lower + dim // 2
    theta = rng.uniform(0, np.pi, lower.size)
    cos_half, sin_half = np.cos(theta / 2), np.sin(theta / 2)
    phase = np.exp(0.7j)
    u = np.linspace(-4, 4, 20)
    uniform = rng.random(200_000)
    means = np.where(rng.random(200_000) < 0.5, 50.0, 1.0)
    return {
        "rotate_pairs": lambda: mod.rotate_pairs(amps, lower, upper, cos_half, sin_half, phase),
        "coulomb_system": lambda: mod.coulomb_system(u),
        "poisson_inverse_cdf": lambda: mod.poisson_inverse_cdf(uniform, means),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    mods = available_backends()
    if "cython" not in mods:
        print("compiled extension not built; timing the pure-Python backend only")
    timings = {}
    for name, mod in mods.items():
        for case, fn in cases(mod).items():
            number = 3 if case == "poisson_inverse_cdf" else 200
            t = min(timeit.repeat(fn, number=number, repeat=args.repeat)) / number
            timings[(case, name)] = t
    print(f"{'kernel':<22}{'backend':<10}{'time/call':>14}{'speedup':>10}")
    for case in cases(_pykernels):
        base = timings[(case, "python")]
        for name in mods:
            t = timings[(case, name)]
            print(f"{case:<22}{name:<10}{t * 1e6:>11.1f} us{base / t:>9.1f}x")


if __name__ == "__main__":
    main()
