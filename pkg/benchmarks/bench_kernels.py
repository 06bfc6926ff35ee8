"""Compare the compiled kernels with the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--nodes N] [--repeat R]
"""
import argparse
import logging
import timeit

import numpy as np

from lattice_wh import _kernels_py
from lattice_wh.quadrature import contour_nodes

logger = logging.getLogger(__name__)


def load_compiled():
    try:
        from lattice_wh import _kernels
        return _kernels
    except ImportError:
        return None


def cases(nodes: int):
    x, w = contour_nodes(nodes, 0.1)
    z = -(1.5 ** 2 - 4.0 + x + 1.0 / x) / 2.0
    roots = 0.9 * np.exp(1j * np.linspace(0.1, 3.0, 20))
    F = np.vstack([np.cos(k * np.angle(x)) + 1j * np.sin(x) for k in range(40)])
    return {
        "cheb_v_table(kmax=40)": lambda mod: mod.cheb_v_table(z, 40),
        "contour_moments(rows=40, mmax=60)": lambda mod: mod.contour_moments(F, w, x, 60),
        "pair_product(J=20)": lambda mod: mod.pair_product(x, roots, 1.0 / roots),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--nodes", type=int, default=4096)
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args(argv)
    compiled = load_compiled()
    if compiled is None:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation`")
    print(f"{'kernel':38s} {'numpy [ms]':>12s} {'cython [ms]':>12s} {'speed-up':>9s} {'rel diff':>10s}")
    for name, fn in cases(args.nodes).items():
        t_py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        if compiled is None:
            print(f"{name:38s} {t_py:12.3f} {'-':>12s} {'-':>9s} {'-':>10s}")
            continue
        t_c = min(timeit.repeat(lambda: fn(compiled), number=1, repeat=args.repeat)) * 1e3
        ref = fn(_kernels_py)
        diff = float(np.max(np.abs(ref - fn(compiled)) / np.maximum(np.abs(ref), 1.0)))
        print(f"{name:38s} {t_py:12.3f} {t_c:12.3f} {t_py / t_c:9.2f} {diff:10.1e}")


if __name__ == "__main__":
    main()
