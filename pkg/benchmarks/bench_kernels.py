"""Compiled kernels vs the pure-Python fallback on representative workloads.

    python benchmarks/bench_kernels.py [--repeat 3]

Each workload runs under both backends; results must agree exactly.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from paramodular import kernels
from paramodular.jacobi import cusp_basis_from_generators
from paramodular.series import LaurentPoly, lp_divide
from paramodular.theta import tb_enumerate, tb_expand


def _theta_expand():
    return tb_expand("0^4 1^2 2^2 3^2 4^2 5^2 6^2 7^1 8^2 9^1 10^1 11^1 12^1 13^1 14^1 18^1", 40)


def _enumerate():
    return [str(b) for b in tb_enumerate(2, 249, 1, allow_denominator=True)]


def _conv():
    rng = np.random.default_rng(0)
    a = rng.integers(-50, 50, size=(40, 200), dtype=np.int64)
    b = rng.integers(-50, 50, size=(40, 200), dtype=np.int64)
    return kernels.conv2d(a, b, 40)


def _divide():
    b = LaurentPoly({r: 1 for r in range(-30, 31, 3)}) * LaurentPoly({0: 1, 7: -1})
    a = b * LaurentPoly({r: (r * 7919) % 23 - 11 for r in range(-400, 401)}) + LaurentPoly({5: 1})
    return [lp_divide(a, b) for _ in range(20)][-1]


def _cusp_basis():
    return [e.series.coeff(3, 1) for e in cusp_basis_from_generators(12, 16, 6).elements]


WORKLOADS = [
    ("theta block expansion (index 747, q^40)", _theta_expand),
    ("theta block enumeration (k=2, m=249)", _enumerate),
    ("2-D convolution 40x200", _conv),
    ("Laurent division", _divide),
    ("cusp basis J_{12,16} via generators", _cusp_basis),
]


def _same(x, y) -> bool:
    if isinstance(x, np.ndarray):
        return np.array_equal(np.asarray(x, dtype=object), np.asarray(y, dtype=object))
    return x == y


def run(repeat: int = 3) -> list[tuple[str, float, float | None]]:
    rows = []
    backends = ["python"] + (["cython"] if kernels._c is not None else [])
    for name, fn in WORKLOADS:
        best, results = {}, {}
        for be in backends:
            kernels.set_backend(be)
            ts = []
            for _ in range(repeat):
                t0 = time.perf_counter()
                results[be] = fn()
                ts.append(time.perf_counter() - t0)
            best[be] = min(ts)
        kernels.set_backend(backends[-1])
        if len(backends) == 2 and not _same(results["python"], results["cython"]):
            raise AssertionError(f"backends disagree on {name}")
        rows.append((name, best["python"], best.get("cython")))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"{'workload':45s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for name, tp, tc in run(args.repeat):
        if tc is None:
            print(f"{name:45s} {tp:10.4f} {'n/a':>10s} {'':>8s}")
        else:
            print(f"{name:45s} {tp:10.4f} {tc:10.4f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
