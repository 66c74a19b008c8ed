"""Compiled kernels vs the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one row per kernel with the best-of-N time for each backend and the
speedup. Inputs are seeded so runs are comparable.
"""
import argparse
import timeit

import numpy as np

from fpcodes import codes, kernels
from fpcodes.codes import CodeParams, fpc_decode, fpc_encode, select_points, worker_compute
from fpcodes.field import FieldSpec
from fpcodes.linalg import DenseMatrix

Q31 = 2**31 - 1
GF8 = FieldSpec.binary(8)
GF16 = FieldSpec.binary(16)


def cases():
    rng = np.random.default_rng(0)
    a = rng.integers(0, Q31, size=(200, 200), dtype=np.int64)
    b = rng.integers(0, Q31, size=(200, 200), dtype=np.int64)
    g = rng.integers(0, 256, size=(200, 200), dtype=np.int64)
    h = rng.integers(0, 256, size=(200, 200), dtype=np.int64)
    w = rng.integers(0, 1 << 16, size=(120, 120), dtype=np.int64)
    sq = rng.integers(0, Q31, size=(80, 80), dtype=np.int64)
    gsq = rng.integers(0, 256, size=(60, 60), dtype=np.int64)
    real = rng.standard_normal((40, 40))

    prm = CodeParams("fpc", 3, 3, 25, GF8)
    inst = select_points(prm, seed=0, verify_budget=0)
    A = DenseMatrix(GF8, GF8.random_array((30, 30), rng), normalized=True)
    res = [worker_compute(t) for t in fpc_encode(A, inst)]

    def decode_fresh():
        codes.clear_plan_cache()
        fpc_decode(res, inst)

    return [
        ("mod_matmul 200x200 q=2^31-1", lambda: kernels.mod_matmul(a, b, Q31)),
        ("gf2_matmul 200x200 w=8", lambda: kernels.gf2_matmul(g, h, 8, GF8.poly)),
        ("gf2_matmul 120x120 w=16", lambda: kernels.gf2_matmul(w, w, 16, GF16.poly)),
        ("mod_rref 80x80", lambda: kernels.mod_rref(sq, Q31, 80)),
        ("gf2_rref 60x60 w=8", lambda: kernels.gf2_rref(gsq, 8, GF8.poly, 60)),
        ("jacobi_svd 40x40", lambda: kernels.jacobi_singular_values(real)),
        ("fpc_decode m=3 p=3 gf2:8", decode_fresh),
    ]


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not kernels.compiled_available():
        print("compiled extension not built; only the fallback can run")
        return 1
    old = kernels.BACKEND
    print(f"{'kernel':32s} {'compiled':>12s} {'python':>12s} {'speedup':>8s}")
    for name, fn in cases():
        t = {}
        for backend in ("compiled", "python"):
            kernels.use_backend(backend)
            fn()  # warm caches (log tables, plans)
            t[backend] = best(fn, args.repeat)
        print(f"{name:32s} {t['compiled'] * 1e3:10.2f}ms {t['python'] * 1e3:10.2f}ms "
              f"{t['python'] / t['compiled']:7.1f}x")
    kernels.use_backend(old)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
