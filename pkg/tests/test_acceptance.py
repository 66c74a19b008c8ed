"""Acceptance criteria, one or more tests per criterion.

Each test carries ``@pytest.mark.criterion(n, title)``; conftest prints a
PASS/FAIL line per criterion at the end of the run. Run just this file with
``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""
import itertools
import math
import time
from math import comb

import mpmath
import numpy as np
import pytest

from fpcodes.codes import (
    CodeParams,
    DecodeInfo,
    auxiliary_basis,
    decode,
    decode_layout,
    ep_decode,
    fpc_decode,
    fpc_encode,
    make_instance,
    matdot_decode,
    recovery_threshold,
    select_points,
    subset_is_decodable,
    worker_compute,
)
from fpcodes.errors import InsufficientResults, SingularRecoverySubset
from fpcodes.field import FieldSpec, sample_distinct_points
from fpcodes.folded import (
    Sign,
    coefficient_matrix,
    eval_matrix,
    eval_raw,
    omega,
    reduced_basis,
    span_dims,
    structured_basis,
    structured_det_prediction,
    symmetric_m1_basis,
    antisymmetric_m1_basis,
    term_of,
    term_poly,
)
from fpcodes.linalg import DenseMatrix, determinant, matmul, rank, rref, solve
from fpcodes.sim import (
    LatencyModel,
    condition_point_set,
    condition_sweep,
    sweep_stragglers,
)

Q = FieldSpec.rational()
F101 = FieldSpec.prime(101)
P31 = FieldSpec.prime(2**31 - 1)
GF8 = FieldSpec.binary(8)
R64 = FieldSpec.real64()
GRID4 = [(m, p) for m in range(1, 5) for p in range(1, 5)]
GRID6 = [(m, p) for m in range(1, 7) for p in range(1, 7)]
SUBSET_CAP = 500


def crit(n, title):
    return pytest.mark.criterion(n, title)


def rand(spec, r, c, rng):
    return DenseMatrix(spec, spec.random_array((r, c), rng), normalized=True)


def _omega_rank(m, p, spec, sign):
    polys = [term_of(y, m, p) for y in omega(m, p, sign)]
    return rank(coefficient_matrix(polys, spec)[0]) if polys else 0


# 1 ------------------------------------------------------------------------------

@crit(1, "threshold formula and rank cross-check, (m,p) in [1,6]^2")
def test_criterion_1_threshold():
    t0 = time.perf_counter()
    assert recovery_threshold("fpc", 1, 2) == 2
    assert recovery_threshold("fpc", 2, 2) == 7
    for p in range(1, 7):
        assert recovery_threshold("fpc", 1, p) == p
    for m, p in GRID6:
        R = recovery_threshold("fpc", m, p)
        dim_plus = span_dims(m, p, 0)[0]
        assert R == comb(m + 1, 2) + dim_plus
        assert R == comb(m + 1, 2) + _omega_rank(m, p, F101, Sign.PLUS)
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0, f"took {elapsed:.2f}s"


# 2 ------------------------------------------------------------------------------

@crit(2, "span dimensions equal exact ranks over F_101 and GF(2^8)")
def test_criterion_2_dimensions():
    t0 = time.perf_counter()
    bad = []
    for m, p in GRID6:
        for spec in (F101, GF8):
            want = span_dims(m, p, spec.characteristic)
            got = (_omega_rank(m, p, spec, Sign.PLUS), _omega_rank(m, p, spec, Sign.MINUS))
            if got != want:
                bad.append((m, p, str(spec), want, got))
    elapsed = time.perf_counter() - t0
    assert not bad
    assert elapsed < 10.0, f"took {elapsed:.2f}s"


# 3 ------------------------------------------------------------------------------

@crit(3, "closed-form determinants equal computed determinants, n in [1,8]")
def test_criterion_3_structured_determinants():
    t0 = time.perf_counter()
    for spec in (Q, P31):
        for n in range(1, 9):
            for trial in range(100):
                betas = sample_distinct_points(spec, n, "no_reciprocal_pairs", seed=1000 * n + trial)
                for kind in ("symmetric_m1", "antisymmetric_m1"):
                    M = eval_matrix(structured_basis(kind, n), betas)
                    assert structured_det_prediction(kind, betas) == determinant(M), (spec, n, trial, kind)
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0, f"took {elapsed:.2f}s"


# 4 ------------------------------------------------------------------------------

def _test_subsets(N, R, rng):
    if comb(N, R) <= SUBSET_CAP:
        return list(itertools.combinations(range(1, N + 1), R))
    seen = set()
    while len(seen) < SUBSET_CAP:
        seen.add(tuple(sorted(int(v) + 1 for v in rng.choice(N, size=R, replace=False))))
    return sorted(seen)


def _exact_recovery(spec, seed=0):
    rng = np.random.default_rng([seed, spec.characteristic])
    report = {}
    for m, p in GRID4:
        R = recovery_threshold("fpc", m, p)
        N = R + 3
        inst = select_points(CodeParams("fpc", m, p, N, spec), seed=seed, verify_budget=SUBSET_CAP)
        mats = [rand(spec, 4 * m, 6 * p, rng) for _ in range(5)]
        refs = [matmul(A, A.T) for A in mats]
        results = [[worker_compute(t) for t in fpc_encode(A, inst)] for A in mats]
        # an independent sample from the one used to certify the points
        subsets = _test_subsets(N, R, np.random.default_rng([seed, m, p, 77]))
        fails = 0
        for sub in subsets:
            for res, ref in zip(results, refs):
                try:
                    ok = fpc_decode([res[i - 1] for i in sub], inst) == ref
                except SingularRecoverySubset:
                    ok = False
                if not ok:
                    fails += 1
        report[(m, p)] = (inst.verified, len(subsets), fails)
    return report


@pytest.mark.slow
@pytest.mark.parametrize("spec", [P31, GF8], ids=str)
@crit(4, "exact end-to-end recovery, (m,p) in [1,4]^2, N=R+3")
def test_criterion_4_exact_recovery(spec):
    t0 = time.perf_counter()
    report = _exact_recovery(spec)
    elapsed = time.perf_counter() - t0
    failing = {k: v for k, v in report.items() if v[2]}
    assert not failing, f"{spec}: (verified, subsets, failed decodes) = {failing}"
    assert elapsed < 300.0, f"took {elapsed:.1f}s"


# 5 ------------------------------------------------------------------------------

def _left_null_vector(M: DenseMatrix):
    """Nonzero lam with lam^T M = 0, for a k x (k-1) matrix of rank k-1."""
    red, piv = rref(M.T)
    free = [c for c in range(M.rows) if c not in piv]
    f = free[0]
    lam = [Q.zero] * M.rows
    lam[f] = Q.one
    for r, c in enumerate(piv):
        lam[c] = -red[r, f]
    return lam


@crit(5, "threshold tightness at m=1: p-1 results never determine AA^T")
def test_criterion_5_tightness():
    rng = np.random.default_rng(5)
    for p in range(2, 7):
        basis = symmetric_m1_basis(p)
        for trial in range(100):
            pts = sample_distinct_points(Q, p + 1, "no_reciprocal_pairs", seed=100 * p + trial)
            inst = make_instance(CodeParams("fpc", 1, p, p + 1, Q), pts)
            A = rand(Q, 2, 2 * p, rng)
            ref = matmul(A, A.T)
            res = [worker_compute(t) for t in fpc_encode(A, inst)]
            order = [int(i) + 1 for i in rng.permutation(p + 1)]
            few, extra = order[: p - 1], order[p - 1]

            with pytest.raises((InsufficientResults, SingularRecoverySubset)):
                fpc_decode([res[i - 1] for i in few], inst)

            # the (0,0) entry: p unknown coefficients, only p-1 equations
            full = few + [extra]
            M = eval_matrix(basis, [inst.point(i) for i in full], Q)
            obs = DenseMatrix(Q, [[res[i - 1].C_tilde.data[0, 0]] for i in full])
            coeffs = solve(M.T, obs).data[:, 0]
            assert coeffs[0] == ref.data[0, 0]
            lam = _left_null_vector(eval_matrix(basis, [inst.point(i) for i in few], Q))
            cand = [c + v for c, v in zip(coeffs, lam)]
            for j, i in enumerate(few):
                assert sum(c * M.data[k, j] for k, c in enumerate(cand)) == obs.data[j, 0]
            assert cand[0] != ref.data[0, 0]
            # the candidate fails the check against one more worker
            assert sum(c * M.data[k, p - 1] for k, c in enumerate(cand)) != obs.data[p - 1, 0]

            assert fpc_decode([res[i - 1] for i in full], inst) == ref


# 6 ------------------------------------------------------------------------------

@pytest.mark.slow
@pytest.mark.parametrize("spec", [P31, GF8], ids=str)
@crit(6, "MatDot/EP reproduce the oracle; FPC decodes with fewer multiplications")
def test_criterion_6_baselines(spec):
    rng = np.random.default_rng([6, spec.characteristic])
    for m, p in GRID4:
        mats = [rand(spec, 4 * m, 6 * p, rng) for _ in range(5)]
        for scheme in ("ep", "matdot") if m == 1 else ("ep",):
            R = recovery_threshold(scheme, m, p)
            assert R == (2 * p - 1 if scheme == "matdot" else p * m * m + p - 1)
            N = R + 3
            inst = select_points(CodeParams(scheme, m, p, N, spec), seed=0)
            dec = matdot_decode if scheme == "matdot" else ep_decode
            for A in mats:
                res = [worker_compute(t) for t in fpc_encode(A, inst)]
                ref = matmul(A, A.T)
                for sub in _test_subsets(N, R, np.random.default_rng([m, p]))[:20]:
                    assert dec([res[i - 1] for i in sub], inst) == ref


@crit(6, "MatDot/EP reproduce the oracle; FPC decodes with fewer multiplications")
def test_criterion_6_counter_fidelity():
    rng = np.random.default_rng(60)
    A = rand(P31, 40, 8 * 8, rng)
    for p in range(2, 9):
        Ap = DenseMatrix(P31, A.data[:, : 8 * p], normalized=True)
        mults = {}
        for scheme in ("fpc", "matdot"):
            R = recovery_threshold(scheme, 1, p)
            inst = select_points(CodeParams(scheme, 1, p, R, P31), seed=0)
            info = DecodeInfo()
            res = [worker_compute(t) for t in fpc_encode(Ap, inst)]
            assert decode(res, inst, info=info) == matmul(Ap, Ap.T)
            mults[scheme] = info.counter.mults
        assert mults["fpc"] < mults["matdot"], (p, mults)


# 7 ------------------------------------------------------------------------------

@crit(7, "straggler sweep at desk scale: N=18, p=8, 120x150 real64")
def test_criterion_7_straggler_sweep():
    t0 = time.perf_counter()
    A = DenseMatrix(R64, np.random.default_rng(0).standard_normal((120, 150)), normalized=True)
    insts = {s: select_points(CodeParams(s, 1, 8, 18, R64), seed=0, verify_budget=200)
             for s in ("fpc", "matdot", "ep")}
    assert insts["fpc"].threshold == 8
    assert insts["matdot"].threshold == insts["ep"].threshold == 15
    slow = LatencyModel(base_unit=1e-3, slowdown=5, jitter=0.1, seed=0)
    rows = sweep_stragglers(A, [insts["fpc"]], range(11), slow)
    assert [r["status"] for r in rows] == ["ok"] * 11
    times = [float(r["overall_time"]) for r in rows]
    assert all(a <= b for a, b in zip(times, times[1:])), times

    stop = LatencyModel(base_unit=1e-3, slowdown=math.inf, jitter=0.1, seed=0)
    rows = sweep_stragglers(A, [insts["fpc"], insts["matdot"], insts["ep"]], range(11), stop)
    for r in rows:
        if r["scheme"] == "fpc" or r["s"] <= 3:
            assert r["status"] == "ok", r
        else:
            assert r["status"] == "straggler_overload", r
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0, f"took {elapsed:.1f}s"


# 8 ------------------------------------------------------------------------------

def _oracle_worst(points, p):
    """Largest sigma_max/sigma_min over every decode matrix, by 40-digit SVD."""
    mpmath.mp.dps = 40
    mats = [eval_raw(R64, symmetric_m1_basis(p), list(sub)).T for sub in itertools.combinations(points, p)]
    mats += [eval_raw(R64, antisymmetric_m1_basis(p - 1), list(sub)).T
             for sub in itertools.combinations(points, p - 1)]
    worst = mpmath.mpf(1)
    for M in mats:
        sv = mpmath.svd_r(mpmath.matrix(M.tolist()), compute_uv=False)
        vals = [abs(v) for v in sv]
        worst = max(worst, max(vals) / min(vals))
    return float(worst)


@pytest.mark.parametrize("s", [1, 2])
@crit(8, "worst condition number: finite, nondecreasing in p, matches SVD oracle")
def test_criterion_8_trend(s):
    rows = condition_sweep(range(2, 11), s)
    conds = [float(r["worst_cond"]) for r in rows]
    assert all(math.isfinite(c) for c in conds)
    assert all(a <= b for a, b in zip(conds, conds[1:])), dict(zip(range(2, 11), conds))


@pytest.mark.parametrize("s", [1, 2])
@crit(8, "worst condition number: finite, nondecreasing in p, matches SVD oracle")
def test_criterion_8_oracle(s):
    for p in range(2, 11):
        worst, pts = condition_point_set(p, s)
        ref = _oracle_worst(pts, p)
        assert abs(worst - ref) <= 1e-6 * ref, (p, worst, ref)


# 9 ------------------------------------------------------------------------------

@crit(9, "GF(2^8), m=p=2: special-loop term vanishes, auxiliary basis has 7 terms")
def test_criterion_9_gf256_special_loop():
    special = term_poly(1, 0, 1, 2, 2, Sign.PLUS)
    assert special.exponents == (4,)
    assert not special.over(GF8)
    assert special.over(F101)
    plus = reduced_basis(2, 2, 2, Sign.PLUS)
    assert all(y.triple != (1, 0, 1) for y in plus.kept_terms)
    assert len(plus.kept_terms) == 3
    inst = select_points(CodeParams("fpc", 2, 2, 10, GF8), seed=0)
    basis = auxiliary_basis(inst)
    assert len(basis) == 7 == inst.threshold
    assert len(decode_layout(2, 2, 2, "auxiliary").plus) == 7
    rng = np.random.default_rng(9)
    A = rand(GF8, 4, 4, rng)
    res = [worker_compute(t) for t in fpc_encode(A, inst)]
    assert fpc_decode(res[3:], inst) == matmul(A, A.T)
    assert subset_is_decodable(inst, range(4, 11))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
