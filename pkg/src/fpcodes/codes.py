"""Folded polynomial codes for AA^T plus MatDot and entangled-polynomial baselines."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np

from .errors import (
    FormatError,
    InsufficientResults,
    MixedField,
    PointSelectionFailed,
    ShapeMismatch,
    SingularMatrix,
    SingularRecoverySubset,
)
from .field import FieldElement, FieldSpec, sample_distinct_points
from .folded import (
    Sign,
    TermPoly,
    chi,
    eval_raw,
    power_table,
    reduced_basis,
    sigma1,
    sigma2,
    term_of,
    term_poly,
)
from .linalg import (
    DenseMatrix,
    OpCounter,
    condition_number_raw,
    independent_rows,
    inverse_raw,
    matmul_raw,
    partition,
)

SCHEMES = ("fpc", "matdot", "ep")
VERIFY_MODES = ("exhaustive", "sampled", "lazy")
ROUTES = ("auto", "symmetric", "auxiliary")
DEFAULT_ROUNDS = 64


def recovery_threshold(scheme: str, m: int, p: int) -> int:
    if m < 1 or p < 1:
        raise ValueError("m and p must be positive")
    if scheme == "fpc":
        return comb(m + 1, 2) + ((p - 1) * (2 * m * m - m + 1) + chi(m) * chi(p)) // 2
    if scheme == "matdot":
        if m != 1:
            raise ValueError("matdot is defined here for m = 1 only")
        return 2 * p - 1
    if scheme == "ep":
        return p * m * m + p - 1
    raise ValueError(f"unknown scheme {scheme!r}")


@dataclass(frozen=True)
class CodeParams:
    scheme: str
    m: int
    p: int
    N: int
    spec: FieldSpec

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.m < 1 or self.p < 1:
            raise ValueError("m and p must be positive")
        if self.scheme == "matdot" and self.m != 1:
            raise ValueError("matdot requires m = 1")
        if self.N < self.threshold:
            raise ValueError(f"N={self.N} is below the recovery threshold {self.threshold}")

    @property
    def threshold(self) -> int:
        return recovery_threshold(self.scheme, self.m, self.p)


@dataclass(frozen=True)
class CodeInstance:
    params: CodeParams
    points: tuple  # FieldElement, worker i uses points[i-1]
    verified: str
    threshold: int

    @property
    def spec(self) -> FieldSpec:
        return self.params.spec

    @property
    def N(self) -> int:
        return self.params.N

    @property
    def raw_points(self) -> list:
        return [x.value for x in self.points]

    def point(self, worker_id: int):
        return self.points[worker_id - 1].value


@dataclass(frozen=True)
class EncodedTask:
    worker_id: int
    A_tilde: DenseMatrix
    B_tilde: DenseMatrix


@dataclass(frozen=True)
class WorkerResult:
    worker_id: int
    C_tilde: DenseMatrix


@dataclass
class DecodeInfo:
    """Side data a decoder can fill in: subset used, op counts, conditioning."""

    subset: tuple = ()
    route: str = ""
    counter: OpCounter = dc_field(default_factory=OpCounter)
    conds: dict = dc_field(default_factory=dict)


# instances -------------------------------------------------------------------

def _check_points(params: CodeParams, raw: list):
    spec = params.spec
    if len(raw) != params.N:
        raise ValueError(f"expected {params.N} points, got {len(raw)}")
    if len(set(raw)) != len(raw):
        raise ValueError("evaluation points must be pairwise distinct")
    if params.scheme == "fpc" and params.m == 1:
        for i in range(len(raw)):
            for j in range(i, len(raw)):
                if spec.mul(raw[i], raw[j]) == spec.one:
                    raise ValueError(f"points {i + 1} and {j + 1} multiply to 1")


def make_instance(params: CodeParams, points: Sequence, verified: str = "lazy") -> CodeInstance:
    """Wrap explicit points (e.g. Chebyshev nodes) into an instance without verification."""
    if verified not in VERIFY_MODES:
        raise ValueError(f"unknown verification mode {verified!r}")
    raw = []
    for x in points:
        if isinstance(x, FieldElement) and x.spec != params.spec:
            raise MixedField(f"point in {x.spec}, expected {params.spec}")
        raw.append(params.spec.normalize(x))
    _check_points(params, raw)
    pts = tuple(FieldElement(params.spec, v) for v in raw)
    return CodeInstance(params, pts, verified, params.threshold)


def chebyshev_points(n: int) -> list[float]:
    return [float(np.cos((2 * i - 1) * np.pi / (2 * n))) for i in range(1, n + 1)]


def _subsets(N: int, R: int, budget: int, rng: np.random.Generator):
    total = comb(N, R)
    if total <= budget:
        return "exhaustive", itertools.combinations(range(1, N + 1), R)
    seen = set()
    out = []
    while len(out) < budget:
        s = tuple(sorted(int(v) + 1 for v in rng.choice(N, size=R, replace=False)))
        if s not in seen:
            seen.add(s)
            out.append(s)
    return "sampled", out


def _round_seed(seed: int, rnd: int) -> int:
    return int(np.random.SeedSequence([seed, rnd]).generate_state(1)[0])


def select_points(
    params: CodeParams,
    seed: int = 0,
    verify_budget: int = 10_000,
    max_rounds: int = DEFAULT_ROUNDS,
) -> CodeInstance:
    """Pick N evaluation points and certify decodability of recovery subsets.

    Every decode matrix of every subset is checked when there are at most
    ``verify_budget`` subsets, otherwise ``verify_budget`` random subsets;
    ``verify_budget=0`` skips checks (decoders then verify lazily).
    """
    spec = params.spec
    R = params.threshold
    if params.scheme in ("matdot", "ep"):
        # Vandermonde on distinct points: every subset is invertible
        pts = sample_distinct_points(spec, params.N, "none", seed)
        return CodeInstance(params, tuple(pts), "exhaustive", R)
    constraint = "no_reciprocal_pairs" if params.m == 1 else "none"
    return _verify_or_retry(params, seed, verify_budget, max_rounds, constraint)


def _verify_or_retry(params, seed, verify_budget, max_rounds, constraint) -> CodeInstance:
    spec = params.spec
    R = params.threshold
    for rnd in range(max_rounds):
        pts = sample_distinct_points(spec, params.N, constraint, seed if rnd == 0 else _round_seed(seed, rnd))
        inst = CodeInstance(params, tuple(pts), "lazy", R)
        if verify_budget <= 0:
            return inst
        rng = np.random.default_rng(_round_seed(seed, 10_000 + rnd))
        mode, subsets = _subsets(params.N, R, verify_budget, rng)
        if all(subset_is_decodable(inst, s) for s in subsets):
            return CodeInstance(params, inst.points, mode, R)
    raise PointSelectionFailed(
        f"no verified point set for {params.scheme} m={params.m} p={params.p} N={params.N} "
        f"over {spec} after {max_rounds} rounds"
    )


def subset_is_decodable(instance: CodeInstance, subset: Sequence[int], route: str = "auto") -> bool:
    try:
        _plan(instance, tuple(sorted(subset)), _resolve_route(instance, route))
    except SingularRecoverySubset:
        return False
    return True


# encoding --------------------------------------------------------------------

def f_exponents(m: int, p: int) -> list[list[int]]:
    """Exponent of A_{k,j} in f_A."""
    return [[k * p + j for j in range(p)] for k in range(m)]


def g_exponents(m: int, p: int) -> list[list[int]]:
    """Exponent of A_{s,i}^T in g_A."""
    return [[s * m * p + p - 1 - i for i in range(p)] for s in range(m)]


def _encode_blocks(spec, stacked: np.ndarray, exps: list[int], raw_points: list) -> np.ndarray:
    """sum_c stacked[c] * x^exps[c] at every point: (npoints, br, bc)."""
    top = max(exps)
    pw = power_table(spec, raw_points, top)  # (top+1, N)
    coeff = np.ascontiguousarray(pw[exps].T)  # (N, mp)
    nb, br, bc = stacked.shape
    flat = np.ascontiguousarray(stacked.reshape(nb, br * bc))
    return matmul_raw(spec, coeff, flat).reshape(len(raw_points), br, bc)


def fpc_encode(A: DenseMatrix, instance: CodeInstance) -> list[EncodedTask]:
    """Encoded inputs f_A(alpha_i), g_A(alpha_i) for every worker.

    Evaluation is one product of the point-power matrix with the stacked
    blocks, i.e. all workers' Horner sums at once.
    """
    spec = instance.spec
    if A.spec != spec:
        raise MixedField(f"matrix over {A.spec}, instance over {spec}")
    m, p = instance.params.m, instance.params.p
    grid = partition(A, m, p)
    blocks = [grid.block(k, j).data for k in range(m) for j in range(p)]
    stacked = np.stack(blocks)
    stacked_t = np.stack([b.T for b in blocks])
    fe = [e for row in f_exponents(m, p) for e in row]
    ge = [e for row in g_exponents(m, p) for e in row]
    raw = instance.raw_points
    At = _encode_blocks(spec, stacked, fe, raw)
    Bt = _encode_blocks(spec, stacked_t, ge, raw)
    return [
        EncodedTask(i + 1, DenseMatrix(spec, np.ascontiguousarray(At[i]), normalized=True),
                    DenseMatrix(spec, np.ascontiguousarray(Bt[i]), normalized=True))
        for i in range(len(raw))
    ]


matdot_encode = fpc_encode
ep_encode = fpc_encode


def worker_compute(task: EncodedTask) -> WorkerResult:
    a, b = task.A_tilde, task.B_tilde
    if a.cols != b.rows:
        raise ShapeMismatch(f"worker {task.worker_id}: {a.shape} x {b.shape}")
    return WorkerResult(task.worker_id, a @ b)


# decode layout ---------------------------------------------------------------

@dataclass(frozen=True)
class DecodeLayout:
    """Term bases the decoder reconstructs against.

    ``plus`` lists the square system's terms: m diagonal C monomials, the
    C(m,2) off-diagonal C terms, the reduced plus basis and, for the auxiliary
    route in characteristic 2 with m and p even, one extra monomial. ``minus``
    lists the off-diagonal minus C terms followed by the reduced minus basis;
    ``h_exps`` are the second exponents of those minus terms.
    """

    m: int
    p: int
    route: str
    plus: tuple
    plus_labels: tuple
    minus: tuple
    minus_labels: tuple
    h_exps: tuple
    pairs: tuple  # (k, s) with s < k, in the order used above

    @property
    def n_c(self) -> int:
        return self.m + len(self.pairs)


@lru_cache(maxsize=None)
def decode_layout(m: int, p: int, characteristic: int, route: str) -> DecodeLayout:
    if route == "symmetric" and characteristic == 2:
        raise ValueError("the symmetric route needs characteristic != 2")
    pairs = tuple((k, s) for k in range(m) for s in range(k))
    plus = [TermPoly.monomial(sigma1(k, k, 0, m, p)) for k in range(m)]
    plus_labels = [("C", k, k) for k in range(m)]
    plus += [term_poly(k, s, 0, m, p, Sign.PLUS) for k, s in pairs]
    plus_labels += [("C", k, s) for k, s in pairs]
    g1 = reduced_basis(m, p, characteristic, Sign.PLUS)
    plus += [term_of(y, m, p) for y in g1.kept_terms]
    plus_labels += [("B",) + y.triple for y in g1.kept_terms]
    if route == "auxiliary" and characteristic == 2 and chi(m) and chi(p):
        head = (m - 1, m // 2 - 1, p // 2)
        plus.append(TermPoly.monomial(sigma2(*head, m, p)))
        plus_labels.append(("E",) + head)
    minus = [term_poly(k, s, 0, m, p, Sign.MINUS) for k, s in pairs]
    minus_labels = [("C", k, s) for k, s in pairs]
    h_exps = [sigma2(k, s, 0, m, p) for k, s in pairs]
    g2 = reduced_basis(m, p, characteristic, Sign.MINUS)
    minus += [term_of(y, m, p) for y in g2.kept_terms]
    minus_labels += [("B",) + y.triple for y in g2.kept_terms]
    h_exps += [sigma2(*y.triple, m, p) for y in g2.kept_terms]
    return DecodeLayout(m, p, route, tuple(plus), tuple(plus_labels), tuple(minus),
                        tuple(minus_labels), tuple(h_exps), pairs)


def auxiliary_basis(instance: CodeInstance) -> list[TermPoly]:
    """Terms of the polynomial [fg]_ij + [h]_ij reconstructed on the auxiliary route."""
    p = instance.params
    return [g.over(p.spec) for g in decode_layout(p.m, p.p, p.spec.characteristic, "auxiliary").plus]


def _resolve_route(instance: CodeInstance, route: str) -> str:
    if route not in ROUTES:
        raise ValueError(f"unknown decode route {route!r}")
    if route == "auto":
        return "auxiliary" if instance.spec.characteristic == 2 else "symmetric"
    if route == "symmetric" and instance.spec.characteristic == 2:
        raise ValueError("the symmetric route needs characteristic != 2")
    return route


@dataclass(frozen=True)
class _Plan:
    layout: DecodeLayout
    vinv_c: np.ndarray  # first n_c rows of the inverse of the plus/big matrix
    minus_rows: tuple  # pivot rows of the tall minus system
    winv: np.ndarray  # inverse of the minus matrix restricted to minus_rows
    h_eval: np.ndarray | None  # (R, K-) monomials for the auxiliary polynomial
    conds: dict
    plus_size: int
    minus_size: int


@lru_cache(maxsize=32)
def _full_eval(instance: CodeInstance, route: str):
    """Basis evaluations at all N points (rows = workers), shared by every subset."""
    prm = instance.params
    spec = prm.spec
    layout = decode_layout(prm.m, prm.p, spec.characteristic, route)
    pts = instance.raw_points
    top = max([g.degree for g in layout.plus + layout.minus] + list(layout.h_exps) + [0])
    pw = power_table(spec, pts, top)
    V = np.ascontiguousarray(eval_raw(spec, layout.plus, pts, pw).T)
    W = np.ascontiguousarray(eval_raw(spec, layout.minus, pts, pw).T)
    H = np.ascontiguousarray(pw[list(layout.h_exps)].T) if layout.h_exps else spec.zeros((len(pts), 0))
    return layout, V, W, H


@lru_cache(maxsize=512)
def _plan(instance: CodeInstance, subset: tuple, route: str) -> _Plan:
    spec = instance.spec
    layout, Vall, Wall, Hall = _full_eval(instance, route)
    sel = [i - 1 for i in subset]
    V = np.ascontiguousarray(Vall[sel])
    conds = {}
    try:
        vinv = inverse_raw(spec, V)
    except SingularMatrix:
        raise SingularRecoverySubset(f"plus system singular on workers {subset}") from None
    # the symmetric route only needs the minus system for off-diagonal C blocks
    kminus = len(layout.minus) if (route == "auxiliary" or layout.pairs) else 0
    if kminus:
        W = np.ascontiguousarray(Wall[sel])
        rows = independent_rows(spec, W)
        if len(rows) < kminus:
            raise SingularRecoverySubset(f"minus system rank-deficient on workers {subset}")
        Wsq = np.ascontiguousarray(W[rows])
        try:
            winv = inverse_raw(spec, Wsq)
        except SingularMatrix:
            raise SingularRecoverySubset(f"minus system singular on workers {subset}") from None
    else:
        rows, winv, Wsq = [], spec.zeros((0, 0)), None
    if spec.kind == "real64":
        conds["plus"] = condition_number_raw(V)
        if Wsq is not None:
            conds["minus"] = condition_number_raw(Wsq)
    h_eval = None
    if route == "auxiliary" and kminus:
        h_eval = np.ascontiguousarray(Hall[sel])
    return _Plan(layout, np.ascontiguousarray(vinv[: layout.n_c]), tuple(rows), winv, h_eval,
                 conds, V.shape[0], kminus)


def clear_plan_cache():
    _plan.cache_clear()
    _full_eval.cache_clear()


# decoding --------------------------------------------------------------------

def _take_results(results: Sequence[WorkerResult], instance: CodeInstance, R: int):
    if len(results) < R:
        raise InsufficientResults(f"need {R} results, got {len(results)}")
    used = list(results[:R])
    ids = [r.worker_id for r in used]
    if len(set(ids)) != R:
        raise ValueError("duplicate worker ids among results")
    for r in used:
        if not 1 <= r.worker_id <= instance.N:
            raise ValueError(f"worker id {r.worker_id} outside [1, {instance.N}]")
        if r.C_tilde.spec != instance.spec:
            raise MixedField(f"result over {r.C_tilde.spec}, instance over {instance.spec}")
    used.sort(key=lambda r: r.worker_id)
    shape = used[0].C_tilde.shape
    if shape[0] != shape[1] or any(r.C_tilde.shape != shape for r in used):
        raise ShapeMismatch("worker results must be equal-sized square matrices")
    stack = np.stack([r.C_tilde.data for r in used])
    return tuple(r.worker_id for r in used), stack


def _apply(spec, mat, rhs, counter: OpCounter):
    r, k = mat.shape
    c = rhs.shape[1]
    counter.add(r * k * c, r * max(k - 1, 0) * c)
    return matmul_raw(spec, mat, rhs)


def _factor_cost(counter: OpCounter, plan: _Plan):
    n = plan.plus_size
    counter.add(n ** 3, n ** 3)
    k = plan.minus_size
    if k:
        counter.add(n * k * k + k ** 3, n * k * k + k ** 3)


def build_auxiliary(sum_coeffs: np.ndarray, instance: CodeInstance, points_used: Sequence[int],
                    counter: OpCounter | None = None) -> np.ndarray:
    """Evaluations of the auxiliary polynomial h at the recovery points.

    ``sum_coeffs`` holds, per entry pair (one column each), the coefficients of
    [fg]_ij - [fg]_ji over the minus basis (in characteristic 2 this is the sum
    [fg]_ij + [fg]_ji). h puts each coefficient on the second monomial of its
    term, so [fg]_ij + h lies in the span of the auxiliary basis. Returns an
    array of shape (len(points_used), columns).
    """
    prm = instance.params
    spec = prm.spec
    layout = decode_layout(prm.m, prm.p, spec.characteristic, "auxiliary")
    coeffs = np.asarray(sum_coeffs)
    if coeffs.ndim == 1:
        coeffs = coeffs.reshape(-1, 1)
    if coeffs.shape[0] != len(layout.h_exps):
        raise ShapeMismatch(f"expected {len(layout.h_exps)} coefficient rows, got {coeffs.shape[0]}")
    pts = [instance.point(i) for i in points_used]
    if not layout.h_exps:
        return spec.zeros((len(pts), coeffs.shape[1]))
    pw = power_table(spec, pts, max(layout.h_exps))
    H = np.ascontiguousarray(pw[list(layout.h_exps)].T)
    return _apply(spec, H, spec.asarray(coeffs), counter or OpCounter())


def fpc_decode(results: Sequence[WorkerResult], instance: CodeInstance, route: str = "auto",
               info: DecodeInfo | None = None) -> DenseMatrix:
    """Recover AA^T from the first R results (in arrival order)."""
    prm = instance.params
    if prm.scheme != "fpc":
        raise ValueError(f"instance is for {prm.scheme}, not fpc")
    spec = prm.spec
    R = instance.threshold
    route = _resolve_route(instance, route)
    subset, stack = _take_results(results, instance, R)
    plan = _plan(instance, subset, route)
    info = info if info is not None else DecodeInfo()
    info.subset, info.route, info.conds = subset, route, dict(plan.conds)
    cnt = info.counter
    _factor_cost(cnt, plan)
    layout = plan.layout
    m = prm.m
    n = stack.shape[1]
    iu0, iu1 = np.triu_indices(n, 1)
    npair = len(iu0)
    e_ij = stack[:, iu0, iu1]
    e_ji = stack[:, iu1, iu0]
    e_diag = np.ascontiguousarray(stack[:, np.arange(n), np.arange(n)])
    coef_diag = _apply(spec, plan.vinv_c, e_diag, cnt)  # (n_c, n)
    rows = list(plan.minus_rows)
    if plan.minus_size:
        e_minus = spec.sub_arrays(e_ij, e_ji)
        cnt.add(0, R * npair)
    if route == "symmetric":
        half = spec.inv(spec.from_int(2))
        e_plus = spec.add_arrays(e_ij, e_ji)
        cnt.add(0, R * npair)
        vh = spec.mul_arrays(plan.vinv_c, half)
        cnt.add(plan.vinv_c.size, 0)
        sym = _apply(spec, vh, np.ascontiguousarray(e_plus), cnt)  # half of the plus coefficients
        if layout.pairs:
            wh = spec.mul_arrays(plan.winv[: len(layout.pairs)], half)
            cnt.add(wh.size, 0)
            anti = _apply(spec, wh, np.ascontiguousarray(e_minus[rows]), cnt)
        upper = sym.copy()
        lower = sym.copy()
        for q, _ in enumerate(layout.pairs):
            upper[m + q] = spec.add_arrays(sym[m + q], anti[q])
            lower[m + q] = spec.sub_arrays(sym[m + q], anti[q])
        cnt.add(0, 2 * len(layout.pairs) * npair)
    else:
        if plan.minus_size:
            d = _apply(spec, plan.winv, np.ascontiguousarray(e_minus[rows]), cnt)
            h = _apply(spec, plan.h_eval, d, cnt)
            target = spec.add_arrays(e_ij, h)
            cnt.add(0, R * npair)
        else:
            d = spec.zeros((0, npair))
            target = e_ij
        upper = _apply(spec, plan.vinv_c, np.ascontiguousarray(target), cnt)
        lower = upper.copy()
        for q, _ in enumerate(layout.pairs):
            lower[m + q] = spec.sub_arrays(upper[m + q], d[q])
        cnt.add(0, len(layout.pairs) * npair)
    blocks = {}
    for c in range(layout.n_c):
        k, s = (c, c) if c < m else layout.pairs[c - m]
        blk = spec.zeros((n, n))
        blk[iu0, iu1] = upper[c]
        blk[iu1, iu0] = lower[c]
        blk[np.arange(n), np.arange(n)] = coef_diag[c]
        blocks[(k, s)] = blk
    out = spec.zeros((m * n, m * n))
    for (k, s), blk in blocks.items():
        out[k * n:(k + 1) * n, s * n:(s + 1) * n] = blk
        if k != s:
            out[s * n:(s + 1) * n, k * n:(k + 1) * n] = blk.T
    return DenseMatrix(spec, out, normalized=True)


def _interp_plan(instance: CodeInstance, subset: tuple, exps_needed: list[int]):
    spec = instance.spec
    R = instance.threshold
    pts = [instance.point(i) for i in subset]
    V = np.ascontiguousarray(power_table(spec, pts, R - 1).T)  # rows = points, cols = monomials
    try:
        vinv = inverse_raw(spec, V)
    except SingularMatrix:
        raise SingularRecoverySubset(f"interpolation singular on workers {subset}") from None
    conds = {"vandermonde": condition_number_raw(V)} if spec.kind == "real64" else {}
    return np.ascontiguousarray(vinv[exps_needed]), conds


@lru_cache(maxsize=256)
def _interp_cached(instance: CodeInstance, subset: tuple, exps: tuple):
    return _interp_plan(instance, subset, list(exps))


def matdot_decode(results: Sequence[WorkerResult], instance: CodeInstance,
                  info: DecodeInfo | None = None) -> DenseMatrix:
    """Interpolate the degree 2p-2 product and read the x^(p-1) coefficient."""
    prm = instance.params
    if prm.scheme != "matdot":
        raise ValueError(f"instance is for {prm.scheme}, not matdot")
    spec = prm.spec
    R = instance.threshold
    subset, stack = _take_results(results, instance, R)
    rowv, conds = _interp_cached(instance, subset, (prm.p - 1,))
    info = info if info is not None else DecodeInfo()
    info.subset, info.route, info.conds = subset, "interpolate", dict(conds)
    info.counter.add(R ** 3, R ** 3)
    n = stack.shape[1]
    iu0, iu1 = np.triu_indices(n)
    vals = _apply(spec, rowv, np.ascontiguousarray(stack[:, iu0, iu1]), info.counter)[0]
    out = spec.zeros((n, n))
    out[iu0, iu1] = vals
    out[iu1, iu0] = vals
    return DenseMatrix(spec, out, normalized=True)


def ep_decode(results: Sequence[WorkerResult], instance: CodeInstance,
              info: DecodeInfo | None = None) -> DenseMatrix:
    """Interpolate the full product polynomial and read every C_{k,s}, s <= k."""
    prm = instance.params
    if prm.scheme != "ep":
        raise ValueError(f"instance is for {prm.scheme}, not ep")
    spec = prm.spec
    m, p = prm.m, prm.p
    R = instance.threshold
    subset, stack = _take_results(results, instance, R)
    pairs = [(k, s) for k in range(m) for s in range(k + 1)]
    exps = tuple(sigma1(k, s, 0, m, p) for k, s in pairs)
    rows, conds = _interp_cached(instance, subset, exps)
    info = info if info is not None else DecodeInfo()
    info.subset, info.route, info.conds = subset, "interpolate", dict(conds)
    info.counter.add(R ** 3, R ** 3)
    n = stack.shape[1]
    coef = _apply(spec, rows, np.ascontiguousarray(stack.reshape(R, n * n)), info.counter)
    out = spec.zeros((m * n, m * n))
    for c, (k, s) in enumerate(pairs):
        blk = coef[c].reshape(n, n)
        out[k * n:(k + 1) * n, s * n:(s + 1) * n] = blk
        if k != s:
            out[s * n:(s + 1) * n, k * n:(k + 1) * n] = blk.T
    return DenseMatrix(spec, out, normalized=True)


def decode(results: Sequence[WorkerResult], instance: CodeInstance,
           info: DecodeInfo | None = None) -> DenseMatrix:
    scheme = instance.params.scheme
    if scheme == "fpc":
        return fpc_decode(results, instance, info=info)
    if scheme == "matdot":
        return matdot_decode(results, instance, info=info)
    return ep_decode(results, instance, info=info)


def encode(A: DenseMatrix, instance: CodeInstance) -> list[EncodedTask]:
    return fpc_encode(A, instance)


# manifest --------------------------------------------------------------------

def _point_text(spec: FieldSpec, v) -> str:
    if spec.kind == "rational":
        v = Fraction(v)
        return f"{v.numerator}/{v.denominator}"
    return spec.raw_to_text(v)


def manifest_text(instance: CodeInstance) -> str:
    prm = instance.params
    lines = [
        f"scheme={prm.scheme}",
        f"m={prm.m}",
        f"p={prm.p}",
        f"N={prm.N}",
        f"field={prm.spec}",
        f"verified={instance.verified}",
        f"threshold={instance.threshold}",
        "points=" + ",".join(_point_text(prm.spec, v) for v in instance.raw_points),
    ]
    return "\n".join(lines) + "\n"


def parse_manifest(text: str) -> CodeInstance:
    kv = {}
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"manifest line {ln}: expected key=value")
        key, _, val = line.partition("=")
        kv[key.strip()] = val.strip()
    need = ("scheme", "m", "p", "N", "field", "verified", "points")
    missing = [k for k in need if k not in kv]
    if missing:
        raise FormatError(f"manifest missing keys: {', '.join(missing)}")
    try:
        spec = FieldSpec.parse(kv["field"])
        params = CodeParams(kv["scheme"], int(kv["m"]), int(kv["p"]), int(kv["N"]), spec)
        pts = [spec.raw_from_text(t) for t in kv["points"].split(",") if t.strip()]
        inst = make_instance(params, pts, kv["verified"])
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"bad manifest: {exc}") from None
    if "threshold" in kv and int(kv["threshold"]) != inst.threshold:
        raise FormatError(f"threshold {kv['threshold']} disagrees with {inst.threshold}")
    return inst


def write_manifest(path, instance: CodeInstance):
    with open(path, "w") as fh:
        fh.write(manifest_text(instance))


def read_manifest(path) -> CodeInstance:
    with open(path) as fh:
        return parse_manifest(fh.read())
