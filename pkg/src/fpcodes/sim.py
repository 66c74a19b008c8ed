"""Deterministic master/worker straggler simulation and conditioning sweeps."""
from __future__ import annotations

import csv
import os
import io
import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Callable, Iterable, Sequence

import numpy as np

from .codes import (
    CodeInstance,
    DecodeInfo,
    chebyshev_points,
    decode,
    encode,
    recovery_threshold,
    worker_compute,
)
from .errors import (
    InsufficientResults,
    SingularRecoverySubset,
    StragglerOverload,
)
from .field import FieldSpec
from .folded import antisymmetric_m1_basis, eval_raw, symmetric_m1_basis
from .linalg import DenseMatrix, condition_number_raw

CSV_HEADER = (
    "scheme", "m", "p", "N", "s", "R", "overall_time", "worker_time_avg",
    "decode_time", "decode_mults", "decode_adds", "worst_cond", "status",
)


def choose_stragglers(N: int, s: int, seed: int) -> frozenset:
    """Seeded straggler set; sets for growing s are nested."""
    if not 0 <= s <= N:
        raise ValueError(f"straggler count {s} outside [0, {N}]")
    order = np.random.default_rng(seed).permutation(N) + 1
    return frozenset(int(i) for i in order[:s])


@dataclass(frozen=True)
class LatencyModel:
    """Worker finish time = work * base_unit * (1 + jitter * U(-1, 1)), times slowdown for stragglers.

    ``slowdown=inf`` models fail-stop workers that never answer.
    """

    base_unit: float = 1.0
    straggler_ids: frozenset = frozenset()
    slowdown: float = 5.0
    jitter: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.jitter < 1:
            raise ValueError("jitter must lie in [0, 1)")
        if not self.slowdown > 0:
            raise ValueError("slowdown must be positive")
        object.__setattr__(self, "straggler_ids", frozenset(self.straggler_ids))

    @property
    def fail_stop(self) -> bool:
        return math.isinf(self.slowdown)

    def with_stragglers(self, ids: Iterable[int]) -> "LatencyModel":
        return LatencyModel(self.base_unit, frozenset(ids), self.slowdown, self.jitter, self.seed)

    def finish_times(self, N: int, work: float) -> list[float]:
        bad = [i for i in self.straggler_ids if not 1 <= i <= N]
        if bad:
            raise ValueError(f"straggler ids {sorted(bad)} outside [1, {N}]")
        noise = np.random.default_rng(self.seed).uniform(-1.0, 1.0, size=N)
        out = []
        for i in range(1, N + 1):
            t = work * self.base_unit * (1.0 + self.jitter * float(noise[i - 1]))
            if i in self.straggler_ids:
                t = math.inf if self.fail_stop else t * self.slowdown
            out.append(t)
        return out


@dataclass
class RunReport:
    scheme: str
    m: int
    p: int
    N: int
    R: int
    straggler_count: int
    finish_times: tuple
    recovery_subset: tuple
    overall_time: float
    worker_time_avg: float
    decode_time: float
    worker_multiply_count: int
    decode_multiply_count: int
    decode_add_count: int
    conds: dict = dc_field(default_factory=dict)
    wall_clock: dict = dc_field(default_factory=dict)
    status: str = "ok"

    def csv_row(self) -> dict:
        worst = max(self.conds.values()) if self.conds else ""
        return {
            "scheme": self.scheme, "m": self.m, "p": self.p, "N": self.N,
            "s": self.straggler_count, "R": self.R,
            "overall_time": _fmt(self.overall_time),
            "worker_time_avg": _fmt(self.worker_time_avg),
            "decode_time": _fmt(self.decode_time),
            "decode_mults": self.decode_multiply_count,
            "decode_adds": self.decode_add_count,
            "worst_cond": _fmt(worst) if worst != "" else "",
            "status": self.status,
        }


def _fmt(x) -> str:
    if x == "" or x is None:
        return ""
    return repr(float(x))


def pad_to_blocks(A: DenseMatrix, m: int, p: int) -> DenseMatrix:
    """Zero-pad rows to a multiple of m and columns to a multiple of p."""
    rows = -(-A.rows // m) * m
    cols = -(-A.cols // p) * p
    if (rows, cols) == A.shape:
        return A
    data = A.spec.zeros((rows, cols))
    data[: A.rows, : A.cols] = A.data
    return DenseMatrix(A.spec, data, normalized=True)


def run_distributed(A: DenseMatrix, instance: CodeInstance, latency: LatencyModel,
                    max_workers: int | None = None) -> tuple[DenseMatrix, RunReport]:
    """Encode, run every worker product concurrently, decode from the R earliest answers."""
    prm = instance.params
    R = instance.threshold
    N = prm.N
    wall = {}
    mu = A.rows
    Ap = pad_to_blocks(A, prm.m, prm.p)
    work = (Ap.rows // prm.m) ** 2 * (Ap.cols // prm.p)
    times = latency.finish_times(N, work)
    alive = sum(1 for t in times if math.isfinite(t))
    if alive < R:
        raise StragglerOverload(f"only {alive} of {N} workers answer, threshold is {R}")

    t0 = time.perf_counter()
    tasks = encode(Ap, instance)
    wall["encode"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(worker_compute, tasks))
    wall["workers"] = time.perf_counter() - t0

    arrival = sorted((t, i) for i, t in enumerate(times, 1) if math.isfinite(t))
    first = [i for _, i in arrival[:R]]
    by_id = {r.worker_id: r for r in results}
    info = DecodeInfo()
    t0 = time.perf_counter()
    C = decode([by_id[i] for i in first], instance, info=info)
    wall["decode"] = time.perf_counter() - t0
    if C.rows != mu:
        C = C.submatrix(0, mu, 0, mu)

    decode_time = latency.base_unit * (info.counter.mults + info.counter.adds)
    t_r = arrival[R - 1][0]
    report = RunReport(
        scheme=prm.scheme, m=prm.m, p=prm.p, N=N, R=R,
        straggler_count=len(latency.straggler_ids),
        finish_times=tuple(times),
        recovery_subset=tuple(sorted(first)),
        overall_time=t_r + decode_time,
        worker_time_avg=float(np.mean([times[i - 1] for i in first])),
        decode_time=decode_time,
        worker_multiply_count=work,
        decode_multiply_count=info.counter.mults,
        decode_add_count=info.counter.adds,
        conds=dict(info.conds),
        wall_clock=wall,
    )
    return C, report


def _failure_row(instance: CodeInstance, s: int, status: str) -> dict:
    prm = instance.params
    row = {k: "" for k in CSV_HEADER}
    row.update(scheme=prm.scheme, m=prm.m, p=prm.p, N=prm.N, s=s, R=instance.threshold, status=status)
    return row


def sweep_stragglers(A: DenseMatrix, instances: Sequence[CodeInstance], s_range: Iterable[int],
                     latency: LatencyModel) -> list[dict]:
    """One CSV row per (scheme, s); failures become status markers."""
    Ns = {inst.N for inst in instances}
    if len(Ns) != 1:
        raise ValueError("all instances must share N")
    N = Ns.pop()
    rows = []
    for inst in instances:
        for s in s_range:
            lat = latency.with_stragglers(choose_stragglers(N, s, latency.seed))
            try:
                _, rep = run_distributed(A, inst, lat)
                rows.append(rep.csv_row())
            except StragglerOverload:
                rows.append(_failure_row(inst, s, "straggler_overload"))
            except SingularRecoverySubset:
                rows.append(_failure_row(inst, s, "singular_subset"))
            except InsufficientResults:
                rows.append(_failure_row(inst, s, "insufficient_results"))
    return rows


# conditioning ------------------------------------------------------------------

def _worst_cond(mats: Iterable[np.ndarray]) -> float:
    worst = 1.0
    for M in mats:
        c = condition_number_raw(M)
        if c > worst:
            worst = c
        if math.isinf(worst):
            break
    return worst


def fpc_m1_matrices(points: Sequence[float], p: int):
    """Every square decode matrix of the m = 1 code over the given points.

    Plus systems on all p-subsets, minus systems on all (p-1)-subsets.
    """
    spec = FieldSpec.real64()
    plus = symmetric_m1_basis(p)
    minus = antisymmetric_m1_basis(p - 1)
    for sub in itertools.combinations(points, p):
        yield np.ascontiguousarray(eval_raw(spec, plus, list(sub)).T)
    if p > 1:
        for sub in itertools.combinations(points, p - 1):
            yield np.ascontiguousarray(eval_raw(spec, minus, list(sub)).T)


def matdot_matrices(points: Sequence[float], p: int):
    n = 2 * p - 1
    for sub in itertools.combinations(points, n):
        yield np.vander(np.array(sub, dtype=np.float64), n, increasing=True)


def worst_condition(scheme: str, points: Sequence[float], p: int) -> float:
    if scheme == "fpc":
        return _worst_cond(fpc_m1_matrices(points, p))
    if scheme == "matdot":
        return _worst_cond(matdot_matrices(points, p))
    raise ValueError(f"conditioning sweep supports fpc and matdot, not {scheme!r}")


def _random_points(N: int, rng: np.random.Generator) -> list[float]:
    out = []
    while len(out) < N:
        v = float(rng.uniform(-1.0, 1.0))
        if v != 0.0 and v not in out:
            out.append(v)
    return out


def condition_point_set(p: int, s: int, N: int | None = None, trials: int = 20,
                        point_mode: str = "random_best_of_20", scheme: str = "fpc",
                        seed: int = 0) -> tuple[float, list[float]]:
    """(worst condition number, points) for one p; random mode keeps the best of ``trials`` draws."""
    if point_mode not in ("chebyshev", "random_best_of_20"):
        raise ValueError(f"unknown point mode {point_mode!r}")
    if N is None:
        N = recovery_threshold(scheme, 1, p) + s
    if point_mode == "chebyshev":
        pts = chebyshev_points(N)
        return worst_condition(scheme, pts, p), pts
    rng = np.random.default_rng([seed, p, s])
    best, best_pts = math.inf, None
    for _ in range(max(trials, 1)):
        pts = _random_points(N, rng)
        w = worst_condition(scheme, pts, p)
        if best_pts is None or w < best:
            best, best_pts = w, pts
    return best, best_pts


def condition_sweep(p_range: Iterable[int], s: int, N_rule: Callable[[int], int] | None = None,
                    trials: int = 20, point_mode: str = "random_best_of_20", scheme: str = "fpc",
                    seed: int = 0) -> list[dict]:
    """Worst decode-matrix condition number per p (m = 1, real64)."""
    rows = []
    for p in p_range:
        R = recovery_threshold(scheme, 1, p)
        N = N_rule(p) if N_rule is not None else R + s
        worst, _ = condition_point_set(p, s, N, trials, point_mode, scheme, seed)
        row = {k: "" for k in CSV_HEADER}
        row.update(scheme=scheme, m=1, p=p, N=N, s=s, R=R, worst_cond=_fmt(worst),
                   status="ok" if math.isfinite(worst) else "singular")
        rows.append(row)
    return rows


# CSV ----------------------------------------------------------------------------

def rows_to_csv(rows: Iterable[dict], header: bool = True) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_HEADER, lineterminator="\n")
    if header:
        w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def append_csv(path, rows: Iterable[dict]):
    """Append rows, writing the header only when the file is new or empty."""
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        fh.write(rows_to_csv(rows, header=new))


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
