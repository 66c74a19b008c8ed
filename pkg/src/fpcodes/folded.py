"""Folded term polynomials, the chain map and its loop/chain decomposition.

Term polynomials are indexed by triples (k, s, t) with
``sigma1 = s*m*p + k*p + p-1 + t`` and ``sigma2 = k*m*p + s*p + p-1 - t``;
the plus term is ``x^sigma1 + x^sigma2`` and the minus term ``x^sigma1 - x^sigma2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import ConstraintViolated, MixedField, UndefinedAtTerminal
from .field import FieldElement, FieldSpec
from .linalg import DenseMatrix


class Sign(str, Enum):
    PLUS = "plus"
    MINUS = "minus"

    @property
    def j(self) -> int:
        return 1 if self is Sign.PLUS else 2


def _sign(sign) -> Sign:
    if isinstance(sign, Sign):
        return sign
    if sign in (1, "1"):
        return Sign.PLUS
    if sign in (2, "2"):
        return Sign.MINUS
    return Sign(sign)


def chi(x: int) -> int:
    return 1 if x % 2 == 0 else 0


class TermPoly:
    """Sparse polynomial with integer coefficients, optionally reduced into a field.

    ``terms`` is a tuple of (exponent, coefficient) with strictly increasing
    exponents and no zero coefficients. With ``spec`` set, coefficients are raw
    values of that field; otherwise they are plain integers.
    """

    __slots__ = ("terms", "spec")

    def __init__(self, terms: Iterable[tuple[int, object]] = (), spec: FieldSpec | None = None):
        acc: dict[int, object] = {}
        for e, c in terms:
            if e < 0:
                raise ValueError("negative exponent")
            if spec is None:
                acc[e] = acc.get(e, 0) + int(c)
            else:
                c = spec.normalize(c)
                acc[e] = spec.add(acc[e], c) if e in acc else c
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "terms", tuple(sorted((e, c) for e, c in acc.items() if c != 0)))

    def __setattr__(self, name, value):
        raise AttributeError("TermPoly is immutable")

    @classmethod
    def monomial(cls, e: int, c=1, spec: FieldSpec | None = None) -> "TermPoly":
        return cls([(e, c)], spec)

    def over(self, spec: FieldSpec) -> "TermPoly":
        """Image of an integer polynomial in ``spec`` (zero coefficients drop out)."""
        if self.spec is not None:
            if self.spec != spec:
                raise MixedField(f"{self.spec} vs {spec}")
            return self
        return TermPoly(((e, spec.from_int(c) if c >= 0 else spec.neg(spec.from_int(-c)))
                         for e, c in self.terms), spec)

    @property
    def exponents(self) -> tuple[int, ...]:
        return tuple(e for e, _ in self.terms)

    @property
    def degree(self) -> int:
        return self.terms[-1][0] if self.terms else -1

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, TermPoly):
            return NotImplemented
        return self.spec == other.spec and self.terms == other.terms

    def __hash__(self):
        return hash((self.terms, self.spec))

    def _combine(self, other: "TermPoly", sgn: int) -> "TermPoly":
        if self.spec != other.spec:
            raise MixedField(f"{self.spec} vs {other.spec}")
        if self.spec is None:
            return TermPoly(list(self.terms) + [(e, sgn * c) for e, c in other.terms])
        spec = self.spec
        rhs = other.terms if sgn > 0 else [(e, spec.neg(c)) for e, c in other.terms]
        return TermPoly(list(self.terms) + list(rhs), spec)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def scale(self, c) -> "TermPoly":
        if self.spec is None:
            return TermPoly([(e, int(c) * v) for e, v in self.terms])
        c = self.spec.normalize(c)
        return TermPoly([(e, self.spec.mul(v, c)) for e, v in self.terms], self.spec)

    def evaluate(self, x, spec: FieldSpec | None = None):
        """Horner evaluation over the sparse exponents; returns a raw value."""
        spec = spec or self.spec
        if spec is None:
            raise ValueError("evaluation needs a field")
        poly = self.over(spec)
        x = spec.normalize(x)
        acc = spec.zero
        prev = None
        for e, c in reversed(poly.terms):
            if prev is not None:
                acc = spec.mul(acc, spec.pow(x, prev - e))
            acc = spec.add(acc, c)
            prev = e
        if prev:
            acc = spec.mul(acc, spec.pow(x, prev))
        return acc

    def __repr__(self):
        if not self.terms:
            return "TermPoly(0)"
        body = " + ".join(f"{c}*x^{e}" for e, c in self.terms)
        return f"TermPoly({body})"


@dataclass(frozen=True, order=True)
class TermIndex:
    k: int
    s: int
    t: int
    sign: Sign = Sign.PLUS

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.k, self.s, self.t)


def sigma1(k: int, s: int, t: int, m: int, p: int) -> int:
    return s * m * p + k * p + p - 1 + t


def sigma2(k: int, s: int, t: int, m: int, p: int) -> int:
    return k * m * p + s * p + p - 1 - t


def term_poly(k: int, s: int, t: int, m: int, p: int, sign=Sign.PLUS) -> TermPoly:
    sign = _sign(sign)
    c2 = 1 if sign is Sign.PLUS else -1
    return TermPoly([(sigma1(k, s, t, m, p), 1), (sigma2(k, s, t, m, p), c2)])


def term_of(idx: TermIndex, m: int, p: int) -> TermPoly:
    return term_poly(idx.k, idx.s, idx.t, m, p, idx.sign)


def phi(k: int, s: int, t: int, m: int, p: int) -> tuple[int, int, int]:
    if not (0 <= k < m and 0 <= s < m and 1 <= t <= p - 1):
        raise ValueError(f"triple {(k, s, t)} outside [0,{m - 1}]^2 x [1,{p - 1}]")
    if k == m - 1 and s == m - 1:
        raise UndefinedAtTerminal(f"no successor for terminal triple {(k, s, t)}")
    if k == m - 1:
        return (s + 1, 0, p - t)
    return (s, k + 1, p - t)


def cube(m: int, p: int) -> list[tuple[int, int, int]]:
    return [(k, s, t) for k in range(m) for s in range(m) for t in range(1, p)]


def loop_index_set(m: int, p: int) -> list[tuple[int, int]]:
    """Representatives (s, t) of the distinct loops, by the parity-split rule."""
    if p < 2 or m < 2:
        return []
    if m % 2 == 1:
        return [(s, t) for s in range((m - 3) // 2 + 1) for t in range(1, p)]
    out = [(s, t) for s in range((m - 4) // 2 + 1) for t in range(1, p)]
    s = (m - 2) // 2
    out += [(s, t) for t in range(1, (p - 1 + chi(p)) // 2 + 1)]
    return out


def orbit(start: tuple[int, int, int], m: int, p: int) -> list[tuple[int, int, int]]:
    """Iterate phi from ``start`` until it cycles back or hits the terminal."""
    seq = [start]
    cur = start
    while True:
        k, s, t = cur
        if k == m - 1 and s == m - 1:
            return seq
        cur = phi(k, s, t, m, p)
        if cur == start:
            return seq
        seq.append(cur)


@dataclass(frozen=True)
class ChainStructure:
    m: int
    p: int
    loops: dict  # (a, b) -> tuple of triples, head (m-1, a, b) first
    single_chains: tuple  # tuple of tuples, chain t starts at (0, 0, t)
    special_loop_present: bool

    @property
    def special_key(self) -> tuple[int, int] | None:
        if not self.special_loop_present:
            return None
        return (self.m // 2 - 1, self.p // 2)

    def all_sequences(self) -> list[tuple[str, tuple]]:
        out = [("loop", seq) for seq in self.loops.values()]
        out += [("chain", seq) for seq in self.single_chains]
        return out


def build_chain_structure(m: int, p: int) -> ChainStructure:
    if m < 1 or p < 1:
        raise ValueError("m and p must be positive")
    loops = {}
    for a, b in loop_index_set(m, p):
        loops[(a, b)] = tuple(orbit((m - 1, a, b), m, p))
    chains = tuple(tuple(orbit((0, 0, t), m, p)) for t in range(1, p))
    special = m % 2 == 0 and p % 2 == 0
    return ChainStructure(m, p, loops, chains, special)


def span_dims(m: int, p: int, characteristic: int) -> tuple[int, int]:
    base = (p - 1) * (2 * m * m - m + 1)
    cc = chi(m) * chi(p)
    d2 = 1 if characteristic == 2 else 0
    return (base + cc * (1 - 2 * d2)) // 2, (base - cc) // 2


def omega(m: int, p: int, sign=Sign.PLUS) -> list[TermIndex]:
    sign = _sign(sign)
    return [TermIndex(k, s, t, sign) for k, s, t in cube(m, p)]


@dataclass(frozen=True)
class ReducedBasis:
    sign: Sign
    kept_terms: tuple  # TermIndex
    eliminated: dict  # head TermIndex -> tuple of (TermIndex, int coefficient)

    def expansion(self, head: TermIndex, m: int, p: int) -> TermPoly:
        """Integer polynomial given by the stored expansion of an eliminated head."""
        acc = TermPoly()
        for idx, c in self.eliminated[head]:
            acc = acc + term_of(idx, m, p).scale(c)
        return acc


def reduced_basis(m: int, p: int, characteristic: int, sign) -> ReducedBasis:
    """A basis of the span of all plus (or minus) terms, with head expansions.

    Generic loops drop their head. The short loop present when m and p are both
    even keeps all of its elements for plus outside characteristic 2 and drops
    its head otherwise.
    """
    sign = _sign(sign)
    cs = build_chain_structure(m, p)
    kept: list[TermIndex] = []
    elim: dict[TermIndex, tuple] = {}
    for chain in cs.single_chains:
        kept += [TermIndex(*y, sign) for y in chain]
    for key, seq in cs.loops.items():
        head = TermIndex(*seq[0], sign)
        rest = [TermIndex(*y, sign) for y in seq[1:]]
        if key == cs.special_key:
            if sign is Sign.PLUS and characteristic != 2:
                kept += [head] + rest
                continue
            coeff = 1 if sign is Sign.PLUS else -1
            elim[head] = tuple((r, coeff) for r in rest)
        elif sign is Sign.PLUS:
            elim[head] = tuple((r, 1 if j % 2 == 0 else -1) for j, r in enumerate(rest))
        else:
            elim[head] = tuple((r, -1) for r in rest)
        kept += rest
    return ReducedBasis(sign, tuple(kept), elim)


# evaluation -----------------------------------------------------------------

def _as_raw_points(X: Sequence, spec: FieldSpec | None):
    if spec is None:
        specs = {x.spec for x in X if isinstance(x, FieldElement)}
        if len(specs) != 1:
            raise MixedField("points must share one field (or pass spec)")
        spec = specs.pop()
    raw = []
    for x in X:
        if isinstance(x, FieldElement) and x.spec != spec:
            raise MixedField(f"point in {x.spec}, expected {spec}")
        raw.append(spec.normalize(x))
    return spec, raw


def power_table(spec: FieldSpec, points: Sequence, max_exp: int) -> np.ndarray:
    """Array P with P[e, j] = points[j]^e for 0 <= e <= max_exp."""
    n = len(points)
    base = spec.asarray(list(points)) if n else spec.zeros((0,))
    out = spec.zeros((max_exp + 1, n))
    if max_exp < 0:
        return out
    out[0] = spec.one
    for e in range(1, max_exp + 1):
        out[e] = spec.mul_arrays(out[e - 1], base)
    return out


def eval_raw(spec: FieldSpec, polys: Sequence[TermPoly], points: Sequence, powers=None) -> np.ndarray:
    polys = [g.over(spec) for g in polys]
    top = max((g.degree for g in polys), default=-1)
    if powers is None or powers.shape[0] <= top:
        powers = power_table(spec, points, max(top, 0))
    out = spec.zeros((len(polys), len(points)))
    for i, g in enumerate(polys):
        row = spec.zeros((len(points),))
        for e, c in g.terms:
            row = spec.add_arrays(row, spec.mul_arrays(powers[e], c))
        out[i] = row
    return out


def eval_matrix(G: Sequence[TermPoly], X: Sequence, spec: FieldSpec | None = None) -> DenseMatrix:
    """Matrix with entry (i, j) = G[i](X[j])."""
    specs = {g.spec for g in G if g.spec is not None}
    if spec is None and specs:
        spec = specs.pop() if len(specs) == 1 else None
        if spec is None:
            raise MixedField("polynomials over different fields")
    spec, raw = _as_raw_points(X, spec)
    for g in G:
        if g.spec is not None and g.spec != spec:
            raise MixedField(f"polynomial over {g.spec}, points in {spec}")
    return DenseMatrix(spec, eval_raw(spec, G, raw), normalized=True)


def coefficient_matrix(polys: Sequence[TermPoly], spec: FieldSpec) -> tuple[DenseMatrix, list[int]]:
    """Rows = polynomials, columns = the union of their exponents (ascending)."""
    polys = [g.over(spec) for g in polys]
    exps = sorted({e for g in polys for e in g.exponents})
    col = {e: i for i, e in enumerate(exps)}
    data = spec.zeros((len(polys), len(exps)))
    for i, g in enumerate(polys):
        for e, c in g.terms:
            data[i, col[e]] = c
    return DenseMatrix(spec, data, normalized=True), exps


# m = 1 bases and closed-form determinants --------------------------------------

def symmetric_m1_basis(n: int) -> list[TermPoly]:
    """x^(n-1), then x^(n-i) + x^(n-2+i) for i = 2..n."""
    out = [TermPoly.monomial(n - 1)]
    out += [TermPoly([(n - i, 1), (n - 2 + i, 1)]) for i in range(2, n + 1)]
    return out


def antisymmetric_m1_basis(n: int) -> list[TermPoly]:
    """x^(n+i) - x^(n-i) for i = 1..n."""
    return [TermPoly([(n + i, 1), (n - i, -1)]) for i in range(1, n + 1)]


def structured_det_prediction(kind: str, betas: Sequence, spec: FieldSpec | None = None) -> FieldElement:
    spec, b = _as_raw_points(betas, spec)
    n = len(b)
    if len(set(b)) != n:
        raise ConstraintViolated("points must be pairwise distinct")
    for i in range(n):
        for j in range(i, n):
            if spec.mul(b[i], b[j]) == spec.one:
                raise ConstraintViolated(f"points {i} and {j} multiply to 1")
    acc = spec.one
    for i in range(n):
        for j in range(i + 1, n):
            acc = spec.mul(acc, spec.sub(b[j], b[i]))
            acc = spec.mul(acc, spec.sub(spec.mul(b[i], b[j]), spec.one))
    if kind == "symmetric_m1":
        pass
    elif kind == "antisymmetric_m1":
        for x in b:
            acc = spec.mul(acc, spec.sub(spec.mul(x, x), spec.one))
    else:
        raise ValueError(f"unknown structured determinant kind {kind!r}")
    return FieldElement(spec, acc)


def structured_basis(kind: str, n: int) -> list[TermPoly]:
    if kind == "symmetric_m1":
        return symmetric_m1_basis(n)
    if kind == "antisymmetric_m1":
        return antisymmetric_m1_basis(n)
    raise ValueError(f"unknown structured determinant kind {kind!r}")


def format_triple(y) -> str:
    return f"({y[0]},{y[1]},{y[2]})"
