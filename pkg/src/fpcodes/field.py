"""Field carriers: odd prime fields, GF(2^w), exact rationals and IEEE doubles.

A :class:`FieldSpec` owns the arithmetic. Scalars are carried as *raw* Python
values (``int`` residues, ``int`` bit patterns, :class:`fractions.Fraction`,
``float``) and matrices as numpy arrays of the matching dtype; the
:class:`FieldElement` wrapper exists for callers who want operator syntax.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from . import kernels
from .errors import DivisionByZero, FieldTooSmall, MixedField

# Lowest-weight irreducible polynomial per degree (trinomial with the smallest
# middle exponent, else the lexicographically smallest pentanomial), bit w set.
# Regenerate with tools/gen_gf2_table.py.
GF2_REDUCTION = {
    1: 0x3, 2: 0x7, 3: 0xB, 4: 0x13, 5: 0x25, 6: 0x43, 7: 0x83, 8: 0x11B,
    9: 0x203, 10: 0x409, 11: 0x805, 12: 0x1009, 13: 0x201B, 14: 0x4021,
    15: 0x8003, 16: 0x1002B, 17: 0x20009, 18: 0x40009, 19: 0x80027,
    20: 0x100009, 21: 0x200005, 22: 0x400003, 23: 0x800021, 24: 0x100001B,
    25: 0x2000009, 26: 0x400001B, 27: 0x8000027, 28: 0x10000003,
    29: 0x20000005, 30: 0x40000003, 31: 0x80000009, 32: 0x10000008D,
    33: 0x200000401, 34: 0x400000081, 35: 0x800000005, 36: 0x1000000201,
    37: 0x2000000053, 38: 0x4000000063, 39: 0x8000000011,
    40: 0x10000000039, 41: 0x20000000009, 42: 0x40000000081,
    43: 0x80000000059, 44: 0x100000000021, 45: 0x20000000001B,
    46: 0x400000000003, 47: 0x800000000021, 48: 0x100000000002D,
    49: 0x2000000000201, 50: 0x400000000001D, 51: 0x800000000004B,
    52: 0x10000000000009, 53: 0x20000000000047, 54: 0x40000000000201,
    55: 0x80000000000081, 56: 0x100000000000095, 57: 0x200000000000011,
    58: 0x400000000080001, 59: 0x800000000000095, 60: 0x1000000000000003,
    61: 0x2000000000000027, 62: 0x4000000020000001, 63: 0x8000000000000003,
}

PRIME_LIMIT = 1 << 62
_SMALL_Q = 3037000499  # q below this: q*q fits in int64


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for p in small:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def gf2_mul(a: int, b: int, w: int, poly: int) -> int:
    r = 0
    top = 1 << w
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= poly
    return r


@dataclass(frozen=True)
class FieldSpec:
    """A field carrier. ``param`` is q for ``prime``, w for ``binary``."""

    kind: str
    param: int = 0

    def __post_init__(self):
        if self.kind == "prime":
            q = self.param
            if q < 3 or q >= PRIME_LIMIT or not is_prime(q):
                raise ValueError(f"prime modulus must be an odd prime below 2^62, got {q}")
        elif self.kind == "binary":
            if not 1 <= self.param <= 63:
                raise ValueError(f"binary extension degree must be in [1, 63], got {self.param}")
        elif self.kind in ("rational", "real64"):
            if self.param != 0:
                raise ValueError(f"{self.kind} takes no parameter")
        else:
            raise ValueError(f"unknown field kind {self.kind!r}")

    # construction ---------------------------------------------------------
    @classmethod
    def prime(cls, q: int) -> "FieldSpec":
        return cls("prime", int(q))

    @classmethod
    def binary(cls, w: int) -> "FieldSpec":
        return cls("binary", int(w))

    @classmethod
    def rational(cls) -> "FieldSpec":
        return cls("rational")

    @classmethod
    def real64(cls) -> "FieldSpec":
        return cls("real64")

    @classmethod
    def parse(cls, text: str) -> "FieldSpec":
        """Parse ``prime:<q>``, ``gf2:<w>``, ``rational`` or ``real64``."""
        text = text.strip()
        head, _, tail = text.partition(":")
        try:
            if head == "prime" and tail:
                return cls.prime(int(tail, 0))
            if head == "gf2" and tail:
                return cls.binary(int(tail, 0))
        except ValueError as exc:
            raise ValueError(f"bad field spec {text!r}: {exc}") from None
        if text == "rational":
            return cls.rational()
        if text == "real64":
            return cls.real64()
        raise ValueError(f"bad field spec {text!r}")

    def __str__(self) -> str:
        if self.kind == "prime":
            return f"prime:{self.param}"
        if self.kind == "binary":
            return f"gf2:{self.param}"
        return self.kind

    # properties -----------------------------------------------------------
    @property
    def characteristic(self) -> int:
        if self.kind == "prime":
            return self.param
        if self.kind == "binary":
            return 2
        return 0

    @property
    def exact(self) -> bool:
        return self.kind != "real64"

    @property
    def q(self) -> int:
        return self.param

    @property
    def w(self) -> int:
        return self.param

    @property
    def poly(self) -> int:
        return GF2_REDUCTION[self.param]

    @property
    def order(self) -> int | None:
        """Number of elements, or None for infinite carriers."""
        if self.kind == "prime":
            return self.param
        if self.kind == "binary":
            return 1 << self.param
        return None

    @property
    def dtype(self):
        if self.kind in ("prime", "binary"):
            return np.int64
        if self.kind == "real64":
            return np.float64
        return object

    # scalars --------------------------------------------------------------
    def normalize(self, v):
        """Coerce a Python value into this carrier's raw representation."""
        if isinstance(v, FieldElement):
            if v.spec != self:
                raise MixedField(f"element of {v.spec} used in {self}")
            return v.value
        k = self.kind
        if k == "prime":
            if isinstance(v, Fraction):
                return self.div(v.numerator % self.param, v.denominator % self.param)
            return int(v) % self.param
        if k == "binary":
            v = int(v)
            if v < 0:
                raise ValueError("binary field elements are non-negative bit patterns")
            if v >> self.param:
                v = _gf2_reduce(v, self.param, self.poly)
            return v
        if k == "rational":
            return Fraction(v)
        return float(v)

    def from_int(self, n: int):
        """Image of the integer n under the canonical ring map Z -> F."""
        if self.kind == "binary":
            return n & 1
        return self.normalize(n)

    @property
    def zero(self):
        return self.normalize(0)

    @property
    def one(self):
        return self.normalize(1)

    def is_zero(self, a) -> bool:
        return a == 0

    def add(self, a, b):
        k = self.kind
        if k == "prime":
            return (a + b) % self.param
        if k == "binary":
            return a ^ b
        return a + b

    def sub(self, a, b):
        k = self.kind
        if k == "prime":
            return (a - b) % self.param
        if k == "binary":
            return a ^ b
        return a - b

    def neg(self, a):
        if self.kind == "prime":
            return -a % self.param
        if self.kind == "binary":
            return a
        return -a

    def mul(self, a, b):
        k = self.kind
        if k == "prime":
            return a * b % self.param
        if k == "binary":
            return gf2_mul(a, b, self.param, self.poly)
        return a * b

    def inv(self, a):
        if a == 0:
            raise DivisionByZero(f"inverse of zero in {self}")
        k = self.kind
        if k == "prime":
            return pow(a, -1, self.param)
        if k == "binary":
            return self.pow(a, (1 << self.param) - 2)
        if k == "rational":
            return 1 / a
        return 1.0 / a

    def div(self, a, b):
        if b == 0:
            raise DivisionByZero(f"division by zero in {self}")
        if self.kind == "rational":
            return a / b
        if self.kind == "real64":
            return a / b
        return self.mul(a, self.inv(b))

    def pow(self, a, e: int):
        if e < 0:
            return self.pow(self.inv(a), -e)
        k = self.kind
        if k == "prime":
            return pow(a, e, self.param)
        if k in ("rational", "real64"):
            return a ** e if e else self.one
        result, base = 1, a
        while e:
            if e & 1:
                result = gf2_mul(result, base, self.param, self.poly)
            base = gf2_mul(base, base, self.param, self.poly)
            e >>= 1
        return result

    def element(self, v) -> "FieldElement":
        return FieldElement(self, self.normalize(v))

    # arrays ---------------------------------------------------------------
    def asarray(self, values) -> np.ndarray:
        """Normalize a nested sequence (or array) into a fresh carrier array."""
        if self.kind == "real64":
            return np.array(values, dtype=np.float64)
        if self.kind == "rational":
            arr = np.array(values, dtype=object)
            flat = [Fraction(v.value if isinstance(v, FieldElement) else v) for v in arr.ravel()]
            out = np.empty(arr.shape, dtype=object)
            out.ravel()[:] = flat
            return out
        arr = np.asarray(values)
        if arr.dtype == object or arr.dtype.kind not in "iu":
            flat = [self.normalize(v) for v in arr.ravel()]
            return np.array(flat, dtype=np.int64).reshape(arr.shape)
        if self.kind == "prime":
            if arr.dtype == np.uint64:
                arr = arr % np.uint64(self.param)
            return np.asarray(arr % self.param, dtype=np.int64)
        if np.any(arr < 0):
            raise ValueError("binary field elements are non-negative bit patterns")
        arr = np.asarray(arr, dtype=np.int64)
        if np.any(arr >> self.param):
            flat = [self.normalize(int(v)) for v in arr.ravel()]
            arr = np.array(flat, dtype=np.int64).reshape(arr.shape)
        return arr.copy()

    def zeros(self, shape) -> np.ndarray:
        if self.kind == "rational":
            out = np.empty(shape, dtype=object)
            out.fill(Fraction(0))
            return out
        return np.zeros(shape, dtype=self.dtype)

    def eye(self, n: int) -> np.ndarray:
        out = self.zeros((n, n))
        for i in range(n):
            out[i, i] = self.one
        return out

    def add_arrays(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.kind == "prime":
            return (a + b) % self.param
        if self.kind == "binary":
            return a ^ b
        return a + b

    def sub_arrays(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.kind == "prime":
            return (a - b) % self.param
        if self.kind == "binary":
            return a ^ b
        return a - b

    def neg_array(self, a: np.ndarray) -> np.ndarray:
        if self.kind == "prime":
            return (-a) % self.param
        if self.kind == "binary":
            return a.copy()
        return -a

    def mul_arrays(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Elementwise product; b may be a raw scalar."""
        k = self.kind
        if k == "prime":
            if self.param < _SMALL_Q:
                return (np.asarray(a, dtype=np.int64) * np.asarray(b, dtype=np.int64)) % self.param
            a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
            return kernels.mod_mul_elementwise(
                np.ascontiguousarray(a), np.ascontiguousarray(b), self.param
            )
        if k == "binary":
            a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
            return kernels.gf2_mul_elementwise(
                np.ascontiguousarray(a), np.ascontiguousarray(b), self.param, self.poly
            )
        return a * b

    def sum_axis0(self, a: np.ndarray) -> np.ndarray:
        if self.kind == "prime":
            out = np.zeros(a.shape[1:], dtype=np.int64)
            for row in a:
                out = (out + row) % self.param
            return out
        if self.kind == "binary":
            return np.bitwise_xor.reduce(a, axis=0) if len(a) else np.zeros(a.shape[1:], np.int64)
        if len(a) == 0:
            return self.zeros(a.shape[1:])
        return a.sum(axis=0)

    def random_array(self, shape, rng: np.random.Generator, dist: str = "uniform") -> np.ndarray:
        """Seeded random matrix entries.

        ``uniform``/``integers`` draw uniform residues (or bit patterns) on
        finite fields, small integers on rationals, U(-1, 1) on real64;
        ``gaussian`` is N(0, 1) and real64 only.
        """
        k = self.kind
        if dist == "gaussian":
            if k != "real64":
                raise ValueError("gaussian entries are only defined for real64")
            return rng.standard_normal(shape)
        if dist not in ("uniform", "integers"):
            raise ValueError(f"unknown distribution {dist!r}")
        if k == "prime":
            return rng.integers(0, self.param, size=shape, dtype=np.int64)
        if k == "binary":
            return rng.integers(0, 1 << self.param, size=shape, dtype=np.int64)
        if k == "rational":
            ints = rng.integers(-9, 10, size=shape)
            return self.asarray(ints.tolist())
        if dist == "integers":
            return rng.integers(-9, 10, size=shape).astype(np.float64)
        return rng.uniform(-1.0, 1.0, size=shape)

    def raw_from_text(self, text: str):
        if self.kind == "rational":
            return Fraction(text)
        if self.kind == "real64":
            return float(text)
        return self.normalize(int(text))

    def raw_to_text(self, v) -> str:
        if self.kind == "real64":
            return repr(float(v))
        return str(v)


def _gf2_reduce(v: int, w: int, poly: int) -> int:
    while v.bit_length() > w:
        v ^= poly << (v.bit_length() - 1 - w)
    return v


@dataclass(frozen=True)
class FieldElement:
    """Immutable field element tied to its :class:`FieldSpec`."""

    spec: FieldSpec
    value: object

    def _other(self, other):
        if isinstance(other, FieldElement):
            if other.spec != self.spec:
                raise MixedField(f"{self.spec} vs {other.spec}")
            return other.value
        return self.spec.normalize(other)

    def __add__(self, other):
        return FieldElement(self.spec, self.spec.add(self.value, self._other(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.spec, self.spec.sub(self.value, self._other(other)))

    def __rsub__(self, other):
        return FieldElement(self.spec, self.spec.sub(self._other(other), self.value))

    def __mul__(self, other):
        return FieldElement(self.spec, self.spec.mul(self.value, self._other(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return FieldElement(self.spec, self.spec.div(self.value, self._other(other)))

    def __rtruediv__(self, other):
        return FieldElement(self.spec, self.spec.div(self._other(other), self.value))

    def __neg__(self):
        return FieldElement(self.spec, self.spec.neg(self.value))

    def __pow__(self, e: int):
        return FieldElement(self.spec, self.spec.pow(self.value, int(e)))

    def inv(self) -> "FieldElement":
        return FieldElement(self.spec, self.spec.inv(self.value))

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.spec == other.spec and self.value == other.value
        try:
            return self.value == self.spec.normalize(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash((self.spec, self.value))

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return int(self.value)

    def __float__(self):
        return float(self.value)

    def __repr__(self):
        return f"{self.value}@{self.spec}"


def arith(a: FieldElement, b: FieldElement, op: str) -> FieldElement:
    """Apply ``add``, ``sub``, ``mul`` or ``div`` to two elements of one field."""
    if a.spec != b.spec:
        raise MixedField(f"{a.spec} vs {b.spec}")
    fn = {"add": a.spec.add, "sub": a.spec.sub, "mul": a.spec.mul, "div": a.spec.div}[op]
    return FieldElement(a.spec, fn(a.value, b.value))


def max_points(spec: FieldSpec, constraint: str = "none") -> int | None:
    """Largest count sample_distinct_points can satisfy (None = unbounded)."""
    order = spec.order
    if order is None:
        return None
    if constraint == "none":
        return order - 1
    # nonzero, not self-reciprocal, at most one of each {a, 1/a} pair
    self_recip = 2 if spec.kind == "prime" else 1
    return (order - 1 - self_recip) // 2


def sample_distinct_points(
    spec: FieldSpec, count: int, constraint: str = "none", seed: int = 0
) -> list[FieldElement]:
    """Pairwise-distinct nonzero points, deterministic in ``seed``.

    With ``constraint="no_reciprocal_pairs"`` additionally a*b != 1 for every
    pair including a == b, so no point is +-1.
    """
    if constraint not in ("none", "no_reciprocal_pairs"):
        raise ValueError(f"unknown constraint {constraint!r}")
    if count < 0:
        raise ValueError("count must be non-negative")
    if count == 0:
        return []
    limit = max_points(spec, constraint)
    if limit is not None and count > limit:
        raise FieldTooSmall(
            f"{spec} holds at most {limit} points under constraint {constraint!r}, asked for {count}"
        )
    rng = np.random.default_rng(seed)
    recip = constraint == "no_reciprocal_pairs"
    k = spec.kind

    if k == "real64":
        out: list[float] = []
        seen = set()
        while len(out) < count:
            v = float(rng.uniform(-1.0, 1.0))
            if v == 0.0 or v in seen:
                continue
            seen.add(v)
            out.append(v)
        return [FieldElement(spec, v) for v in out]

    if k == "rational":
        chosen: list[Fraction] = []
        seen = set()
        bound = 8
        misses = 0
        while len(chosen) < count:
            num = int(rng.integers(-bound, bound + 1))
            den = int(rng.integers(1, bound + 1))
            v = Fraction(num, den)
            ok = v != 0 and v not in seen
            if ok and recip:
                ok = v * v != 1 and all(v * c != 1 for c in chosen)
            if ok:
                chosen.append(v)
                seen.add(v)
                misses = 0
            else:
                misses += 1
                if misses > 32:
                    bound *= 2
                    misses = 0
        return [FieldElement(spec, v) for v in chosen]

    order = spec.order
    if order <= 1 << 16:
        # enumerate admissible classes, then pick without replacement
        if recip:
            classes, done = [], set()
            for a in range(1, order):
                if a in done:
                    continue
                b = spec.inv(a)
                done.update((a, b))
                if a != b:
                    classes.append((a, b))
            idx = rng.permutation(len(classes))[:count]
            sides = rng.integers(0, 2, size=count)
            vals = [classes[i][s] for i, s in zip(idx, sides)]
        else:
            vals = [int(v) + 1 for v in rng.permutation(order - 1)[:count]]
        return [FieldElement(spec, int(v)) for v in vals]

    chosen_set: set[int] = set()
    out_vals: list[int] = []
    while len(out_vals) < count:
        v = int(rng.integers(1, order))
        if v in chosen_set:
            continue
        if recip:
            iv = spec.inv(v)
            if iv == v or iv in chosen_set:
                continue
        chosen_set.add(v)
        out_vals.append(v)
    return [FieldElement(spec, v) for v in out_vals]


def as_raw(spec: FieldSpec, values: Iterable) -> list:
    return [spec.normalize(v) for v in values]
