"""Dense matrices over a :class:`FieldSpec`, block partitioning and exact solves."""
from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

from . import kernels
from .errors import (
    FormatError,
    IndivisibleShape,
    MixedField,
    ShapeMismatch,
    SingularMatrix,
    UnsupportedCarrier,
)
from .field import FieldElement, FieldSpec

REAL_PIVOT_TOL = 1e-12


class DenseMatrix:
    """Immutable matrix: a FieldSpec plus a read-only 2-D numpy array of raw values."""

    __slots__ = ("spec", "data")

    def __init__(self, spec: FieldSpec, data, *, normalized: bool = False):
        arr = data if normalized else spec.asarray(data)
        if arr.ndim != 2:
            raise ShapeMismatch(f"matrix data must be 2-D, got shape {arr.shape}")
        if normalized and arr.flags.writeable and arr.base is not None:
            arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("DenseMatrix is immutable")

    @classmethod
    def from_rows(cls, spec: FieldSpec, rows: Sequence[Sequence]) -> "DenseMatrix":
        rows = [list(r) for r in rows]
        if not rows:
            return cls(spec, spec.zeros((0, 0)), normalized=True)
        return cls(spec, rows)

    @classmethod
    def zeros(cls, spec: FieldSpec, rows: int, cols: int) -> "DenseMatrix":
        return cls(spec, spec.zeros((rows, cols)), normalized=True)

    @classmethod
    def identity(cls, spec: FieldSpec, n: int) -> "DenseMatrix":
        return cls(spec, spec.eye(n), normalized=True)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape

    @property
    def entries(self) -> list[FieldElement]:
        return [FieldElement(self.spec, v) for v in self.data.ravel().tolist()]

    def __getitem__(self, idx) -> FieldElement:
        i, j = idx
        v = self.data[i, j]
        return FieldElement(self.spec, v.item() if hasattr(v, "item") else v)

    def tolist(self) -> list[list]:
        return self.data.tolist()

    def __eq__(self, other):
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return (
            self.spec == other.spec
            and self.shape == other.shape
            and bool(np.array_equal(self.data, other.data))
        )

    __hash__ = None

    def __repr__(self):
        return f"DenseMatrix({self.spec}, {self.rows}x{self.cols})"

    @property
    def T(self) -> "DenseMatrix":
        return transpose(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __add__(self, other):
        _same(self, other)
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} + {other.shape}")
        return DenseMatrix(self.spec, self.spec.add_arrays(self.data, other.data), normalized=True)

    def __sub__(self, other):
        _same(self, other)
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} - {other.shape}")
        return DenseMatrix(self.spec, self.spec.sub_arrays(self.data, other.data), normalized=True)

    def scale(self, c) -> "DenseMatrix":
        c = self.spec.normalize(c)
        return DenseMatrix(self.spec, self.spec.mul_arrays(self.data, c), normalized=True)

    def submatrix(self, r0: int, r1: int, c0: int, c1: int) -> "DenseMatrix":
        return DenseMatrix(self.spec, self.data[r0:r1, c0:c1].copy(), normalized=True)


def _same(a: DenseMatrix, b: DenseMatrix):
    if a.spec != b.spec:
        raise MixedField(f"{a.spec} vs {b.spec}")


@dataclass
class OpCounter:
    """Field multiplications and additions spent by a routine."""

    mults: int = 0
    adds: int = 0

    def add(self, mults: int = 0, adds: int = 0):
        self.mults += mults
        self.adds += adds

    def merge(self, other: "OpCounter"):
        self.mults += other.mults
        self.adds += other.adds


@dataclass(frozen=True)
class BlockGrid:
    """m x p grid of equal blocks of a matrix."""

    m: int
    p: int
    blocks: tuple = dc_field(repr=False)

    def block(self, k: int, j: int) -> DenseMatrix:
        return self.blocks[k][j]

    @property
    def spec(self) -> FieldSpec:
        return self.blocks[0][0].spec

    @property
    def block_shape(self):
        return self.blocks[0][0].shape


def partition(A: DenseMatrix, m: int, p: int) -> BlockGrid:
    if m < 1 or p < 1:
        raise IndivisibleShape(f"m and p must be positive, got m={m}, p={p}")
    if A.rows % m or A.cols % p:
        raise IndivisibleShape(f"{A.rows}x{A.cols} matrix cannot be split into {m}x{p} blocks")
    br, bc = A.rows // m, A.cols // p
    blocks = tuple(
        tuple(A.submatrix(k * br, (k + 1) * br, j * bc, (j + 1) * bc) for j in range(p))
        for k in range(m)
    )
    return BlockGrid(m, p, blocks)


def assemble(grid: BlockGrid) -> DenseMatrix:
    data = np.block([[b.data for b in row] for row in grid.blocks])
    return DenseMatrix(grid.spec, np.ascontiguousarray(data), normalized=True)


def assemble_blocks(spec: FieldSpec, blocks: Sequence[Sequence[DenseMatrix]]) -> DenseMatrix:
    return assemble(BlockGrid(len(blocks), len(blocks[0]), tuple(tuple(r) for r in blocks)))


def transpose(A: DenseMatrix) -> DenseMatrix:
    return DenseMatrix(A.spec, np.ascontiguousarray(A.data.T), normalized=True)


def matmul_raw(spec: FieldSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of raw carrier arrays (no shape checks)."""
    k = spec.kind
    if k == "prime":
        return kernels.mod_matmul(a, b, spec.q)
    if k == "binary":
        return kernels.gf2_matmul(a, b, spec.w, spec.poly)
    if k == "real64":
        return a @ b
    if a.shape[1] == 0:
        return spec.zeros((a.shape[0], b.shape[1]))
    return np.dot(a, b)


def matmul(A: DenseMatrix, B: DenseMatrix) -> DenseMatrix:
    _same(A, B)
    if A.cols != B.rows:
        raise ShapeMismatch(f"cannot multiply {A.rows}x{A.cols} by {B.rows}x{B.cols}")
    return DenseMatrix(A.spec, matmul_raw(A.spec, A.data, B.data), normalized=True)


# elimination ----------------------------------------------------------------

def _rref_rational(x: np.ndarray, ncols: int):
    x = [list(r) for r in x]
    r = len(x)
    c = len(x[0]) if r else 0
    row = 0
    pivots = []
    for col in range(ncols):
        if row >= r:
            break
        piv = next((i for i in range(row, r) if x[i][col] != 0), -1)
        if piv < 0:
            continue
        x[row], x[piv] = x[piv], x[row]
        pv = x[row][col]
        prow = [v / pv for v in x[row]]
        x[row] = prow
        nz = [j for j in range(col, c) if prow[j] != 0]
        for i in range(r):
            if i != row and x[i][col] != 0:
                f = x[i][col]
                xi = x[i]
                for j in nz:
                    xi[j] = xi[j] - f * prow[j]
        pivots.append(col)
        row += 1
    out = np.empty((r, c), dtype=object)
    for i in range(r):
        out[i, :] = x[i]
    return out, pivots


def _rref_real(x: np.ndarray, ncols: int, tol: float):
    x = np.array(x, dtype=np.float64, copy=True)
    r = x.shape[0]
    row = 0
    pivots = []
    scale = np.abs(x[:, :ncols]).max(axis=1) if ncols and r else np.zeros(r)
    for col in range(ncols):
        if row >= r:
            break
        piv = row + int(np.argmax(np.abs(x[row:, col])))
        if abs(x[piv, col]) <= tol * max(scale[piv], np.finfo(float).tiny):
            continue
        if piv != row:
            x[[row, piv]] = x[[piv, row]]
            scale[[row, piv]] = scale[[piv, row]]
        x[row] /= x[row, col]
        f = x[:, col].copy()
        f[row] = 0.0
        x -= np.outer(f, x[row])
        pivots.append(col)
        row += 1
    return x, pivots


def rref(M: DenseMatrix | np.ndarray, ncols: int | None = None, spec: FieldSpec | None = None):
    """Reduced row-echelon form over the first ``ncols`` columns.

    Returns (reduced raw array, pivot column list). On real64 a column whose
    best pivot is below 1e-12 times its row scale is treated as zero.
    """
    if isinstance(M, DenseMatrix):
        spec, x = M.spec, M.data
    else:
        x = M
    if ncols is None:
        ncols = x.shape[1]
    k = spec.kind
    if k == "prime":
        out, piv, _ = kernels.mod_rref(x, spec.q, ncols)
        return out, list(piv)
    if k == "binary":
        out, piv, _ = kernels.gf2_rref(x, spec.w, spec.poly, ncols)
        return out, list(piv)
    if k == "rational":
        return _rref_rational(x, ncols)
    return _rref_real(x, ncols, REAL_PIVOT_TOL)


def solve_raw(spec: FieldSpec, m: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    if m.shape != (n, n):
        raise ShapeMismatch(f"solve needs a square matrix, got {m.shape}")
    if rhs.shape[0] != n:
        raise ShapeMismatch(f"rhs has {rhs.shape[0]} rows, expected {n}")
    if n == 0:
        return rhs.copy()
    aug = np.concatenate([m, rhs], axis=1)
    out, piv = rref(aug, n, spec)
    if len(piv) < n:
        raise SingularMatrix(f"{n}x{n} matrix is singular (rank {len(piv)})")
    return np.ascontiguousarray(out[:, n:])


def solve(M: DenseMatrix, rhs: DenseMatrix) -> DenseMatrix:
    _same(M, rhs)
    return DenseMatrix(M.spec, solve_raw(M.spec, M.data, rhs.data), normalized=True)


def inverse_raw(spec: FieldSpec, m: np.ndarray) -> np.ndarray:
    return solve_raw(spec, m, spec.eye(m.shape[0]))


def inverse(M: DenseMatrix) -> DenseMatrix:
    return DenseMatrix(M.spec, inverse_raw(M.spec, M.data), normalized=True)


def rank(M: DenseMatrix) -> int:
    if not M.spec.exact:
        raise UnsupportedCarrier("rank is only offered on exact carriers")
    if M.rows == 0 or M.cols == 0:
        return 0
    return len(rref(M)[1])


def independent_rows(spec: FieldSpec, m: np.ndarray) -> list[int]:
    """Indices of a maximal linearly independent set of rows (lowest indices first)."""
    if m.shape[0] == 0 or m.shape[1] == 0:
        return []
    _, piv = rref(np.ascontiguousarray(m.T), None, spec)
    return list(piv)


def _bareiss(rows: list[list[int]]) -> int:
    n = len(rows)
    a = [r[:] for r in rows]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            ai = a[i]
            ak = a[k]
            for j in range(k + 1, n):
                ai[j] = (ai[j] * akk - aik * ak[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1] if n else 1


def determinant(M: DenseMatrix) -> FieldElement:
    spec = M.spec
    if not spec.exact:
        raise UnsupportedCarrier("determinant is only offered on exact carriers")
    if M.rows != M.cols:
        raise ShapeMismatch(f"determinant needs a square matrix, got {M.shape}")
    n = M.rows
    if n == 0:
        return FieldElement(spec, spec.one)
    if spec.kind == "prime":
        return FieldElement(spec, kernels.mod_rref(M.data, spec.q, n)[2])
    if spec.kind == "binary":
        return FieldElement(spec, kernels.gf2_rref(M.data, spec.w, spec.poly, n)[2])
    # clear denominators row by row, then fraction-free elimination on integers
    rows, scale = [], 1
    for r in M.data:
        d = lcm(*(v.denominator for v in r))
        scale *= d
        rows.append([int(v * d) for v in r])
    return FieldElement(spec, Fraction(_bareiss(rows), scale))


def singular_values(M: DenseMatrix) -> np.ndarray:
    if M.spec.kind != "real64":
        raise UnsupportedCarrier("singular values are only offered on real64")
    return kernels.jacobi_singular_values(M.data)


def condition_number_raw(m: np.ndarray) -> float:
    sv = kernels.jacobi_singular_values(m)
    if sv.size == 0:
        return 1.0
    if sv[-1] < 1e-300:
        return float("inf")
    return float(sv[0] / sv[-1])


def condition_number(M: DenseMatrix) -> float:
    if M.spec.kind != "real64":
        raise UnsupportedCarrier("condition numbers are only offered on real64")
    if M.rows != M.cols:
        raise ShapeMismatch(f"condition number needs a square matrix, got {M.shape}")
    return condition_number_raw(M.data)


# binary file format -----------------------------------------------------------

MAGIC = b"FPCM"
VERSION = 1
_TAGS = {"prime": 0, "binary": 1, "rational": 2, "real64": 3}
_KINDS = {v: k for k, v in _TAGS.items()}


def _int_bytes(v: int) -> bytes:
    return v.to_bytes((v.bit_length() + 7) // 8, "little")


def matrix_to_bytes(M: DenseMatrix) -> bytes:
    spec = M.spec
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<BBQQQ", VERSION, _TAGS[spec.kind], spec.param, M.rows, M.cols))
    if spec.kind in ("prime", "binary"):
        buf.write(np.ascontiguousarray(M.data, dtype="<u8").tobytes())
    elif spec.kind == "real64":
        buf.write(np.ascontiguousarray(M.data, dtype="<f8").tobytes())
    else:
        for v in M.data.ravel():
            num, den = v.numerator, v.denominator
            mag = _int_bytes(abs(num))
            buf.write(struct.pack("<BQ", 1 if num < 0 else 0, len(mag)))
            buf.write(mag)
            db = _int_bytes(den)
            buf.write(struct.pack("<Q", len(db)))
            buf.write(db)
    return buf.getvalue()


def matrix_from_bytes(blob: bytes) -> DenseMatrix:
    head = struct.calcsize("<BBQQQ")
    if len(blob) < 4 + head or blob[:4] != MAGIC:
        raise FormatError("not an FPCM matrix file")
    version, tag, param, rows, cols = struct.unpack_from("<BBQQQ", blob, 4)
    if version != VERSION:
        raise FormatError(f"unsupported format version {version}")
    if tag not in _KINDS:
        raise FormatError(f"unknown carrier tag {tag}")
    try:
        spec = FieldSpec(_KINDS[tag], param)
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    off = 4 + head
    count = rows * cols
    if spec.kind in ("prime", "binary", "real64"):
        need = 8 * count
        if len(blob) - off != need:
            raise FormatError(f"payload has {len(blob) - off} bytes, expected {need}")
        if spec.kind == "real64":
            arr = np.frombuffer(blob, dtype="<f8", count=count, offset=off).astype(np.float64)
        else:
            raw = np.frombuffer(blob, dtype="<u8", count=count, offset=off)
            limit = spec.q if spec.kind == "prime" else 1 << spec.w
            if count and int(raw.max()) >= limit:
                raise FormatError("entry out of range for the carrier")
            arr = raw.astype(np.int64)
        return DenseMatrix(spec, arr.reshape(rows, cols).copy(), normalized=True)
    vals = []
    try:
        for _ in range(count):
            sign, n = struct.unpack_from("<BQ", blob, off)
            off += 9
            num = int.from_bytes(blob[off:off + n], "little")
            if off + n > len(blob):
                raise FormatError("truncated rational entry")
            off += n
            (n,) = struct.unpack_from("<Q", blob, off)
            off += 8
            if off + n > len(blob):
                raise FormatError("truncated rational entry")
            den = int.from_bytes(blob[off:off + n], "little")
            off += n
            if den == 0 or sign > 1:
                raise FormatError("bad rational entry")
            vals.append(Fraction(-num if sign else num, den))
    except struct.error:
        raise FormatError("truncated rational payload") from None
    if off != len(blob):
        raise FormatError("trailing bytes after payload")
    arr = np.empty(count, dtype=object)
    arr[:] = vals
    return DenseMatrix(spec, arr.reshape(rows, cols), normalized=True)


def write_matrix(path, M: DenseMatrix):
    with open(path, "wb") as fh:
        fh.write(matrix_to_bytes(M))


def read_matrix(path) -> DenseMatrix:
    with open(path, "rb") as fh:
        return matrix_from_bytes(fh.read())
