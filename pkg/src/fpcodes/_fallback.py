"""Pure numpy/Python versions of the compiled kernels (same signatures)."""
import numpy as np

_SMALL_Q = 3037000499  # q*q < 2^63
_CHUNK = 1 << 15


def mod_matmul(a, b, q):
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    n, k = a.shape
    m = b.shape[1]
    if k == 0:
        return np.zeros((n, m), dtype=np.int64)
    if q < (1 << 31):
        # split a into 16-bit limbs so every partial dot fits in int64
        lo = a & 0xFFFF
        hi = a >> 16
        out = np.zeros((n, m), dtype=np.int64)
        for s in range(0, k, _CHUNK):
            bs = b[s:s + _CHUNK]
            h = (hi[:, s:s + _CHUNK] @ bs) % q
            l = (lo[:, s:s + _CHUNK] @ bs) % q
            out = (out + (h * 65536) % q + l) % q
        return out
    prod = a.astype(object) @ b.astype(object)
    return np.array(prod % q, dtype=np.int64).reshape(n, m)


def gf2_mul(a, b, w, poly):
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


def _gf2_mul_vec(a, b, w, poly):
    # vectorized shift-and-xor; a, b int64 arrays of equal shape, values < 2^w
    a = a.astype(np.uint64)
    b = b.astype(np.uint64)
    r = np.zeros_like(a)
    top = np.uint64(1 << w) if w < 64 else None
    pl = np.uint64(poly & ((1 << 64) - 1))
    one = np.uint64(1)
    for _ in range(w):
        r ^= np.where(b & one, a, np.uint64(0))
        b >>= one
        carry = (a >> np.uint64(w - 1)) & one
        a = a << one
        a ^= np.where(carry == one, pl, np.uint64(0))
        if top is not None:
            a &= top - one
    return r.astype(np.int64)


def gf2_mul_elementwise(a, b, w, poly):
    return _gf2_mul_vec(np.asarray(a), np.asarray(b), w, poly)


def mod_mul_elementwise(a, b, q):
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if q < _SMALL_Q:
        return (a * b) % q
    return np.array((a.astype(object) * b.astype(object)) % q, dtype=np.int64).reshape(a.shape)


def gf2_matmul(a, b, w, poly):
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    n, k = a.shape
    m = b.shape[1]
    out = np.zeros((n, m), dtype=np.int64)
    for t in range(k):
        col = np.broadcast_to(a[:, t:t + 1], (n, m))
        row = np.broadcast_to(b[t:t + 1, :], (n, m))
        out ^= _gf2_mul_vec(col, row, w, poly)
    return out


def _rref(aug, ncols, inv, elim, det_mul, det_neg, one):
    x = [list(map(int, row)) for row in np.asarray(aug)]
    r = len(x)
    c = len(x[0]) if r else 0
    row = 0
    det = one
    pivots = []
    for col in range(ncols):
        if row >= r:
            break
        piv = next((i for i in range(row, r) if x[i][col]), -1)
        if piv < 0:
            continue
        if piv != row:
            x[row], x[piv] = x[piv], x[row]
            det = det_neg(det)
        pv = x[row][col]
        det = det_mul(det, pv)
        iv = inv(pv)
        prow = [elim.mul(v, iv) for v in x[row]]
        x[row] = prow
        nz = [j for j in range(col, c) if prow[j]]
        for i in range(r):
            if i == row:
                continue
            f = x[i][col]
            if not f:
                continue
            xi = x[i]
            for j in nz:
                xi[j] = elim.sub(xi[j], elim.mul(f, prow[j]))
        pivots.append(col)
        row += 1
    if r != ncols or len(pivots) < ncols:
        det = 0
    out = np.array(x, dtype=np.int64).reshape(r, c)
    return out, pivots, det


class _Mod:
    def __init__(self, q):
        self.q = q

    def mul(self, a, b):
        return a * b % self.q

    def sub(self, a, b):
        return (a - b) % self.q


class _GF2:
    def __init__(self, w, poly):
        self.w, self.poly = w, poly

    def mul(self, a, b):
        return gf2_mul(a, b, self.w, self.poly)

    def sub(self, a, b):
        return a ^ b


def mod_rref(aug, q, ncols):
    ops = _Mod(q)
    return _rref(
        aug, ncols,
        inv=lambda v: pow(v, -1, q),
        elim=ops,
        det_mul=ops.mul,
        det_neg=lambda d: -d % q,
        one=1,
    )


def gf2_rref(aug, w, poly, ncols):
    ops = _GF2(w, poly)

    def inv(v):
        e, r, base = (1 << w) - 2, 1, v
        while e:
            if e & 1:
                r = ops.mul(r, base)
            base = ops.mul(base, base)
            e >>= 1
        return r

    return _rref(aug, ncols, inv=inv, elim=ops, det_mul=ops.mul, det_neg=lambda d: d, one=1)


def jacobi_singular_values(a, tol=1e-15, max_sweeps=100):
    u = np.array(a, dtype=np.float64, copy=True)
    n = u.shape[1]
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                ci, cj = u[:, i], u[:, j]
                alpha = float(ci @ ci)
                beta = float(cj @ cj)
                gamma = float(ci @ cj)
                if gamma == 0.0 or alpha == 0.0 or beta == 0.0:
                    continue
                rel = abs(gamma) / np.sqrt(alpha * beta)
                off = max(off, rel)
                if rel <= tol:
                    continue
                zeta = (beta - alpha) / (2.0 * gamma)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                cs = 1.0 / np.sqrt(1.0 + t * t)
                sn = cs * t
                ui = ci.copy()
                u[:, i] = cs * ui - sn * cj
                u[:, j] = sn * ui + cs * u[:, j]
        if off <= tol:
            break
    sv = np.sqrt((u * u).sum(axis=0))
    return np.sort(sv)[::-1].copy()
