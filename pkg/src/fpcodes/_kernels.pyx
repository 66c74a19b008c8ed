# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: modular / GF(2^w) matmul and elimination, Jacobi SVD."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs
from libc.stdint cimport uint64_t, int64_t, int32_t

cnp.import_array()

cdef extern from *:
    """
    #include <stdint.h>
    typedef unsigned __int128 fpc_u128;

    static inline uint64_t fpc_mulmod(uint64_t a, uint64_t b, uint64_t q) {
        return (uint64_t)(((fpc_u128)a * b) % q);
    }

    static inline uint64_t fpc_powmod(uint64_t a, uint64_t e, uint64_t q) {
        uint64_t r = 1 % q;
        a %= q;
        while (e) {
            if (e & 1) r = fpc_mulmod(r, a, q);
            a = fpc_mulmod(a, a, q);
            e >>= 1;
        }
        return r;
    }

    /* carry-less product, then reduce by poly (bit w set) */
    static inline uint64_t fpc_gf2_reduce128(fpc_u128 v, int w, uint64_t poly) {
        fpc_u128 p = (fpc_u128)poly;
        for (int i = 2 * w - 2; i >= w; --i) {
            if ((v >> i) & 1) v ^= p << (i - w);
        }
        return (uint64_t)v;
    }

    static inline fpc_u128 fpc_clmul(uint64_t a, uint64_t b) {
        fpc_u128 r = 0, aa = a;
        while (b) {
            if (b & 1) r ^= aa;
            aa <<= 1;
            b >>= 1;
        }
        return r;
    }

    static inline uint64_t fpc_gf2_mul(uint64_t a, uint64_t b, int w, uint64_t poly) {
        return fpc_gf2_reduce128(fpc_clmul(a, b), w, poly);
    }

    static inline uint64_t fpc_gf2_inv(uint64_t a, int w, uint64_t poly) {
        /* a^(2^w - 2) */
        uint64_t r = 1, base = a;
        uint64_t e = (w == 64) ? ~(uint64_t)1 : (((uint64_t)1 << w) - 2);
        while (e) {
            if (e & 1) r = fpc_gf2_mul(r, base, w, poly);
            base = fpc_gf2_mul(base, base, w, poly);
            e >>= 1;
        }
        return r;
    }

    /* log/antilog multiply for small w; exp table has length 2*(2^w-1) */
    static inline uint64_t fpc_tmul(uint64_t a, uint64_t b, const int32_t *lg, const int64_t *ex) {
        if (a == 0 || b == 0) return 0;
        return (uint64_t)ex[lg[a] + lg[b]];
    }

    static void fpc_mod_matmul(const int64_t *a, const int64_t *b, int64_t *c,
                               Py_ssize_t n, Py_ssize_t k, Py_ssize_t m, uint64_t q) {
        int small = q < ((uint64_t)1 << 32);
        for (Py_ssize_t i = 0; i < n; ++i) {
            for (Py_ssize_t j = 0; j < m; ++j) {
                fpc_u128 acc = 0;
                for (Py_ssize_t t = 0; t < k; ++t) {
                    acc += (fpc_u128)(uint64_t)a[i * k + t] * (uint64_t)b[t * m + j];
                    if (!small && (t & 7) == 7) acc %= q;
                }
                c[i * m + j] = (int64_t)(uint64_t)(acc % q);
            }
        }
    }

    static void fpc_gf2_matmul(const int64_t *a, const int64_t *b, int64_t *c,
                               Py_ssize_t n, Py_ssize_t k, Py_ssize_t m, int w, uint64_t poly) {
        for (Py_ssize_t i = 0; i < n; ++i) {
            for (Py_ssize_t j = 0; j < m; ++j) {
                fpc_u128 acc = 0;
                for (Py_ssize_t t = 0; t < k; ++t)
                    acc ^= fpc_clmul((uint64_t)a[i * k + t], (uint64_t)b[t * m + j]);
                c[i * m + j] = (int64_t)fpc_gf2_reduce128(acc, w, poly);
            }
        }
    }
    """
    uint64_t fpc_mulmod(uint64_t a, uint64_t b, uint64_t q) nogil
    uint64_t fpc_powmod(uint64_t a, uint64_t e, uint64_t q) nogil
    uint64_t fpc_gf2_mul(uint64_t a, uint64_t b, int w, uint64_t poly) nogil
    uint64_t fpc_gf2_inv(uint64_t a, int w, uint64_t poly) nogil
    uint64_t fpc_tmul(uint64_t a, uint64_t b, const int32_t *lg, const int64_t *ex) nogil
    void fpc_mod_matmul(const int64_t *a, const int64_t *b, int64_t *c,
                        Py_ssize_t n, Py_ssize_t k, Py_ssize_t m, uint64_t q) nogil
    void fpc_gf2_matmul(const int64_t *a, const int64_t *b, int64_t *c,
                        Py_ssize_t n, Py_ssize_t k, Py_ssize_t m, int w, uint64_t poly) nogil


TABLE_MAX_W = 16
_tables = {}


def gf2_tables(int w, poly):
    """(log, exp) tables for GF(2^w), built once per (w, poly)."""
    key = (w, int(poly))
    if key in _tables:
        return _tables[key]
    cdef uint64_t order = (1 << w) - 1
    cdef uint64_t g, x, n
    cdef uint64_t pp = poly
    cdef cnp.ndarray[int64_t, ndim=1] ex = np.zeros(2 * order + 1, dtype=np.int64)
    cdef cnp.ndarray[int32_t, ndim=1] lg = np.zeros(order + 1, dtype=np.int32)
    g = 1 if order == 1 else 2
    while True:
        x = 1
        n = 0
        while True:
            ex[n] = x
            n += 1
            x = fpc_gf2_mul(x, g, w, pp)
            if x == 1 or n > order:
                break
        if n == order:
            break
        g += 1
    for n in range(order):
        lg[ex[n]] = n
    for n in range(order, 2 * order + 1):
        ex[n] = ex[n - order]
    _tables[key] = (lg, ex)
    return lg, ex


def mod_matmul(a, b, q):
    cdef cnp.ndarray[int64_t, ndim=2, mode="c"] aa = np.ascontiguousarray(a, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=2, mode="c"] bb = np.ascontiguousarray(b, dtype=np.int64)
    cdef Py_ssize_t n = aa.shape[0], k = aa.shape[1], m = bb.shape[1]
    cdef cnp.ndarray[int64_t, ndim=2, mode="c"] c = np.empty((n, m), dtype=np.int64)
    cdef uint64_t qq = q
    if k == 0:
        c[:, :] = 0
    elif n and m:
        with nogil:
            fpc_mod_matmul(&aa[0, 0], &bb[0, 0], &c[0, 0], n, k, m, qq)
    return c


def gf2_matmul(a, b, int w, poly):
    cdef cnp.ndarray[int64_t, ndim=2, mode="c"] aa = np.ascontiguousarray(a, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=2, mode="c"] bb = np.ascontiguousarray(b, dtype=np.int64)
    cdef Py_ssize_t n = aa.shape[0], k = aa.shape[1], m = bb.shape[1]
    cdef cnp.ndarray[int64_t, ndim=2, mode="c"] c = np.empty((n, m), dtype=np.int64)
    cdef uint64_t pp = poly
    cdef Py_ssize_t i, j, t
    cdef uint64_t acc
    cdef int32_t[::1] lg
    cdef int64_t[::1] ex
    if k == 0:
        c[:, :] = 0
    elif n and m:
        if w <= TABLE_MAX_W:
            lg, ex = gf2_tables(w, poly)
            with nogil:
                for i in range(n):
                    for j in range(m):
                        acc = 0
                        for t in range(k):
                            acc ^= fpc_tmul(<uint64_t>aa[i, t], <uint64_t>bb[t, j], &lg[0], &ex[0])
                        c[i, j] = <int64_t>acc
        else:
            with nogil:
                fpc_gf2_matmul(&aa[0, 0], &bb[0, 0], &c[0, 0], n, k, m, w, pp)
    return c


def mod_mul_elementwise(a, b, q):
    cdef cnp.ndarray[int64_t, ndim=1] fa = np.ascontiguousarray(a, dtype=np.int64).ravel()
    cdef cnp.ndarray[int64_t, ndim=1] fb = np.ascontiguousarray(b, dtype=np.int64).ravel()
    cdef cnp.ndarray[int64_t, ndim=1] out = np.empty(fa.shape[0], dtype=np.int64)
    cdef uint64_t qq = q
    cdef Py_ssize_t i
    for i in range(fa.shape[0]):
        out[i] = <int64_t>fpc_mulmod(<uint64_t>fa[i], <uint64_t>fb[i], qq)
    return out.reshape(np.shape(a))


def gf2_mul_elementwise(a, b, int w, poly):
    cdef cnp.ndarray[int64_t, ndim=1] fa = np.ascontiguousarray(a, dtype=np.int64).ravel()
    cdef cnp.ndarray[int64_t, ndim=1] fb = np.ascontiguousarray(b, dtype=np.int64).ravel()
    cdef cnp.ndarray[int64_t, ndim=1] out = np.empty(fa.shape[0], dtype=np.int64)
    cdef uint64_t pp = poly
    cdef Py_ssize_t i
    cdef int32_t[::1] lg
    cdef int64_t[::1] ex
    if w <= TABLE_MAX_W:
        lg, ex = gf2_tables(w, poly)
        for i in range(fa.shape[0]):
            out[i] = <int64_t>fpc_tmul(<uint64_t>fa[i], <uint64_t>fb[i], &lg[0], &ex[0])
    else:
        for i in range(fa.shape[0]):
            out[i] = <int64_t>fpc_gf2_mul(<uint64_t>fa[i], <uint64_t>fb[i], w, pp)
    return out.reshape(np.shape(a))


def mod_rref(aug, q, Py_ssize_t ncols):
    """Gauss-Jordan over F_q on the first ``ncols`` columns.

    Returns (reduced copy, pivot columns, det) where det is the determinant of
    the leading square block when it is square, else 0.
    """
    cdef cnp.ndarray[int64_t, ndim=2, mode="c"] x = np.array(aug, dtype=np.int64, order="C", copy=True)
    cdef Py_ssize_t r = x.shape[0], c = x.shape[1]
    cdef uint64_t qq = q
    cdef Py_ssize_t row = 0, col, i, j, piv
    cdef uint64_t inv, f, det = 1, tmp
    cdef int64_t t
    pivots = []
    for col in range(ncols):
        if row >= r:
            break
        piv = -1
        for i in range(row, r):
            if x[i, col] != 0:
                piv = i
                break
        if piv < 0:
            det = 0
            continue
        if piv != row:
            for j in range(c):
                t = x[row, j]; x[row, j] = x[piv, j]; x[piv, j] = t
            det = (qq - det) % qq
        det = fpc_mulmod(det, <uint64_t>x[row, col], qq)
        inv = fpc_powmod(<uint64_t>x[row, col], qq - 2, qq)
        for j in range(col, c):
            x[row, j] = <int64_t>fpc_mulmod(<uint64_t>x[row, j], inv, qq)
        for i in range(r):
            if i == row or x[i, col] == 0:
                continue
            f = <uint64_t>x[i, col]
            for j in range(col, c):
                if x[row, j] != 0:
                    tmp = fpc_mulmod(f, <uint64_t>x[row, j], qq)
                    x[i, j] = <int64_t>((<uint64_t>x[i, j] + qq - tmp) % qq)
        pivots.append(col)
        row += 1
    if r != ncols or len(pivots) < ncols:
        det = 0
    return x, pivots, int(det)


def gf2_rref(aug, int w, poly, Py_ssize_t ncols):
    cdef cnp.ndarray[int64_t, ndim=2, mode="c"] x = np.array(aug, dtype=np.int64, order="C", copy=True)
    cdef Py_ssize_t r = x.shape[0], c = x.shape[1]
    cdef uint64_t pp = poly
    cdef Py_ssize_t row = 0, col, i, j, piv
    cdef uint64_t inv, f, det = 1
    cdef int64_t t
    cdef bint tab = w <= TABLE_MAX_W
    cdef int32_t[::1] lg
    cdef int64_t[::1] ex
    cdef const int32_t *lgp = NULL
    cdef const int64_t *exp_ = NULL
    cdef int64_t order = (1 << w) - 1
    if tab:
        lg, ex = gf2_tables(w, poly)
        lgp = &lg[0]
        exp_ = &ex[0]
    pivots = []
    for col in range(ncols):
        if row >= r:
            break
        piv = -1
        for i in range(row, r):
            if x[i, col] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != row:
            for j in range(c):
                t = x[row, j]; x[row, j] = x[piv, j]; x[piv, j] = t
        if tab:
            det = fpc_tmul(det, <uint64_t>x[row, col], lgp, exp_)
            inv = <uint64_t>exp_[(order - lgp[x[row, col]]) % order]
            for j in range(col, c):
                x[row, j] = <int64_t>fpc_tmul(<uint64_t>x[row, j], inv, lgp, exp_)
        else:
            det = fpc_gf2_mul(det, <uint64_t>x[row, col], w, pp)
            inv = fpc_gf2_inv(<uint64_t>x[row, col], w, pp)
            for j in range(col, c):
                x[row, j] = <int64_t>fpc_gf2_mul(<uint64_t>x[row, j], inv, w, pp)
        for i in range(r):
            if i == row or x[i, col] == 0:
                continue
            f = <uint64_t>x[i, col]
            if tab:
                for j in range(col, c):
                    if x[row, j] != 0:
                        x[i, j] ^= <int64_t>fpc_tmul(f, <uint64_t>x[row, j], lgp, exp_)
            else:
                for j in range(col, c):
                    if x[row, j] != 0:
                        x[i, j] ^= <int64_t>fpc_gf2_mul(f, <uint64_t>x[row, j], w, pp)
        pivots.append(col)
        row += 1
    if r != ncols or len(pivots) < ncols:
        det = 0
    return x, pivots, int(det)


def jacobi_singular_values(a, double tol=1e-15, int max_sweeps=100):
    """One-sided Hestenes-Jacobi; returns singular values in descending order."""
    cdef cnp.ndarray[double, ndim=2, mode="c"] u = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t m = u.shape[0], n = u.shape[1], i, j, k
    cdef double alpha, beta, gamma, zeta, t, cs, sn, ui, uj, off
    cdef int sweep
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = 0.0; beta = 0.0; gamma = 0.0
                for k in range(m):
                    alpha += u[k, i] * u[k, i]
                    beta += u[k, j] * u[k, j]
                    gamma += u[k, i] * u[k, j]
                if gamma == 0.0 or alpha == 0.0 or beta == 0.0:
                    continue
                if fabs(gamma) / sqrt(alpha * beta) > off:
                    off = fabs(gamma) / sqrt(alpha * beta)
                if fabs(gamma) <= tol * sqrt(alpha * beta):
                    continue
                zeta = (beta - alpha) / (2.0 * gamma)
                t = (1.0 if zeta >= 0 else -1.0) / (fabs(zeta) + sqrt(1.0 + zeta * zeta))
                cs = 1.0 / sqrt(1.0 + t * t)
                sn = cs * t
                for k in range(m):
                    ui = u[k, i]; uj = u[k, j]
                    u[k, i] = cs * ui - sn * uj
                    u[k, j] = sn * ui + cs * uj
        if off <= tol:
            break
    sv = np.sqrt((u * u).sum(axis=0))
    return np.sort(sv)[::-1].copy()
