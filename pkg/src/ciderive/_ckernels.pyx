# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of _pykernels. Same three functions, loop style."""

import numpy as np

cimport numpy as cnp
from libc.math cimport log2

IMPL = "cython"


def entropy_bits(p):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a = np.ascontiguousarray(
        np.asarray(p, dtype=np.float64).ravel())
    cdef Py_ssize_t i, n = a.shape[0]
    cdef double s = 0.0, x
    for i in range(n):
        x = a[i]
        if x > 0.0:
            s -= x * log2(x)
    return s


def batch_entropy_rows(mat):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a = np.ascontiguousarray(
        np.asarray(mat, dtype=np.float64))
    cdef Py_ssize_t i, j, m = a.shape[0], n = a.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(m)
    cdef double s, x
    for i in range(m):
        s = 0.0
        for j in range(n):
            x = a[i, j]
            if x > 0.0:
                s -= x * log2(x)
        out[i] = s
    return out


def gamma_scores(p, maps, r):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pj = np.ascontiguousarray(
        np.asarray(p, dtype=np.float64))
    cdef cnp.ndarray[cnp.int64_t, ndim=2] mp = np.ascontiguousarray(
        np.asarray(maps, dtype=np.int64))
    cdef Py_ssize_t m = pj.shape[0], n = pj.shape[1]
    cdef Py_ssize_t K = mp.shape[0], R = r
    cdef Py_ssize_t k, i, j, c, v
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hg = np.zeros(K)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hga = np.zeros(K)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hgb = np.zeros(K)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pg = np.zeros(R)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pga = np.zeros((m, R))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pgb = np.zeros((n, R))
    cdef double ha = 0.0, hb = 0.0, s, sa, sb, x

    for i in range(m):
        s = 0.0
        for j in range(n):
            s += pj[i, j]
        if s > 0.0:
            ha -= s * log2(s)
    for j in range(n):
        s = 0.0
        for i in range(m):
            s += pj[i, j]
        if s > 0.0:
            hb -= s * log2(s)

    for k in range(K):
        pg[:] = 0.0
        pga[:, :] = 0.0
        pgb[:, :] = 0.0
        c = 0
        for i in range(m):
            for j in range(n):
                v = mp[k, c]
                x = pj[i, j]
                pg[v] += x
                pga[i, v] += x
                pgb[j, v] += x
                c += 1
        s = 0.0
        for v in range(R):
            x = pg[v]
            if x > 0.0:
                s -= x * log2(x)
        hg[k] = s
        sa = 0.0
        for i in range(m):
            for v in range(R):
                x = pga[i, v]
                if x > 0.0:
                    sa -= x * log2(x)
        sb = 0.0
        for j in range(n):
            for v in range(R):
                x = pgb[j, v]
                if x > 0.0:
                    sb -= x * log2(x)
        hga[k] = sa - ha if sa > ha else 0.0
        hgb[k] = sb - hb if sb > hb else 0.0
    return hg, hga, hgb
