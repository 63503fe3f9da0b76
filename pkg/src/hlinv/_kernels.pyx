# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; see ``_kernels_py.py`` for the reference semantics.

All arithmetic is on checked 64-bit integers.  Any overflow raises
``OverflowError`` and the dispatcher retries with the pure-Python twin.
"""
from itertools import permutations

import numpy as np

from libc.stdlib cimport malloc, calloc, free

cdef extern from *:
    bint add_ovf "__builtin_add_overflow"(long long a, long long b, long long *res) nogil
    bint sub_ovf "__builtin_sub_overflow"(long long a, long long b, long long *res) nogil
    bint mul_ovf "__builtin_mul_overflow"(long long a, long long b, long long *res) nogil


def selection_coefficients(levels, circles, signs, dims):
    cdef long long[::1] lv = np.ascontiguousarray(levels, dtype=np.int64)
    cdef long long[::1] cv = np.ascontiguousarray(circles, dtype=np.int64)
    cdef long long[::1] sv = np.ascontiguousarray(signs, dtype=np.int64)
    cdef Py_ssize_t depth = len(dims)
    cdef Py_ssize_t j, t, p, size, g, k, nletters = lv.shape[0]
    cdef long long v, res
    cdef long long **tables
    cdef Py_ssize_t *sizes
    cdef Py_ssize_t *gs
    cdef bint overflow = False

    tables = <long long **>calloc(depth + 1, sizeof(long long *))
    sizes = <Py_ssize_t *>malloc((depth + 1) * sizeof(Py_ssize_t))
    gs = <Py_ssize_t *>malloc((depth + 1) * sizeof(Py_ssize_t))
    if tables == NULL or sizes == NULL or gs == NULL:
        free(tables); free(sizes); free(gs)
        raise MemoryError()
    try:
        size = 1
        sizes[0] = 1
        for j in range(depth):
            gs[j] = dims[j]
            size *= gs[j]
            sizes[j + 1] = size
        for j in range(depth + 1):
            tables[j] = <long long *>calloc(sizes[j], sizeof(long long))
            if tables[j] == NULL:
                raise MemoryError()
        tables[0][0] = 1
        with nogil:
            for t in range(nletters):
                j = lv[t]
                if j < 0:
                    continue
                k = cv[t]
                g = gs[j]
                for p in range(sizes[j]):
                    v = tables[j][p]
                    if v == 0:
                        continue
                    if sv[t] > 0:
                        if add_ovf(tables[j + 1][p * g + k], v, &res):
                            overflow = True
                            break
                    else:
                        if sub_ovf(tables[j + 1][p * g + k], v, &res):
                            overflow = True
                            break
                    tables[j + 1][p * g + k] = res
                if overflow:
                    break
        if overflow:
            raise OverflowError("coefficient exceeds 64 bits")
        return [tables[depth][p] for p in range(sizes[depth])]
    finally:
        for j in range(depth + 1):
            if tables[j] != NULL:
                free(tables[j])
        free(tables)
        free(sizes)
        free(gs)


cdef int _rank_exceeds(long long *vals, Py_ssize_t *table, Py_ssize_t m, Py_ssize_t cols,
                       long long *work, Py_ssize_t q) nogil:
    """1 if the m x cols matrix vals[table[...]] has rank > q, 0 if not, -1 on overflow."""
    cdef Py_ssize_t i, j, c, r = 0, piv
    cdef long long p, f, prev = 1, a, b, tmp
    for i in range(m * cols):
        work[i] = vals[table[i]]
    for c in range(cols):
        piv = -1
        for i in range(r, m):
            if work[i * cols + c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(cols):
                tmp = work[r * cols + j]
                work[r * cols + j] = work[piv * cols + j]
                work[piv * cols + j] = tmp
        p = work[r * cols + c]
        for i in range(r + 1, m):
            f = work[i * cols + c]
            for j in range(c, cols):
                if mul_ovf(p, work[i * cols + j], &a):
                    return -1
                if mul_ovf(f, work[r * cols + j], &b):
                    return -1
                if sub_ovf(a, b, &a):
                    return -1
                work[i * cols + j] = a // prev
        prev = p
        r += 1
        if r > q:
            return 1
    return 0


def low_rank_scan(residual, dims, axis_vectors, Py_ssize_t start, Py_ssize_t stop, Py_ssize_t q):
    cdef long long[::1] res = np.ascontiguousarray(residual, dtype=np.int64)
    cdef Py_ssize_t d = len(dims), n = res.shape[0]
    cdef Py_ssize_t k, idx, t, rem, i, scanned = 0
    cdef long long term, val
    cdef int status
    cdef bint overflow = False, low
    flat_vecs = [np.ascontiguousarray(v, dtype=np.int64).reshape(-1) for v in axis_vectors]
    cdef Py_ssize_t *cdims = <Py_ssize_t *>malloc(d * sizeof(Py_ssize_t))
    cdef Py_ssize_t *strides = <Py_ssize_t *>malloc(d * sizeof(Py_ssize_t))
    cdef Py_ssize_t *counts = <Py_ssize_t *>malloc(d * sizeof(Py_ssize_t))
    cdef Py_ssize_t *choice = <Py_ssize_t *>malloc(d * sizeof(Py_ssize_t))
    cdef Py_ssize_t *offsets = <Py_ssize_t *>malloc(d * sizeof(Py_ssize_t))
    cdef Py_ssize_t *tables = <Py_ssize_t *>malloc(d * n * sizeof(Py_ssize_t))
    cdef long long **vptr = <long long **>malloc(d * sizeof(long long *))
    cdef long long *diff = <long long *>malloc(n * sizeof(long long))
    cdef long long *work = <long long *>malloc(n * sizeof(long long))
    cdef long long[::1] mv
    hits = []
    try:
        for k in range(d):
            cdims[k] = dims[k]
            counts[k] = len(axis_vectors[k])
            mv = flat_vecs[k]
            vptr[k] = &mv[0] if mv.shape[0] > 0 else NULL
        strides[d - 1] = 1
        for k in range(d - 2, -1, -1):
            strides[k] = strides[k + 1] * cdims[k + 1]
        # row i of flattening k lists the flat indices whose k-th coordinate
        # is i, in increasing order
        for k in range(d):
            rem = 0
            for i in range(cdims[k]):
                for idx in range(n):
                    if (idx // strides[k]) % cdims[k] == i:
                        tables[k * n + rem] = idx
                        rem += 1
        for t in range(start, stop):
            rem = t
            for k in range(d - 1, -1, -1):
                choice[k] = rem % counts[k]
                rem = rem // counts[k]
            for k in range(d):
                offsets[k] = choice[k] * cdims[k]
            for idx in range(n):
                term = 1
                for k in range(d):
                    val = vptr[k][offsets[k] + (idx // strides[k]) % cdims[k]]
                    if mul_ovf(term, val, &term):
                        overflow = True
                        break
                if overflow:
                    break
                if sub_ovf(res[idx], term, &diff[idx]):
                    overflow = True
                    break
            if overflow:
                break
            scanned += 1
            low = True
            for k in range(d):
                status = _rank_exceeds(diff, &tables[k * n], cdims[k], n // cdims[k], work, q)
                if status < 0:
                    overflow = True
                    break
                if status == 1:
                    low = False
                    break
            if overflow:
                break
            if low:
                hits.append(t)
        if overflow:
            raise OverflowError("rank scan exceeds 64 bits")
        return hits, scanned
    finally:
        free(cdims); free(strides); free(counts); free(choice); free(offsets)
        free(tables); free(vptr); free(diff); free(work)


def _parity(perm):
    seen = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def hyperdet_fixed(entries, Py_ssize_t m, Py_ssize_t d):
    cdef long long[::1] a = np.ascontiguousarray(entries, dtype=np.int64)
    plist = list(permutations(range(m)))
    cdef long long[:, ::1] perms = np.array(plist, dtype=np.int64).reshape(len(plist), m)
    cdef long long[::1] psign = np.array([_parity(p) for p in plist], dtype=np.int64)
    cdef Py_ssize_t nperm = perms.shape[0], level, i, k, idx
    cdef Py_ssize_t tuples = 1
    cdef Py_ssize_t t, rem
    cdef long long total = 0, prod
    cdef bint overflow = False
    cdef Py_ssize_t *strides = <Py_ssize_t *>malloc(d * sizeof(Py_ssize_t))
    cdef Py_ssize_t *choice = <Py_ssize_t *>malloc(d * sizeof(Py_ssize_t))
    try:
        strides[d - 1] = 1
        for k in range(d - 2, -1, -1):
            strides[k] = strides[k + 1] * m
        for k in range(d - 1):
            tuples *= nperm
        for t in range(tuples):
            rem = t
            prod = 1
            for k in range(d - 1, 0, -1):
                choice[k] = rem % nperm
                rem = rem // nperm
                prod *= psign[choice[k]]
            for i in range(m):
                idx = i * strides[0]
                for k in range(1, d):
                    idx += perms[choice[k], i] * strides[k]
                if mul_ovf(prod, a[idx], &prod):
                    overflow = True
                    break
                if prod == 0:
                    break
            if overflow:
                break
            if add_ovf(total, prod, &total):
                overflow = True
                break
        if overflow:
            raise OverflowError("hyperdeterminant exceeds 64 bits")
        return total
    finally:
        free(strides)
        free(choice)
