"""Pure-Python implementations of the hot kernels.

Every function here has a twin in ``_kernels.pyx`` with the same signature
and the same results; :mod:`hlinv.kernels` picks one at import time.
"""
from itertools import permutations


def selection_coefficients(levels, circles, signs, dims):
    """Magnus coefficients of a word for every choice of one circle per level.

    The word is given letter by letter: ``levels[t]`` is the position of the
    letter's component in the target sequence (``-1`` for letters that do not
    take part), ``circles[t]`` the 0-based circle index inside that component
    and ``signs[t]`` the exponent sign.  Returns a flat row-major list of
    length ``prod(dims)`` whose entry at ``(k_1, ..., k_r)`` is the coefficient
    of ``X_{1,k_1} ... X_{r,k_r}`` in the repetition-free Magnus expansion.
    """
    dims = [int(g) for g in dims]
    tables = [[1]]
    size = 1
    for g in dims:
        size *= g
        tables.append([0] * size)
    for j, k, s in zip(levels, circles, signs):
        if j < 0:
            continue
        prev = tables[j]
        cur = tables[j + 1]
        g = dims[j]
        if s > 0:
            for p, v in enumerate(prev):
                if v:
                    cur[p * g + k] += v
        else:
            for p, v in enumerate(prev):
                if v:
                    cur[p * g + k] -= v
    return tables[len(dims)]


def _strides(dims):
    strides = [1] * len(dims)
    for k in range(len(dims) - 2, -1, -1):
        strides[k] = strides[k + 1] * dims[k + 1]
    return strides


def is_rank_le_one(values, dims):
    """True if the flat tensor ``values`` is zero or an outer product."""
    n = len(values)
    p = next((i for i in range(n) if values[i]), -1)
    if p < 0:
        return True
    d = len(dims)
    strides = _strides(dims)
    pcoord = [(p // strides[k]) % dims[k] for k in range(d)]
    pivot_pow = values[p] ** (d - 1)
    for idx in range(n):
        prod = 1
        for k in range(d):
            ik = (idx // strides[k]) % dims[k]
            prod *= values[p + (ik - pcoord[k]) * strides[k]]
            if not prod:
                break
        if values[idx] * pivot_pow != prod:
            return False
    return True


def _flattening_indices(dims):
    """Per axis, flat positions of the flattening laid out row by row."""
    strides = _strides(dims)
    n = 1
    for m in dims:
        n *= m
    tables = []
    for k, m in enumerate(dims):
        table = []
        for i in range(m):
            for idx in range(n):
                if (idx // strides[k]) % m == i:
                    table.append(idx)
        tables.append(table)
    # lexicographic order of the remaining coordinates equals increasing
    # flat index once the k-th coordinate is fixed
    return tables


def _rank_exceeds(rows, q):
    """Fraction-free elimination; True as soon as the rank exceeds q."""
    rows = [list(r) for r in rows]
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    r = 0
    prev = 1
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][c]
        for i in range(r + 1, nrows):
            f = rows[i][c]
            rows[i] = [(p * x - f * y) // prev for x, y in zip(rows[i], rows[r])]
        prev = p
        r += 1
        if r > q:
            return True
    return False


def max_flattening_rank_le(values, dims, q):
    """True if every flattening of the flat tensor ``values`` has rank <= q."""
    for k, table in enumerate(_flattening_indices(dims)):
        m = dims[k]
        cols = len(table) // m
        rows = [[values[table[i * cols + j]] for j in range(cols)] for i in range(m)]
        if _rank_exceeds(rows, q):
            return False
    return True


def low_rank_scan(residual, dims, axis_vectors, start, stop, q):
    """Scan rank-one terms ``start <= t < stop`` of the candidate product space.

    Term ``t`` is the outer product of one vector per axis, enumerated in
    mixed radix with axis 0 most significant.  Returns ``(hits, scanned)``
    where ``hits`` lists every ``t`` such that all flattenings of
    ``residual - term_t`` have rank at most ``q``.  For ``q == 1`` this is
    the test for tensor rank at most one.
    """
    dims = [int(m) for m in dims]
    d = len(dims)
    counts = [len(v) for v in axis_vectors]
    vecs = [[[int(x) for x in row] for row in v] for v in axis_vectors]
    residual = [int(x) for x in residual]
    strides = _strides(dims)
    n = len(residual)
    coords = [[(idx // strides[k]) % dims[k] for k in range(d)] for idx in range(n)]
    hits = []
    scanned = 0
    for t in range(start, stop):
        choice = []
        rem = t
        for k in range(d - 1, -1, -1):
            choice.append(rem % counts[k])
            rem //= counts[k]
        choice.reverse()
        rows = [vecs[k][choice[k]] for k in range(d)]
        diff = []
        for idx in range(n):
            term = 1
            for k, ik in enumerate(coords[idx]):
                term *= rows[k][ik]
            diff.append(residual[idx] - term)
        scanned += 1
        if max_flattening_rank_le(diff, dims, q):
            hits.append(t)
    return hits, scanned


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


def hyperdet_fixed(entries, m, d):
    """Signed permutation sum with the first permutation fixed to identity."""
    entries = [int(x) for x in entries]
    perms = [(p, _parity(p)) for p in permutations(range(m))]
    strides = _strides([m] * d)
    total = 0

    def rec(level, chosen, sign):
        nonlocal total
        if level == d:
            prod = sign
            for i in range(m):
                idx = i * strides[0]
                for k in range(1, d):
                    idx += chosen[k - 1][i] * strides[k]
                prod *= entries[idx]
                if not prod:
                    return
            total += prod
            return
        for p, s in perms:
            chosen.append(p)
            rec(level + 1, chosen, sign * s)
            chosen.pop()

    rec(1, [], 1)
    return total
