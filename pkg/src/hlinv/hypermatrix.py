"""Integer hypermatrices, elementary slice moves, and their invariants.

Indices and axes in the public API are 1-based to match the usual notation
``a_{k_1 ... k_d}``; entries are stored flat in row-major order.  All
arithmetic is on Python integers, numpy is used only for reshaping (object
dtype), never for numerics.
"""
from __future__ import annotations

import math
import re
from functools import lru_cache
from dataclasses import dataclass
from itertools import permutations, product
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import kernels
from ._kernels_py import _parity

SWAP, NEGATE, ADD = "swap", "neg", "add"


@dataclass(frozen=True)
class Hypermatrix:
    dims: tuple[int, ...]
    entries: tuple[int, ...]
    modulus: int = 0

    def __post_init__(self):
        dims = tuple(int(m) for m in self.dims)
        entries = tuple(int(e) for e in self.entries)
        if not dims or any(m < 1 for m in dims):
            raise ValueError(f"dims must be positive, got {dims}")
        if len(entries) != math.prod(dims):
            raise ValueError(f"expected {math.prod(dims)} entries for dims {dims}, got {len(entries)}")
        modulus = int(self.modulus)
        if modulus < 0:
            raise ValueError("modulus must be nonnegative")
        if modulus and any(not 0 <= e < modulus for e in entries):
            raise ValueError(f"entries must lie in [0, {modulus})")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "modulus", modulus)

    @classmethod
    def zeros(cls, dims: Sequence[int], modulus: int = 0) -> Hypermatrix:
        return cls(tuple(dims), (0,) * math.prod(dims), modulus)

    @classmethod
    def from_array(cls, arr, modulus: int = 0) -> Hypermatrix:
        """Build from a nested list or ndarray, reducing mod ``modulus``."""
        arr = np.array(arr, dtype=object)
        flat = [int(x) for x in arr.reshape(-1)]
        if modulus:
            flat = [x % modulus for x in flat]
        return cls(arr.shape, tuple(flat), modulus)

    @classmethod
    def from_function(cls, dims: Sequence[int], f, modulus: int = 0) -> Hypermatrix:
        """Entry at 1-based ``(k_1, ..., k_d)`` is ``f(k_1, ..., k_d)``."""
        flat = [int(f(*idx)) for idx in product(*(range(1, m + 1) for m in dims))]
        if modulus:
            flat = [x % modulus for x in flat]
        return cls(tuple(dims), tuple(flat), modulus)

    @property
    def order(self) -> int:
        return len(self.dims)

    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=object).reshape(self.dims)

    def __getitem__(self, idx: Sequence[int]) -> int:
        """1-based entry lookup."""
        if len(idx) != self.order:
            raise IndexError("wrong number of indices")
        flat = 0
        for i, m in zip(idx, self.dims):
            if not 1 <= i <= m:
                raise IndexError(f"index {i} out of range 1..{m}")
            flat = flat * m + (i - 1)
        return self.entries[flat]

    def is_zero(self) -> bool:
        return not any(self.entries)

    def max_abs(self) -> int:
        return max((abs(e) for e in self.entries), default=0)

    def content(self) -> int:
        """gcd of all entries (0 for the zero hypermatrix)."""
        return math.gcd(*self.entries)

    def __str__(self):
        return _render(self.array())


def _render(arr) -> str:
    if arr.ndim == 1:
        return "(" + ",".join(str(x) for x in arr) + ")"
    if arr.ndim == 2:
        return "(" + ",".join(_render(row) for row in arr) + ")"
    # rows by the first axis, slices along the last are separated by |
    rows = []
    for i in range(arr.shape[0]):
        sub = arr[i]
        slices = [np.moveaxis(sub, -1, 0)[s] for s in range(sub.shape[-1])]
        rows.append("(" + "|".join(",".join(str(x) for x in np.ravel(s)) for s in slices) + ")")
    return "(" + ",".join(rows) + ")"


def reduce_mod(H: Hypermatrix, modulus: int) -> Hypermatrix:
    if H.modulus:
        raise ValueError("reduce_mod expects an integer hypermatrix")
    if modulus < 0:
        raise ValueError("modulus must be nonnegative")
    if modulus == 0:
        return H
    return Hypermatrix(H.dims, tuple(e % modulus for e in H.entries), modulus)


def outer(*vectors: Sequence[int]) -> Hypermatrix:
    dims = tuple(len(v) for v in vectors)
    flat = [math.prod(xs) for xs in product(*vectors)]
    return Hypermatrix(dims, tuple(flat))


def add(*hs: Hypermatrix) -> Hypermatrix:
    dims, modulus = hs[0].dims, hs[0].modulus
    if any(h.dims != dims or h.modulus != modulus for h in hs):
        raise ValueError("shape or modulus mismatch")
    flat = [sum(col) for col in zip(*(h.entries for h in hs))]
    if modulus:
        flat = [x % modulus for x in flat]
    return Hypermatrix(dims, tuple(flat), modulus)


# ---------------------------------------------------------------- moves


@dataclass(frozen=True)
class Move:
    """One elementary transformation along ``axis`` (1-based).

    ``swap`` exchanges slices ``l`` and ``h``; ``neg`` negates slice ``l``;
    ``add`` replaces slice ``l`` by ``slice_l + c * slice_h``.
    """

    kind: str
    axis: int
    l: int
    h: int = 0
    c: int = 0

    def __post_init__(self):
        if self.kind not in (SWAP, NEGATE, ADD):
            raise ValueError(f"unknown move kind {self.kind!r}")
        if self.axis < 1 or self.l < 1:
            raise ValueError("axis and indices are 1-based")
        if self.kind in (SWAP, ADD) and (self.h < 1 or self.h == self.l):
            raise ValueError("swap/add need a second index different from the first")
        if self.kind == NEGATE and (self.h or self.c):
            raise ValueError("neg takes a single index")
        if self.kind == SWAP and self.c:
            raise ValueError("swap takes no coefficient")

    @classmethod
    def swap(cls, axis: int, l: int, h: int) -> Move:
        return cls(SWAP, axis, l, h)

    @classmethod
    def negate(cls, axis: int, l: int) -> Move:
        return cls(NEGATE, axis, l)

    @classmethod
    def add(cls, axis: int, l: int, h: int, c: int = 1) -> Move:
        return cls(ADD, axis, l, h, int(c))

    def inverse(self) -> Move:
        if self.kind == ADD:
            return Move(ADD, self.axis, self.l, self.h, -self.c)
        return self

    def check(self, dims: Sequence[int]) -> None:
        if not 1 <= self.axis <= len(dims):
            raise ValueError(f"axis {self.axis} out of range 1..{len(dims)}")
        m = dims[self.axis - 1]
        for i in (self.l, self.h) if self.kind != NEGATE else (self.l,):
            if not 1 <= i <= m:
                raise ValueError(f"index {i} out of range 1..{m} on axis {self.axis}")

    def matrix(self, m: int) -> list[list[int]]:
        """The m x m integer matrix acting on the axis."""
        A = [[int(i == j) for j in range(m)] for i in range(m)]
        l, h = self.l - 1, self.h - 1
        if self.kind == SWAP:
            A[l][l] = A[h][h] = 0
            A[l][h] = A[h][l] = 1
        elif self.kind == NEGATE:
            A[l][l] = -1
        else:
            A[l][h] = self.c
        return A

    def __str__(self):
        if self.kind == SWAP:
            return f"swap({self.axis},{self.l},{self.h})"
        if self.kind == NEGATE:
            return f"neg({self.axis},{self.l})"
        return f"add({self.axis},{self.l},{self.h},{self.c})"


_MOVE = re.compile(r"^\s*(swap|neg|add)\s*\(([^()]*)\)\s*$")


def parse_move(text: str) -> Move:
    m = _MOVE.match(text)
    if m is None:
        raise ValueError(f"malformed move {text.strip()!r}")
    try:
        args = [int(a) for a in m.group(2).split(",")]
    except ValueError:
        raise ValueError(f"malformed move arguments in {text.strip()!r}") from None
    kind = m.group(1)
    arity = {SWAP: 3, NEGATE: 2, ADD: 4}[kind]
    if len(args) != arity:
        raise ValueError(f"{kind} takes {arity} arguments, got {len(args)}")
    return Move(kind, *args)


def parse_moves(text: str) -> list[Move]:
    return [parse_move(part) for part in text.split(";") if part.strip()]


def format_moves(moves: Iterable[Move]) -> str:
    return ";".join(str(mv) for mv in moves)


def inverse_moves(moves: Sequence[Move]) -> list[Move]:
    return [mv.inverse() for mv in reversed(moves)]


def apply_move(H: Hypermatrix, mv: Move) -> Hypermatrix:
    mv.check(H.dims)
    arr = np.moveaxis(H.array(), mv.axis - 1, 0).copy()
    l, h = mv.l - 1, mv.h - 1
    if mv.kind == SWAP:
        arr[[l, h]] = arr[[h, l]]
    elif mv.kind == NEGATE:
        arr[l] = -arr[l]
    else:
        arr[l] = arr[l] + mv.c * arr[h]
    arr = np.moveaxis(arr, 0, mv.axis - 1)
    return Hypermatrix.from_array(arr, H.modulus)


def apply_moves(H: Hypermatrix, moves: Iterable[Move]) -> Hypermatrix:
    for mv in moves:
        H = apply_move(H, mv)
    return H


def act(H: Hypermatrix, axis: int, A: Sequence[Sequence[int]]) -> Hypermatrix:
    """Apply the matrix ``A`` to axis ``axis``: slice_i becomes sum_k A[i][k] slice_k."""
    m = H.dims[axis - 1]
    A = np.array(A, dtype=object)
    if A.shape != (m, m):
        raise ValueError(f"matrix must be {m}x{m} for axis {axis}")
    arr = np.moveaxis(H.array(), axis - 1, 0)
    rest = arr.reshape(m, -1)
    out = A.dot(rest).reshape(arr.shape)
    return Hypermatrix.from_array(np.moveaxis(out, 0, axis - 1), H.modulus)


# ---------------------------------------------------------------- matrices


@dataclass(frozen=True)
class Matrix:
    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError("entry count does not match the shape")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> Matrix:
        rows = [list(map(int, r)) for r in rows]
        ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged matrix")
        return cls(len(rows), ncols, tuple(x for r in rows for x in r))

    def tolist(self) -> list[list[int]]:
        return [list(self.entries[i * self.cols:(i + 1) * self.cols]) for i in range(self.rows)]

    def row(self, i: int) -> tuple[int, ...]:
        """1-based row."""
        return self.entries[(i - 1) * self.cols:i * self.cols]


def flatten(H: Hypermatrix, k: int) -> Matrix:
    """The k-th flattening: rows by axis k, columns lexicographic in the rest."""
    if not 1 <= k <= H.order:
        raise ValueError(f"axis {k} out of range 1..{H.order}")
    m = H.dims[k - 1]
    arr = np.moveaxis(H.array(), k - 1, 0).reshape(m, -1)
    return Matrix(m, arr.shape[1], tuple(int(x) for x in arr.reshape(-1)))


def _as_rows(M) -> list[list[int]]:
    if isinstance(M, Matrix):
        return M.tolist()
    if isinstance(M, Hypermatrix):
        if M.order != 2:
            raise ValueError("expected a 2-hypermatrix")
        return M.array().tolist()
    return [[int(x) for x in row] for row in M]


def _snf(rows: list[list[int]], record: bool):
    A = [list(r) for r in rows]
    m = len(A)
    n = len(A[0]) if m else 0
    moves: list[Move] = []

    def swap_rows(i, j):
        if i != j:
            A[i], A[j] = A[j], A[i]
            if record:
                moves.append(Move.swap(1, i + 1, j + 1))

    def swap_cols(i, j):
        if i != j:
            for r in A:
                r[i], r[j] = r[j], r[i]
            if record:
                moves.append(Move.swap(2, i + 1, j + 1))

    def add_row(dst, src, c):
        if c:
            A[dst] = [x + c * y for x, y in zip(A[dst], A[src])]
            if record:
                moves.append(Move.add(1, dst + 1, src + 1, c))

    def add_col(dst, src, c):
        if c:
            for r in A:
                r[dst] += c * r[src]
            if record:
                moves.append(Move.add(2, dst + 1, src + 1, c))

    diag = []
    for t in range(min(m, n)):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            for i in range(t + 1, m):
                add_row(i, t, -(A[i][t] // A[t][t]))
            for j in range(t + 1, n):
                add_col(j, t, -(A[t][j] // A[t][t]))
            # leftovers are smaller than the pivot: move the smallest in
            cand = [(abs(A[i][t]), i, t) for i in range(t + 1, m) if A[i][t]]
            cand += [(abs(A[t][j]), t, j) for j in range(t + 1, n) if A[t][j]]
            if cand:
                _, i, j = min(cand)
                swap_rows(t, i)
                swap_cols(t, j)
                continue
            p = A[t][t]
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            if record:
                moves.append(Move.negate(1, t + 1))
        diag.append(A[t][t])
    return tuple(diag), moves


def smith_normal_form(M) -> tuple[int, ...]:
    """Nonzero invariant factors ``d_1 | d_2 | ...`` (all positive)."""
    return _snf(_as_rows(M), False)[0]


def smith_moves(M) -> tuple[tuple[int, ...], list[Move]]:
    """Invariant factors plus row (axis 1) and column (axis 2) moves reaching them.

    Replaying the moves on ``M`` viewed as a 2-hypermatrix gives the diagonal
    matrix with the invariant factors in its leading positions.
    """
    return _snf(_as_rows(M), True)


def diagonal(dims: Sequence[int], diag: Sequence[int]) -> Hypermatrix:
    rows, cols = dims
    return Hypermatrix((rows, cols), tuple(diag[i] if i == j and i < len(diag) else 0
                                           for i in range(rows) for j in range(cols)))


def rank(M) -> int:
    """Rank over the rationals by fraction-free elimination."""
    A = _as_rows(M)
    r = 0
    ncols = len(A[0]) if A else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(A)) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        for i in range(r + 1, len(A)):
            if A[i][c]:
                f, p = A[i][c], A[r][c]
                A[i] = [p * x - f * y for x, y in zip(A[i], A[r])]
        r += 1
    return r


def determinant(M) -> int:
    """Bareiss fraction-free determinant of a square integer matrix."""
    A = _as_rows(M)
    n = len(A)
    if any(len(r) != n for r in A):
        raise ValueError("determinant needs a square matrix")
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if A[i][k]), None)
            if piv is None:
                return 0
            A[k], A[piv] = A[piv], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def _require_integral(H: Hypermatrix, what: str) -> None:
    if H.modulus:
        raise ValueError(f"{what} is defined for integer hypermatrices (modulus 0)")


def elementary_divisors(H: Hypermatrix) -> tuple[tuple[int, ...], ...]:
    _require_integral(H, "elementary_divisors")
    return tuple(smith_normal_form(flatten(H, k)) for k in range(1, H.order + 1))


def cokernel_divisors(H: Hypermatrix) -> tuple[tuple[int, ...], ...]:
    """Per axis, invariant factors of ``[f_k | delta * I]`` (modular analogue of ed).

    Unchanged by moves and by changing entries by multiples of the modulus.
    For modulus 0 this is the ordinary ed.
    """
    if not H.modulus:
        return elementary_divisors(H)
    out = []
    for k in range(1, H.order + 1):
        rows = flatten(H, k).tolist()
        m = len(rows)
        aug = [row + [H.modulus * (i == j) for j in range(m)] for i, row in enumerate(rows)]
        out.append(smith_normal_form(aug))
    return tuple(out)


def multilinear_rank(H: Hypermatrix) -> tuple[int, ...]:
    _require_integral(H, "multilinear_rank")
    return tuple(rank(flatten(H, k)) for k in range(1, H.order + 1))


# ---------------------------------------------------------------- hyperdeterminant


def hyperdeterminant(H: Hypermatrix) -> int:
    """Combinatorial hyperdeterminant of a cubical integer hypermatrix."""
    _require_integral(H, "hyperdeterminant")
    m = H.dims[0]
    if any(x != m for x in H.dims):
        raise ValueError(f"hyperdeterminant needs a cubical hypermatrix, got dims {H.dims}")
    d = H.order
    if m == 1:
        return H.entries[0]
    if d % 2:
        # relabelling all permutations by tau multiplies the sum by sgn(tau)^d
        return 0
    return kernels.hyperdet_fixed(list(H.entries), m, d)


def hyperdeterminant_literal(H: Hypermatrix) -> int:
    """Full sum over all d-tuples of permutations divided by m!; slow reference."""
    m, d = H.dims[0], H.order
    arr = H.array()
    perms = [(p, _parity(p)) for p in permutations(range(m))]
    total = 0
    for choice in product(perms, repeat=d):
        sign = math.prod(s for _, s in choice)
        total += sign * math.prod(arr[tuple(p[i] for p, _ in choice)] for i in range(m))
    q, r = divmod(total, math.factorial(m))
    assert r == 0
    return q


# ---------------------------------------------------------------- tensor rank


class RankBounds(NamedTuple):
    lower: int
    upper: float | int
    exact: bool


class _Budget(Exception):
    pass


def _nonzero_columns(H: Hypermatrix, k: int) -> int:
    M = flatten(H, k)
    return sum(1 for j in range(M.cols) if any(M.entries[i * M.cols + j] for i in range(M.rows)))


def _axis_candidates(m: int, bound: int, canonical: bool, span: list[list[int]] | None):
    base = rank(span) if span else 0
    out = []
    for v in product(range(-bound, bound + 1), repeat=m):
        if not any(v):
            continue
        if canonical and next(x for x in v if x) < 0:
            continue
        if span is not None and rank(span + [list(v)]) != base:
            continue
        out.append(v)
    return out


def _bounded_factor(values: list[int], dims: Sequence[int], bound: int) -> bool:
    """Does the rank <= 1 tensor ``values`` factor with all vector entries in [-bound, bound]?"""
    if not any(values):
        return True
    arr = np.array(values, dtype=object).reshape(tuple(dims))
    pivot = next(idx for idx in np.ndindex(*dims) if arr[idx])
    top = abs(arr[pivot])
    scale = top
    caps = []
    for k in range(len(dims)):
        fiber = [arr[pivot[:k] + (i,) + pivot[k + 1:]] for i in range(dims[k])]
        g = math.gcd(*fiber)
        # fiber / g is the primitive direction of axis k
        caps.append(bound // (max(abs(x) for x in fiber) // g))
        scale //= top // g
    return _split(scale, caps)


def _split(g: int, caps: list[int]) -> bool:
    """Can g be written as a product of factors c_k with 1 <= c_k <= caps[k]?"""
    if len(caps) == 1:
        return 1 <= g <= caps[0]
    return any(g % c == 0 and _split(g // c, caps[1:]) for c in range(1, min(g, caps[0]) + 1))


FIELD_TERMS_LIMIT = 600


@lru_cache(maxsize=None)
def _field_sums(dims: tuple[int, ...], p: int):
    """Codes of all sums of one and of at most two rank one tensors over F_p.

    Tensors are stored as digit rows and coded as base-p integers.  Returns
    None when there are too many rank one tensors for the tables to stay small.
    """
    vecs = []
    for m in dims:
        # one representative per projective point
        vecs.append([v for v in product(range(p), repeat=m) if any(v) and next(x for x in v if x) == 1])
    count = (p - 1) * math.prod(len(v) for v in vecs)
    if count > FIELD_TERMS_LIMIT:
        return None
    ones = []
    for choice in product(*vecs):
        base = np.array([math.prod(xs) % p for xs in product(*choice)], dtype=np.int8)
        for c in range(1, p):
            ones.append(base * c % p)
    ones = np.array(ones, dtype=np.int8)
    weights = p ** np.arange(ones.shape[1] - 1, -1, -1, dtype=np.int64)
    pairs = (ones[:, None, :] + ones[None, :, :]) % p
    twos = np.unique(pairs.reshape(-1, ones.shape[1]), axis=0)
    return ones, weights, frozenset((ones @ weights).tolist()), twos, frozenset((twos @ weights).tolist())


def field_rank_lower(H: Hypermatrix, p: int) -> int | None:
    """min(rank over F_p of H mod p, 5), or None when the tables would be too large.

    Reducing an integral decomposition mod p gives one over F_p with no more
    terms, so this bounds the integral rank from below; it is also unchanged
    by moves, which act through invertible matrices mod p.
    """
    tables = _field_sums(tuple(H.dims), p)
    if tables is None:
        return None
    ones, weights, one_codes, twos, two_codes = tables
    h = np.array(H.entries, dtype=np.int64) % p
    if not h.any():
        return 0
    code = int(h @ weights)
    if code in one_codes:
        return 1
    # two_codes also holds the zero tensor and single terms
    if code in two_codes:
        return 2
    if not two_codes.isdisjoint((((h - ones) % p) @ weights).tolist()):
        return 3
    if not two_codes.isdisjoint((((h - twos) % p) @ weights).tolist()):
        return 4
    return 5


def tensor_rank_bounds(H: Hypermatrix, entry_bound: int, budget: int = 10**6) -> RankBounds:
    """Bounds on the tensor rank over decompositions with entries in [-B, B].

    ``lower`` is the larger of the largest flattening rank and the ranks
    over F_2 and F_3 where those are cheap.  ``upper`` starts from a fiber
    decomposition and is improved by iterative deepening; ``exact`` means
    every decomposition shorter than ``upper`` was ruled out.  ``budget``
    caps the number of candidate vectors listed plus candidate terms examined.
    """
    _require_integral(H, "tensor_rank_bounds")
    if H.is_zero():
        return RankBounds(0, 0, True)
    if entry_bound < H.max_abs():
        raise ValueError(f"entry bound {entry_bound} is below the largest entry {H.max_abs()}")
    mlrank = multilinear_rank(H)
    lower = max(mlrank)
    if H.order >= 3:
        for p in (2, 3):
            lower = max(lower, field_rank_lower(H, p) or 0)
    upper = min(_nonzero_columns(H, k) for k in range(1, H.order + 1))
    if lower >= upper:
        return RankBounds(upper, upper, True)
    search = _RankSearch(H, entry_bound, budget, mlrank)
    try:
        for r in range(lower, upper):
            if search.decomposes(r):
                return RankBounds(lower, r, True)
    except _Budget:
        return RankBounds(lower, upper, False)
    return RankBounds(lower, upper, True)


class _RankSearch:
    def __init__(self, H: Hypermatrix, bound: int, budget: int, mlrank):
        self.H = H
        self.dims = H.dims
        self.d = H.order
        self.bound = bound
        self.budget = budget
        self.mlrank = mlrank
        self._generic = None

    def _spend(self, n: int):
        self.budget -= n
        if self.budget < 0:
            raise _Budget

    def _candidates(self, r: int):
        spans = {}
        if r == max(self.mlrank) or self._generic is None:
            # listing the vectors is itself work; charge it before doing it
            self._spend(sum((2 * self.bound + 1) ** m for m in self.dims))
        if r == max(self.mlrank):
            # with exactly r terms, an axis of full flattening rank r must
            # draw its vectors from the column space of that flattening
            for k in range(self.d):
                if self.mlrank[k] == r:
                    M = flatten(self.H, k + 1)
                    cols = [[M.entries[i * M.cols + j] for i in range(M.rows)] for j in range(M.cols)]
                    spans[k] = [c for c in cols if any(c)]
            return [
                _axis_candidates(m, self.bound, k < self.d - 1, spans.get(k))
                for k, m in enumerate(self.dims)
            ]
        if self._generic is None:
            self._generic = [_axis_candidates(m, self.bound, k < self.d - 1, None)
                             for k, m in enumerate(self.dims)]
        return self._generic

    def decomposes(self, r: int) -> bool:
        vecs = self._candidates(r)
        self.vecs = vecs
        self.counts = [len(v) for v in vecs]
        self.total = math.prod(self.counts)
        self.flat_vecs = [[list(v) for v in vs] for vs in vecs]
        if r == 1:
            self._spend(1)
            return kernels.is_rank_le_one(list(self.H.entries), self.dims) and \
                _bounded_factor(list(self.H.entries), self.dims, self.bound)
        return self._dfs(list(self.H.entries), r, 0)

    def _term(self, t: int) -> list[int]:
        choice = []
        for c in reversed(self.counts):
            choice.append(t % c)
            t //= c
        choice.reverse()
        return [math.prod(xs) for xs in product(*(self.vecs[k][choice[k]] for k in range(self.d)))]

    def _dfs(self, residual: list[int], remaining: int, start: int) -> bool:
        # terms are chosen in nondecreasing index order; the last one is
        # whatever rank <= 1 tensor is left over
        chunk = 4096
        t = start
        while t < self.total:
            stop = min(self.total, t + chunk, t + max(self.budget, 1))
            hits, scanned = kernels.low_rank_scan(residual, self.dims, self.flat_vecs, t, stop, remaining - 1)
            self._spend(scanned)
            for hit in hits:
                rest = [a - b for a, b in zip(residual, self._term(hit))]
                if remaining == 2:
                    if _bounded_factor(rest, self.dims, self.bound):
                        return True
                elif self._dfs(rest, remaining - 1, hit):
                    return True
            t = stop
        return False
