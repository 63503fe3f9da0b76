"""Triviality tests, invariant comparison, and pairwise classification.

Moves in witnesses act diagonally on a tuple of data: the ``axis`` field of
a witness move names a component number, and the move is applied on the
axis where that component sits in each datum's sequence.
"""
from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Any, Sequence

import numpy as np

from .handlebody import HandlebodyPresentation, InvariantDatum, _Evaluator, canonical_sequences
from .hypermatrix import (
    Hypermatrix, Move, apply_move, cokernel_divisors, elementary_divisors, hyperdeterminant,
    inverse_moves, multilinear_rank, smith_moves, tensor_rank_bounds,
)

DEFAULT_BUDGET = 10**6
RANK_BUDGET = 2 * 10**4
GROUP_LIMIT = 4096


def representative(I: Sequence[int]) -> tuple[int, ...]:
    """Lexicographically least rotation."""
    I = tuple(I)
    return min(I[s:] + I[:s] for s in range(len(I)))


def representatives(n: int) -> list[tuple[int, ...]]:
    out = []
    for r in range(2, n + 1):
        seen = set()
        for I in permutations(range(1, n + 1), r):
            rep = representative(I)
            if rep not in seen:
                seen.add(rep)
                out.append(rep)
        out[len(out) - len(seen):] = sorted(out[len(out) - len(seen):])
    return out


@dataclass(frozen=True)
class Profile:
    n: int
    genera: tuple[int, ...]
    data: dict[tuple[int, ...], InvariantDatum]

    __hash__ = None

    def __getitem__(self, I: Sequence[int]) -> InvariantDatum:
        return self.data[representative(I)]

    def canonical_tuple(self) -> tuple[InvariantDatum, ...]:
        if self.n < 2:
            return ()
        return tuple(self.data[I] for I in canonical_sequences(self.n))


def profile(pres: HandlebodyPresentation) -> Profile:
    ev = _Evaluator(pres)
    data = {I: ev.datum(I) for I in representatives(pres.n)}
    return Profile(pres.n, pres.genera, data)


def is_trivial(pres: HandlebodyPresentation) -> bool:
    return all(x.matrix.is_zero() for x in profile(pres).data.values())


def is_almost_trivial(pres: HandlebodyPresentation) -> bool:
    return _almost_trivial(profile(pres))


def _almost_trivial(p: Profile) -> bool:
    return all(x.matrix.is_zero() for I, x in p.data.items() if len(I) < p.n)


def lambda_invariant(pres: HandlebodyPresentation, i: int) -> int | None:
    """Shortest length of a sequence through component ``i`` with a nonzero datum."""
    if not 1 <= i <= pres.n:
        raise ValueError(f"component {i} out of range 1..{pres.n}")
    lengths = [len(I) for I, x in profile(pres).data.items() if i in I and not x.matrix.is_zero()]
    return min(lengths, default=None)


# ---------------------------------------------------------------- invariants


@dataclass(frozen=True)
class Separation:
    invariant: str
    I: tuple[int, ...] | None
    a: Any
    b: Any

    def __str__(self):
        where = "" if self.I is None else f" at I={''.join(map(str, self.I)) if all(i < 10 for i in self.I) else self.I}"
        return f"{self.invariant}{where}: {_fmt(self.a)} vs {_fmt(self.b)}"


def _fmt(v) -> str:
    if isinstance(v, tuple) and v and all(isinstance(x, tuple) for x in v):
        return "(" + ",".join("{" + ",".join(map(str, x)) + "}" for x in v) + ")"
    return str(v)


def _rank_interval(H: Hypermatrix, budget: int):
    if H.is_zero():
        return (0, 0)
    rb = tensor_rank_bounds(H, H.max_abs(), budget)
    return (rb.lower, rb.upper)


def separate_data(a: InvariantDatum, b: InvariantDatum, rank_budget: int = RANK_BUDGET) -> Separation | None:
    """First invariant of a single datum that differs, in a fixed order."""
    I = a.I
    if a.matrix.dims != b.matrix.dims:
        return Separation("shape", I, a.matrix.dims, b.matrix.dims)
    if a.delta_I != b.delta_I:
        return Separation("delta", I, a.delta_I, b.delta_I)
    A, B = a.matrix, b.matrix
    if a.delta_I:
        ea, eb = cokernel_divisors(A), cokernel_divisors(B)
        if ea != eb:
            return Separation("ed_mod", I, ea, eb)
        ca, cb = math.gcd(A.content(), a.delta_I), math.gcd(B.content(), b.delta_I)
        if ca != cb:
            return Separation("content", I, ca, cb)
        return None
    ea, eb = elementary_divisors(A), elementary_divisors(B)
    if ea != eb:
        return Separation("ed", I, ea, eb)
    ma, mb = multilinear_rank(A), multilinear_rank(B)
    if ma != mb:
        return Separation("mlrank", I, ma, mb)
    if A.order >= 3 and rank_budget > 0:
        ra, rb = _rank_interval(A, rank_budget), _rank_interval(B, rank_budget)
        # the true ranks lie in these intervals
        if ra[1] < rb[0] or rb[1] < ra[0]:
            return Separation("tensor_rank", I, ra, rb)
    if len(set(A.dims)) == 1 and A.order % 2 == 0:
        da, db = abs(hyperdeterminant(A)), abs(hyperdeterminant(B))
        if da != db:
            return Separation("abs_hyperdet", I, da, db)
    if A.content() != B.content():
        return Separation("content", I, A.content(), B.content())
    return None


def distinguish(pA: Profile, pB: Profile, rank_budget: int = RANK_BUDGET) -> Separation | None:
    if (pA.n, pA.genera) != (pB.n, pB.genera):
        return Separation("shape", None, (pA.n, pA.genera), (pB.n, pB.genera))
    for I in pA.data:
        sep = separate_data(pA.data[I], pB.data[I], rank_budget)
        if sep is not None:
            return sep
    return None


# ---------------------------------------------------------------- results


class Verdict(str, enum.Enum):
    EQUIVALENT = "Equivalent"
    DISTINCT = "Distinct"
    UNKNOWN = "Unknown"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ClassificationResult:
    verdict: Verdict
    witness: tuple[Move, ...] | None = None
    separation: Separation | None = None
    report: dict = field(default_factory=dict)

    __hash__ = None


def replay(data: Sequence[InvariantDatum], moves: Sequence[Move]) -> list[InvariantDatum]:
    """Apply witness moves diagonally; each move's axis names a component."""
    out = []
    for x in data:
        H = x.matrix
        for mv in moves:
            if mv.axis in x.I:
                H = apply_move(H, _on_axis(mv, x.I.index(mv.axis) + 1))
        out.append(InvariantDatum(x.I, x.delta_I, H))
    return out


def _on_axis(mv: Move, axis: int) -> Move:
    return Move(mv.kind, axis, mv.l, mv.h, mv.c)


# ---------------------------------------------------------------- orbit search


class _Space:
    """Flat state layout of a tuple of data plus the symmetry group used for keys."""

    def __init__(self, data: Sequence[InvariantDatum], genera: dict[int, int]):
        self.modulus = data[0].delta_I
        self.components = sorted(genera)
        self.genera = genera
        blocks = []
        offset = 0
        for x in data:
            size = math.prod(x.matrix.dims)
            blocks.append((x.I, x.matrix.dims, offset))
            offset += size
        self.blocks = blocks
        self.size = offset
        self.edges = self._edges()
        self.group = self._group()
        self.src = np.array([g[1] for g in self.group], dtype=np.int64).reshape(len(self.group), self.size)
        self.sign = np.array([g[2] for g in self.group], dtype=np.int64).reshape(len(self.group), self.size)

    def _index_tensors(self):
        for I, dims, offset in self.blocks:
            yield I, np.arange(offset, offset + math.prod(dims)).reshape(dims)

    def _edges(self):
        edges = []
        for c in self.components:
            g = self.genera[c]
            for l, h in permutations(range(1, g + 1), 2):
                dst, src = [], []
                for I, idx in self._index_tensors():
                    if c in I:
                        a = I.index(c)
                        dst.append(np.take(idx, l - 1, axis=a).ravel())
                        src.append(np.take(idx, h - 1, axis=a).ravel())
                dst = np.concatenate(dst) if dst else np.zeros(0, dtype=np.int64)
                src = np.concatenate(src) if src else np.zeros(0, dtype=np.int64)
                for s in (1, -1):
                    edges.append((Move.add(c, l, h, s), dst, src, s))
        return edges

    def _group(self):
        per = []
        full = math.prod(2**self.genera[c] * math.factorial(self.genera[c]) for c in self.components)
        flips = math.prod(2**self.genera[c] for c in self.components)
        for c in self.components:
            g = self.genera[c]
            perms = list(permutations(range(g))) if full <= GROUP_LIMIT else [tuple(range(g))]
            signs = list(product((1, -1), repeat=g)) if flips <= GROUP_LIMIT else [(1,) * g]
            per.append([(p, s) for p in perms for s in signs])
        group = []
        for elem in product(*per):
            action = dict(zip(self.components, elem))
            src, sign = [], []
            for I, idx in self._index_tensors():
                sg = np.ones(idx.shape, dtype=np.int64)
                for a, c in enumerate(I):
                    perm, eps = action[c]
                    idx = np.take(idx, perm, axis=a)
                    shape = [1] * idx.ndim
                    shape[a] = len(eps)
                    sg = sg * np.array(eps, dtype=np.int64).reshape(shape)
                src.append(idx.ravel())
                sign.append(sg.ravel())
            group.append((action, np.concatenate(src), np.concatenate(sign)))
        return group

    def canonical(self, state: np.ndarray):
        """Least image of ``state`` under the group, and the element reaching it."""
        T = self.sign * state[self.src]
        if self.modulus:
            T %= self.modulus
        rows = np.arange(T.shape[0])
        for col in range(T.shape[1]):
            vals = T[rows, col]
            rows = rows[vals == vals.min()]
            if len(rows) == 1:
                break
        g = int(rows[0])
        return T[g].tobytes(), T[g], g

    def element_moves(self, g: int) -> list[Move]:
        """Swaps then negations realizing group element ``g`` (component axes)."""
        moves = []
        for c, (perm, eps) in sorted(self.group[g][0].items()):
            cur = list(range(len(perm)))
            for j, want in enumerate(perm):
                q = cur.index(want)
                if q != j:
                    cur[j], cur[q] = cur[q], cur[j]
                    moves.append(Move.swap(c, j + 1, q + 1))
            moves.extend(Move.negate(c, j + 1) for j, e in enumerate(eps) if e < 0)
        return moves

    def step(self, state: np.ndarray, edge) -> np.ndarray:
        _, dst, src, s = edge
        nxt = state.copy()
        nxt[dst] += s * state[src]
        if self.modulus:
            nxt %= self.modulus
        return nxt


def _flat(data: Sequence[InvariantDatum]) -> np.ndarray:
    return np.array([e for x in data for e in x.matrix.entries], dtype=np.int64)


def _check_shapes(A: Sequence[InvariantDatum], B: Sequence[InvariantDatum]) -> None:
    if len(A) != len(B) or not A:
        raise ValueError("tuples must be nonempty and of equal length")
    for a, b in zip(A, B):
        if a.I != b.I or a.matrix.dims != b.matrix.dims or a.delta_I != b.delta_I:
            raise ValueError(f"shape mismatch at I={a.I}")
    if len({x.delta_I for x in A}) != 1:
        raise ValueError("tuple entries must share one modulus")


def search_equivalence(A: Sequence[InvariantDatum], B: Sequence[InvariantDatum],
                       budget: int = DEFAULT_BUDGET, magnitude_bound: int | None = None,
                       rank_budget: int = RANK_BUDGET) -> ClassificationResult:
    """Look for diagonal moves taking tuple A to tuple B.

    Invariants are compared first.  A single integer matrix is settled by
    Smith normal form.  Otherwise a bidirectional breadth-first search over
    slice additions runs, with states identified up to index permutations
    and sign flips.  Over the integers an unsuccessful search is
    inconclusive; with a positive modulus an exhausted orbit proves the
    tuples distinct.
    """
    A, B = tuple(A), tuple(B)
    _check_shapes(A, B)
    for a, b in zip(A, B):
        sep = separate_data(a, b, rank_budget)
        if sep is not None:
            return ClassificationResult(Verdict.DISTINCT, separation=sep)
    if all(a.matrix == b.matrix for a, b in zip(A, B)):
        return ClassificationResult(Verdict.EQUIVALENT, witness=(), report={"states": 0})
    if len(A) == 1 and A[0].matrix.order == 2 and A[0].delta_I == 0:
        return _smith_certificate(A[0], B[0])
    return _bfs(A, B, budget, magnitude_bound)


def _smith_certificate(a: InvariantDatum, b: InvariantDatum) -> ClassificationResult:
    da, ma = smith_moves(a.matrix)
    db, mb = smith_moves(b.matrix)
    if da != db:
        return ClassificationResult(Verdict.DISTINCT, separation=Separation("ed", a.I, (da,), (db,)))
    rows, cols = a.I
    to_comp = {1: rows, 2: cols}
    witness = tuple(_on_axis(mv, to_comp[mv.axis]) for mv in ma + inverse_moves(mb))
    _verify(a, b, witness)
    return ClassificationResult(Verdict.EQUIVALENT, witness=witness, report={"method": "smith"})


def _verify(a, b, witness):
    A = a if isinstance(a, tuple) else (a,)
    B = b if isinstance(b, tuple) else (b,)
    got = replay(A, witness)
    if [x.matrix for x in got] != [x.matrix for x in B]:
        raise AssertionError("witness failed to replay")


def _bfs(A, B, budget, magnitude_bound) -> ClassificationResult:
    genera = {}
    for x in A:
        for i, g in zip(x.I, x.matrix.dims):
            genera[i] = g
    space = _Space(A, genera)
    modulus = space.modulus
    if magnitude_bound is None:
        magnitude_bound = 4 * max(max(x.matrix.max_abs() for x in A + B), 1)

    def start(data):
        key, state, g = space.canonical(_flat(data))
        return key, state, space.element_moves(g)

    ka, sa, pa = start(A)
    kb, sb, pb = start(B)
    # parent[key] = (previous key, moves from the previous representative)
    sides = [
        {"parent": {ka: None}, "frontier": deque([(ka, sa)]), "prefix": pa},
        {"parent": {kb: None}, "frontier": deque([(kb, sb)]), "prefix": pb},
    ]
    visited = 2
    meet = ka if ka == kb else None
    exhausted = False
    while meet is None:
        side = min((s for s in sides if s["frontier"]), key=lambda s: len(s["frontier"]), default=None)
        if side is None or any(not s["frontier"] for s in sides):
            exhausted = True
            break
        other = sides[1] if side is sides[0] else sides[0]
        key, state = side["frontier"].popleft()
        for edge in space.edges:
            nxt = space.step(state, edge)
            if not modulus and int(np.abs(nxt).max(initial=0)) > magnitude_bound:
                continue
            nkey, nstate, g = space.canonical(nxt)
            if nkey in side["parent"]:
                continue
            side["parent"][nkey] = (key, [edge[0]] + space.element_moves(g))
            visited += 1
            if nkey in other["parent"]:
                meet = nkey
                break
            side["frontier"].append((nkey, nstate))
            if visited >= budget:
                break
        if meet is None and visited >= budget:
            break

    report = {"states": visited, "magnitude_bound": None if modulus else magnitude_bound}
    if meet is None:
        if exhausted and modulus:
            return ClassificationResult(Verdict.DISTINCT, separation=Separation("orbit", None, "exhausted", "disjoint"),
                                        report=report)
        report["reason"] = "search space exhausted within the magnitude bound" if exhausted else "budget exhausted"
        return ClassificationResult(Verdict.UNKNOWN, report=report)

    def path(side, key):
        moves = []
        while side["parent"][key] is not None:
            prev, step = side["parent"][key]
            moves[:0] = step
            key = prev
        return side["prefix"] + moves

    witness = tuple(path(sides[0], meet) + inverse_moves(path(sides[1], meet)))
    _verify(A, B, witness)
    report["length"] = len(witness)
    return ClassificationResult(Verdict.EQUIVALENT, witness=witness, report=report)


def classify_pair(presA: HandlebodyPresentation, presB: HandlebodyPresentation,
                  budget: int = DEFAULT_BUDGET, rank_budget: int = RANK_BUDGET) -> ClassificationResult:
    if (presA.n, presA.genera) != (presB.n, presB.genera):
        return ClassificationResult(Verdict.DISTINCT, separation=Separation(
            "shape", None, (presA.n, presA.genera), (presB.n, presB.genera)))
    pA, pB = profile(presA), profile(presB)
    sep = distinguish(pA, pB, rank_budget)
    if sep is not None:
        return ClassificationResult(Verdict.DISTINCT, separation=sep)
    if presA.n < 2:
        return ClassificationResult(Verdict.UNKNOWN, report={"reason": "no invariants for a single component"})
    if not (_almost_trivial(pA) and _almost_trivial(pB)):
        return ClassificationResult(Verdict.UNKNOWN, report={
            "reason": "invariants agree; no completeness result beyond almost trivial inputs"})
    return search_equivalence(pA.canonical_tuple(), pB.canonical_tuple(), budget, rank_budget=rank_budget)
