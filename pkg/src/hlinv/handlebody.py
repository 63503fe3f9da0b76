"""Handlebody-link presentations and their hypermatrix invariants.

A presentation lists the components (each a genus and an ordered list of
circle labels, the chosen basis of first homology) and one longitude word
per circle over the meridians of the other components.  For a sequence
``I`` of component numbers the invariant is the hypermatrix of mu values of
all one-circle-per-component sublinks, reduced modulo ``delta_I``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Iterable, Mapping, Sequence

from . import kernels
from .hypermatrix import Hypermatrix, act, determinant, reduce_mod
from .magnus import Word, WordLink, cyclic_subsequences, invert, left_normed_commutator, parse_word


@dataclass(frozen=True)
class Component:
    genus: int
    circles: tuple[str, ...]

    def __post_init__(self):
        circles = tuple(self.circles)
        object.__setattr__(self, "circles", circles)
        if self.genus < 1:
            raise ValueError("genus must be at least 1")
        if len(circles) != self.genus:
            raise ValueError(f"a genus {self.genus} component needs {self.genus} circles, got {len(circles)}")


@dataclass(frozen=True)
class HandlebodyPresentation:
    components: tuple[Component, ...]
    link: WordLink

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        labels = [c for comp in comps for c in comp.circles]
        if len(set(labels)) != len(labels):
            raise ValueError("circle labels must be globally unique")
        if tuple(labels) != tuple(self.link.circles):
            raise ValueError("link circles must list the component circles in order")
        owner = {}
        for i, comp in enumerate(comps, 1):
            for k, c in enumerate(comp.circles, 1):
                owner[c] = (i, k)
        object.__setattr__(self, "_owner", owner)
        # letters of a circle's own component are self-interactions and die
        clean = {}
        for c in labels:
            i = owner[c][0]
            w = self.link.longitudes[c]
            clean[c] = Word(tuple(x for x in w.letters if owner[x.circle][0] != i))
        if clean != dict(self.link.longitudes):
            object.__setattr__(self, "link", WordLink(tuple(labels), clean))

    __hash__ = None

    @classmethod
    def build(cls, components: Sequence[Sequence[str]], longitudes: Mapping[str, str | Word]) -> HandlebodyPresentation:
        comps = tuple(Component(len(circles), tuple(circles)) for circles in components)
        labels = tuple(c for comp in comps for c in comp.circles)
        words = {k: parse_word(v, labels) if isinstance(v, str) else v for k, v in longitudes.items()}
        return cls(comps, WordLink(labels, words))

    @property
    def n(self) -> int:
        return len(self.components)

    @property
    def genera(self) -> tuple[int, ...]:
        return tuple(c.genus for c in self.components)

    def circle(self, i: int, k: int) -> str:
        """Label of circle ``k`` of component ``i`` (both 1-based)."""
        return self.components[i - 1].circles[k - 1]

    def owner(self, label: str) -> tuple[int, int]:
        try:
            return self._owner[label]
        except KeyError:
            raise ValueError(f"unknown circle {label!r}") from None

    def longitude(self, label: str) -> Word:
        return self.link.longitudes[label]

    def measured(self, i: int) -> bool:
        """Does some circle of component ``i`` carry a nonempty longitude?"""
        return any(self.link.longitudes[c] for c in self.components[i - 1].circles)

    def with_longitudes(self, longitudes: Mapping[str, Word]) -> HandlebodyPresentation:
        return HandlebodyPresentation(self.components, self.link.replace(longitudes))

    def check_sequence(self, I: Sequence[int]) -> tuple[int, ...]:
        I = tuple(int(i) for i in I)
        if len(I) < 2:
            raise ValueError("a sequence needs at least two components")
        if len(set(I)) != len(I):
            raise ValueError(f"sequence {I} repeats a component")
        for i in I:
            if not 1 <= i <= self.n:
                raise ValueError(f"component {i} out of range 1..{self.n}")
        return I

    def __eq__(self, other):
        return (isinstance(other, HandlebodyPresentation) and self.components == other.components
                and self.link.circles == other.link.circles and self.link.longitudes == other.link.longitudes)


@dataclass(frozen=True)
class InvariantDatum:
    I: tuple[int, ...]
    delta_I: int
    matrix: Hypermatrix

    def __post_init__(self):
        if self.matrix.modulus != self.delta_I:
            raise ValueError("matrix modulus must equal delta_I")
        if len(self.I) != self.matrix.order:
            raise ValueError("matrix order must equal the sequence length")


@dataclass(frozen=True)
class ClasperSchema:
    n: int
    genera: tuple[int, ...]
    counts: Mapping[tuple[int, ...], int] = field(default_factory=dict)

    def __post_init__(self):
        genera = tuple(int(g) for g in self.genera)
        object.__setattr__(self, "genera", genera)
        if self.n < 2:
            raise ValueError("a schema needs at least two components")
        if len(genera) != self.n or any(g < 1 for g in genera):
            raise ValueError("genera must list n positive integers")
        slots = math.factorial(self.n - 2)
        clean = {}
        for key, a in self.counts.items():
            key = tuple(int(x) for x in key)
            if len(key) != self.n + 1:
                raise ValueError(f"count key {key} must be (p, k_1, ..., k_n)")
            p, ks = key[0], key[1:]
            if not 1 <= p <= slots:
                raise ValueError(f"p = {p} out of range 1..{slots}")
            for k, g in zip(ks, genera):
                if not 1 <= k <= g:
                    raise ValueError(f"circle index {k} out of range 1..{g} in {key}")
            if a:
                clean[key] = clean.get(key, 0) + int(a)
        object.__setattr__(self, "counts", {k: v for k, v in sorted(clean.items()) if v})

    __hash__ = None

    def slot(self, p: int) -> Hypermatrix:
        """The hypermatrix of counts a^p in the axis order of ``I_p``."""
        I = canonical_sequences(self.n)[p - 1]
        dims = tuple(self.genera[i - 1] for i in I)
        flat = []
        for idx in product(*(range(1, g + 1) for g in dims)):
            ks = [0] * self.n
            for i, k in zip(I, idx):
                ks[i - 1] = k
            flat.append(self.counts.get((p, *ks), 0))
        return Hypermatrix(dims, tuple(flat))


def canonical_sequences(n: int) -> list[tuple[int, ...]]:
    """``(1, sigma_p(2), ..., sigma_p(n-1), n)`` for the permutations in lexicographic order."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return [(1, *perm, n) for perm in permutations(range(2, n))]


def circle_label(i: int, k: int) -> str:
    return f"c{i}_{k}"


def from_clasper_schema(s: ClasperSchema) -> HandlebodyPresentation:
    """Word presentation of the canonical parallel-tree form.

    Only the circles of the last component carry longitudes: for circle
    ``(n, k_n)`` the product, over ``p`` and then the tuples ``k_1 ... k_{n-1}``
    in lexicographic order, of the left-normed commutator of the meridians
    ``m_(1,k_1), m_(sigma_p(2), .), ..., m_(sigma_p(n-1), .)`` to the power
    ``a^p``.
    """
    n = s.n
    components = [[circle_label(i, k) for k in range(1, g + 1)] for i, g in enumerate(s.genera, 1)]
    seqs = canonical_sequences(n)
    longitudes = {}
    for kn in range(1, s.genera[-1] + 1):
        w = Word()
        for p, I in enumerate(seqs, 1):
            for ks in product(*(range(1, g + 1) for g in s.genera[:-1])):
                a = s.counts.get((p, *ks, kn), 0)
                if not a:
                    continue
                tree = left_normed_commutator([Word.generator(circle_label(i, ks[i - 1])) for i in I[:-1]])
                w = w * tree ** a
        longitudes[circle_label(n, kn)] = w
    return HandlebodyPresentation.build(components, longitudes)


class _Evaluator:
    """Caches mu tensors of one presentation, keyed by component sequence."""

    def __init__(self, pres: HandlebodyPresentation):
        self.pres = pres
        self._raw: dict[tuple[int, ...], list[int]] = {}
        self._tensors: dict[tuple[int, ...], list[int]] = {}
        self._deltas: dict[tuple[int, ...], int] = {}

    def raw(self, J: tuple[int, ...]) -> list[int]:
        """mu of every selection read off the longitudes of the last component of J."""
        if J in self._raw:
            return self._raw[J]
        pres = self.pres
        position = {i: p for p, i in enumerate(J[:-1])}
        inner = tuple(pres.genera[i - 1] for i in J[:-1])
        last = pres.components[J[-1] - 1]
        blocks = []
        for label in last.circles:
            levels, circles, signs = [], [], []
            for x in pres.longitude(label).letters:
                i, k = pres.owner(x.circle)
                levels.append(position.get(i, -1))
                circles.append(k - 1)
                signs.append(x.sign)
            blocks.append(kernels.selection_coefficients(levels, circles, signs, inner))
        # interleave so the last component is the fastest axis
        flat = [blocks[k][q] for q in range(math.prod(inner)) for k in range(last.genus)]
        self._raw[J] = flat
        return flat

    def tensor(self, J: Sequence[int]) -> list[int]:
        """mu tensor of J in J's axis order, using the measured rotation."""
        J = tuple(J)
        if J in self._tensors:
            return self._tensors[J]
        m = len(J)
        shift = 0
        if not self.pres.measured(J[-1]):
            shift = next((s for s in range(1, m) if self.pres.measured(J[s - 1])), 0)
        rotated = J[shift:] + J[:shift]
        flat = self.raw(rotated)
        if shift:
            dims = [self.pres.genera[i - 1] for i in rotated]
            H = Hypermatrix(tuple(dims), tuple(flat))
            # axis a of the rotation is axis (a + shift) mod m of J
            arr = H.array().transpose([(a - shift) % m for a in range(m)])
            flat = [int(x) for x in arr.reshape(-1)]
        self._tensors[J] = flat
        return flat

    def delta(self, I: tuple[int, ...]) -> int:
        if I in self._deltas:
            return self._deltas[I]
        g = 0
        for J in cyclic_subsequences(I):
            g = math.gcd(g, *self.tensor(J))
            if g == 1:
                break
        self._deltas[I] = g
        return g

    def datum(self, I: Sequence[int]) -> InvariantDatum:
        I = self.pres.check_sequence(I)
        d = self.delta(I)
        dims = tuple(self.pres.genera[i - 1] for i in I)
        H = Hypermatrix(dims, tuple(self.tensor(I)))
        return InvariantDatum(I, d, reduce_mod(H, d))


def delta_I(pres: HandlebodyPresentation, I: Sequence[int]) -> int:
    """gcd of |mu| over shorter cyclic subsequences J of I and all circle selections on J."""
    return _Evaluator(pres).delta(pres.check_sequence(I))


def hypermatrix_of(pres: HandlebodyPresentation, I: Sequence[int]) -> InvariantDatum:
    return _Evaluator(pres).datum(I)


def _is_unimodular(A) -> bool:
    return abs(determinant(A)) == 1


def apply_gl(data: Sequence[InvariantDatum], mats: Sequence[Sequence[Sequence[int]]]) -> list[InvariantDatum]:
    """Act with ``mats[i-1]`` on the axis of component ``i`` in every datum.

    ``mats`` has one square unimodular matrix per component of the
    presentation; a datum only feels the matrices of the components in its
    sequence.
    """
    data = list(data)
    if data:
        modulus = data[0].delta_I
        if any(x.delta_I != modulus for x in data):
            raise ValueError("data must share one modulus")
    for A in mats:
        if len(A) and any(len(row) != len(A) for row in A):
            raise ValueError("matrices must be square")
        if not _is_unimodular(A):
            raise ValueError("matrices must have determinant +1 or -1")
    out = []
    for x in data:
        H = x.matrix
        for axis, i in enumerate(x.I, 1):
            if not 1 <= i <= len(mats):
                raise ValueError(f"no matrix given for component {i}")
            A = mats[i - 1]
            if len(A) != H.dims[axis - 1]:
                raise ValueError(f"component {i} needs a {H.dims[axis - 1]}x{H.dims[axis - 1]} matrix")
            H = act(H, axis, A)
        out.append(InvariantDatum(x.I, x.delta_I, H))
    return out


# ---------------------------------------------------------------- basis changes


def swap_circles(pres: HandlebodyPresentation, i: int, l: int, h: int) -> HandlebodyPresentation:
    """Exchange the positions of circles ``l`` and ``h`` in component ``i``."""
    comp = _component(pres, i)
    _check_circle_index(comp, l, h)
    circles = list(comp.circles)
    circles[l - 1], circles[h - 1] = circles[h - 1], circles[l - 1]
    comps = list(pres.components)
    comps[i - 1] = Component(comp.genus, tuple(circles))
    labels = tuple(c for cp in comps for c in cp.circles)
    return HandlebodyPresentation(tuple(comps), WordLink(labels, pres.link.longitudes))


def reverse_circle(pres: HandlebodyPresentation, label: str) -> HandlebodyPresentation:
    """Reverse the orientation of one circle."""
    pres.owner(label)
    image = {label: Word.generator(label, -1)}
    longitudes = {c: w.substitute(image) for c, w in pres.link.longitudes.items()}
    longitudes[label] = invert(pres.longitude(label))
    return pres.with_longitudes(longitudes)


def band_sum(pres: HandlebodyPresentation, i: int, l: int, h: int) -> HandlebodyPresentation:
    """Replace circle ``l`` of component ``i`` by its band sum with circle ``h``.

    The longitude of the new circle is the product of the two longitudes.
    Dually, every other longitude passing through circle ``h`` now also
    passes through the new circle, which is the substitution
    ``m_h -> m_l m_h``.
    """
    comp = _component(pres, i)
    _check_circle_index(comp, l, h)
    cl, ch = comp.circles[l - 1], comp.circles[h - 1]
    image = {ch: Word.generator(cl) * Word.generator(ch)}
    longitudes = {c: w.substitute(image) for c, w in pres.link.longitudes.items()}
    longitudes[cl] = pres.longitude(cl) * pres.longitude(ch)
    return pres.with_longitudes(longitudes)


def _component(pres: HandlebodyPresentation, i: int) -> Component:
    if not 1 <= i <= pres.n:
        raise ValueError(f"component {i} out of range 1..{pres.n}")
    return pres.components[i - 1]


def _check_circle_index(comp: Component, l: int, h: int) -> None:
    if l == h:
        raise ValueError("the two circles must differ")
    for k in (l, h):
        if not 1 <= k <= comp.genus:
            raise ValueError(f"circle index {k} out of range 1..{comp.genus}")


def trivial_presentation(genera: Iterable[int]) -> HandlebodyPresentation:
    components = [[circle_label(i, k) for k in range(1, g + 1)] for i, g in enumerate(genera, 1)]
    return HandlebodyPresentation.build(components, {})
