"""Free-group words, the repetition-free Magnus expansion, and Milnor's mu.

Words are over meridian letters named by circle labels.  The expansion sends
a letter ``x`` to ``1 + X`` and ``x^-1`` to ``1 - X + X^2 - ...`` and works
in the quotient where any monomial repeating a variable vanishes, so every
letter effectively acts as ``1 + sign * X``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

from . import kernels


class ParseError(ValueError):
    """Malformed word text or an unknown label; ``token`` is the culprit."""

    def __init__(self, message: str, token: str = ""):
        super().__init__(message)
        self.token = token


@dataclass(frozen=True)
class Letter:
    circle: str
    sign: int = 1

    def __post_init__(self):
        if not isinstance(self.circle, str) or not self.circle:
            raise ValueError("letter label must be a nonempty string")
        if self.sign not in (1, -1):
            raise ValueError(f"letter sign must be +1 or -1, got {self.sign!r}")

    def inverse(self) -> Letter:
        return Letter(self.circle, -self.sign)

    def __str__(self):
        return self.circle if self.sign > 0 else f"{self.circle}^-1"


@dataclass(frozen=True)
class Word:
    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(self.letters))

    @classmethod
    def generator(cls, label: str, power: int = 1) -> Word:
        sign = 1 if power > 0 else -1
        return cls((Letter(label, sign),) * abs(power))

    def __len__(self):
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __bool__(self):
        return bool(self.letters)

    def __mul__(self, other: Word) -> Word:
        return Word(self.letters + other.letters)

    def __invert__(self) -> Word:
        return invert(self)

    def __pow__(self, n: int) -> Word:
        if n < 0:
            return Word(invert(self).letters * -n)
        return Word(self.letters * n)

    def labels(self) -> set[str]:
        return {x.circle for x in self.letters}

    def reduced(self) -> Word:
        out: list[Letter] = []
        for x in self.letters:
            if out and out[-1] == x.inverse():
                out.pop()
            else:
                out.append(x)
        return Word(tuple(out))

    def substitute(self, images: Mapping[str, Word]) -> Word:
        """Replace each letter ``x`` by ``images[x]`` (inverted for ``x^-1``)."""
        out: list[Letter] = []
        for x in self.letters:
            image = images.get(x.circle)
            if image is None:
                out.append(x)
            elif x.sign > 0:
                out.extend(image.letters)
            else:
                out.extend(invert(image).letters)
        return Word(tuple(out))

    def __str__(self):
        # Run-length form; parse_word(str(w)) reproduces w letter for letter.
        parts = []
        i = 0
        letters = self.letters
        while i < len(letters):
            j = i
            while j < len(letters) and letters[j] == letters[i]:
                j += 1
            power = (j - i) * letters[i].sign
            parts.append(letters[i].circle if power == 1 else f"{letters[i].circle}^{power}")
            i = j
        return " ".join(parts)


def invert(w: Word) -> Word:
    return Word(tuple(x.inverse() for x in reversed(w.letters)))


def commutator(u: Word, v: Word) -> Word:
    """``[u, v] = u v u^-1 v^-1``."""
    return u * v * invert(u) * invert(v)


def left_normed_commutator(words: Sequence[Word]) -> Word:
    """``[[...[w1, w2], w3], ..., wk]``; a single word is returned as is."""
    if not words:
        return Word()
    out = words[0]
    for w in words[1:]:
        out = commutator(out, w)
    return out


_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_.]*)|(?P<int>[+-]?\d+)|(?P<sym>[\[\](),^]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = text[pos:].strip()[:1] or text[pos:pos + 1]
            raise ParseError(f"unexpected character {bad!r} at offset {pos}", bad)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str, alphabet: set[str] | None):
        self.tokens = _tokenize(text)
        self.i = 0
        self.alphabet = alphabet

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def expect(self, sym: str):
        tok = self.peek()
        if tok is None or tok[1] != sym:
            found = "end of input" if tok is None else repr(tok[1])
            raise ParseError(f"expected {sym!r}, found {found}", "" if tok is None else tok[1])
        self.i += 1

    def word(self, stop: tuple[str, ...]) -> Word:
        letters: list[Letter] = []
        while True:
            tok = self.peek()
            if tok is None or (tok[0] == "sym" and tok[1] in stop):
                return Word(tuple(letters))
            letters.extend(self.item().letters)

    def item(self) -> Word:
        kind, value, _ = self.peek()
        self.i += 1
        if kind == "name":
            if self.alphabet is not None and value not in self.alphabet:
                raise ParseError(f"unknown label {value!r}", value)
            base = Word((Letter(value, 1),))
        elif value == "[":
            u = self.word((",",))
            self.expect(",")
            v = self.word(("]",))
            self.expect("]")
            base = commutator(u, v)
        elif value == "(":
            base = self.word((")",))
            self.expect(")")
        else:
            raise ParseError(f"unexpected token {value!r}", value)
        tok = self.peek()
        if tok is not None and tok[1] == "^":
            self.i += 1
            tok = self.peek()
            if tok is None or tok[0] != "int":
                found = "end of input" if tok is None else repr(tok[1])
                raise ParseError(f"exponent must be an integer, found {found}", "" if tok is None else tok[1])
            self.i += 1
            base = base ** int(tok[1])
        return base


def parse_word(text: str, alphabet: Iterable[str] | None = None) -> Word:
    """Parse ``a b^-1 [a,b]^2 (a c)^-1`` style text into a flat word.

    Grammar: ``word := item*``, ``item := NAME exp? | '[' word ',' word ']' exp?
    | '(' word ')' exp?``, ``exp := '^' signed-int``.  When ``alphabet`` is
    given every name must belong to it.
    """
    parser = _Parser(text, None if alphabet is None else set(alphabet))
    w = parser.word(())
    return w


class ReducedSeries:
    """Element of the repetition-free quotient of the Magnus ring.

    The constant term is 1 implicitly; ``coeffs`` maps each repetition-free
    label sequence to its nonzero integer coefficient.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Mapping[Sequence[str], int] | None = None):
        clean = {}
        for key, c in (coeffs or {}).items():
            key = tuple(key)
            if not key:
                raise ValueError("the constant term is fixed at 1")
            if len(set(key)) != len(key):
                raise ValueError(f"monomial {key} repeats a label")
            if c:
                clean[key] = int(c)
        self._coeffs = clean

    @property
    def coeffs(self) -> dict[tuple[str, ...], int]:
        return dict(self._coeffs)

    def __getitem__(self, key: Sequence[str]) -> int:
        return self._coeffs.get(tuple(key), 0)

    def __eq__(self, other):
        return isinstance(other, ReducedSeries) and self._coeffs == other._coeffs

    def __hash__(self):
        return hash(frozenset(self._coeffs.items()))

    def __repr__(self):
        body = ", ".join(f"{''.join(k) if all(len(x) == 1 for x in k) else k}: {v}"
                         for k, v in sorted(self._coeffs.items(), key=lambda kv: (len(kv[0]), kv[0])))
        return f"ReducedSeries({{{body}}})"

    def is_one(self) -> bool:
        return not self._coeffs

    def multiply(self, other: ReducedSeries, cap: int | None = None) -> ReducedSeries:
        terms = [((), 1)] + list(self._coeffs.items())
        others = [((), 1)] + list(other._coeffs.items())
        out: dict[tuple[str, ...], int] = {}
        for k1, c1 in terms:
            s1 = set(k1)
            for k2, c2 in others:
                if not k1 and not k2:
                    continue
                if cap is not None and len(k1) + len(k2) > cap:
                    continue
                if s1.intersection(k2):
                    continue
                key = k1 + k2
                out[key] = out.get(key, 0) + c1 * c2
        return ReducedSeries(out)

    __mul__ = multiply

    def truncate(self, cap: int) -> ReducedSeries:
        return ReducedSeries({k: c for k, c in self._coeffs.items() if len(k) <= cap})


def expand(w: Word, exclude: str | None = None, cap: int | None = None) -> ReducedSeries:
    """Repetition-free Magnus expansion of ``w``.

    Letters labelled ``exclude`` (the measured circle's own meridian) are
    dropped; monomials longer than ``cap`` are discarded.  ``cap`` defaults
    to the number of distinct labels, which no surviving monomial can exceed.
    """
    letters = [x for x in w.letters if x.circle != exclude]
    if cap is None:
        cap = max(1, len({x.circle for x in letters}))
    if cap < 1:
        raise ValueError("cap must be at least 1")
    series: dict[tuple[str, ...], int] = {(): 1}
    for x in letters:
        # keys read here never contain x, keys written always do
        for mono, c in list(series.items()):
            if c and len(mono) < cap and x.circle not in mono:
                key = mono + (x.circle,)
                series[key] = series.get(key, 0) + x.sign * c
    del series[()]
    return ReducedSeries(series)


@dataclass(frozen=True)
class WordLink:
    """Circles with one longitude word each; self-letters are dropped."""

    circles: tuple[str, ...]
    longitudes: Mapping[str, Word] = field(default_factory=dict)

    def __post_init__(self):
        circles = tuple(self.circles)
        if len(set(circles)) != len(circles):
            raise ValueError("circle labels must be unique")
        for c in circles:
            if not isinstance(c, str) or not c:
                raise ValueError("circle labels must be nonempty strings")
        known = set(circles)
        clean = {}
        for label, w in self.longitudes.items():
            if label not in known:
                raise ValueError(f"longitude given for unknown circle {label!r}")
            if isinstance(w, str):
                w = parse_word(w, known)
            for x in w.letters:
                if x.circle not in known:
                    raise ValueError(f"longitude of {label!r} uses unknown label {x.circle!r}")
            clean[label] = Word(tuple(x for x in w.letters if x.circle != label))
        object.__setattr__(self, "circles", circles)
        object.__setattr__(self, "longitudes", {c: clean.get(c, Word()) for c in circles})

    __hash__ = None

    @classmethod
    def from_strings(cls, circles: Sequence[str], longitudes: Mapping[str, str]) -> WordLink:
        alphabet = set(circles)
        return cls(tuple(circles), {k: parse_word(v, alphabet) for k, v in longitudes.items()})

    def longitude(self, label: str) -> Word:
        return self.longitudes[label]

    def replace(self, longitudes: Mapping[str, Word]) -> WordLink:
        merged = dict(self.longitudes)
        merged.update(longitudes)
        return WordLink(self.circles, merged)


def _check_sequence(link: WordLink, seq: Sequence[str]) -> tuple[str, ...]:
    seq = tuple(seq)
    if len(seq) < 2:
        raise ValueError("a mu sequence needs at least two labels")
    if len(set(seq)) != len(seq):
        raise ValueError(f"sequence {seq} repeats a label")
    for x in seq:
        if x not in link.longitudes:
            raise ValueError(f"unknown label {x!r}")
    return seq


def word_coefficient(w: Word, target: Sequence[str]) -> int:
    """Coefficient of ``X_{t_1} ... X_{t_r}`` in the expansion of ``w``."""
    position = {x: j for j, x in enumerate(target)}
    levels = [position.get(x.circle, -1) for x in w.letters]
    signs = [x.sign for x in w.letters]
    return kernels.selection_coefficients(levels, [0] * len(levels), signs, [1] * len(target))[0]


def mu(link: WordLink, seq: Sequence[str]) -> int:
    """Milnor's mu for distinct labels, read off the last label's longitude."""
    seq = _check_sequence(link, seq)
    return word_coefficient(link.longitude(seq[-1]), seq[:-1])


def cyclic_subsequences(seq: Sequence) -> list[tuple]:
    """Sequences of length >= 2 obtained by deleting at least one entry and rotating."""
    seq = tuple(seq)
    m = len(seq)
    out: dict[tuple, None] = {}
    for r in range(2, m):
        for keep in combinations(range(m), r):
            sub = tuple(seq[i] for i in keep)
            for s in range(r):
                out.setdefault(sub[s:] + sub[:s], None)
    return list(out)


def delta(link: WordLink, seq: Sequence[str]) -> int:
    """Indeterminacy: gcd of mu over the cyclic subsequences (0 when empty)."""
    seq = _check_sequence(link, seq)
    g = 0
    for sub in cyclic_subsequences(seq):
        g = math.gcd(g, mu(link, sub))
    return g


class Residue(NamedTuple):
    value: int
    modulus: int


def mu_bar(link: WordLink, seq: Sequence[str]) -> Residue:
    d = delta(link, seq)
    value = mu(link, seq)
    return Residue(value % d if d else value, d)
