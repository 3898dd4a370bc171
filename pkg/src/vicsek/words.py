"""Symbolic addresses on the Vicsek set.

A point of the level-m vertex set is named by a word over the alphabet
``{1,...,5}`` (the five contractions) and a corner label in ``{1,...,4}``.
The address ``(w, i)`` denotes ``F_w(q_i)`` with
``F_w = F_{w_1} o F_{w_2} o ... o F_{w_m}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

ALPHABET = (1, 2, 3, 4, 5)
CORNERS = (1, 2, 3, 4)

# fixed points of the five similarities; p_1..p_4 are also the corners q_1..q_4
FIXED_POINTS = {
    1: (Fraction(0), Fraction(1)),
    2: (Fraction(1), Fraction(1)),
    3: (Fraction(1), Fraction(0)),
    4: (Fraction(0), Fraction(0)),
    5: (Fraction(1, 2), Fraction(1, 2)),
}

# F_5(q_i) coincides with F_i(q_{i+2 mod 4})
IDENTIFICATIONS = {1: (1, 3), 2: (2, 4), 3: (3, 1), 4: (4, 2)}

_R1 = {1: 1, 2: 4, 3: 3, 4: 2, 5: 5}
_R2 = {1: 2, 2: 3, 3: 4, 4: 1, 5: 5}
_R2_INV = {v: k for k, v in _R2.items()}


class Word(tuple):
    """Immutable finite word over ``{1,...,5}``."""

    def __new__(cls, letters: Iterable[int] = ()):
        letters = tuple(int(x) for x in letters)
        for x in letters:
            if x not in ALPHABET:
                raise ValueError(f"letter {x} not in alphabet {ALPHABET}")
        return super().__new__(cls, letters)

    def __add__(self, other):
        return Word(tuple(self) + tuple(other))

    def __repr__(self):
        return "Word(" + ("".join(map(str, self)) or "∅") + ")"

    def __str__(self):
        return "".join(map(str, self)) or "∅"


@dataclass(frozen=True, order=True)
class Address:
    word: Word
    corner: int

    def __post_init__(self):
        if not isinstance(self.word, Word):
            object.__setattr__(self, "word", Word(self.word))
        if self.corner not in CORNERS:
            raise ValueError(f"corner must be one of {CORNERS}, got {self.corner}")

    @property
    def level(self) -> int:
        return len(self.word)

    def __str__(self):
        return f"({self.word},{self.corner})"


def concat(w: Iterable[int], v: Iterable[int]) -> Word:
    return Word(tuple(w) + tuple(v))


def _apply(x, F_index):
    # F_i(x) = x/3 + 2 p_i / 3
    px, py = FIXED_POINTS[F_index]
    return (x[0] / 3 + 2 * px / 3, x[1] / 3 + 2 * py / 3)


def project(addr: Address) -> tuple[Fraction, Fraction]:
    """Exact coordinates of ``q_{w,i} = F_w(q_i)``."""
    pt = FIXED_POINTS[addr.corner]
    for letter in reversed(addr.word):
        pt = _apply(pt, letter)
    return pt


def rotate1(addr: Address) -> Address:
    """Transposition (2 4), applied letterwise and to the corner."""
    return Address(Word(_R1[x] for x in addr.word), _R1[addr.corner])


def rotate2(addr: Address) -> Address:
    """Four-cycle 1->2->3->4->1 (letter 5 fixed)."""
    return Address(Word(_R2[x] for x in addr.word), _R2[addr.corner])


def rotate2_inverse(addr: Address) -> Address:
    return Address(Word(_R2_INV[x] for x in addr.word), _R2_INV[addr.corner])


def reflect_diagonal(pt):
    """Isometry matching rotate1: flip across the q1-q3 diagonal."""
    x, y = pt
    return (1 - y, 1 - x)


def rotate_quarter(pt):
    """Isometry matching rotate2: quarter turn about the centre, q1 -> q2."""
    x, y = pt
    return (y, 1 - x)


def enumerate_words(depth: int, first_letters: Iterable[int] = ALPHABET,
                    include_empty: bool = True) -> Iterator[Word]:
    """Lazily yield all words of length <= depth in lexicographic order.

    Only words whose first letter lies in ``first_letters`` are produced;
    the empty word is yielded first when ``include_empty`` is set.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    first = sorted(set(first_letters))
    for x in first:
        if x not in ALPHABET:
            raise ValueError(f"letter {x} not in alphabet")
    if include_empty:
        yield Word()

    def rec(prefix):
        yield Word(prefix)
        if len(prefix) < depth:
            for x in ALPHABET:
                yield from rec(prefix + (x,))

    if depth >= 1:
        for x in first:
            yield from rec((x,))


def enumerate_addresses(depth: int, first_letters: Iterable[int] = ALPHABET,
                        include_empty: bool = True) -> Iterator[Address]:
    for w in enumerate_words(depth, first_letters, include_empty):
        for i in CORNERS:
            yield Address(w, i)


def word_count(depth: int, n_first: int = 5, include_empty: bool = True) -> int:
    return int(include_empty) + sum(n_first * 5 ** (k - 1) for k in range(1, depth + 1))
