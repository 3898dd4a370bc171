from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from vicsek.words import (ALPHABET, Address, Word, concat, enumerate_addresses, enumerate_words, project,
                          reflect_diagonal, rotate1, rotate2, rotate2_inverse, rotate_quarter, word_count)

words = st.lists(st.integers(1, 5), max_size=6).map(Word)
addresses = st.builds(Address, words, st.integers(1, 4))


def test_word_rejects_bad_letters():
    with pytest.raises(ValueError):
        Word([1, 6])
    with pytest.raises(ValueError):
        Word([0])


def test_address_rejects_corner_5():
    with pytest.raises(ValueError):
        Address(Word(), 5)


def test_empty_word_str():
    assert str(Word()) == "∅"
    assert str(Address(Word([2, 5]), 3)) == "(25,3)"


@given(words, words)
def test_concat_length(w, v):
    assert len(concat(w, v)) == len(w) + len(v)


def test_project_examples():
    assert project(Address(Word(), 1)) == (0, 1)
    assert project(Address(Word([1]), 3)) == (Fraction(1, 3), Fraction(2, 3))
    assert project(Address(Word([5]), 1)) == (Fraction(1, 3), Fraction(2, 3))


def test_project_corners_are_fixed_points():
    expected = {1: (0, 1), 2: (1, 1), 3: (1, 0), 4: (0, 0)}
    for i, pt in expected.items():
        assert project(Address(Word(), i)) == pt


@given(addresses)
def test_denominators_divide_power_of_three(a):
    for c in project(a):
        assert (3 ** a.level) % c.denominator == 0


@given(words, st.integers(1, 4))
def test_fixed_point_law(w, i):
    assert project(Address(w + Word([i]), i)) == project(Address(w, i))


@given(words, st.integers(1, 4))
def test_identifications(w, i):
    j = (i + 1) % 4 + 1
    assert project(Address(w + Word([5]), i)) == project(Address(w + Word([i]), j))


def test_project_injective_up_to_identifications():
    # distinct points at depth 4 equal the vertex count 3*5^4+1
    pts = {project(a) for a in enumerate_addresses(4) if a.level == 4}
    assert len(pts) == 3 * 5 ** 4 + 1


def test_rotate_examples():
    assert rotate1(Address(Word(), 2)) == Address(Word(), 4)
    assert rotate1(Address(Word([2, 4]), 1)) == Address(Word([4, 2]), 1)
    assert rotate1(Address(Word([5]), 3)) == Address(Word([5]), 3)
    assert rotate2(Address(Word(), 1)) == Address(Word(), 2)
    assert rotate2(Address(Word([2, 5]), 4)) == Address(Word([3, 5]), 1)
    assert rotate2(Address(Word([1, 2, 3, 4]), 2)) == Address(Word([2, 3, 4, 1]), 3)


@given(addresses)
def test_rotation_orders(a):
    assert rotate1(rotate1(a)) == a
    b = a
    for _ in range(4):
        b = rotate2(b)
    assert b == a
    assert rotate2_inverse(rotate2(a)) == a


@given(addresses)
def test_rotations_commute_with_isometries(a):
    assert project(rotate1(a)) == reflect_diagonal(project(a))
    assert project(rotate2(a)) == rotate_quarter(project(a))


def test_enumerate_examples():
    assert list(enumerate_words(0)) == [Word()]
    assert list(enumerate_words(1, {1, 2, 5})) == [Word(), Word([1]), Word([2]), Word([5])]
    assert len(list(enumerate_words(2))) == 31


@given(st.integers(0, 4), st.sets(st.sampled_from(ALPHABET), min_size=1))
def test_enumerate_count_and_order(depth, first):
    ws = list(enumerate_words(depth, first))
    assert len(ws) == word_count(depth, len(first))
    assert ws == sorted(ws)
    assert all(w[0] in first for w in ws[1:])


def test_enumerate_rejects_negative_depth():
    with pytest.raises(ValueError):
        list(enumerate_words(-1))
