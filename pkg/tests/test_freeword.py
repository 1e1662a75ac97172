import math

import pytest
from hypothesis import given, strategies as st

from fockshift import freeword as fw
from fockshift.errors import CapExceeded


def test_enumeration_small():
    assert fw.enumerate_words(2, 0) == [()]
    assert fw.enumerate_words(2, 2) == [(), (1,), (2,), (1, 1), (1, 2), (2, 1), (2, 2)]
    assert len(fw.enumerate_words(3, 3)) == 40 == 1 + 3 + 9 + 27


def test_graded_index_examples():
    assert fw.graded_index((), 2) == 0
    assert fw.graded_index((2,), 2) == 2
    assert fw.graded_index((2, 1), 2) == 5


def test_letter_out_of_range():
    with pytest.raises(ValueError):
        fw.graded_index((3,), 2)


def test_index_agrees_with_enumeration():
    for n in (1, 2, 3):
        for j, w in enumerate(fw.enumerate_words(n, 4)):
            assert fw.graded_index(w, n) == j
            assert fw.index_word(j, n) == w


words2 = st.lists(st.integers(1, 3), max_size=7).map(tuple)


@given(words2, words2)
def test_index_monotone_and_roundtrip(a, b):
    ia, ib = fw.graded_index(a, 3), fw.graded_index(b, 3)
    assert fw.index_word(ia, 3) == a
    assert (ia < ib) == ((len(a), a) < (len(b), b))


@given(words2, words2)
def test_abelianization_additive(a, b):
    ka, kb = fw.abelianization(a, 3), fw.abelianization(b, 3)
    assert fw.abelianization(fw.concat(a, b), 3) == tuple(x + y for x, y in zip(ka, kb))
    assert sum(ka) == len(a)


def test_abelianization_examples():
    assert fw.abelianization((), 2) == (0, 0)
    assert fw.abelianization((1, 2, 1), 2) == (2, 1)


def test_class_sizes_match_enumeration():
    assert fw.words_in_class((0, 0)) == [()]
    assert sorted(fw.words_in_class((1, 1))) == [(1, 2), (2, 1)]
    for n in (2, 3):
        words = fw.enumerate_words(n, 5)
        for k in fw.multi_indices(n, 5):
            brute = [w for w in words if fw.abelianization(w, n) == k]
            got = fw.words_in_class(k)
            assert sorted(got) == sorted(brute)
            assert len(got) == fw.multinomial(k) == math.factorial(sum(k)) // math.prod(
                math.factorial(x) for x in k)


def test_serialization():
    assert fw.word_to_str(()) == "e"
    assert fw.word_to_str((1, 2, 1)) == "1.2.1"
    assert fw.parse_word("1.2.1") == (1, 2, 1)
    assert fw.parse_word("e") == ()
    assert fw.parse_multi_index(fw.multi_index_to_str((2, 0, 1))) == (2, 0, 1)


def test_resource_cap(monkeypatch):
    monkeypatch.setenv("FOCKSHIFT_MAX_DIM", "100")
    with pytest.raises(CapExceeded):
        fw.enumerate_words(2, 8)
    with pytest.raises(CapExceeded):
        fw.check_size(5, 2)
