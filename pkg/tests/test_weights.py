import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fockshift import freeword as fw, weights as W
from fockshift.errors import PreconditionError
from fockshift.model import OperatorTuple

import oracles


def test_unit_products():
    w = W.unit(2)
    assert w.mu_product((1, 2, 1), (2,)) == 1.0


def test_ratio_products_closed_form():
    w = W.ratio(2, 1)
    for a in range(5):
        for b in range(1, 5):
            assert w.mu_product((1,) * b, (2,) * a) == pytest.approx((a + b + 1) / (a + 1), rel=1e-14)
    assert w.mu_norm((1, 2, 2)) == 4.0


def test_besov_norm_and_range():
    assert W.besov(2, 2).mu_norm((1, 2)) ** 2 == pytest.approx(1 / 3, rel=1e-14)
    assert all(W.besov(2, 1).weight(w) == 1.0 for w in fw.enumerate_words(2, 4)[1:])
    with pytest.raises(ValueError):
        W.besov(2, 0)


def test_dirichlet_zero_is_full_fock():
    w = W.dirichlet(3, 0)
    assert all(w.weight(x) == 1.0 for x in fw.enumerate_words(3, 3)[1:])


@pytest.mark.parametrize("s", [1.0, 2.0, 3.5])
def test_series_with_sum_of_generators_is_besov(s):
    ser = W.series(2, {"1": 1.0, "2": 1.0}, s, max_level=4)
    ref = W.besov(2, s)
    for word in fw.enumerate_words(2, 4)[1:]:
        assert ser.weight(word) == pytest.approx(ref.weight(word), rel=1e-13)


def test_series_rejections():
    with pytest.raises(PreconditionError):
        W.series(2, {"1": 1.0, "2": 1.0}, 0.5)
    with pytest.raises(PreconditionError):
        W.series(2, {"1": 1.0, "1.2": 1.0}, 1.0)


def test_series_nonsymmetric_b_coefficients():
    # phi = Z1 + 2 Z2 + Z1Z2, s = 1: g = 1/(1 - phi), b_alpha = coefficient of Z_alpha
    w = W.series(2, {"1": 1.0, "2": 2.0, "1.2": 1.0}, 1.0, max_level=3)
    # coefficient of Z1Z2 in sum phi^k: from phi^2 (Z1 * 2Z2) = 2 plus phi (Z1Z2) = 1
    assert 1 / w.mu_norm((1, 2)) ** 2 == pytest.approx(3.0)
    assert 1 / w.mu_norm((2, 1)) ** 2 == pytest.approx(2.0)


def random_table_weights(seed, n=2, N=4):
    rng = np.random.default_rng(seed)
    return W.TableWeights(n, oracles.random_table(rng, n, N), N)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.lists(st.integers(1, 2), max_size=2).map(tuple),
       st.lists(st.integers(1, 2), max_size=2).map(tuple), st.lists(st.integers(1, 2), max_size=2).map(tuple))
def test_cocycle(seed, a, b, c):
    w = random_table_weights(seed, N=6)
    lhs = w.mu_product(b + c, a)
    rhs = w.mu_product(b, c + a) * w.mu_product(c, a)
    assert lhs == pytest.approx(rhs, rel=1e-12)
    assert w.mu_product((), a) == 1.0
    assert lhs == pytest.approx(oracles.mu_chain(w.weight, b + c, a), rel=1e-12)


def test_b_roundtrip_and_norm_recursion():
    w = random_table_weights(3, N=4)
    b = {word: w.b(word) for word in fw.enumerate_words(2, 4)}
    assert b[()] == 1.0
    back = W.from_b(2, b, 4)
    for word in fw.enumerate_words(2, 4)[1:]:
        assert back.weight(word) == pytest.approx(w.weight(word), rel=1e-14)
        assert w.mu_norm(word) == pytest.approx(w.weight(word) * w.mu_norm(word[1:]), rel=1e-14)


def test_right_weights():
    w = random_table_weights(5, N=3)
    assert w.mu_right((1, 2), 1) == pytest.approx(w.mu_norm((1, 2, 1)) / w.mu_norm((1, 2)))


def test_interpolation_examples():
    w = W.interpolate_from_sequence([2.0 ** k for k in range(1, 9)], 2)
    assert all(w.level_weight(k) == 2.0 for k in range(1, 9))
    trunc = W.interpolate_from_sequence([1, 1, 0, 0, 0], 2)
    assert [trunc.level_weight(k) for k in range(1, 6)] == [1, 1, 0, 0, 0]
    assert trunc.level_weight(40) == 0.0
    with pytest.raises(PreconditionError):
        W.interpolate_from_sequence([math.factorial(k) for k in range(1, 5)], 2)
    with pytest.raises(PreconditionError):
        W.interpolate_from_sequence([0.5, 0.0, 0.1], 2)


def test_interpolation_bounded_by_first_term():
    a = [0.9 ** k / math.factorial(k) ** 0.3 for k in range(1, 10)]
    w = W.interpolate_from_sequence(a, 2)
    assert max(w.level_weight(k) for k in range(1, 10)) <= a[0]
    for k in range(1, 10):
        assert w.mu_norm((1,) * k) == a[k - 1]


def test_truncation_validity_check():
    table = {w: 1.0 for w in fw.enumerate_words(2, 2)[1:]}
    table[(1,)] = 0.0
    w = W.TableWeights(2, table)
    assert not w.truncation_valid
    with pytest.raises(PreconditionError):
        W.TableWeights(2, table, strict=True)
    table[(1, 1)] = table[(2, 1)] = 0.0
    assert W.TableWeights(2, table).truncation_valid


def test_truncation_validity_accepts_exactly_suffix_closed():
    rng = np.random.default_rng(0)
    for _ in range(30):
        table = {w: float(rng.integers(0, 2)) for w in fw.enumerate_words(2, 3)[1:]}
        closed = all(table[w[j:]] != 0 for w in table if table[w] != 0 for j in range(1, len(w)))
        assert W.TableWeights(2, table).truncation_valid == closed


def test_table_cap():
    w = random_table_weights(1, N=2)
    with pytest.raises(PreconditionError):
        w.weight((1, 1, 1))


def test_tuple_weights_jordan_block():
    T = OperatorTuple([[[0, 1], [0, 0]], [[0, 0], [0, 0]]])
    w = W.from_tuple_norms(T)
    assert T.nilpotent_index() == 2
    assert w.level_weight(1) == 2.0
    assert w.level_weight(2) == 0.0 and w.level_weight(5) == 0.0
    assert w.mu_norm((1,)) == 2.0


def test_tuple_weights_scalar():
    T = OperatorTuple([[[0.3]], [[0.4]]])
    w = W.from_tuple_norms(T)
    for k in range(1, 8):
        assert w.level_weight(k) == pytest.approx((k + 1) / k * 0.5, rel=1e-13)
        assert w.level_norm(k) == pytest.approx((k + 1) * 0.5 ** k, rel=1e-13)


def test_tuple_weights_zero_rejected():
    with pytest.raises(PreconditionError):
        W.from_tuple_norms(OperatorTuple(np.zeros((2, 2, 2))))


def test_boundedness_reports():
    rep = W.boundedness_report(W.unit(2), 4)
    assert all(g["left_sup"] == 1.0 and g["right_sup"] == 1.0 for g in rep["generators"])
    assert rep["generators"][0]["left_verdict"] == "certified"
    rep = W.boundedness_report(W.besov(2, 3), 4)
    assert all(g["left_sup"] <= 1.0 for g in rep["generators"])
    rep = W.boundedness_report(W.ratio(2, 1), 5)
    assert rep["generators"][0]["left_sup"] == 2.0
    grow = W.TableWeights(1, {(1,) * k: float(k) for k in range(1, 6)})
    assert W.boundedness_report(grow, 4)["generators"][0]["left_verdict"] == "unbounded-suspected"


def test_json_roundtrip():
    w = random_table_weights(2, N=3)
    back = W.from_json(W.to_json(w))
    assert back.table == w.table
    b = W.from_json({"n": 2, "kind": "besov", "s": 2})
    assert b.weight((1, 1)) == W.besov(2, 2).weight((1, 1))
    ser = W.from_json({"n": 2, "kind": "series", "series": {"coeffs": {"1": 1, "2": 1}, "s": 2}})
    assert ser.weight((1, 2)) == pytest.approx(b.weight((1, 2)))
