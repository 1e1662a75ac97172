import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fockshift import weights as W
from fockshift.errors import PreconditionError
from fockshift.fock import (TruncatedFock, ShiftOperator, build_shift_matrix, shift_matrices,
                            word_operator, to_triplets, from_triplets, level_row_norm,
                            level_operator, joint_radius_estimate, classify, reduce_decompose)

import oracles


def table_weights(seed, n=2, N=4, trunc=False):
    rng = np.random.default_rng(seed)
    make = oracles.random_truncation_table if trunc else oracles.random_table
    return W.TableWeights(n, make(rng, n, N), N)


def test_shift_matches_dense_oracle():
    w = table_weights(0, N=3)
    words, dense = oracles.dense_shifts(w.weight, 2, 3)
    space = TruncatedFock(2, 3)
    assert space.words == words
    for A, B in zip(shift_matrices(w, 3), dense):
        assert np.array_equal(A.toarray(), B)


def test_left_shift_action_and_top_level():
    w = W.ratio(2, 1)
    op = ShiftOperator(w, 2, 3)
    e = op.space.basis((1,))
    out = op.apply(e)
    assert out[op.space.index[(2, 1)]] == pytest.approx(w.weight((2, 1)))
    assert np.count_nonzero(out) == 1
    assert not np.any(op.apply(op.space.basis((1, 1, 1))))


def test_right_shift_entries():
    w = table_weights(2, N=3)
    R = build_shift_matrix(w, 1, "right", 3)
    s = TruncatedFock(2, 3)
    got = R[s.index[(2, 1)], s.index[(2,)]]
    assert got == pytest.approx(w.mu_norm((2, 1)) / w.mu_norm((2,)), rel=1e-14)


def test_word_operator_product():
    w = table_weights(4, N=4)
    mats = shift_matrices(w, 4)
    s = TruncatedFock(2, 4)
    P = word_operator(mats, (1, 2))
    val = P[s.index[(1, 2, 2)], s.index[(2,)]]
    assert val == pytest.approx(w.mu_product((1, 2), (2,)), rel=1e-14)


def test_adjoint_length_check():
    op = ShiftOperator(W.unit(2), 1, 2)
    with pytest.raises(ValueError):
        op.apply(np.zeros(3))
    v = op.space.basis((1, 2))
    assert op.apply(v, adjoint=True)[op.space.index[(2,)]] == 1.0


def test_triplets_roundtrip():
    A = build_shift_matrix(table_weights(1, N=3), 2, "left", 3)
    text = to_triplets(A)
    assert len(text.splitlines()) == A.nnz
    assert np.array_equal(from_triplets(text, A.shape).toarray(), A.toarray())


@pytest.mark.parametrize("k", [1, 2, 3])
def test_level_norm_matches_dense_oracle(k):
    w = table_weights(7, N=4)
    scan = level_row_norm(w, k, 4).value
    dense = oracles.dense_level_norm(w.weight, 2, 4, k)
    assert scan ** 2 == pytest.approx(dense, rel=1e-12)
    assert np.linalg.norm(level_operator(w, k, 4), 2) == pytest.approx(dense, rel=1e-12)


def test_level_norm_threads_agree():
    w = table_weights(9, n=3, N=3)
    a = level_row_norm(w, 2, 3)
    b = level_row_norm(w, 2, 3, threads=3)
    assert a.value == b.value
    assert w.mu_product(a.beta, a.alpha) == a.value


def test_level_norm_length_only_uses_ratios():
    w = W.ratio(2, 1)
    r = level_row_norm(w, 3, 8)
    assert r.value == pytest.approx(4.0, rel=1e-14)
    assert r.alpha == ()
    # smallest level product sits at the boundary |alpha| = N - k
    assert w.level_product(3, 5) == pytest.approx(9 / 6, rel=1e-14)


def test_level_norm_closed_form_and_errors():
    assert level_row_norm(W.besov(2, 2), 2, 4, closed_form=True).value == 1.0
    with pytest.raises(PreconditionError):
        level_row_norm(W.unit(2), 5, 4)
    with pytest.raises(PreconditionError):
        level_row_norm(table_weights(0, N=2), 1, 2, closed_form=True)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 2), st.integers(1, 2))
def test_level_norm_submultiplicative(seed, j, k):
    w = table_weights(seed, N=4)
    lhs = level_row_norm(w, j + k, 4).value
    assert lhs <= level_row_norm(w, j, 4).value * level_row_norm(w, k, 4).value * (1 + 1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_shift_norm_is_weight_sup(seed):
    w = table_weights(seed, N=3)
    for A, i in zip(shift_matrices(w, 3), (1, 2)):
        sup = max(w.weight((i,) + a) for a in oracles.all_words(2, 2))
        assert np.linalg.norm(A.toarray(), 2) == pytest.approx(sup, rel=1e-12)


def test_radius_examples():
    assert joint_radius_estimate(W.unit(2), 6).estimate == 1.0
    est = joint_radius_estimate(W.besov(2, 2), 6)
    assert est.exact == 1.0 and est.estimate <= 1.0 + 1e-12
    w = W.interpolate_from_sequence([0.5 ** k for k in range(1, 9)], 2)
    assert joint_radius_estimate(w, 8).estimate == pytest.approx(0.5, rel=1e-12)


def test_classify_flags():
    rep = classify(W.unit(2), 4, M=1.0)
    assert rep["injective"] and rep["row_contraction"] and rep["power_bounded_within_scan"]
    rep = classify(W.ratio(2, 1), 5, M=2.0)
    assert not rep["row_contraction"] and not rep["power_bounded_within_scan"]
    comp = W.TableWeights(1, {(1,) * k: 1.0 / (k + 1) ** 2 for k in range(1, 11)})
    gen = classify(comp, 10)["generators"][0]
    assert gen["weights_decay"] and gen["compact_evidence"]
    assert not classify(W.unit(1), 8)["generators"][0]["compact_evidence"]


def test_reduce_decompose_partitions_and_reduces():
    w = table_weights(11, N=3, trunc=True)
    comps = reduce_decompose(w, 3)
    words = [x for c in comps for x in c["words"]]
    assert sorted(words) == sorted(oracles.all_words(2, 3))
    s = TruncatedFock(2, 3)
    mats = [A.toarray() for A in shift_matrices(w, 3)]
    for c in comps:
        P = np.zeros((s.dim, s.dim))
        for x in c["words"]:
            P[s.index[x], s.index[x]] = 1.0
        for A in mats:
            assert np.abs(A @ P - P @ A).max() == 0.0


def test_reduce_decompose_injective_is_connected():
    comps = reduce_decompose(W.unit(2), 3)
    assert len(comps) == 1 and comps[0]["type"] == "injective-type"
    trunc = W.interpolate_from_sequence([1, 1, 0, 0], 1)
    kinds = {c["type"] for c in reduce_decompose(trunc, 3)}
    assert "truncated-type" in kinds
