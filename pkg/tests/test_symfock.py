import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fockshift import weights as W
from fockshift.errors import PreconditionError
from fockshift.model import OperatorTuple
from fockshift.symfock import (omega, omega_wordsum, SymmetricBasis, commuting_shift_matrix,
                               compression_check, lattice_kernel_vector, h2_kernel,
                               commutative_model, commutative_fejer)

import oracles


def test_omega_unit_is_multinomial():
    assert omega(W.unit(2), (2, 1)) == 3.0
    assert omega(W.unit(3), (1, 1, 1)) == 6.0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.tuples(st.integers(0, 2), st.integers(0, 2)))
def test_omega_matches_word_oracle(seed, k):
    rng = np.random.default_rng(seed)
    w = W.TableWeights(2, oracles.random_table(rng, 2, 4))
    assert omega(w, k) == pytest.approx(oracles.omega_oracle(w.weight, k), rel=1e-13)


def test_omega_length_only_formula_agrees():
    w = W.besov(2, 3)
    for k in [(1, 0), (2, 1), (1, 3)]:
        assert omega(w, k) == pytest.approx(omega_wordsum(w, k), rel=1e-13)


def test_commuting_shifts_commute_below_top():
    w = W.TableWeights(2, oracles.random_table(np.random.default_rng(1), 2, 5))
    D = 4
    basis = SymmetricBasis(w, D)
    B1 = commuting_shift_matrix(w, 1, D, basis).toarray()
    B2 = commuting_shift_matrix(w, 2, D, basis).toarray()
    low = [j for j, k in enumerate(basis.indices) if sum(k) <= D - 2]
    C = (B1 @ B2 - B2 @ B1)[:, low]
    assert np.abs(C).max() <= 1e-13


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_compression_matches_lattice(seed):
    rng = np.random.default_rng(seed)
    w = W.TableWeights(2, oracles.random_table(rng, 2, 4, 0.5, 1.5))
    for i in (1, 2):
        assert compression_check(w, i, 3, 4) <= 1e-13


def test_lattice_kernel_matches_h2_partial():
    w = W.besov(2, 2)
    lam = np.array([0.3, 0.2j])
    basis = SymmetricBasis(w, 6)
    z = lattice_kernel_vector(w, lam, 6, basis)
    res = h2_kernel(w, lam, lam, max_degree=6)
    assert np.vdot(z, z).real == pytest.approx(res["value"].real, rel=1e-12)


def test_h2_kernel_checks():
    w = W.besov(2, 1)
    zeta, lam = np.array([0.2, 0.1j]), np.array([0.3, -0.1])
    res = h2_kernel(w, zeta, lam, check=True, N=5)
    assert res["fock_partial"] == pytest.approx(res["lattice_partial"], rel=1e-12)
    # s = 1 gives the Drury-Arveson kernel 1/(1 - <zeta, lambda>)
    assert res["value"] == pytest.approx(1 / (1 - np.vdot(lam, zeta)), rel=1e-12)
    tab = W.TableWeights(2, oracles.random_table(np.random.default_rng(2), 2, 8, 0.8, 1.2))
    r2 = h2_kernel(tab, zeta, lam, max_degree=5, check=True, N=4)
    assert r2["fock_partial"] == pytest.approx(r2["lattice_partial"], rel=1e-12)
    with pytest.raises(PreconditionError):
        h2_kernel(W.unit(2), [0.9, 0.9], lam)


def test_commutative_model_nilpotent():
    rng = np.random.default_rng(3)
    T = OperatorTuple(oracles.random_nilpotent_tuple(rng, 4, 2, commuting=True))
    res = commutative_model(T, W.besov(2, 1))
    assert res["regime"] == "exact"
    assert max(res["residuals"]) <= 1e-10 * max(1.0, T._scale) ** 2
    assert res["lambda_min"] >= 1 - 1e-12


def test_commutative_model_rejects_noncommuting():
    rng = np.random.default_rng(4)
    with pytest.raises(PreconditionError):
        commutative_model(OperatorTuple(oracles.random_nilpotent_tuple(rng, 3)), W.unit(2))


def test_commutative_fejer():
    T = OperatorTuple([np.diag([0.2, 0.5]), np.diag([0.1, -0.3])])
    coeffs = {(0, 0): 1.0, (1, 0): 2.0, (1, 1): -1.0}
    exact = commutative_fejer(coeffs, T, mode="exact-poly")
    lam = [np.array([0.2, 0.1]), np.array([0.5, -0.3])]
    for j, p in enumerate(lam):
        assert exact[j, j] == pytest.approx(1 + 2 * p[0] - p[0] * p[1])
    fej = commutative_fejer(coeffs, T, N=2)
    assert fej[0, 0] == pytest.approx(1 + 2 * (2 / 3) * 0.2 - (1 / 3) * 0.02)
