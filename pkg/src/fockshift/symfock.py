"""Symmetric weighted Fock space on the multi-index lattice.

Class weights omega_k sum 1/mu(alpha, g0)^2 over the words alpha with
letter counts k.  In the orthonormal lattice basis u^(k) the compressed
shifts act as B_i u^(k) = sqrt(omega_k / omega_{k+e_i}) u^(k+e_i).
"""
import math

import numpy as np
import scipy.sparse as sp

from . import freeword
from .convergence import series_verdict
from .errors import PreconditionError
from .fock import TruncatedFock, build_shift_matrix
from .model import OperatorTuple, commutator_residual, psd_sqrt


def omega(w, k):
    k = tuple(int(x) for x in k)
    if len(k) != w.n:
        raise ValueError(f"multi-index must have {w.n} entries")
    if w.length_only:
        nk = w.level_norm(sum(k))
        if nk == 0.0:
            raise PreconditionError("zero weight in the class")
        return freeword.multinomial(k) / nk ** 2
    return omega_wordsum(w, k)


def omega_wordsum(w, k):
    total = 0.0
    for word in freeword.words_in_class(k):
        m = w.mu_norm(word)
        if m == 0.0:
            raise PreconditionError("zero weight in the class")
        total += 1.0 / m ** 2
    return total


class SymmetricBasis:
    """Multi-indices of total degree <= D with their class weights."""

    def __init__(self, w, D):
        self.w = w
        self.n = w.n
        self.D = D
        self.indices = freeword.multi_indices(w.n, D)
        self.position = {k: j for j, k in enumerate(self.indices)}
        self.omega = np.array([omega(w, k) for k in self.indices])
        self.dim = len(self.indices)

    def shift(self, k, i):
        k = list(k)
        k[i - 1] += 1
        return tuple(k)


def commuting_shift_matrix(w, i, D, basis=None):
    basis = basis or SymmetricBasis(w, D)
    root = np.sqrt(basis.omega)
    rows, cols, vals = [], [], []
    for j, k in enumerate(basis.indices):
        if sum(k) >= D:
            continue
        t = basis.position[basis.shift(k, i)]
        rows.append(t)
        cols.append(j)
        vals.append(root[j] / root[t])
    return sp.csr_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim))


def y_vector(w, k, N):
    """Class average (1/omega_k) sum_{alpha in class k} e_alpha / mu(alpha, g0) in Fock coordinates."""
    if sum(k) > N:
        raise PreconditionError("degree exceeds the truncation")
    space = TruncatedFock(w.n, N)
    om = omega(w, k)
    y = np.zeros(space.dim, dtype=complex)
    for word in freeword.words_in_class(k):
        y[space.index[word]] = 1.0 / (om * w.mu_norm(word))
    return y


def compression_check(w, i, D, N):
    """Max difference between <W_i y^(k), y^(k')> and the rescaled lattice entry."""
    if N < D + 1:
        raise PreconditionError("need N >= D + 1")
    basis = SymmetricBasis(w, D)
    B = commuting_shift_matrix(w, i, D, basis).toarray()
    Wi = build_shift_matrix(w, i, "left", N)
    ys = [y_vector(w, k, N) for k in basis.indices]
    worst = 0.0
    for a, k in enumerate(basis.indices):
        if sum(k) >= D:
            continue
        img = Wi @ ys[a]
        for b, k2 in enumerate(basis.indices):
            fock = np.vdot(ys[b], img)
            lattice = B[b, a] / math.sqrt(basis.omega[a] * basis.omega[b])
            worst = max(worst, abs(fock - lattice))
    return worst


def lattice_kernel_vector(w, lam, D, basis=None):
    """z_lambda in the u-basis: coefficient conj(lambda)^k sqrt(omega_k)."""
    basis = basis or SymmetricBasis(w, D)
    lam = np.conj(np.asarray(lam, dtype=complex))
    return np.array([np.prod(lam ** np.array(k)) * math.sqrt(om)
                     for k, om in zip(basis.indices, basis.omega)])


def h2_kernel(w, zeta, lam, max_degree=60, check=False, N=None):
    """sum_k omega_k zeta^k conj(lambda)^k, with level partial sums."""
    from .hardy import point_membership
    zeta = np.asarray(zeta, dtype=complex)
    lam = np.asarray(lam, dtype=complex)
    for p in (zeta, lam):
        if point_membership(w, p).verdict != "member":
            raise PreconditionError("kernel needs member points")
    prod = zeta * np.conj(lam)
    levels = []
    if w.length_only:
        # sum over |k| = d of multinomial(k) prod^k is <zeta, lambda>^d
        s = complex(prod.sum())
        for d in range(max_degree + 1):
            levels.append(s ** d / w.level_norm(d) ** 2)
    else:
        for d in range(max_degree + 1):
            total = 0j
            for k in freeword.multi_indices(w.n, d):
                if sum(k) == d:
                    total += omega(w, k) * np.prod(prod ** np.array(k))
            levels.append(total)
    out = {"value": complex(sum(levels)), "levels": levels,
           "verdict": series_verdict([abs(x) for x in levels])}
    if check:
        from .hardy import kernel_vector
        N = N if N is not None else min(max_degree, 6)
        zl = kernel_vector(w, lam, N)
        zz = kernel_vector(w, zeta, N)
        out["fock_partial"] = complex(np.vdot(zz, zl))
        out["lattice_partial"] = complex(sum(levels[:N + 1]))
    return out


def commutative_word(T, k):
    out = np.eye(T.d, dtype=complex)
    for i, ki in enumerate(k):
        if ki:
            out = out @ np.linalg.matrix_power(T[i], ki)
    return out


def commutative_model(T, w, Q=None, D=4, tol=1e-10):
    """Embedding K h = sum_k sqrt(omega_k) u^(k) (x) Q^{1/2} (T^k)^* h on the lattice."""
    if not isinstance(T, OperatorTuple):
        T = OperatorTuple(T)
    if commutator_residual(T) > tol * max(1.0, T._scale):
        raise PreconditionError("tuple does not commute")
    nil = T.nilpotent_index()
    if nil is not None:
        D = min(D, nil - 1)
    basis = SymmetricBasis(w, D)
    d = T.d
    Qh = np.eye(d, dtype=complex) if Q is None else psd_sqrt(Q)
    powers = {k: commutative_word(T, k) for k in basis.indices}
    blocks = np.array([math.sqrt(om) * Qh @ powers[k].conj().T
                       for k, om in zip(basis.indices, basis.omega)])
    terms = []
    for deg in range(D + 1):
        level = sum(blocks[j].conj().T @ blocks[j] for j, k in enumerate(basis.indices) if sum(k) == deg)
        terms.append(float(np.linalg.norm(level, 2)))
    verdict = "convergent-evidence" if nil is not None else series_verdict(terms)
    if verdict == "divergent-evidence":
        raise PreconditionError("level terms do not decay")
    K = blocks.reshape(basis.dim * d, d)
    G = K.conj().T @ K
    ev = np.linalg.eigvalsh((G + G.conj().T) / 2)
    residuals = []
    for i in range(1, T.n + 1):
        B = commuting_shift_matrix(w, i, D, basis).toarray()
        big = np.kron(B.conj().T, np.eye(d))
        residuals.append(float(np.linalg.norm(K @ T[i - 1].conj().T - big @ K, 2)))
    return {"K": K, "basis": basis, "residuals": residuals, "lambda_min": float(ev[0]),
            "lambda_max": float(ev[-1]), "cb_bound": math.sqrt(ev[-1] / ev[0]),
            "level_terms": terms, "verdict": verdict, "degree": D,
            "regime": "exact" if nil is not None else "tail-approximate"}


def commutative_fejer(coeffs, T, N=None, mode="fejer"):
    """sum over multi-indices of (1 - |k|/(N+1)) c_k T^k (or the plain sum)."""
    if not isinstance(T, OperatorTuple):
        T = OperatorTuple(T)
    out = np.zeros((T.d, T.d), dtype=complex)
    for k, c in coeffs.items():
        deg = sum(k)
        if mode == "fejer":
            if deg > N:
                continue
            out += (1.0 - deg / (N + 1.0)) * c * commutative_word(T, k)
        elif mode == "exact-poly":
            out += c * commutative_word(T, k)
        else:
            raise ValueError(f"unknown mode {mode!r}")
    return out
