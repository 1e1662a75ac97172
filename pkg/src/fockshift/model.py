"""Similarity models for matrix tuples.

An ``OperatorTuple`` caches the level matrices phi_T^k(I) = sum over
|sigma| = k of T_sigma T_sigma^*, obtained by iterating the completely
positive map phi_T(X) = sum_i T_i X T_i^*.  The embedding

    K h = sum_alpha (1/mu(alpha, g0)) e_alpha (x) Q^{1/2} T_alpha^* h

satisfies K T_i^* = (W_i^* (x) I) K, which is what the certificates check.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import freeword
from .convergence import series_verdict
from .errors import PreconditionError
from .fock import TruncatedFock
from .weights import LengthWeights, interpolate_from_sequence


class OperatorTuple:
    def __init__(self, matrices, nil_tol=1e-13):
        mats = np.asarray(matrices, dtype=complex)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValueError("expected an array of shape (n, d, d)")
        self.matrices = mats
        self.n, self.d = mats.shape[0], mats.shape[1]
        self.nil_tol = nil_tol
        self._scale = float(sum(np.linalg.norm(T, 2) ** 2 for T in mats))
        self._levels = [np.eye(self.d, dtype=complex)]
        self._log_norms = [0.0]

    def __getitem__(self, i):
        return self.matrices[i]

    @classmethod
    def from_json(cls, spec):
        mats = np.asarray(spec["matrices"], dtype=float)
        if mats.ndim == 4:
            mats = mats[..., 0] + 1j * mats[..., 1]
        T = cls(mats)
        if "n" in spec and int(spec["n"]) != T.n or "d" in spec and int(spec["d"]) != T.d:
            raise ValueError("declared n/d do not match the matrices")
        return T

    def to_json(self):
        return {"n": self.n, "d": self.d,
                "matrices": np.stack([self.matrices.real, self.matrices.imag], axis=-1).tolist()}

    def phi(self, X):
        return sum(T @ X @ T.conj().T for T in self.matrices)

    def _extend(self, k):
        while len(self._levels) <= k:
            prev = self._levels[-1]
            if self._log_norms[-1] == -math.inf:
                self._levels.append(prev)
                self._log_norms.append(-math.inf)
                continue
            X = self.phi(prev)
            X = (X + X.conj().T) / 2
            s = float(np.linalg.eigvalsh(X)[-1]) if self.d else 0.0
            # relative to the scale of one step: below tolerance counts as zero
            if s <= self.nil_tol * self._scale or s <= 0.0:
                self._levels.append(np.zeros_like(prev))
                self._log_norms.append(-math.inf)
            else:
                self._levels.append(X / s)
                self._log_norms.append(self._log_norms[-1] + math.log(s))

    def level_log_norm(self, k):
        """log of the norm of phi_T^k(I)."""
        self._extend(k)
        return self._log_norms[k]

    def level_norm(self, k):
        return math.exp(self.level_log_norm(k))

    def level_matrix(self, k):
        """phi_T^k(I) (may under/overflow for large k; use the normalized form then)."""
        self._extend(k)
        if self._log_norms[k] == -math.inf:
            return np.zeros((self.d, self.d), dtype=complex)
        return self._levels[k] * math.exp(self._log_norms[k])

    def normalized_level(self, k):
        """phi_T^k(I) divided by its norm (zero matrix if it vanishes)."""
        self._extend(k)
        return self._levels[k]

    def nilpotent_index(self, kmax=None):
        """Smallest m with all words of length m vanishing, or None."""
        kmax = self.d if kmax is None else kmax
        for k in range(1, kmax + 1):
            if self.level_log_norm(k) == -math.inf:
                return k
        return None

    def is_commuting(self, tol=1e-10):
        return commutator_residual(self) <= tol

    def word_matrices(self, N):
        """T_alpha for all words with |alpha| <= N, via T_{g_i gamma} = T_i T_gamma."""
        out = {(): np.eye(self.d, dtype=complex)}
        for k in range(1, N + 1):
            for word in freeword.words_of_length(self.n, k):
                out[word] = self.matrices[word[0] - 1] @ out[word[1:]]
        return out


def commutator_residual(T):
    worst = 0.0
    for i in range(T.n):
        for j in range(i + 1, T.n):
            C = T[i] @ T[j] - T[j] @ T[i]
            worst = max(worst, float(np.linalg.norm(C, 2)))
    return worst


def spectral_radius(A):
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def tuple_stats(T, kmax, window=3):
    log_norms = [T.level_log_norm(k) for k in range(kmax + 1)]
    roots = [math.exp(log_norms[k] / (2 * k)) if log_norms[k] > -math.inf else 0.0
             for k in range(1, kmax + 1)]
    return {
        "level_norms": [math.exp(x) for x in log_norms],
        "log_level_norms": log_norms,
        "roots": roots,
        "r_estimate": max(roots[-window:]),
        "nilpotent_index": T.nilpotent_index(),
        "commuting": T.is_commuting(),
    }


def psd_sqrt(Q, floor=1e-12):
    Q = np.asarray(Q, dtype=complex)
    if not np.allclose(Q, Q.conj().T, atol=1e-12 * max(1.0, np.abs(Q).max())):
        raise PreconditionError("Q must be Hermitian")
    vals, vecs = np.linalg.eigh(Q)
    if vals.min() < floor:
        raise PreconditionError(f"Q is not positive definite (min eigenvalue {vals.min():.3g})")
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


@dataclass
class ModelCertificate:
    K: np.ndarray
    residuals: list
    lam_min: float
    lam_max: float
    N: int
    regime: str
    verdict: str
    level_terms: list = field(default_factory=list)
    partial_sum_norms: list = field(default_factory=list)

    @property
    def cb_bound(self):
        return math.sqrt(self.lam_max / self.lam_min)

    def summary(self):
        return {"N": self.N, "regime": self.regime, "verdict": self.verdict,
                "residuals": self.residuals, "lambda_min": self.lam_min,
                "lambda_max": self.lam_max, "cb_bound": self.cb_bound,
                "level_terms": self.level_terms, "partial_sum_norms": self.partial_sum_norms}


def build_K_embedding(T, w, Q=None, N=4, window=5, delta=0.05, check_divergence=True):
    """Embedding of C^d into (truncated Fock space) (x) C^d intertwining T_i^* with W_i^*.

    Words whose norm mu(alpha, g0) vanishes are skipped; for a weight
    sequence adapted to a nilpotent tuple these are exactly the words with
    T_alpha = 0.
    """
    if T.n != w.n:
        raise PreconditionError("tuple and weights have different n")
    d = T.d
    Qh = np.eye(d, dtype=complex) if Q is None else psd_sqrt(Q)
    space = TruncatedFock(w.n, N)
    prods = T.word_matrices(N + 1)
    norms = np.array([w.mu_norm(a) for a in space.words])
    blocks = np.zeros((space.dim, d, d), dtype=complex)
    terms = []
    for k in range(N + 1):
        sl = space.level_slice(k)
        level = np.zeros((d, d), dtype=complex)
        for j in range(sl.start, sl.stop):
            alpha = space.words[j]
            if norms[j] > 0:
                blocks[j] = Qh @ prods[alpha].conj().T / norms[j]
                level += blocks[j].conj().T @ blocks[j]
            elif np.abs(prods[alpha]).max() > 1e-10 * max(1.0, T._scale) ** (k / 2):
                raise PreconditionError(
                    f"weight norm vanishes on {freeword.word_to_str(alpha)} but T_alpha != 0")
        terms.append(float(np.linalg.norm(level, 2)))
    verdict = series_verdict(terms, window, delta)
    nil = T.nilpotent_index()
    regime = "exact" if nil is not None and N >= nil - 1 else "tail-approximate"
    if regime == "exact":
        verdict = "convergent-evidence"
    if check_divergence and verdict == "divergent-evidence":
        raise PreconditionError("level terms do not decay; tuple is outside the weighted domain")
    K = blocks.reshape(space.dim * d, d)
    G = K.conj().T @ K
    G = (G + G.conj().T) / 2
    ev = np.linalg.eigvalsh(G)
    partial = []
    acc = np.zeros((d, d), dtype=complex)
    for k in range(N + 1):
        sl = space.level_slice(k)
        for j in range(sl.start, sl.stop):
            acc = acc + blocks[j].conj().T @ blocks[j]
        partial.append(float(np.linalg.norm(acc, 2)))
    # residual K T_i^* - (W_i^* (x) I) K: only the top level survives
    residuals = []
    top = space.level_slice(N)
    for i in range(1, w.n + 1):
        R = np.zeros((top.stop - top.start, d, d), dtype=complex)
        for j in range(top.start, top.stop):
            gamma = space.words[j]
            if norms[j] > 0:
                R[j - top.start] = Qh @ prods[(i,) + gamma].conj().T / norms[j]
        residuals.append(float(np.linalg.norm(R.reshape(-1, d), 2)) if R.size else 0.0)
    return ModelCertificate(K, residuals, float(ev[0]), float(ev[-1]), N, regime, verdict,
                            terms, partial)


def intertwining_residuals_dense(cert, T, w):
    """Direct ||K T_i^* - (W_i^* (x) I) K|| with materialized shifts (test oracle)."""
    from .fock import build_shift_matrix
    d = T.d
    out = []
    for i in range(1, w.n + 1):
        Wi = build_shift_matrix(w, i, "left", cert.N).toarray()
        big = np.kron(Wi.conj().T, np.eye(d))
        out.append(float(np.linalg.norm(cert.K @ T[i - 1].conj().T - big @ cert.K, 2)))
    return out


def nilpotent_bound(m):
    return math.sqrt(sum(1.0 / (k + 1) ** 2 for k in range(m)))


MAIN_BOUND = math.pi / math.sqrt(6)


def model_bound(T, mode="tuple-norm", Q=None, N=None, w=None):
    """cb bound of the model map and the matching embedding certificate.

    Modes: "rota" (given weights), "tuple-norm" (weights built from the
    level norms of T; "main1" is accepted as an alias) and "nilpotent".
    """
    if mode == "rota":
        if w is None:
            raise PreconditionError("rota mode needs weights")
        cert = build_K_embedding(T, w, Q, N if N is not None else 6)
        return {"mode": mode, "bound": cert.cb_bound, "certificate": cert}
    if T.level_log_norm(1) == -math.inf:
        raise PreconditionError("model bound needs a nonzero tuple")
    m = T.nilpotent_index()
    if mode == "nilpotent":
        if m is None:
            raise PreconditionError("tuple is not nilpotent")
        bound = nilpotent_bound(m)
        N = m if N is None else N
    elif mode in ("tuple-norm", "main1"):
        if m is not None:
            raise PreconditionError("tuple is nilpotent; use mode 'nilpotent'")
        bound = MAIN_BOUND
        N = 6 if N is None else N
    else:
        raise PreconditionError(f"unknown mode {mode!r}")
    from .weights import from_tuple_norms
    cert = build_K_embedding(T, from_tuple_norms(T), Q, N)
    return {"mode": mode, "bound": bound, "certificate": cert}


# --- dyadic regularization of a decaying norm sequence ---

@dataclass
class FPWeights:
    a: list              # a_0 = 1, a_1, ..., a_K
    mu: LengthWeights
    kappa: LengthWeights
    sigma: list          # sigma by level, index 0..K
    quasi_nilpotent_evidence: bool
    checks: dict


def dyadic_exponent(k):
    """m with 2^m <= k < 2^(m+1)."""
    return k.bit_length() - 1


def foias_pearcy_weights(a, n=1, tol=1e-12):
    """Weights mu, kappa and ratios sigma from a submultiplicative sequence.

    ``a`` lists a_1..a_K (a_0 = 1).  kappa at level k is
    a_1^(1/2) * a_(2^m)^(1/2^(m+1)) where 2^m <= k < 2^(m+1), and sigma at
    level k is a_k / (kappa_1 ... kappa_k).
    """
    a = [float(x) for x in a]
    if any(x <= 0 for x in a):
        raise PreconditionError("sequence has a zero term: route nilpotent input to the nilpotent model")
    mu = interpolate_from_sequence(a, n)
    a = [1.0] + a
    K = len(a) - 1

    def kappa_level(k):
        m = dyadic_exponent(k)
        return math.sqrt(a[1]) * a[2 ** m] ** (1.0 / 2 ** (m + 1))

    kap = [1.0] + [kappa_level(k) for k in range(1, K + 1)]
    log_chain = np.cumsum([0.0] + [math.log(x) for x in kap[1:]])
    sigma = [math.exp(math.log(a[k]) - log_chain[k]) if k else 1.0 for k in range(K + 1)]
    kappa = LengthWeights(n, lambda k: kap[k], "dyadic", {"a": a[1:]}, max_level=K)
    checks = {
        "kappa_dominates_root": all(kap[k] >= a[k] ** (1.0 / k) * (1 - tol) for k in range(1, K + 1)),
        "sigma_in_unit_interval": all(0 < s <= 1 + tol for s in sigma),
        "kappa_nonincreasing": all(kap[k + 1] <= kap[k] * (1 + tol) for k in range(1, K)),
    }
    roots = [a[k] ** (1.0 / k) for k in range(1, K + 1)]
    # a_k^(1/k) -> 0 can only be suggested: roots nonincreasing and strictly falling at the end
    tail = roots[-4:]
    decay = (len(roots) >= 4 and all(y <= x for x, y in zip(roots, roots[1:]))
             and all(y < x for x, y in zip(tail, tail[1:])))
    return FPWeights(a, mu, kappa, sigma, decay, checks)


def fp_sequence_from_tuple(T, K):
    """a_k = ||phi_T^k(I)||^(1/4), k = 1..K."""
    return [math.exp(T.level_log_norm(k) / 4) for k in range(1, K + 1)]


def foias_pearcy_certify(fp, N, T=None, n_vectors=8, seed=0):
    """Materialize V (mu-shift), W (kappa-shift) and Y = diag(sigma) on levels <= N."""
    from .fock import shift_matrices
    if N > len(fp.a) - 1:
        raise PreconditionError("truncation exceeds the length of the sequence")
    n = fp.mu.n
    space = TruncatedFock(n, N)
    sig = np.array([fp.sigma[len(word)] for word in space.words])
    V = shift_matrices(fp.mu, N)
    W = shift_matrices(fp.kappa, N)
    import scipy.sparse as sp
    Y = sp.diags(sig)
    residual = 0.0
    for Vi, Wi in zip(V, W):
        R = Y @ Vi.conj().T - Wi.conj().T @ Y
        residual = max(residual, float(np.abs(R.data).max()) if R.nnz else 0.0)
    out = {
        "N": N,
        "Y_norm": float(sig.max()),
        "Y_min": float(sig.min()),
        "Y_injective": bool(sig.min() > 0),
        "intertwining_residual": residual,
        "checks": dict(fp.checks),
        "quasi_nilpotent_evidence": fp.quasi_nilpotent_evidence,
    }
    if T is not None:
        cert = build_K_embedding(T, fp.mu, None, N, check_divergence=False)
        YK = cert.K * np.repeat(sig, T.d)[:, None]
        rng = np.random.default_rng(seed)
        ratios = []
        g0 = []
        for _ in range(n_vectors):
            h = rng.standard_normal(T.d) + 1j * rng.standard_normal(T.d)
            v = YK @ h
            ratios.append(float(np.linalg.norm(v) / np.linalg.norm(h)))
            g0.append(float(abs(np.vdot(h, v[:T.d]) - np.vdot(h, h))))
        out["YK_min_ratio"] = min(ratios)
        out["g0_pairing_defect"] = max(g0)
    return out
