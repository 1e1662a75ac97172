"""Formal power series in noncommuting indeterminates and their evaluation.

A ``Symbol`` is a finitely supported map word -> complex coefficient.  It
can be evaluated at points of C^n, at matrix tuples (directly or through
Fejer means) and at the truncated weighted shift.
"""
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import freeword
from .convergence import series_verdict
from .errors import PreconditionError
from .fock import TruncatedFock, shift_matrices
from .model import OperatorTuple, spectral_radius

_VERDICT = {"convergent-evidence": "member", "divergent-evidence": "non-member",
            "undetermined": "undetermined"}


class Symbol:
    def __init__(self, coeffs, n, series=False):
        self.n = n
        self.coeffs = {}
        for word, c in coeffs.items():
            word = freeword.parse_word(word) if isinstance(word, str) else tuple(word)
            freeword._check_letters(word, n)
            if c != 0:
                self.coeffs[word] = complex(c)
        self.series = series

    @classmethod
    def from_function(cls, fn, n, max_level):
        """Truncation of an infinite series c_alpha = fn(alpha) to levels <= max_level."""
        coeffs = {w: fn(w) for w in freeword.enumerate_words(n, max_level)}
        return cls(coeffs, n, series=True)

    @classmethod
    def from_json(cls, spec, n):
        coeffs = {}
        for key, c in spec["coeffs"].items():
            coeffs[key] = complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
        return cls(coeffs, n, bool(spec.get("series", False)))

    def to_json(self):
        return {"coeffs": {freeword.word_to_str(w): [c.real, c.imag] for w, c in self._sorted()}}

    def _sorted(self):
        return sorted(self.coeffs.items(), key=lambda kv: freeword.graded_index(kv[0], self.n))

    @property
    def degree(self):
        if self.series:
            return math.inf
        return max((len(w) for w in self.coeffs), default=0)

    @property
    def max_level(self):
        return max((len(w) for w in self.coeffs), default=0)

    def __getitem__(self, word):
        return self.coeffs.get(tuple(word), 0.0)

    def __add__(self, other):
        out = dict(self.coeffs)
        for w, c in other.coeffs.items():
            out[w] = out.get(w, 0) + c
        return Symbol(out, self.n, self.series or other.series)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        return Symbol({w: c * v for w, v in self.coeffs.items()}, self.n, self.series)

    def __mul__(self, other):
        if not isinstance(other, Symbol):
            return self.scale(other)
        out = {}
        for u, cu in self.coeffs.items():
            for v, cv in other.coeffs.items():
                out[u + v] = out.get(u + v, 0) + cu * cv
        return Symbol(out, self.n, self.series or other.series)

    __rmul__ = scale

    def dilate(self, r):
        """phi(r Z): coefficients scaled by r^|alpha|."""
        return Symbol({w: c * r ** len(w) for w, c in self.coeffs.items()}, self.n, self.series)

    def level_energy(self, k):
        return math.sqrt(sum(abs(c) ** 2 for w, c in self.coeffs.items() if len(w) == k))

    def hol0_estimate(self, window=3):
        """max over the last window levels of (sum_{|alpha|=k} |c_alpha|^2)^(1/2k)."""
        top = self.max_level
        if top == 0:
            return 0.0
        vals = [self.level_energy(k) ** (1.0 / k) for k in range(max(1, top - window + 1), top + 1)]
        return max(vals)

    def evaluate(self, lam):
        lam = np.asarray(lam, dtype=complex)
        total = 0j
        for w, c in self.coeffs.items():
            total += c * np.prod([lam[a - 1] for a in w]) if w else c
        return complex(total)

    def fock_vector(self, w, N):
        """Coordinates of the series in the orthonormal basis: c_alpha mu(alpha, g0)."""
        space = TruncatedFock(self.n, N)
        v = np.zeros(space.dim, dtype=complex)
        for word, c in self.coeffs.items():
            if len(word) > N:
                raise PreconditionError("symbol degree exceeds the truncation")
            v[space.index[word]] = c * w.mu_norm(word)
        return v

    def weighted_norm(self, w):
        return math.sqrt(sum(abs(c) ** 2 * w.mu_norm(word) ** 2 for word, c in self.coeffs.items()))


def constant(c, n):
    return Symbol({(): c}, n)


def monomial(word, n, c=1.0):
    return Symbol({tuple(word): c}, n)


def random_polynomial(rng, n, degree, density=1.0, constant_term=True):
    coeffs = {}
    for word in freeword.enumerate_words(n, degree):
        if not word and not constant_term:
            continue
        if rng.random() <= density:
            coeffs[word] = complex(rng.standard_normal(), rng.standard_normal())
    return Symbol(coeffs, n)


# --- point evaluations ---

def level_sums(w, lam, max_level):
    """t_k = sum_{|alpha|=k} |lambda_alpha|^2 / mu(alpha, g0)^2 for k = 0..max_level.

    Length-only weights use t_k = ||lambda||^(2k) / mu_k^2 (computed in log
    space); otherwise the sum is grouped by letter counts through omega.
    """
    lam = np.asarray(lam, dtype=complex)
    r2 = float(np.sum(np.abs(lam) ** 2))
    out = []
    if w.length_only:
        for k in range(max_level + 1):
            nk = w.level_norm(k)
            if r2 == 0.0:
                out.append(1.0 if k == 0 else 0.0)
            elif nk == 0.0:
                raise PreconditionError("weights are not injective")
            else:
                out.append(math.exp(k * math.log(r2) - 2 * math.log(nk)))
        return out
    from .symfock import omega
    mods = np.abs(lam) ** 2
    for k in range(max_level + 1):
        total = 0.0
        for ki in freeword.multi_indices(w.n, k):
            if sum(ki) == k:
                total += omega(w, ki) * float(np.prod(mods ** np.array(ki)))
        out.append(total)
    return out


def level_sums_wordwise(w, lam, max_level):
    """Same as level_sums through an explicit word sum (oracle)."""
    lam = np.asarray(lam, dtype=complex)
    out = []
    for k in range(max_level + 1):
        words = [()] if k == 0 else freeword.words_of_length(w.n, k)
        out.append(sum(abs(np.prod([lam[a - 1] for a in word])) ** 2 / w.mu_norm(word) ** 2
                       for word in words))
    return out


@dataclass
class PointEvalResult:
    lam: list
    verdict: str
    method: str
    partial_sums: list
    terms: list
    diagnostics: dict = field(default_factory=dict)


def point_membership(w, lam, max_level=60, window=5, delta=0.05):
    """Is sum_alpha |lambda_alpha|^2 / mu(alpha, g0)^2 finite?"""
    lam = np.asarray(lam, dtype=complex)
    if lam.shape != (w.n,):
        raise ValueError(f"point must have {w.n} coordinates")
    radius = float(np.linalg.norm(lam))
    if not w.length_only:
        max_level = min(max_level, 8)
    terms = level_sums(w, lam, max_level)
    partial = list(np.cumsum(terms))
    closed = w.domain_verdict(radius)
    if closed is not None:
        verdict, method = closed, "closed-form"
    else:
        verdict, method = _VERDICT[series_verdict(terms, window, delta)], "ratio-window"
    return PointEvalResult([[z.real, z.imag] for z in lam], verdict, method, partial, terms,
                           {"window": window, "delta": delta, "max_level": max_level,
                            "norm": radius})


def kernel_vector(w, lam, N, allow_nonmember=False):
    """Truncated z_lambda = sum_{|alpha|<=N} conj(lambda_alpha)/mu(alpha, g0) e_alpha."""
    lam = np.asarray(lam, dtype=complex)
    if not allow_nonmember:
        res = point_membership(w, lam)
        if res.verdict != "member":
            raise PreconditionError(f"point is not in the evaluation domain ({res.verdict})")
    space = TruncatedFock(w.n, N)
    z = np.zeros(space.dim, dtype=complex)
    z[0] = 1.0
    conj = np.conj(lam)
    for j, word in enumerate(space.words[1:], start=1):
        # lambda-bar_{g_i gamma} = conj(lambda_i) lambda-bar_gamma; mu-norm likewise
        parent = space.index[word[1:]]
        m = w.weight(word)
        if m == 0.0:
            raise PreconditionError("weights are not injective")
        z[j] = conj[word[0] - 1] * z[parent] / m
    return z


def eigen_residuals(w, z, lam, N):
    """||(W_i^* - conj(lambda_i)) z|| restricted below the top level, and the top-level defect."""
    mats = shift_matrices(w, N)
    space = TruncatedFock(w.n, N)
    below = freeword.level_count(w.n, N - 1)
    out = []
    for i, Wi in enumerate(mats):
        r = Wi.conj().T @ z - np.conj(lam[i]) * z
        out.append({"below_top": float(np.linalg.norm(r[:below])),
                    "top_defect": float(np.linalg.norm(r[below:]))})
    return out


def evaluate_at_point(f, w, lam, N=None, tol=1e-10):
    """f(lambda) for a polynomial symbol or a Fock vector (with its truncation N)."""
    lam = np.asarray(lam, dtype=complex)
    if isinstance(f, Symbol):
        if f.series and point_membership(w, lam).verdict != "member":
            raise PreconditionError("series evaluation needs a member point")
        N = f.max_level if N is None else N
        value = f.evaluate(lam)
        vec = f.fock_vector(w, N)
        z = kernel_vector(w, lam, N, allow_nonmember=True)
        pairing = complex(np.vdot(z, vec))
        if abs(pairing - value) > tol * max(1.0, abs(value)):
            raise ArithmeticError(f"pairing {pairing} disagrees with series value {value}")
        # only levels <= deg f pair with f, so the truncated kernel norm suffices
        bound = f.weighted_norm(w) * float(np.linalg.norm(z))
        return {"value": value, "pairing": pairing, "cs_bound": bound,
                "cs_ok": abs(value) <= bound * (1 + 1e-12) + 1e-300}
    vec = np.asarray(f, dtype=complex)
    if N is None:
        raise ValueError("Fock vectors need their truncation level N")
    z = kernel_vector(w, lam, N)
    value = complex(np.vdot(z, vec))
    return {"value": value, "pairing": value, "cs_bound": float(np.linalg.norm(vec) * np.linalg.norm(z)),
            "cs_ok": True}


def tuple_domain_membership(w, T, max_level=40, window=5, delta=0.05):
    """Is sum_alpha T_alpha T_alpha^* / mu(alpha, g0)^2 convergent?"""
    terms, lam_max = [], []
    acc = np.zeros((T.d, T.d), dtype=complex)
    if w.length_only:
        for k in range(max_level + 1):
            lg = T.level_log_norm(k)
            nk = w.level_norm(k)
            if lg == -math.inf:
                term = np.zeros_like(acc)
                tn = 0.0
            elif nk == 0.0:
                raise PreconditionError("weight norm vanishes on a level where the tuple does not")
            else:
                scale = math.exp(lg - 2 * math.log(nk))
                term = T.normalized_level(k) * scale
                tn = scale
            acc = acc + term
            terms.append(tn)
            lam_max.append(float(np.linalg.eigvalsh((acc + acc.conj().T) / 2)[-1]))
    else:
        max_level = min(max_level, w.max_level if w.max_level is not None else 8)
        freeword.check_size(w.n, max_level)
        prods = T.word_matrices(max_level)
        for k in range(max_level + 1):
            words = [()] if k == 0 else freeword.words_of_length(w.n, k)
            term = sum(prods[a] @ prods[a].conj().T / w.mu_norm(a) ** 2 for a in words)
            acc = acc + term
            terms.append(float(np.linalg.norm(term, 2)))
            lam_max.append(float(np.linalg.eigvalsh((acc + acc.conj().T) / 2)[-1]))
    return {"verdict": series_verdict(terms, window, delta), "terms": terms,
            "lambda_max": lam_max, "partial_sum": acc, "max_level": max_level}


# --- functional calculus ---

def cesaro_evaluate(phi, T, N=None, mode="fejer", tol=1e-14):
    """phi(T) by Fejer means, exact polynomial sum, or level-block series."""
    if not isinstance(T, OperatorTuple):
        T = OperatorTuple(T)
    if phi.n != T.n:
        raise PreconditionError("symbol and tuple have different n")
    d = T.d
    if mode == "exact-poly":
        top = phi.max_level
        factor = lambda k: 1.0
    elif mode == "fejer":
        if N is None:
            raise ValueError("fejer mode needs N")
        top = min(N, phi.max_level)
        factor = lambda k: 1.0 - k / (N + 1.0)
    elif mode == "hol0-series":
        return _hol0_series(phi, T, tol)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    prods = _word_products(T, phi, top)
    out = np.zeros((d, d), dtype=complex)
    for word, c in phi.coeffs.items():
        if len(word) <= top:
            out += factor(len(word)) * c * prods[word]
    return out


def _word_products(T, phi, top):
    needed = {w for w in phi.coeffs if len(w) <= top}
    closure = set()
    for w in needed:
        for j in range(len(w) + 1):
            closure.add(w[j:])
    prods = {(): np.eye(T.d, dtype=complex)}
    for w in sorted(closure, key=len):
        if w:
            prods[w] = T[w[0] - 1] @ prods[w[1:]]
    return prods


def _hol0_series(phi, T, tol):
    nil = T.nilpotent_index()
    prods = _word_products(T, phi, phi.max_level)
    out = np.zeros((T.d, T.d), dtype=complex)
    blocks = []
    for k in range(phi.max_level + 1):
        block = np.zeros_like(out)
        for word, c in phi.coeffs.items():
            if len(word) == k:
                block += c * prods[word]
        out += block
        bn = float(np.linalg.norm(block, 2))
        blocks.append(bn)
        if nil is not None and k >= nil - 1:
            return out
        if k > 0 and bn <= tol * max(1.0, float(np.linalg.norm(out, 2))):
            return out
    raise PreconditionError("level blocks do not decay within the symbol's levels")


def shift_evaluate(phi, w, N):
    """phi applied to the truncated weighted shift, as a dense matrix."""
    mats = shift_matrices(w, N)
    dim = mats[0].shape[0]
    out = sp.csr_matrix((dim, dim), dtype=complex)
    cache = {(): sp.identity(dim, format="csr", dtype=complex)}
    for word in sorted(phi.coeffs, key=len):
        if len(word) > N:
            continue
        for j in range(len(word) - 1, -1, -1):
            suffix = word[j:]
            if suffix not in cache:
                cache[suffix] = mats[suffix[0] - 1] @ cache[suffix[1:]]
        out = out + phi.coeffs[word] * cache[word]
    return out.toarray()


def calculus_certificates(phi, psi, T, w=None, N=None):
    """Homomorphism residual and spectral radii for polynomial symbols."""
    A = cesaro_evaluate(phi, T, mode="exact-poly")
    B = cesaro_evaluate(psi, T, mode="exact-poly")
    AB = cesaro_evaluate(phi * psi, T, mode="exact-poly")
    scale = max(1.0, float(np.linalg.norm(A, 2) * np.linalg.norm(B, 2)))
    out = {
        "homomorphism_residual": float(np.linalg.norm(AB - A @ B, 2)) / scale,
        "r_phi_T": spectral_radius(A),
    }
    if w is not None and N is not None:
        out["r_phi_W_truncation"] = spectral_radius(shift_evaluate(phi, w, N))
        out["truncation_level"] = N
    return out


def gleason_split(phi):
    """Phi_i with (Phi_i)_gamma = c_{g_i gamma}, so phi = sum_i Z_i Phi_i."""
    if phi[()] != 0:
        raise PreconditionError("symbol has a nonzero constant term")
    parts = [dict() for _ in range(phi.n)]
    for word, c in phi.coeffs.items():
        parts[word[0] - 1][word[1:]] = c
    return [Symbol(p, phi.n, phi.series) for p in parts]


def joint_spectral_radius(X, seed=0, tol=1e-9, kmax=60):
    """Joint spectral radius of a matrix tuple.

    For a commuting tuple, a random linear combination is Schur-triangularized;
    if that triangularizes every member, the radius is the largest Euclidean
    norm of the joint eigenvalues read off the diagonals.  Otherwise fall
    back to the level-norm root at kmax, which overestimates.
    """
    from scipy.linalg import schur
    if not isinstance(X, OperatorTuple):
        X = OperatorTuple(X)
    if X.is_commuting(1e-10 * max(1.0, X._scale)):
        rng = np.random.default_rng(seed)
        c = rng.standard_normal(X.n) + 1j * rng.standard_normal(X.n)
        _, Qm = schur(np.tensordot(c, X.matrices, 1), output="complex")
        tri = [Qm.conj().T @ A @ Qm for A in X.matrices]
        lower = max(float(np.abs(np.tril(t, -1)).max()) if X.d > 1 else 0.0 for t in tri)
        if lower <= tol * max(1.0, math.sqrt(X._scale)):
            diag = np.array([np.diag(t) for t in tri])
            return float(np.max(np.linalg.norm(diag, axis=0))), "joint-eigenvalues"
    lg = X.level_log_norm(kmax)
    return (0.0 if lg == -math.inf else math.exp(lg / (2 * kmax))), "level-root"


def schwarz_check(phi, X, w, N):
    """Compare r(phi_s(X)) with r(X) where phi_s = phi / ||phi(W)|| on the truncation."""
    if phi[()] != 0:
        raise PreconditionError("symbol must vanish at the origin")
    if not isinstance(X, OperatorTuple):
        X = OperatorTuple(X)
    scale = float(np.linalg.norm(shift_evaluate(phi, w, N), 2))
    if scale == 0.0:
        raise PreconditionError("symbol vanishes on the truncated shift")
    scaled = phi.scale(1.0 / scale)
    r_phi = spectral_radius(cesaro_evaluate(scaled, X, mode="exact-poly"))
    r_x, method = joint_spectral_radius(X)
    return {"r_phi_X": r_phi, "r_X": r_x, "r_method": method, "scale": scale,
            "truncation_level": N, "holds": r_phi <= r_x + 1e-8}
