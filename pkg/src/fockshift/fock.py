"""Truncated Fock space and weighted shifts as sparse matrices.

The truncation keeps basis vectors e_alpha with |alpha| <= N, ordered as in
``freeword.enumerate_words``.  Shifts act by compression, so the left shift
kills the top level.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import freeword
from .convergence import series_verdict
from .errors import PreconditionError
from .weights import is_injective


class TruncatedFock:
    def __init__(self, n, N):
        self.n = n
        self.N = N
        self.dim = freeword.check_size(n, N)
        self.words = freeword.enumerate_words(n, N)
        self.index = {w: j for j, w in enumerate(self.words)}

    def level_slice(self, k):
        lo = freeword.level_count(self.n, k - 1) if k else 0
        return slice(lo, freeword.level_count(self.n, k))

    def basis(self, word):
        v = np.zeros(self.dim, dtype=complex)
        v[self.index[tuple(word)]] = 1.0
        return v


class ShiftOperator:
    """One generator of the left (W_i) or right (Lambda_i) weighted shift."""

    def __init__(self, w, i, N, side="left"):
        if not 1 <= i <= w.n:
            raise ValueError(f"generator {i} out of range 1..{w.n}")
        if side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        self.weights = w
        self.i = i
        self.N = N
        self.side = side
        self.space = TruncatedFock(w.n, N)
        self.matrix = build_shift_matrix(w, i, side, N, space=self.space)

    def apply(self, v, adjoint=False):
        return apply_shift(self, v, adjoint)


def apply_shift(op, v, adjoint=False):
    v = np.asarray(v)
    if v.shape[0] != op.space.dim:
        raise ValueError(f"vector has length {v.shape[0]}, expected {op.space.dim}")
    if adjoint:
        return op.matrix.conj().T @ v
    return op.matrix @ v


def build_shift_matrix(w, i, side, N, space=None):
    """Sparse matrix of W_i (side='left') or Lambda_i (side='right') on levels <= N."""
    if not 1 <= i <= w.n:
        raise ValueError(f"generator {i} out of range 1..{w.n}")
    space = space or TruncatedFock(w.n, N)
    rows, cols, vals = [], [], []
    for col, alpha in enumerate(space.words):
        if len(alpha) == N:
            break
        if side == "left":
            target = (i,) + alpha
            value = w.weight(target)
        else:
            target = alpha + (i,)
            value = w.mu_right(alpha, i)
        rows.append(space.index[target])
        cols.append(col)
        vals.append(value)
    return sp.csr_matrix((np.array(vals, dtype=float), (rows, cols)), shape=(space.dim, space.dim))


def shift_matrices(w, N, side="left"):
    space = TruncatedFock(w.n, N)
    return [build_shift_matrix(w, i, side, N, space=space) for i in range(1, w.n + 1)]


def word_operator(mats, word):
    """W_beta = W_{b1} ... W_{bp} for a word beta."""
    dim = mats[0].shape[0]
    out = sp.identity(dim, format="csr")
    for a in reversed(word):
        out = mats[a - 1] @ out
    return out


def to_triplets(mat):
    """Coordinate triplet text: one 'row col re im' line per stored entry."""
    coo = sp.coo_matrix(mat)
    order = np.lexsort((coo.col, coo.row))
    lines = []
    for j in order:
        z = complex(coo.data[j])
        lines.append(f"{coo.row[j]} {coo.col[j]} {z.real:.17g} {z.imag:.17g}")
    return "\n".join(lines) + ("\n" if lines else "")


def from_triplets(text, shape):
    rows, cols, vals = [], [], []
    for line in text.splitlines():
        if line.strip():
            r, c, re, im = line.split()
            rows.append(int(r))
            cols.append(int(c))
            vals.append(complex(float(re), float(im)))
    return sp.csr_matrix((vals, (rows, cols)), shape=shape)


@dataclass
class LevelNorm:
    k: int
    N: int
    value: float
    beta: tuple
    alpha: tuple
    mode: str


def level_row_norm(w, k, N, closed_form=False, threads=1):
    """sup of mu(beta, alpha) over |beta| = k and |alpha| <= N - k.

    This is the square root of the norm of the (diagonal) operator
    sum_{|beta|=k} W_beta W_beta^* on the truncation.  With
    ``closed_form=True`` a family's exact supremum over all alpha is
    returned instead, when known.
    """
    if k > N:
        raise PreconditionError(f"level k={k} exceeds truncation N={N}")
    if closed_form:
        value = w.level_sup(k)
        if value is None:
            raise PreconditionError(f"no closed form for weights of kind {w.kind!r}")
        return LevelNorm(k, N, value, (1,) * k, (), "closed-form")
    if w.length_only:
        best, arg = -1.0, 0
        for j in range(N - k + 1):
            value = w.level_product(k, j)
            if value > best:
                best, arg = value, j
        return LevelNorm(k, N, best, (1,) * k, (1,) * arg, "scan")
    freeword.check_size(w.n, N)

    def scan(first):
        best, pair = -1.0, None
        for j in range(N - k + 1):
            alphas = [()] if j == 0 else freeword.words_of_length(w.n, j)
            for rest in freeword.words_of_length(w.n, k - 1) if k else [()]:
                beta = ((first,) + rest) if k else ()
                for alpha in alphas:
                    value = w.mu_product(beta, alpha)
                    if value > best:
                        best, pair = value, (beta, alpha)
        return best, pair

    firsts = list(range(1, w.n + 1)) if k else [None]
    if threads > 1 and len(firsts) > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(scan, firsts))
    else:
        results = [scan(f) for f in firsts]
    best, pair = results[0]
    for value, p in results[1:]:
        if value > best:
            best, pair = value, p
    return LevelNorm(k, N, best, pair[0], pair[1], "scan")


def level_operator(w, k, N):
    """Dense sum_{|beta|=k} W_beta W_beta^* (test oracle)."""
    mats = shift_matrices(w, N)
    total = None
    for beta in freeword.words_of_length(w.n, k):
        Wb = word_operator(mats, beta)
        term = Wb @ Wb.conj().T
        total = term if total is None else total + term
    return total.toarray()


@dataclass
class RadiusEstimate:
    estimate: float
    sequence: list
    window: int
    exact: float | None = None
    notes: list = field(default_factory=list)


def joint_radius_estimate(w, N, window=3):
    """Estimate of the joint spectral radius from level_row_norm(k)^(1/k).

    The reported estimate is the max over the last ``window`` levels.  It is
    not a certified bound in either direction; ``exact`` carries the known
    limit for closed-form families.
    """
    if N < 2:
        raise PreconditionError("need N >= 2")
    seq = []
    for k in range(1, N + 1):
        seq.append(level_row_norm(w, k, N).value ** (1.0 / k))
    est = max(seq[-window:])
    return RadiusEstimate(est, seq, window, w.radius())


def classify(w, N, M=None, p=2.0):
    """Structural flags for the truncated shift.

    Returns a dict with injectivity, row-contraction, power-boundedness
    within the scan (w.r.t. M), compact-class evidence per generator and
    the irreducibility defect diagonal.
    """
    levels = [level_row_norm(w, k, N).value for k in range(1, N + 1)]
    if w.length_only:
        mus = [w.level_weight(k) for k in range(1, N + 1)]
    else:
        freeword.check_size(w.n, N)
        mus = [max(w.weight(b) for b in freeword.words_of_length(w.n, k)) for k in range(1, N + 1)]
    sup_level = max(levels)
    report = {
        "N": N,
        "injective": is_injective(w, N),
        "row_contraction": max(mus) <= 1.0,
        "level_norms": levels,
        "sup_level_norm": sup_level,
        "M": M,
        "power_bounded_within_scan": None if M is None else sup_level <= M,
        "generators": [],
    }
    for i in range(1, w.n + 1):
        decay, lp, defect = [], [], []
        for j in range(N):
            alphas = [()] if j == 0 else freeword.words_of_length(w.n, j)
            vals = [w.weight((i,) + a) for a in alphas]
            decay.append(max(vals))
            lp.append(sum(v ** p for v in vals))
            defect.append(max(abs(w.weight((i,) + a) ** 2 - (w.weight(a) ** 2 if a else 0.0))
                              for a in alphas))
        partial = list(np.cumsum(lp))
        summable = series_verdict(lp)
        report["generators"].append({
            "generator": i,
            "weight_max_by_level": decay,
            "weights_decay": decay[-1] < decay[0] and all(b <= a for a, b in zip(decay, decay[1:])),
            "lp_exponent": p,
            "lp_partial_sums": partial,
            "lp_verdict": summable,
            "compact_evidence": decay[-1] < decay[0] and summable == "convergent-evidence",
            "defect_max_by_level": defect,
            "defect_decay": defect[-1] < max(defect) if len(defect) > 1 else False,
        })
    return report


def reduce_decompose(w, N):
    """Components of the graph with edges gamma -- g_i gamma when mu_{g_i gamma} != 0.

    Each component spans a reducing subspace of the truncated tuple.  A
    component is "truncated-type" when one of its words has a left
    extension inside the scan with zero weight, otherwise "injective-type".
    """
    space = TruncatedFock(w.n, N)
    parent = list(range(space.dim))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    truncated = set()
    for gamma in space.words:
        if len(gamma) == N:
            continue
        for i in range(1, w.n + 1):
            target = (i,) + gamma
            if w.weight(target) != 0.0:
                a, b = find(space.index[gamma]), find(space.index[target])
                if a != b:
                    parent[max(a, b)] = min(a, b)
            else:
                truncated.add(gamma)
    groups = {}
    for j, word in enumerate(space.words):
        groups.setdefault(find(j), []).append(word)
    comps = []
    for root in sorted(groups):
        words = groups[root]
        kind = "truncated-type" if any(g in truncated for g in words) else "injective-type"
        comps.append({"words": words, "type": kind})
    return comps
