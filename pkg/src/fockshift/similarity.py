"""Diagonal similarities between weighted shifts."""
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import freeword
from .errors import PreconditionError
from .fock import TruncatedFock, build_shift_matrix, level_row_norm
from .weights import TableWeights


@dataclass
class DiagonalIntertwiner:
    words: list
    entries: np.ndarray
    C1: float
    C2: float
    N: int

    @property
    def cond(self):
        return float(self.entries.max() / self.entries.min())

    def matrix(self):
        return sp.diags(self.entries)

    def as_dict(self):
        return {freeword.word_to_str(w): float(d) for w, d in zip(self.words, self.entries)}


def similarity_diagonal(w, w2, N):
    """Diagonal D with D W_i = W'_i D on the truncation.

    d(g0) = 1, d(sigma) = (mu'_sigma / mu_sigma) d(sigma minus first letter)
    and d = 1 on words of zero weight (each such word starts a new chain).
    C1, C2 are the extreme ratios over words of nonzero weight, together
    with the value 1 at the empty word.
    """
    if w.n != w2.n:
        raise PreconditionError("weights have different numbers of generators")
    space = TruncatedFock(w.n, N)
    d = np.ones(space.dim)
    lo = hi = 1.0
    for j, sigma in enumerate(space.words[1:], start=1):
        m, m2 = w.weight(sigma), w2.weight(sigma)
        if (m == 0.0) != (m2 == 0.0):
            raise PreconditionError(
                f"zero patterns differ at {freeword.word_to_str(sigma)}: {m} vs {m2}")
        if m == 0.0:
            continue
        d[j] = m2 / m * d[space.index[sigma[1:]]]
        lo, hi = min(lo, d[j]), max(hi, d[j])
    return DiagonalIntertwiner(space.words, d, lo, hi, N)


def verify_intertwining(D, w, w2, N):
    """max_i ||D W_i - W'_i D|| over columns below the top level."""
    space = TruncatedFock(w.n, N)
    cols = freeword.level_count(w.n, N - 1)
    Dm = sp.diags(np.asarray(D.entries if isinstance(D, DiagonalIntertwiner) else D))
    worst = 0.0
    for i in range(1, w.n + 1):
        A = build_shift_matrix(w, i, "left", N, space)
        B = build_shift_matrix(w2, i, "left", N, space)
        R = (Dm @ A - B @ Dm)[:, :cols]
        # one nonzero per column in distinct rows, so the norm is the max entry
        worst = max(worst, _sparse_norm(R))
    return worst


def _sparse_norm(R):
    R = sp.csc_matrix(R)
    return float(np.abs(R.data).max()) if R.nnz else 0.0


@dataclass
class ContractionResult:
    weights: TableWeights
    gamma: dict
    M: float
    sup_scan: float

    def gamma_extrema_by_level(self):
        out = []
        for k in range(1, self.weights.max_level + 1):
            vals = [g for word, g in self.gamma.items() if len(word) == k]
            out.append({"level": k, "min": min(vals) if vals else None, "max": max(vals) if vals else None})
        return out


def contraction_weights(w, M, N, slack=1e-12):
    """Row-contraction weights v similar to a power bounded shift.

    Words are extended on the left.  For beta = g_i beta' with
    x = mu_beta * Gamma(beta'): if x >= 1 take v_beta = 1 and Gamma(beta) = x,
    otherwise v_beta = x and Gamma(beta) = 1.  Zero weights stay zero.
    Gamma is tracked in log space.
    """
    sup = max(level_row_norm(w, k, N).value for k in range(1, N + 1))
    if sup > M * (1 + slack):
        raise PreconditionError(f"scan finds mu(beta, alpha) = {sup} > M = {M}")
    space = TruncatedFock(w.n, N)
    log_gamma = {(): 0.0}
    table = {}
    for beta in space.words[1:]:
        m = w.weight(beta)
        if m == 0.0:
            table[beta] = 0.0
            continue
        lx = math.log(m) + log_gamma.get(beta[1:], 0.0)
        if lx >= 0.0:
            table[beta] = 1.0
            log_gamma[beta] = lx
        else:
            table[beta] = math.exp(lx)
            log_gamma[beta] = 0.0
    v = TableWeights(w.n, table, N, kind="contraction")
    gamma = {b: math.exp(g) for b, g in log_gamma.items() if b}
    return ContractionResult(v, gamma, M, sup)
