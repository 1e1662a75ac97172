"""Three-valued convergence diagnosis for series of nonnegative terms."""
import math

import numpy as np


def series_verdict(terms, window=5, delta=0.05):
    """Classify sum(terms) from its last ``window`` terms.

    Two or more trailing zeros mean a finite sum.  Ratios below 1 - delta give
    convergent evidence; ratios all >= 1 give divergent evidence.  As a
    fallback, terms that decay like (k+1)^(-p) with p > 1 + delta over the
    window also count as convergent evidence.
    """
    terms = [float(t) for t in terms]
    tail = terms[-window:]
    if len(tail) < 2:
        return "undetermined"
    if terms[-1] == 0.0 and terms[-2] == 0.0:
        return "convergent-evidence"
    if any(t == 0.0 for t in tail):
        return "undetermined"
    ratios = [b / a for a, b in zip(tail, tail[1:])]
    if max(ratios) < 1 - delta:
        return "convergent-evidence"
    if min(ratios) >= 1:
        return "divergent-evidence"
    start = len(terms) - len(tail)
    if all(r < 1 for r in ratios):
        ks = np.log(np.arange(start + 1, len(terms) + 1, dtype=float))
        slope = np.polyfit(ks, np.log(tail), 1)[0]
        if slope < -(1 + delta) and math.isfinite(slope):
            return "convergent-evidence"
    return "undetermined"
