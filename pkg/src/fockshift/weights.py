"""Weight sequences for weighted left multi-shifts.

A weight sequence assigns mu_beta >= 0 to every nonempty word beta, with
mu of the empty word fixed to 1.  Everything else is derived from the
suffix-chain products

    mu(beta, alpha) = mu_{b1 b2 .. bp alpha} * mu_{b2 .. bp alpha} * ... * mu_{bp alpha}.

Two concrete classes cover the cases we need: ``LengthWeights`` for
weights depending only on |beta| (all closed-form families) and
``TableWeights`` for explicit tables up to a level cap.
"""
import math

import numpy as np
from scipy.special import gammaln

from . import freeword
from .errors import PreconditionError


class WeightSequence:
    n = 1
    kind = "abstract"
    params: dict = {}
    length_only = False
    max_level = None

    def weight(self, word):
        raise NotImplementedError

    def mu_product(self, beta, alpha=()):
        beta, alpha = tuple(beta), tuple(alpha)
        word = beta + alpha
        out = 1.0
        for j in range(len(beta)):
            out *= self.weight(word[j:])
            if out == 0.0:
                return 0.0
        return out

    def mu_norm(self, word):
        return self.mu_product(word, ())

    def b(self, word):
        return 1.0 / self.mu_norm(word) ** 2

    def mu_right(self, alpha, i):
        """Right-shift weight for alpha -> alpha g_i."""
        den = self.mu_norm(alpha)
        if den == 0.0:
            raise PreconditionError("right weights need a nonzero norm for " + freeword.word_to_str(alpha))
        return self.mu_norm(tuple(alpha) + (i,)) / den

    # closed-form hooks; None means "not known"
    def level_sup(self, k):
        return None

    def radius(self):
        return None

    def domain_verdict(self, radius):
        return None

    def describe(self):
        out = {"n": self.n, "kind": self.kind}
        out.update(self.params)
        return out

    def __repr__(self):
        return f"<{type(self).__name__} {self.describe()}>"


class LengthWeights(WeightSequence):
    """Weights depending only on the length of the word.

    ``level_fn(k)`` gives mu_beta for |beta| = k >= 1.  ``norm_fn(k)``, if
    supplied, gives mu(beta, g0) for |beta| = k in closed form; products
    are then evaluated as a single ratio instead of a running product.
    """
    length_only = True

    def __init__(self, n, level_fn, kind="length", params=None, norm_fn=None,
                 max_level=None, sup_fn=None, radius=None, verdict_fn=None):
        if n < 1:
            raise ValueError("n must be positive")
        self.n = n
        self.kind = kind
        self.params = dict(params or {})
        self._level = level_fn
        self._norm = norm_fn
        self.max_level = max_level
        self._sup = sup_fn
        self._radius = radius
        self._verdict = verdict_fn

    def level_weight(self, k):
        if k == 0:
            return 1.0
        if self.max_level is not None and k > self.max_level:
            raise PreconditionError(f"weights tabulated only up to level {self.max_level}")
        return float(self._level(k))

    def weight(self, word):
        return self.level_weight(len(word))

    def level_norm(self, k):
        """mu(beta, g0) for any |beta| = k."""
        if self._norm is not None:
            if self.max_level is not None and k > self.max_level:
                raise PreconditionError(f"weights tabulated only up to level {self.max_level}")
            return float(self._norm(k))
        return self.level_product(k, 0)

    def level_product(self, k, j):
        """mu(beta, alpha) with |beta| = k, |alpha| = j."""
        if k == 0:
            return 1.0
        if self._norm is not None:
            den = self.level_norm(j)
            if den > 0.0:
                return self.level_norm(j + k) / den
        out = 1.0
        for l in range(j + 1, j + k + 1):
            out *= self.level_weight(l)
        return out

    def mu_product(self, beta, alpha=()):
        return self.level_product(len(beta), len(alpha))

    def level_sup(self, k):
        return None if self._sup is None else float(self._sup(k))

    def radius(self):
        return self._radius

    def domain_verdict(self, radius):
        return None if self._verdict is None else self._verdict(radius)


class TableWeights(WeightSequence):
    """Explicit weights for every word of length 1..max_level."""

    def __init__(self, n, table, max_level=None, kind="tabulated", params=None, strict=False):
        self.n = n
        self.kind = kind
        self.params = dict(params or {})
        self.table = {}
        for word, value in table.items():
            word = freeword.parse_word(word) if isinstance(word, str) else tuple(word)
            if not word:
                continue
            freeword._check_letters(word, n)
            value = float(value)
            if value < 0 or not math.isfinite(value):
                raise ValueError(f"weight for {freeword.word_to_str(word)} must be finite and >= 0")
            self.table[word] = value
        if max_level is None:
            max_level = max((len(w) for w in self.table), default=0)
        self.max_level = max_level
        for k in range(1, max_level + 1):
            for word in freeword.words_of_length(n, k):
                if word not in self.table:
                    raise ValueError(f"table misses word {freeword.word_to_str(word)}")
        self.truncation_valid = is_truncation_valid(self)
        if strict and not self.truncation_valid:
            raise PreconditionError("nonzero weight on a word with a zero suffix")

    def weight(self, word):
        word = tuple(word)
        if not word:
            return 1.0
        if len(word) > self.max_level:
            raise PreconditionError(f"weights tabulated only up to level {self.max_level}")
        return self.table[word]

    def describe(self):
        out = super().describe()
        out["max_level"] = self.max_level
        return out


def is_truncation_valid(w, max_len=None):
    """Nonzero support must be closed under taking suffixes."""
    max_len = w.max_level if max_len is None else max_len
    for k in range(2, max_len + 1):
        for word in freeword.words_of_length(w.n, k):
            if w.weight(word) != 0.0:
                if any(w.weight(word[j:]) == 0.0 for j in range(1, k)):
                    return False
    return True


def is_injective(w, max_len):
    if w.length_only:
        return all(w.level_weight(k) > 0 for k in range(1, max_len + 1))
    return all(w.weight(word) > 0 for word in freeword.enumerate_words(w.n, max_len)[1:])


# --- families ---

def _ball_verdict(radius, boundary_member, rho=1.0):
    if radius < rho:
        return "member"
    if radius == rho and boundary_member:
        return "member"
    return "non-member"


def unit(n):
    return LengthWeights(n, lambda k: 1.0, "unit", norm_fn=lambda k: 1.0,
                         sup_fn=lambda k: 1.0, radius=1.0,
                         verdict_fn=lambda r: _ball_verdict(r, False))


def constant(n, rho):
    rho = float(rho)
    if rho <= 0:
        raise ValueError("constant weight must be positive")
    return LengthWeights(n, lambda k: rho, "constant", {"rho": rho},
                         norm_fn=lambda k: rho ** k, sup_fn=lambda k: rho ** k,
                         radius=rho, verdict_fn=lambda r: _ball_verdict(r, False, rho))


def besov(n, s):
    s = float(s)
    if s <= 0:
        raise ValueError("besov family needs s > 0")

    def norm(k):
        # 1/sqrt(binom(s+k-1, k))
        return math.exp(-0.5 * (gammaln(s + k) - gammaln(s) - gammaln(k + 1)))

    return LengthWeights(n, lambda k: math.sqrt(k / (s + k - 1)), "besov", {"s": s},
                         norm_fn=norm, sup_fn=(lambda k: 1.0) if s >= 1 else norm,
                         radius=1.0, verdict_fn=lambda r: _ball_verdict(r, False))


def dirichlet(n, s):
    s = float(s)

    def norm(k):
        return (k + 1.0) ** (-s / 2)

    return LengthWeights(n, lambda k: (k / (k + 1.0)) ** (s / 2), "dirichlet", {"s": s},
                         norm_fn=norm, sup_fn=(lambda k: 1.0) if s >= 0 else norm,
                         radius=1.0, verdict_fn=lambda r: _ball_verdict(r, s < -1))


def ratio(n, p=1.0):
    """mu_beta = ((|beta|+1)/|beta|)^p, so mu(beta, g0) = (|beta|+1)^p."""
    p = float(p)

    def norm(k):
        return (k + 1.0) ** p

    return LengthWeights(n, lambda k: ((k + 1.0) / k) ** p, "ratio", {"p": p},
                         norm_fn=norm, sup_fn=norm if p >= 0 else (lambda k: 1.0),
                         radius=1.0, verdict_fn=lambda r: _ball_verdict(r, 2 * p > 1))


def inverse(n, p=1.0):
    """mu_beta = (1/(|beta|+1))^p, so mu(beta, g0) = ((|beta|+1)!)^(-p)."""
    p = float(p)
    if p <= 0:
        raise ValueError("inverse family needs p > 0")

    def norm(k):
        return math.exp(-p * gammaln(k + 2))

    return LengthWeights(n, lambda k: (1.0 / (k + 1)) ** p, "inverse", {"p": p},
                         norm_fn=norm, sup_fn=norm, radius=0.0,
                         verdict_fn=lambda r: "member" if r == 0 else "non-member")


def series(n, coeffs, s=1.0, max_level=4):
    """Weights whose b_alpha are the coefficients of 1 + sum_k C(s+k-1,k) phi^k.

    ``coeffs`` maps nonempty words to d_alpha >= 0; every generator needs a
    positive coefficient.
    """
    s = float(s)
    if s < 1:
        raise PreconditionError("series family is only defined for s >= 1")
    phi = {}
    for word, value in coeffs.items():
        word = freeword.parse_word(word) if isinstance(word, str) else tuple(word)
        if not word:
            raise ValueError("phi must have zero constant term")
        freeword._check_letters(word, n)
        if value < 0:
            raise ValueError("series coefficients must be nonnegative")
        if len(word) <= max_level and value != 0:
            phi[word] = float(value)
    for i in range(1, n + 1):
        if phi.get((i,), 0.0) <= 0:
            raise PreconditionError(f"series needs a positive coefficient on generator {i}")
    b = {(): 1.0}
    power = {(): 1.0}
    for k in range(1, max_level + 1):
        nxt = {}
        for u, cu in power.items():
            for v, cv in phi.items():
                if len(u) + len(v) <= max_level:
                    nxt[u + v] = nxt.get(u + v, 0.0) + cu * cv
        power = nxt
        c = math.exp(gammaln(s + k) - gammaln(s) - gammaln(k + 1))
        for word, value in power.items():
            b[word] = b.get(word, 0.0) + c * value
    w = from_b(n, b, max_level)
    w.kind = "series"
    w.params = {"s": s, "coeffs": {freeword.word_to_str(k): v for k, v in sorted(phi.items())}}
    return w


def from_b(n, b, max_level):
    """Recover weights from b_alpha = 1/mu(alpha, g0)^2."""
    table = {}
    for k in range(1, max_level + 1):
        for word in freeword.words_of_length(n, k):
            table[word] = math.sqrt(b[word[1:]] / b[word])
    return TableWeights(n, table, max_level)


def interpolate_from_sequence(a, n, slack=1e-12):
    """Length-only weights with mu(beta, g0) = a_{|beta|}.

    ``a`` lists a_1, a_2, ..., a_K (a_0 = 1 is implicit).  The sequence
    must be submultiplicative and either positive throughout or positive up
    to some p and zero afterwards; in the latter case the weights vanish
    beyond level p at every length, otherwise levels above K are undefined.
    """
    a = [1.0] + [float(x) for x in a]
    K = len(a) - 1
    if any(x < 0 or not math.isfinite(x) for x in a):
        raise ValueError("sequence must be finite and nonnegative")
    zeros = [k for k in range(K + 1) if a[k] == 0.0]
    p = None
    if zeros:
        p = zeros[0] - 1
        if any(a[k] != 0.0 for k in range(zeros[0], K + 1)):
            raise PreconditionError("zero pattern must be positive up to p and zero afterwards")
    for k in range(1, K + 1):
        for m in range(1, K - k + 1):
            if a[k + m] > a[k] * a[m] * (1 + slack):
                raise PreconditionError(f"not submultiplicative: a_{k + m} > a_{k} a_{m}")

    def norm(k):
        if p is not None and k > p:
            return 0.0
        return a[k]

    def level(k):
        if p is not None and k > p:
            return 0.0
        return a[k] / a[k - 1]

    cap = None if p is not None else K
    return LengthWeights(n, level, "interpolated", {"a": a[1:]}, norm_fn=norm, max_level=cap,
                         sup_fn=norm, radius=0.0 if p is not None else None,
                         verdict_fn=(lambda r: "member") if p is not None else None)


def from_tuple_norms(T):
    """Model weights built from the level norms of a matrix tuple.

    mu_beta = ((k+1)/k) * sqrt(L_k / L_{k-1}) with L_k the norm of the
    level-k sum of T_sigma T_sigma^*; for nilpotent T of index m, mu vanishes
    from level m on.  Then mu(beta, g0) = (k+1) sqrt(L_k).
    """
    if T.level_log_norm(1) == -math.inf:
        raise PreconditionError("tuple is zero")
    m = T.nilpotent_index()

    def level(k):
        if m is not None and k >= m:
            return 0.0
        return (k + 1.0) / k * math.exp(0.5 * (T.level_log_norm(k) - T.level_log_norm(k - 1)))

    def norm(k):
        if m is not None and k >= m:
            return 0.0
        return (k + 1.0) * math.exp(0.5 * T.level_log_norm(k))

    params = {"source": "tuple"}
    if m is not None:
        params["nilpotent_index"] = m
    return LengthWeights(T.n, level, "tuple-model", params, norm_fn=norm)


def make_family(kind, n, s=None, **kw):
    if kind == "unit":
        return unit(n)
    if kind == "besov":
        return besov(n, 1.0 if s is None else s)
    if kind in ("dirichlet", "dirichlet_scale"):
        return dirichlet(n, 0.0 if s is None else s)
    if kind == "constant":
        return constant(n, kw.get("rho", 1.0 if s is None else s))
    if kind == "ratio":
        return ratio(n, kw.get("p", 1.0 if s is None else s))
    if kind == "inverse":
        return inverse(n, kw.get("p", 1.0 if s is None else s))
    if kind == "series":
        return series(n, kw["coeffs"], 1.0 if s is None else s, kw.get("max_level", 4))
    if kind == "tabulated":
        return TableWeights(n, kw["table"], kw.get("max_level"))
    if kind == "interpolated":
        return interpolate_from_sequence(kw["a"], n)
    raise ValueError(f"unknown weight family {kind!r}")


def from_json(spec):
    """Build weights from the JSON weight-spec dictionary."""
    n = int(spec["n"])
    kind = spec["kind"]
    extra = {}
    if kind == "series":
        ser = spec.get("series", {})
        extra = {"coeffs": ser["coeffs"], "max_level": int(spec.get("max_level", ser.get("max_level", 4)))}
        return make_family(kind, n, ser.get("s", spec.get("s")), **extra)
    if kind == "tabulated":
        extra = {"table": spec["table"], "max_level": spec.get("max_level")}
    for key in ("rho", "p", "a"):
        if key in spec:
            extra[key] = spec[key]
    return make_family(kind, n, spec.get("s"), **extra)


def to_json(w):
    out = {"n": w.n, "kind": w.kind}
    if isinstance(w, TableWeights) and w.kind != "series":
        out["kind"] = "tabulated"
        if w.kind != "tabulated":
            out["origin"] = w.kind
        out["max_level"] = w.max_level
        out["table"] = {freeword.word_to_str(k): v for k, v in sorted(
            w.table.items(), key=lambda kv: freeword.graded_index(kv[0], w.n))}
    elif w.kind == "series":
        out["series"] = {"coeffs": w.params["coeffs"], "s": w.params["s"]}
        out["max_level"] = w.max_level
    else:
        out.update(w.params)
    return out


def boundedness_report(w, max_len):
    """Per-generator sups of left and right weights over the scan.

    Verdicts: "certified" when a closed form bounds the family,
    "bounded-within-scan" when the per-level maxima stop growing, and
    "unbounded-suspected" when they increase at every level.
    """
    freeword.check_size(w.n, max_len)
    rows = []
    certified = w.length_only and w.level_sup(1) is not None
    for i in range(1, w.n + 1):
        left, right = [], []
        for k in range(max_len + 1):
            alphas = [()] if k == 0 else freeword.words_of_length(w.n, k)
            left.append(max(w.weight((i,) + a) for a in alphas) if k + 1 <= _cap(w) else None)
            try:
                right.append(max(w.mu_right(a, i) for a in alphas) if k + 1 <= _cap(w) else None)
            except PreconditionError:
                right.append(None)
        rows.append({
            "generator": i,
            "left_sup": _nanmax(left), "right_sup": _nanmax(right),
            "left_by_level": left, "right_by_level": right,
            "left_verdict": _growth_verdict(left, certified),
            "right_verdict": _growth_verdict(right, certified),
        })
    return {"max_len": max_len, "generators": rows}


def _cap(w):
    return math.inf if w.max_level is None else w.max_level


def _nanmax(xs):
    xs = [x for x in xs if x is not None]
    return max(xs) if xs else None


def _growth_verdict(values, certified):
    values = [v for v in values if v is not None]
    if len(values) >= 3 and all(b > a for a, b in zip(values, values[1:])):
        return "unbounded-suspected"
    if certified:
        return "certified"
    return "bounded-within-scan"


def level_norm_table(w, max_len):
    """mu(beta, g0) for every word up to max_len, as an array in graded order."""
    if w.length_only:
        return np.array([w.level_norm(len(word)) for word in freeword.enumerate_words(w.n, max_len)])
    return np.array([w.mu_norm(word) for word in freeword.enumerate_words(w.n, max_len)])
