"""Words in the free semigroup on n generators.

A word is a tuple of letters in 1..n; the empty tuple is the identity.
Words are ordered graded-lexicographically: shorter first, then
lexicographic by letter, so a truncation by length is a prefix of the
index range.
"""
import itertools
import math
import os

from .errors import CapExceeded


def max_dim():
    return int(os.environ.get("FOCKSHIFT_MAX_DIM", "50000"))


def max_generators():
    return int(os.environ.get("FOCKSHIFT_MAX_N", "4"))


def max_level():
    return int(os.environ.get("FOCKSHIFT_MAX_LEVEL", "10"))


def level_count(n, max_len):
    """Number of words of length <= max_len."""
    if n == 1:
        return max_len + 1
    return (n ** (max_len + 1) - 1) // (n - 1)


def check_size(n, max_len):
    """Validate a truncation (n generators, levels <= max_len) against the caps."""
    if n > max_generators():
        raise CapExceeded(f"n={n} exceeds generator cap {max_generators()} (FOCKSHIFT_MAX_N)")
    if max_len > max_level():
        raise CapExceeded(f"N={max_len} exceeds level cap {max_level()} (FOCKSHIFT_MAX_LEVEL)")
    dim = level_count(n, max_len)
    if dim > max_dim():
        raise CapExceeded(
            f"{dim} words for n={n}, N={max_len} exceeds cap {max_dim()} "
            "(set FOCKSHIFT_MAX_DIM to raise it)")
    return dim


def _check_letters(word, n):
    for a in word:
        if not 1 <= a <= n:
            raise ValueError(f"letter {a} out of range 1..{n}")


def words_of_length(n, k):
    return list(itertools.product(range(1, n + 1), repeat=k))


def enumerate_words(n, max_len):
    if n < 1:
        raise ValueError("n must be positive")
    check_size(n, max_len)
    out = []
    for k in range(max_len + 1):
        out.extend(itertools.product(range(1, n + 1), repeat=k))
    return out


def graded_index(word, n):
    _check_letters(word, n)
    k = len(word)
    rank = 0
    for a in word:
        rank = rank * n + (a - 1)
    return level_count(n, k - 1) + rank if k else 0


def index_word(idx, n):
    if idx < 0:
        raise ValueError("negative index")
    k = 0
    while idx >= level_count(n, k):
        k += 1
    rank = idx - (level_count(n, k - 1) if k else 0)
    letters = []
    for _ in range(k):
        rank, r = divmod(rank, n)
        letters.append(r + 1)
    return tuple(reversed(letters))


def concat(alpha, beta):
    return tuple(alpha) + tuple(beta)


def abelianization(word, n):
    counts = [0] * n
    for a in word:
        counts[a - 1] += 1
    return tuple(counts)


def multinomial(k):
    out = math.factorial(sum(k))
    for ki in k:
        out //= math.factorial(ki)
    return out


def words_in_class(k):
    """All words whose letter counts are given by the multi-index k, in lex order."""
    k = list(k)
    total = sum(k)
    out = []

    def rec(prefix, remaining):
        if remaining == 0:
            out.append(tuple(prefix))
            return
        for i, ki in enumerate(k):
            if ki:
                k[i] -= 1
                prefix.append(i + 1)
                rec(prefix, remaining - 1)
                prefix.pop()
                k[i] += 1

    rec([], total)
    return out


def multi_indices(n, max_degree):
    """Multi-indices of total degree <= max_degree, graded then lexicographic."""
    out = []
    for d in range(max_degree + 1):
        level = [k for k in itertools.product(range(d + 1), repeat=n) if sum(k) == d]
        out.extend(sorted(level, reverse=True))
    return out


def word_to_str(word):
    return ".".join(str(a) for a in word) if word else "e"


def parse_word(text):
    text = text.strip()
    if text in ("e", ""):
        return ()
    return tuple(int(a) for a in text.split("."))


def multi_index_to_str(k):
    return ",".join(str(x) for x in k)


def parse_multi_index(text):
    return tuple(int(x) for x in text.split(","))
