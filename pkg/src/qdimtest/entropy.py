"""Scalar information-theoretic kernels and exact binomial-tail arithmetic.

All logarithms are base 2.  Binomial tails are kept as Python integers so the
count of tolerated answer strings is exact; logarithms of big integers are
taken through their leading bits, so nothing overflows a double.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "BinomialTail",
    "DegenerateThresholdError",
    "EXACT_TAIL_MAX_N",
    "binary_entropy",
    "binomial_cdf",
    "binomial_cdf_all",
    "binomial_sf",
    "binomial_tail",
    "log2_complement",
    "log2_int",
    "shannon_entropy",
    "stirling_bracket",
]

# M is carried as an exact integer up to this n; beyond it only log2(M) is kept.
EXACT_TAIL_MAX_N = 10_000


class DegenerateThresholdError(ValueError):
    """Raised when the tolerated-string count fills the whole space (M = 2^n)."""


def binary_entropy(x: float) -> float:
    """Binary entropy H(x) in bits, with H(0) = H(1) = 0.

    >>> binary_entropy(0.5)
    1.0
    """
    if not 0.0 <= x <= 1.0 or math.isnan(x):
        raise ValueError(f"binary_entropy needs x in [0, 1], got {x!r}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def shannon_entropy(probs) -> float:
    """Shannon entropy in bits of a probability vector; zero entries contribute 0."""
    total = 0.0
    terms = []
    for q in probs:
        q = float(q)
        if q < 0.0:
            raise ValueError(f"negative probability {q!r}")
        if q > 0.0:
            terms.append(-q * math.log2(q))
        total += q
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {total!r}, not 1")
    return math.fsum(terms)


def log2_int(value: int) -> float:
    """log2 of a positive (arbitrarily large) integer, accurate to double precision."""
    if value <= 0:
        raise ValueError("log2_int needs a positive integer")
    bits = value.bit_length()
    if bits <= 1000:
        return math.log2(value)
    shift = bits - 64
    return math.log2(value >> shift) + shift


@dataclass(frozen=True)
class BinomialTail:
    """Count M = sum_{i<=t} C(n, i) of n-bit strings within Hamming distance t.

    ``exact_count`` is ``None`` only when n exceeds :data:`EXACT_TAIL_MAX_N`.
    """

    n: int
    t: int
    exact_count: int | None
    log2_count: float

    @property
    def is_full(self) -> bool:
        """True when every string is tolerated, i.e. M = 2^n."""
        return self.t >= self.n


def _log2_tail_large(n: int, t: int) -> float:
    # log-sum-exp over log2 C(n, i), summed with fsum relative to the largest term
    ln2 = math.log(2.0)
    logs = [
        (math.lgamma(n + 1) - math.lgamma(i + 1) - math.lgamma(n - i + 1)) / ln2
        for i in range(t + 1)
    ]
    top = max(logs)
    return top + math.log2(math.fsum(2.0 ** (v - top) for v in logs))


def binomial_tail(n: int, t: int) -> BinomialTail:
    """Exact tail count M(n, t) = sum_{i=0}^{t} C(n, i) and its log2.

    Parameters
    ----------
    n : int
        Number of bits, n >= 1.
    t : int
        Largest tolerated Hamming distance, 0 <= t <= n.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not 0 <= t <= n:
        raise ValueError(f"threshold t={t} outside [0, {n}]")
    if n > EXACT_TAIL_MAX_N:
        log2_count = float(n) if t == n else _log2_tail_large(n, t)
        return BinomialTail(n, t, None, log2_count)
    count = 0
    c = 1
    for i in range(t + 1):
        count += c
        c = c * (n - i) // (i + 1)
    return BinomialTail(n, t, count, log2_int(count))


def log2_complement(n: int, tail: BinomialTail) -> float:
    """log2(2^n - M), stable whether M is tiny or close to 2^n.

    Raises
    ------
    DegenerateThresholdError
        If M = 2^n, where the term is undefined.
    """
    if tail.n != n:
        raise ValueError(f"tail computed for n={tail.n}, not {n}")
    if tail.is_full:
        raise DegenerateThresholdError(f"M = 2^{n}: every string passes at t={tail.t}")
    if tail.exact_count is not None:
        # exact big-integer difference; log2_int keeps full precision for any size
        return log2_int((1 << n) - tail.exact_count)
    ratio_log2 = tail.log2_count - n
    # ratio < 1 because t < n; log1p keeps precision when it is small
    return n + math.log1p(-(2.0 ** ratio_log2)) / math.log(2.0)


def stirling_bracket(n: int, alpha: float) -> tuple[float, float]:
    """Stirling bracket (lower, upper) around M(n, floor(alpha n)).

    upper = 2^{n H(a)} and lower = 2^{n H(a)} / sqrt(8 n a (1 - a)) with
    a = floor(alpha n) / n.  Returns ``(1.0, 1.0)`` when the threshold is 0.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not 0.0 <= alpha < 0.5:
        raise ValueError(f"alpha must lie in [0, 1/2), got {alpha!r}")
    t = threshold_from_alpha(n, alpha)
    if t == 0:
        return 1.0, 1.0
    a = t / n
    upper = 2.0 ** (n * binary_entropy(a))
    lower = upper / math.sqrt(8.0 * n * a * (1.0 - a))
    return lower, upper


def threshold_from_alpha(n: int, alpha: float) -> int:
    """Integer threshold t = floor(alpha n), immune to float noise like 0.29*100."""
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha!r}")
    return min(n, int(math.floor(alpha * n + 1e-9)))


def _pmf_numerators(n: int, e: float) -> tuple[list[int], int]:
    # e = a / 2^k exactly, so C(n,i) e^i (1-e)^(n-i) = C(n,i) a^i (2^k - a)^(n-i) / 2^(kn)
    num, den = Fraction(e).as_integer_ratio()
    rest = den - num
    terms = []
    c = 1
    pa = 1
    pb = rest**n
    for i in range(n + 1):
        terms.append(c * pa * pb)
        if i < n:
            c = c * (n - i) // (i + 1)
            pa *= num
            pb = pb // rest if rest else 0
    if rest == 0:
        # e == 1: all mass on i = n
        terms = [0] * n + [1]
        return terms, 1
    return terms, den**n


def _check_prob(e: float) -> None:
    if not 0.0 <= e <= 1.0 or math.isnan(e):
        raise ValueError(f"error rate must lie in [0, 1], got {e!r}")


def binomial_cdf(n: int, t: int, e: float) -> float:
    """P[Bin(n, e) <= t], summed exactly in rational arithmetic then rounded once."""
    _check_prob(e)
    if not 0 <= t <= n:
        raise ValueError(f"threshold t={t} outside [0, {n}]")
    terms, den = _pmf_numerators(n, e)
    return float(Fraction(sum(terms[: t + 1]), den))


def binomial_sf(n: int, t: int, e: float) -> float:
    """P[Bin(n, e) > t], the exact complement of :func:`binomial_cdf`."""
    _check_prob(e)
    if not 0 <= t <= n:
        raise ValueError(f"threshold t={t} outside [0, {n}]")
    terms, den = _pmf_numerators(n, e)
    return float(Fraction(sum(terms[t + 1 :]), den))


def binomial_cdf_all(n: int, e: float) -> list[float]:
    """``[binomial_cdf(n, t, e) for t in range(n + 1)]`` sharing one exact pmf."""
    _check_prob(e)
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    terms, den = _pmf_numerators(n, e)
    out = []
    acc = 0
    for term in terms:
        acc += term
        out.append(float(Fraction(acc, den)))
    return out
