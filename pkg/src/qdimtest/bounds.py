"""Certified-dimension lower bounds for the basis-guessing dimension test.

Every bound is reported in bits (``log2_dim_lower``) together with the
clamped number of certified qubits.  The two-basis (X/Z) test has an exact
finite-n bound and its Stirling relaxation; the multi-basis families carry
bounds that only hold for sufficiently large n and are flagged ``asymptotic``.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field

from .entropy import (
    DegenerateThresholdError,
    binary_entropy,
    binomial_tail,
    log2_complement,
)

__all__ = [
    "BoundReport",
    "Family",
    "ProtocolParams",
    "Variant",
    "asymptotic_table",
    "avg_entropy_rhs",
    "bound_corollary",
    "bound_exact",
    "bound_for_family",
    "bound_mub_extractor",
    "bound_stirling",
    "is_prime_power",
    "optimize_threshold",
]


class Family(str, enum.Enum):
    XZ = "xz"
    XYZ = "xyz"
    BB84 = "bb84"
    SIX_STATE = "six-state"
    MUB = "mub"


class Variant(str, enum.Enum):
    EXACT_THM1 = "ExactThm1"
    STIRLING_EQ2 = "StirlingEq2"
    COROLLARY_XYZ = "CorollaryXYZ"
    COROLLARY_BB84 = "CorollaryBB84"
    COROLLARY_SIX_STATE = "CorollarySixState"
    MUB_EXTRACTOR = "MubExtractor"


_COROLLARY = {
    Family.XYZ: (1.0, Variant.COROLLARY_XYZ),
    Family.BB84: (1.5, Variant.COROLLARY_BB84),
    Family.SIX_STATE: (4.0 / 3.0, Variant.COROLLARY_SIX_STATE),
}


def is_prime_power(d: int) -> bool:
    """True if d = q^k for a prime q and k >= 1."""
    if d < 2:
        return False
    q = 2
    while q * q <= d:
        if d % q == 0:
            while d % q == 0:
                d //= q
            return d == 1
        q += 1
    return True


@dataclass(frozen=True)
class ProtocolParams:
    """One test instance: n qubits, at most t mismatches tolerated, a basis family."""

    n: int
    t: int
    family: Family = Family.XZ
    d: int = 2

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if not 0 <= self.t <= self.n:
            raise ValueError(f"threshold t={self.t} outside [0, {self.n}]")
        if self.family is Family.MUB and not is_prime_power(self.d):
            raise ValueError(f"MUB dimension d={self.d} is not a prime power")

    @property
    def alpha(self) -> float:
        return self.t / self.n

    @property
    def in_regime(self) -> bool:
        """Thresholds with t >= n/2 lie outside alpha < 1/2."""
        return 2 * self.t < self.n


@dataclass(frozen=True)
class BoundReport:
    log2_dim_lower: float
    certified_qubits: float
    variant: Variant
    n: int
    t: int
    p: float
    asymptotic: bool = False
    vacuous: bool = False
    in_regime: bool = True
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def caveats(self) -> list[str]:
        notes = []
        if self.asymptotic:
            notes.append("asymptotic: valid only for sufficiently large n")
        if self.vacuous:
            notes.append("vacuous: threshold tolerates every string (M = 2^n)")
        if not self.in_regime:
            notes.append("outside regime: t >= n/2")
        return notes


def _report(value: float, variant: Variant, params: ProtocolParams, p: float, **kw) -> BoundReport:
    certified = min(float(params.n), max(0.0, value))
    return BoundReport(
        log2_dim_lower=value,
        certified_qubits=certified,
        variant=variant,
        n=params.n,
        t=params.t,
        p=p,
        in_regime=params.in_regime,
        **kw,
    )


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"pass probability must lie in [0, 1], got {p!r}")


def bound_exact(params: ProtocolParams, p: float) -> BoundReport:
    """Finite-n bound n - 2H(p) - 2p log M - 2(1-p) log(2^n - M).

    Terms weighted by p = 0 or 1 - p = 0 are dropped (0 * log = 0).  When the
    threshold tolerates every string the report is flagged ``vacuous`` and
    certifies nothing.
    """
    if params.family is not Family.XZ:
        raise ValueError("bound_exact applies to the X/Z family only")
    _check_p(p)
    n = params.n
    tail = binomial_tail(n, params.t)
    value = n - 2.0 * binary_entropy(p)
    if p > 0.0:
        value -= 2.0 * p * tail.log2_count
    if p < 1.0:
        try:
            value -= 2.0 * (1.0 - p) * log2_complement(n, tail)
        except DegenerateThresholdError:
            return _report(-math.inf, Variant.EXACT_THM1, params, p, vacuous=True)
    return _report(value, Variant.EXACT_THM1, params, p, vacuous=tail.is_full)


def _stirling_exponent(alpha: float, p: float, n: int, kappa: float) -> float:
    return ((1.0 - binary_entropy(alpha)) * 2.0 * p - kappa) * n - 2.0 * binary_entropy(p)


def bound_stirling(params: ProtocolParams, p: float) -> BoundReport:
    """Relaxed bound ((1 - H(alpha)) 2p - 1) n - 2H(p) with alpha = t/n."""
    _check_p(p)
    if 2 * params.t > params.n:
        raise ValueError("Stirling relaxation needs alpha <= 1/2")
    value = _stirling_exponent(params.alpha, p, params.n, 1.0)
    return _report(value, Variant.STIRLING_EQ2, params, p)


def bound_corollary(params: ProtocolParams, p: float) -> BoundReport:
    """Multi-basis relaxations: exponent ((1 - H(alpha)) 2p - kappa) n - 2H(p).

    kappa is 1 for transversal {X, Y, Z}, 3/2 for BB84 and 4/3 for six-state.
    """
    _check_p(p)
    try:
        kappa, variant = _COROLLARY[params.family]
    except KeyError:
        raise ValueError(f"no corollary bound for family {params.family.value}") from None
    if 2 * params.t > params.n:
        raise ValueError("corollary bounds need alpha <= 1/2")
    value = _stirling_exponent(params.alpha, p, params.n, kappa)
    return _report(value, variant, params, p, asymptotic=True)


def bound_mub_extractor(params: ProtocolParams, p: float) -> BoundReport:
    """Bound for product full-MUB encodings of qudits, from the extractor relation.

    Exponent ((log d - H(alpha) - alpha log(d - 1)) p + log((d + 1) / (2d))) n - H(p).
    """
    _check_p(p)
    if params.family is not Family.MUB:
        raise ValueError("bound_mub_extractor needs family MUB")
    d = params.d
    a = params.alpha
    rate = math.log2(d) - binary_entropy(a) - (a * math.log2(d - 1) if a > 0 else 0.0)
    value = (rate * p + math.log2((d + 1) / (2.0 * d))) * params.n - binary_entropy(p)
    return _report(value, Variant.MUB_EXTRACTOR, params, p, asymptotic=True)


def bound_for_family(params: ProtocolParams, p: float) -> BoundReport:
    """The primary bound for ``params.family``."""
    if params.family is Family.XZ:
        return bound_exact(params, p)
    if params.family is Family.MUB:
        return bound_mub_extractor(params, p)
    return bound_corollary(params, p)


def avg_entropy_rhs(family: Family | str, n: int, H_AB: float, d: int = 2) -> float:
    """Right-hand side of the averaged uncertainty relation for a basis family.

    The left-hand side is the mean of H(S | B, Theta = theta) over the
    family's bases.  For the X/Z pair this is n/2 + H(A|B)/2.
    """
    family = Family(family)
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if family in (Family.XZ, Family.XYZ):
        return 0.5 * n + 0.5 * H_AB
    if family is Family.BB84:
        return (2.0 ** (n - 2) / (2.0**n - 1.0)) * n + 0.5 * H_AB
    if family is Family.SIX_STATE:
        return (3.0 ** (n - 1) / (3.0**n - 1.0)) * n + 0.5 * H_AB
    return math.log2((d + 1) / 2.0) * n + min(0.0, H_AB)


def asymptotic_table(family: Family | str, d: int = 2, extractor: bool = True) -> float:
    """Leading coefficient of certified qubits per n at p = 1, alpha -> 0.

    For ``Family.MUB`` the extractor relation gives log2((d + 1) / 2) and the
    pairwise relation (``extractor=False``) gives d / (d + 1).
    """
    family = Family(family)
    if family in (Family.XZ, Family.XYZ):
        return 1.0
    if family is Family.BB84:
        return 0.5
    if family is Family.SIX_STATE:
        return 2.0 / 3.0
    if not is_prime_power(d):
        raise ValueError(f"MUB dimension d={d} is not a prime power")
    return math.log2((d + 1) / 2.0) if extractor else d / (d + 1.0)


def optimize_threshold(
    n: int,
    family: Family | str,
    p_of_t: Callable[[int], float] | Mapping[int, float] | Sequence[float],
    d: int = 2,
) -> tuple[int, BoundReport]:
    """Pick the threshold maximising certified qubits over t in [0, ceil(n/2) - 1].

    Ties go to the smaller t.  ``p_of_t`` maps a threshold to the pass
    probability at that threshold.
    """
    family = Family(family)
    lookup = p_of_t if callable(p_of_t) else p_of_t.__getitem__
    best_t, best = None, None
    for t in range(0, (n + 1) // 2):
        report = bound_for_family(ProtocolParams(n, t, family, d), float(lookup(t)))
        if best is None or report.certified_qubits > best.certified_qubits:
            best_t, best = t, report
    return best_t, best
