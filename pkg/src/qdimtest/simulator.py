"""Seeded Monte-Carlo runs of the prepare-and-measure dimension test.

Randomness: trials are grouped into fixed blocks of :data:`BLOCK_SIZE`.
Block ``b`` draws from ``numpy.random.Philox`` (the counter-based Philox-4x64
generator) keyed by ``SeedSequence([seed, b])``, so trial ``i`` depends only
on ``(seed, i)`` and the result is the same for any number of workers.
"""

from __future__ import annotations

import enum
import json
import math
from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .bounds import Family, ProtocolParams
from .noisemodel import NoiseOptions, NoiseParams, bit_error_table

__all__ = [
    "BLOCK_SIZE",
    "EmpiricalPass",
    "Strategy",
    "StrategyKind",
    "TrialRecord",
    "confidence_lower",
    "iter_trials",
    "run_trials",
    "strategy_store_k",
    "trial_arrays",
    "write_trial_log",
]

BLOCK_SIZE = 4096


class StrategyKind(str, enum.Enum):
    HONEST = "honest"
    STORE_K = "store-k"
    CLASSICAL = "classical"
    FIXED = "fixed"


@dataclass(frozen=True)
class Strategy:
    kind: StrategyKind
    k: int = 0
    answer: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", StrategyKind(self.kind))
        if self.kind is StrategyKind.STORE_K and self.k < 0:
            raise ValueError(f"store-k needs k >= 0, got {self.k}")
        if self.kind is StrategyKind.FIXED and set(self.answer) - {"0", "1"}:
            raise ValueError(f"fixed answer must be a bit string, got {self.answer!r}")

    @classmethod
    def honest(cls) -> "Strategy":
        return cls(StrategyKind.HONEST)

    @classmethod
    def store_k(cls, k: int) -> "Strategy":
        return cls(StrategyKind.STORE_K, k=k)

    @classmethod
    def classical(cls) -> "Strategy":
        return cls(StrategyKind.CLASSICAL)

    @classmethod
    def fixed(cls, answer: str) -> "Strategy":
        return cls(StrategyKind.FIXED, answer=answer)

    def validate(self, n: int) -> None:
        if self.kind is StrategyKind.STORE_K and not 0 <= self.k <= n:
            raise ValueError(f"store-k needs 0 <= k <= n={n}, got k={self.k}")
        if self.kind is StrategyKind.FIXED and len(self.answer) != n:
            raise ValueError(f"fixed answer has {len(self.answer)} bits, expected {n}")


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    theta: str
    s: str
    s_prime: str
    mismatches: int
    passed: bool

    def to_json(self) -> str:
        return json.dumps(self.__dict__, separators=(",", ":"))


@dataclass(frozen=True)
class EmpiricalPass:
    trials: int
    passes: int
    trials_Z: int
    passes_Z: int
    trials_X: int
    passes_X: int
    delta: float = 0.05
    method: str = "clopper-pearson"

    @property
    def p_hat(self) -> float:
        return self.passes / self.trials

    @property
    def p_hat_Z(self) -> float:
        return self.passes_Z / self.trials_Z if self.trials_Z else math.nan

    @property
    def p_hat_X(self) -> float:
        return self.passes_X / self.trials_X if self.trials_X else math.nan

    @property
    def p_lower(self) -> float:
        return confidence_lower(self.passes, self.trials, self.delta, self.method)


def strategy_store_k(n: int, k: int, t: int) -> float:
    """Pass probability of storing k qubits faithfully and guessing the other n - k."""
    if not 0 <= k <= n or not 0 <= t <= n:
        raise ValueError(f"need 0 <= k, t <= n; got n={n}, k={k}, t={t}")
    m = n - k
    return math.fsum(math.comb(m, j) for j in range(min(t, m) + 1)) / 2.0**m


def confidence_lower(passes: int, trials: int, delta: float = 0.05, method: str = "clopper-pearson") -> float:
    """One-sided lower confidence bound on a binomial success probability.

    ``clopper-pearson`` inverts the exact binomial tail (the Beta quantile);
    ``hoeffding`` returns p_hat - sqrt(ln(1/delta) / (2 trials)).  Both are
    clamped to [0, 1].
    """
    if not 0 <= passes <= trials or trials < 1:
        raise ValueError(f"need 0 <= passes <= trials, trials >= 1; got {passes}/{trials}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")
    if method == "clopper-pearson":
        if passes == 0:
            return 0.0
        if passes == trials:
            return delta ** (1.0 / trials)
        return float(stats.beta.ppf(delta, passes, trials - passes + 1))
    if method == "hoeffding":
        bound = passes / trials - math.sqrt(math.log(1.0 / delta) / (2.0 * trials))
        return min(1.0, max(0.0, bound))
    raise ValueError(f"unknown method {method!r}")


# -- simulation --------------------------------------------------------------


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed & (2**64 - 1), block])))


def _simulate_block(
    params: ProtocolParams,
    errors: dict,
    strategy: Strategy,
    seed: int,
    block: int,
    size: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (theta, s, s_prime) for one block; theta 0 = Z, 1 = X."""
    n = params.n
    rng = _block_rng(seed, block)
    theta = rng.integers(0, 2, size=size, dtype=np.int8)
    s = rng.integers(0, 2, size=(size, n), dtype=np.int8)
    u = rng.random((size, n))
    kind = strategy.kind
    if kind is StrategyKind.HONEST:
        err = np.array(
            [[errors[("Z", 0)], errors[("Z", 1)]], [errors[("X", 0)], errors[("X", 1)]]]
        )
        flip = u < err[theta[:, None], s]
        s_prime = s ^ flip.astype(np.int8)
    elif kind in (StrategyKind.STORE_K, StrategyKind.CLASSICAL):
        k = strategy.k if kind is StrategyKind.STORE_K else 0
        s_prime = s.copy()
        s_prime[:, k:] = (u[:, k:] < 0.5).astype(np.int8)
    else:
        fixed = np.array([int(c) for c in strategy.answer], dtype=np.int8)
        s_prime = np.broadcast_to(fixed, (size, n)).copy()
    return theta, s, s_prime


def _blocks(trials: int) -> list[tuple[int, int]]:
    return [(b, min(BLOCK_SIZE, trials - b * BLOCK_SIZE)) for b in range(-(-trials // BLOCK_SIZE))]


def _check_inputs(params: ProtocolParams, strategy: Strategy, trials: int) -> None:
    if params.family is not Family.XZ:
        raise ValueError("the simulator runs the X/Z test only")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    strategy.validate(params.n)


def run_trials(
    params: ProtocolParams,
    noise: NoiseParams,
    strategy: Strategy,
    trials: int,
    seed: int,
    delta: float = 0.05,
    method: str = "clopper-pearson",
    options: NoiseOptions = NoiseOptions(),
    workers: int = 1,
) -> EmpiricalPass:
    """Run ``trials`` independent rounds of the test and count passes.

    Honest rounds flip each qubit with the exact error probability of its
    (basis, bit) pair; store-k rounds answer the first k bits correctly and
    guess the rest uniformly.  Deterministic in ``seed`` for any ``workers``.
    """
    _check_inputs(params, strategy, trials)
    errors = bit_error_table(noise, options)

    def count(block):
        b, size = block
        theta, s, s_prime = _simulate_block(params, errors, strategy, seed, b, size)
        passed = np.count_nonzero(s != s_prime, axis=1) <= params.t
        return (
            int(np.count_nonzero(theta == 0)),
            int(np.count_nonzero(passed & (theta == 0))),
            int(np.count_nonzero(theta == 1)),
            int(np.count_nonzero(passed & (theta == 1))),
        )

    blocks = _blocks(trials)
    if workers <= 1:
        parts = [count(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(count, blocks))
    tz, pz, tx, px = (sum(col) for col in zip(*parts))
    return EmpiricalPass(
        trials=trials,
        passes=pz + px,
        trials_Z=tz,
        passes_Z=pz,
        trials_X=tx,
        passes_X=px,
        delta=delta,
        method=method,
    )


def iter_trials(
    params: ProtocolParams,
    noise: NoiseParams,
    strategy: Strategy,
    trials: int,
    seed: int,
    options: NoiseOptions = NoiseOptions(),
) -> Iterator[TrialRecord]:
    """Yield the same trial stream :func:`run_trials` counts, one record per trial."""
    _check_inputs(params, strategy, trials)
    errors = bit_error_table(noise, options)
    for b, size in _blocks(trials):
        theta, s, s_prime = _simulate_block(params, errors, strategy, seed, b, size)
        for i in range(size):
            mism = int(np.count_nonzero(s[i] != s_prime[i]))
            yield TrialRecord(
                trial=b * BLOCK_SIZE + i,
                theta="X" if theta[i] else "Z",
                s="".join(map(str, s[i])),
                s_prime="".join(map(str, s_prime[i])),
                mismatches=mism,
                passed=mism <= params.t,
            )


def write_trial_log(records, fh) -> int:
    """Write records as JSON lines; return how many were written."""
    count = 0
    for rec in records:
        fh.write(rec.to_json() + "\n")
        count += 1
    return count


def trial_arrays(
    params: ProtocolParams,
    noise: NoiseParams,
    strategy: Strategy,
    trials: int,
    seed: int,
    options: NoiseOptions = NoiseOptions(),
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The trial stream as arrays (theta, s, s_prime); theta 0 = Z, 1 = X."""
    _check_inputs(params, strategy, trials)
    errors = bit_error_table(noise, options)
    parts = [
        _simulate_block(params, errors, strategy, seed, b, size) for b, size in _blocks(trials)
    ]
    return tuple(np.concatenate(col) for col in zip(*parts))
