"""Brute-force checks of the inequality chain behind the dimension bound.

Instances are n EPR pairs (n <= 3) with Bob's half sent through a channel
whose output splits into a classical register C and a quantum register Q.
Each checker returns a :class:`CheckResult`; the ``run_suite`` driver sweeps
seeded random instances and collects violation records.
"""

from __future__ import annotations

import itertools
import math
import zlib
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .bounds import Family, ProtocolParams, avg_entropy_rhs
from .entropy import binary_entropy, binomial_tail, log2_complement, shannon_entropy
from .noisemodel import NoiseParams
from .qlinalg import (
    BipartiteState,
    MeasurementBasis,
    complementarity,
    conditional_entropy,
    measured_conditional_entropy,
    partial_trace,
    tensor_basis,
    von_neumann_entropy,
)
from .simulator import Strategy, trial_arrays

__all__ = [
    "CheckResult",
    "SmallInstance",
    "SuiteResult",
    "SUITES",
    "check_averaged_relations",
    "check_data_processing",
    "check_fano_decomposition",
    "check_logdim_witness",
    "check_uncertainty",
    "distribution_from_trials",
    "epr_instance",
    "family_bases",
    "instance_from_kraus",
    "matched_povm",
    "measured_instance",
    "random_instance",
    "random_povm",
    "replacement_instance",
    "run_suite",
    "trivial_povm",
]

TOL = 1e-9
NEAR_EQUALITY = 1e-8
MAX_N = 3
MAX_DIM_B = 8


@dataclass(frozen=True)
class CheckResult:
    """Both sides of one inequality; truthy iff it holds within tolerance."""

    lhs: float
    rhs: float
    holds: bool
    extra: dict = field(default_factory=dict, compare=False)

    def __bool__(self) -> bool:
        return bool(self.holds)

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.holds))


@dataclass(frozen=True)
class SmallInstance:
    """Alice's n qubits entangled with Bob's classical-quantum register C (x) Q."""

    n: int
    dimC: int
    dimQ: int
    joint: BipartiteState
    seed: tuple | None = None

    def __post_init__(self):
        if not 1 <= self.n <= MAX_N:
            raise ValueError(f"n must lie in [1, {MAX_N}], got {self.n}")
        if self.joint.dimA != 2**self.n or self.joint.dimB != self.dimC * self.dimQ:
            raise ValueError("joint state dimensions do not match (n, dimC, dimQ)")

    @property
    def dimA(self) -> int:
        return 2**self.n

    @property
    def dimB(self) -> int:
        return self.dimC * self.dimQ

    def to_record(self) -> dict:
        rho = self.joint.state
        return {
            "seed": list(self.seed) if self.seed is not None else None,
            "n": self.n,
            "dimC": self.dimC,
            "dimQ": self.dimQ,
            "state": {"re": rho.real.tolist(), "im": rho.imag.tolist()},
        }


# -- instance construction ---------------------------------------------------


def _pinch_classical(rho: np.ndarray, dA: int, dC: int, dQ: int) -> np.ndarray:
    r = rho.reshape(dA, dC, dQ, dA, dC, dQ)
    out = np.zeros_like(r)
    idx = np.arange(dC)
    out[:, idx, :, :, idx, :] = r[:, idx, :, :, idx, :]
    return out.reshape(rho.shape)


def instance_from_kraus(n: int, kraus: Sequence[np.ndarray], dimC: int, dimQ: int, seed=None) -> SmallInstance:
    """Apply the channel with Kraus operators ``kraus`` (each dimB x 2^n) to Bob's halves.

    The output is then pinched on C, so C is classical.
    """
    dA = 2**n
    dB = dimC * dimQ
    rho = np.zeros((dA * dB, dA * dB), dtype=complex)
    for k in kraus:
        k = np.asarray(k, dtype=complex)
        if k.shape != (dB, dA):
            raise ValueError(f"Kraus operator shape {k.shape} != {(dB, dA)}")
        # (I (x) K) sum_x |x>|x> / sqrt(dA) has A-major amplitudes K^T / sqrt(dA)
        psi = (k.T / math.sqrt(dA)).reshape(-1)
        rho += np.outer(psi, psi.conj())
    if dimC > 1:
        rho = _pinch_classical(rho, dA, dimC, dimQ)
    return SmallInstance(n, dimC, dimQ, BipartiteState(dA, dB, rho), seed)


def epr_instance(n: int) -> SmallInstance:
    """n untouched EPR pairs: Bob keeps everything quantum."""
    return instance_from_kraus(n, [np.eye(2**n)], 1, 2**n)


def measured_instance(n: int) -> SmallInstance:
    """Bob measures his halves in Z and keeps only the classical outcome."""
    dA = 2**n
    kraus = []
    for x in range(dA):
        k = np.zeros((dA, dA))
        k[x, x] = 1.0
        kraus.append(k)
    return instance_from_kraus(n, kraus, dA, 1)


def replacement_instance(n: int, sigma: np.ndarray, dimC: int = 1) -> SmallInstance:
    """Bob discards his input and prepares ``sigma``; the joint state is I/2^n (x) sigma."""
    sigma = np.asarray(sigma, dtype=complex)
    dA = 2**n
    dB = sigma.shape[0]
    if dB % dimC:
        raise ValueError("dimC must divide dim(sigma)")
    w, v = np.linalg.eigh(sigma)
    kraus = []
    for j in range(dB):
        if w[j] <= 0:
            continue
        for x in range(dA):
            k = np.zeros((dB, dA), dtype=complex)
            k[:, x] = math.sqrt(w[j]) * v[:, j]
            kraus.append(k)
    return instance_from_kraus(n, kraus, dimC, dB // dimC)


def _random_isometry(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    g = rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))
    q, r = np.linalg.qr(g)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_instance(
    rng: np.random.Generator,
    n: int,
    dimC: int | None = None,
    dimQ: int | None = None,
    dimE: int | None = None,
    seed=None,
) -> SmallInstance:
    """Random isometry into B (x) E, trace out E, then make C classical."""
    if dimC is None or dimQ is None:
        shapes = [(c, q) for c in (1, 2, 4) for q in (1, 2, 4, 8) if c * q <= MAX_DIM_B and c * q >= 2]
        dimC, dimQ = shapes[rng.integers(len(shapes))]
    dA = 2**n
    dB = dimC * dimQ
    min_e = -(-dA // dB)
    if dimE is None:
        dimE = int(rng.integers(min_e, min_e + 3))
    if dB * dimE < dA:
        raise ValueError("B (x) E too small for an isometry")
    v = _random_isometry(rng, dB * dimE, dA)
    blocks = v.reshape(dB, dimE, dA)
    kraus = [blocks[:, e, :] for e in range(dimE)]
    return instance_from_kraus(n, kraus, dimC, dimQ, seed)


def family_bases(family: Family | str, n: int, d: int = 2) -> list[MeasurementBasis]:
    """Alice's measurement bases for a family on n qubits."""
    family = Family(family)
    if family is Family.XZ:
        labels = ["X" * n, "Z" * n]
    elif family is Family.XYZ:
        labels = ["X" * n, "Y" * n, "Z" * n]
    elif family is Family.BB84:
        labels = ["".join(c) for c in itertools.product("XZ", repeat=n)]
    else:
        if family is Family.MUB and d != 2:
            raise ValueError("qubit instances support the MUB family only at d = 2")
        labels = ["".join(c) for c in itertools.product("XYZ", repeat=n)]
    return [tensor_basis(lab) for lab in labels]


# -- POVMs -------------------------------------------------------------------


def random_povm(rng: np.random.Generator, dimB: int, outcomes: int, dimE: int = 2) -> list[np.ndarray]:
    """POVM elements V_k^H V_k from a random isometry B -> outcomes (x) E."""
    dimE = max(dimE, -(-dimB // outcomes))
    v = _random_isometry(rng, outcomes * dimE, dimB).reshape(outcomes, dimE, dimB)
    return [vk.conj().T @ vk for vk in v]


def trivial_povm(dimB: int, outcomes: int) -> list[np.ndarray]:
    """Ignore the state and output a uniformly random label."""
    return [np.eye(dimB, dtype=complex) / outcomes for _ in range(outcomes)]


def matched_povm(basis: MeasurementBasis) -> list[np.ndarray]:
    """Projective measurement of B in ``basis`` (complex-conjugated, as EPR halves require)."""
    return [np.outer(v.conj(), v) for v in basis.vectors]


# -- checks ------------------------------------------------------------------


def check_uncertainty(inst: SmallInstance, b1: MeasurementBasis, b2: MeasurementBasis) -> CheckResult:
    """H(A|B)_{b1} + H(A|B)_{b2} - log2(1/c) >= H(A|B)."""
    c = complementarity(b1, b2)
    h1 = measured_conditional_entropy(inst.joint, b1)
    h2 = measured_conditional_entropy(inst.joint, b2)
    lhs = h1 + h2 - math.log2(1.0 / c)
    rhs = conditional_entropy(inst.joint)
    return CheckResult(lhs, rhs, lhs >= rhs - TOL, {"h1": h1, "h2": h2, "c": c})


def check_logdim_witness(inst: SmallInstance) -> CheckResult:
    """-H(A|B) <= log2 dim Q, through the classical-block decomposition.

    Writes rho = sum_i p_i |i><i|_C (x) sigma'_i and checks that H(A|B)
    equals sum_i p_i H(A|Q)_{sigma'_i}, that it is at least the smallest
    block value, and that every block value is at least -log2 dim Q.
    """
    h_ab = conditional_entropy(inst.joint)
    lhs = -h_ab
    rhs = math.log2(inst.dimQ)
    dA, dC, dQ = inst.dimA, inst.dimC, inst.dimQ
    r = inst.joint.state.reshape(dA, dC, dQ, dA, dC, dQ)
    block_vals, weights = [], []
    for i in range(dC):
        block = r[:, i, :, :, i, :].reshape(dA * dQ, dA * dQ)
        p = float(np.trace(block).real)
        if p <= 1e-15:
            continue
        sigma_p = block / p
        sigma = partial_trace(sigma_p, dA, dQ, keep="B")
        block_vals.append(von_neumann_entropy(sigma_p) - von_neumann_entropy(sigma))
        weights.append(p)
    decomposed = math.fsum(w * v for w, v in zip(weights, block_vals))
    holds = (
        lhs <= rhs + TOL
        and abs(decomposed - h_ab) <= TOL
        and h_ab >= min(block_vals) - TOL
        and min(block_vals) >= -rhs - TOL
    )
    return CheckResult(lhs, rhs, holds, {"decomposed": decomposed, "block_min": min(block_vals)})


def _outcome_distribution(inst: SmallInstance, basis: MeasurementBasis, povm: Sequence[np.ndarray]) -> np.ndarray:
    dA, dB = inst.dimA, inst.dimB
    r = inst.joint.state.reshape(dA, dB, dA, dB)
    u = basis.matrix
    blocks = np.einsum("ax,abcd,cx->xbd", u.conj(), r, u)
    dist = np.array([[np.trace(b @ e).real for e in povm] for b in blocks])
    return np.clip(dist, 0.0, None)


def _classical_conditional(joint: np.ndarray) -> float:
    """H(S | S') for a joint table indexed [s, s']."""
    joint = joint / joint.sum()
    return shannon_entropy(joint.ravel()) - shannon_entropy(joint.sum(axis=0))


def check_data_processing(
    inst: SmallInstance,
    povm_on_B: Sequence[np.ndarray] | Mapping[str, Sequence[np.ndarray]],
) -> CheckResult:
    """H(S | B, Theta = theta) <= H(S | S', Theta = theta) for theta in {X, Z}.

    ``povm_on_B`` is one POVM used in both rounds, or a mapping from
    ``"X"``/``"Z"`` to a POVM per round.  The reported sides are the averages
    over the two rounds; ``holds`` requires both rounds to satisfy it.
    """
    per_theta = {}
    ok = True
    for theta in ("X", "Z"):
        basis = tensor_basis(theta * inst.n)
        povm = povm_on_B[theta] if isinstance(povm_on_B, Mapping) else povm_on_B
        quantum = measured_conditional_entropy(inst.joint, basis)
        classical = _classical_conditional(_outcome_distribution(inst, basis, povm))
        per_theta[theta] = (quantum, classical)
        ok = ok and quantum <= classical + TOL
    lhs = 0.5 * (per_theta["X"][0] + per_theta["Z"][0])
    rhs = 0.5 * (per_theta["X"][1] + per_theta["Z"][1])
    return CheckResult(lhs, rhs, ok, {"per_theta": per_theta})


def _hamming_table(n: int) -> np.ndarray:
    x = np.arange(2**n)
    return np.array([[bin(a ^ b).count("1") for b in x] for a in x])


def check_fano_decomposition(joint_dist: np.ndarray, t: int) -> CheckResult:
    """H(S | S', Theta) <= H(p) + p log M + (1 - p) log(2^n - M).

    ``joint_dist`` has shape (num_theta, 2^n, 2^n), indexed [theta, s, s'],
    and sums to 1; p is its mass on Hamming distance <= t.
    """
    dist = np.asarray(joint_dist, dtype=float)
    if dist.ndim != 3 or dist.shape[1] != dist.shape[2]:
        raise ValueError("joint_dist must have shape (num_theta, 2^n, 2^n)")
    n = int(round(math.log2(dist.shape[1])))
    if 2**n != dist.shape[1]:
        raise ValueError("string alphabet size is not a power of two")
    if abs(dist.sum() - 1.0) > 1e-9:
        raise ValueError(f"distribution sums to {dist.sum()!r}")
    # H(S | S', Theta) = H(S, S', Theta) - H(S', Theta)
    lhs = shannon_entropy(dist.ravel()) - shannon_entropy(dist.sum(axis=1).ravel())
    p = float(dist[:, _hamming_table(n) <= t].sum())
    p = min(1.0, max(0.0, p))
    tail = binomial_tail(n, t)
    rhs = binary_entropy(p)
    if p > 0.0:
        rhs += p * tail.log2_count
    if p < 1.0:
        rhs += (1.0 - p) * log2_complement(n, tail)
    return CheckResult(lhs, rhs, lhs <= rhs + TOL, {"p": p, "M": tail.exact_count})


def distribution_from_trials(theta: np.ndarray, s: np.ndarray, s_prime: np.ndarray) -> np.ndarray:
    """Empirical joint distribution over (theta, S, S') from trial arrays."""
    n = s.shape[1]
    weights = 1 << np.arange(n - 1, -1, -1)
    si = s.astype(np.int64) @ weights
    spi = s_prime.astype(np.int64) @ weights
    dist = np.zeros((2, 2**n, 2**n))
    np.add.at(dist, (theta.astype(np.int64), si, spi), 1.0)
    return dist / len(theta)


def check_averaged_relations(inst: SmallInstance, family: Family | str, d: int = 2) -> CheckResult:
    """Mean of H(A|B) after each basis of the family >= the family's averaged bound."""
    family = Family(family)
    bases = family_bases(family, inst.n, d)
    vals = [measured_conditional_entropy(inst.joint, b) for b in bases]
    lhs = math.fsum(vals) / len(vals)
    rhs = avg_entropy_rhs(family, inst.n, conditional_entropy(inst.joint), d)
    return CheckResult(lhs, rhs, lhs >= rhs - TOL, {"bases": len(bases)})


# -- sweeps ------------------------------------------------------------------


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    violations: list = field(default_factory=list)
    max_slack_violation: float = 0.0
    # instances whose two sides agree within NEAR_EQUALITY (equality cases)
    near_equality: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


SUITES = ("uncertainty", "logdim", "data-processing", "fano", "averaged")

# (n values, count) per suite when the caller does not override them
DEFAULT_PLAN = {
    "uncertainty": ((1, 2), 500),
    "logdim": ((1, 2), 200),
    "data-processing": ((1, 2), 200),
    "fano": ((1, 2, 3, 4, 5, 6), 100),
    "averaged": ((1, 2), 100),
}


def _rng(seed: int, suite: str, *keys: int) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(suite.encode()), *keys])


def _violation(suite: str, index: int, result: CheckResult, inst: SmallInstance | None = None, **info) -> dict:
    rec = {"suite": suite, "index": index, "lhs": result.lhs, "rhs": result.rhs, **info}
    if inst is not None:
        rec["instance"] = inst.to_record()
    return rec


def _corrupted_instance() -> SmallInstance:
    # a full EPR pair mislabelled as a purely classical output
    return SmallInstance(1, 2, 1, epr_instance(1).joint, ("corrupt",))


def run_suite(
    name: str,
    seed: int = 0,
    count: int | None = None,
    ns: Sequence[int] | None = None,
    force_violation: bool = False,
) -> SuiteResult:
    """Sweep one suite over seeded random instances.

    ``count`` instances are drawn for every n in ``ns``.  ``force_violation``
    appends a deliberately mislabelled instance so the failure path can be
    exercised end to end.
    """
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
    default_ns, default_count = DEFAULT_PLAN[name]
    ns = tuple(ns) if ns else default_ns
    count = default_count if count is None else count
    result = SuiteResult(name)

    def record(res: CheckResult, index: int, inst=None, **info):
        result.checked += 1
        if not res.holds:
            result.violations.append(_violation(name, index, res, inst, **info))
            result.max_slack_violation = max(result.max_slack_violation, abs(res.lhs - res.rhs))
        elif abs(res.lhs - res.rhs) <= NEAR_EQUALITY:
            result.near_equality.append({"index": index, "lhs": res.lhs, "rhs": res.rhs, **info})

    for n in ns:
        if name != "fano" and not 1 <= n <= MAX_N:
            raise ValueError(f"suite {name} supports n in [1, {MAX_N}], got {n}")
        for i in range(count):
            rng = _rng(seed, name, n, i)
            if name == "fano":
                dist, info = _random_fano_distribution(rng, n)
                record(check_fano_decomposition(dist, info["t"]), i, None, n=n, **info)
                continue
            inst = random_instance(rng, n, seed=(seed, name, n, i))
            if name == "uncertainty":
                res = check_uncertainty(inst, tensor_basis("X" * n), tensor_basis("Z" * n))
                record(res, i, inst)
            elif name == "logdim":
                record(check_logdim_witness(inst), i, inst)
            elif name == "data-processing":
                povm = random_povm(rng, inst.dimB, 2**n)
                record(check_data_processing(inst, povm), i, inst)
            else:
                families = [Family.XYZ, Family.BB84, Family.SIX_STATE]
                if n == 1:
                    families.append(Family.MUB)
                for fam in families:
                    record(check_averaged_relations(inst, fam), i, inst, family=fam.value)

    if force_violation:
        bad = _corrupted_instance()
        res = check_logdim_witness(bad)
        result.checked += 1
        result.violations.append(_violation(name, -1, res, bad, forced=True))
        result.max_slack_violation = max(result.max_slack_violation, abs(res.lhs - res.rhs))
    return result


def _random_fano_distribution(rng: np.random.Generator, n: int) -> tuple[np.ndarray, dict]:
    """Empirical (theta, S, S') distribution of a random simulated strategy."""
    t = int(rng.integers(0, (n + 1) // 2))
    kind = rng.choice(["honest", "store-k", "classical", "fixed"])
    if kind == "honest":
        strategy = Strategy.honest()
    elif kind == "store-k":
        strategy = Strategy.store_k(int(rng.integers(0, n + 1)))
    elif kind == "classical":
        strategy = Strategy.classical()
    else:
        strategy = Strategy.fixed("".join(rng.choice(["0", "1"], size=n)))
    noise = NoiseParams(*(float(x) for x in rng.uniform(0.0, 0.2, size=4)))
    trials = int(rng.integers(200, 3000))
    sim_seed = int(rng.integers(0, 2**63))
    arrays = trial_arrays(ProtocolParams(n, t), noise, strategy, trials, sim_seed)
    info = {"t": t, "strategy": str(kind), "trials": trials, "sim_seed": sim_seed}
    return distribution_from_trials(*arrays), info
