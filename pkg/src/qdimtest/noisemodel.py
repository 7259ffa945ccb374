"""Honest-device noise pipeline and the certified-qubits sweep.

Each qubit goes through: prepare |0> with a bit flip (p1), an encoding
rotation followed by depolarizing noise (p2), dephasing in transit (p3), the
decoding rotation with depolarizing noise (p2), and a Z readout flipped with
probability p4.  Per-qubit error rates come from pushing 2x2 density matrices
through that sequence.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bounds import Family, ProtocolParams, optimize_threshold
from .entropy import binomial_cdf, binomial_cdf_all
from .qlinalg import (
    HADAMARD,
    PAULI_X,
    apply_channel_1q,
    bit_flip,
    dephasing,
    depolarizing,
    unitary,
)

__all__ = [
    "BASE_PROFILE",
    "NoiseOptions",
    "NoiseParams",
    "PassStats",
    "SweepRow",
    "bit_error_table",
    "figure3_sweep",
    "honest_pass_prob",
    "per_qubit_error",
    "scale_noise",
]

# reset, single-qubit gate, shuttling, measurement infidelities
BASE_PROFILE = (5e-3, 5e-5, 6e-6, 1e-3)
FIGURE3_TOTALS = (0.001, 0.005, 0.01)


@dataclass(frozen=True)
class NoiseParams:
    p1: float = 0.0
    p2: float = 0.0
    p3: float = 0.0
    p4: float = 0.0

    def __post_init__(self):
        for name in ("p1", "p3", "p4"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v!r} outside [0, 1]")
        if not 0.0 <= self.p2 <= 0.75:
            raise ValueError(f"p2={self.p2!r} outside [0, 3/4]")

    @property
    def total(self) -> float:
        return math.fsum((self.p1, self.p2, self.p3, self.p4))


@dataclass(frozen=True)
class NoiseOptions:
    """How gate noise is charged.

    depolarize_identity: also depolarize when the encoding is the identity.
    per_gate_depolarizing: charge the compiled HX rotation as two gates.
    """

    depolarize_identity: bool = False
    per_gate_depolarizing: bool = False


def scale_noise(total: float) -> NoiseParams:
    """Noise rates in the fixed base proportions, summing to ``total``."""
    if total < 0 or math.isnan(total):
        raise ValueError(f"total noise must be nonnegative, got {total!r}")
    base_sum = math.fsum(BASE_PROFILE)
    p = [total * b / base_sum for b in BASE_PROFILE]
    if p[1] > 0.75 or max(p) > 1.0:
        raise ValueError(f"total noise {total!r} too large for the base profile")
    return NoiseParams(*p)


def _encoding(basis: str, bit: int) -> list[np.ndarray]:
    """Gates Alice applies to |0> to encode ``bit``; each entry is one gate."""
    if basis == "Z":
        return [] if bit == 0 else [PAULI_X]
    if basis == "X":
        return [HADAMARD] if bit == 0 else [HADAMARD @ PAULI_X]
    raise ValueError(f"basis must be 'Z' or 'X', got {basis!r}")


def _pipeline(noise: NoiseParams, basis: str, bit: int, options: NoiseOptions, trace=None) -> float:
    """Probability that Bob's readout differs from ``bit``."""
    steps = []

    def push(rho, channel):
        rho = apply_channel_1q(rho, channel)
        steps.append(rho)
        return rho

    rho = np.array([[1, 0], [0, 0]], dtype=complex)
    rho = push(rho, bit_flip(noise.p1))

    gates = _encoding(basis, bit)
    if gates:
        u = gates[0]
        rho = push(rho, unitary(u))
        n_depol = 2 if (options.per_gate_depolarizing and basis == "X" and bit == 1) else 1
        for _ in range(n_depol):
            rho = push(rho, depolarizing(noise.p2))
    elif options.depolarize_identity:
        rho = push(rho, depolarizing(noise.p2))

    rho = push(rho, dephasing(noise.p3))

    if basis == "X":
        rho = push(rho, unitary(HADAMARD))
        rho = push(rho, depolarizing(noise.p2))

    rho = push(rho, bit_flip(noise.p4))
    if trace is not None:
        trace.extend(steps)
    return float(rho[1 - bit, 1 - bit].real)


def bit_error_table(noise: NoiseParams, options: NoiseOptions = NoiseOptions()) -> dict:
    """Error probability for every (basis, encoded bit) pair."""
    return {(b, s): _pipeline(noise, b, s, options) for b in ("Z", "X") for s in (0, 1)}


def per_qubit_error(
    noise: NoiseParams, basis: str, options: NoiseOptions = NoiseOptions()
) -> float:
    """Marginal per-qubit error rate in ``basis``, averaged over a uniform bit."""
    return 0.5 * (_pipeline(noise, basis, 0, options) + _pipeline(noise, basis, 1, options))


@dataclass(frozen=True)
class PassStats:
    p_Z: float
    p_X: float

    @property
    def p(self) -> float:
        return 0.5 * (self.p_X + self.p_Z)


def honest_pass_prob(
    params: ProtocolParams, noise: NoiseParams, options: NoiseOptions = NoiseOptions()
) -> PassStats:
    """Exact pass probabilities of the matched-basis prover."""
    if params.family is not Family.XZ:
        raise ValueError("honest_pass_prob models the X/Z test only")
    e_z = per_qubit_error(noise, "Z", options)
    e_x = per_qubit_error(noise, "X", options)
    return PassStats(
        p_Z=binomial_cdf(params.n, params.t, e_z),
        p_X=binomial_cdf(params.n, params.t, e_x),
    )


@dataclass(frozen=True)
class SweepRow:
    n: int
    total: float
    t_star: int
    alpha_star: float
    p_X: float
    p_Z: float
    p: float
    certified_qubits: float

    FIELDS = ("n", "total", "t_star", "alpha_star", "p_X", "p_Z", "p", "certified_qubits")

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.FIELDS}


def _sweep_cell(n: int, total: float, options: NoiseOptions) -> SweepRow:
    noise = scale_noise(total)
    cdf_z = binomial_cdf_all(n, per_qubit_error(noise, "Z", options))
    cdf_x = binomial_cdf_all(n, per_qubit_error(noise, "X", options))
    t_star, report = optimize_threshold(n, Family.XZ, lambda t: 0.5 * (cdf_x[t] + cdf_z[t]))
    return SweepRow(
        n=n,
        total=total,
        t_star=t_star,
        alpha_star=t_star / n,
        p_X=cdf_x[t_star],
        p_Z=cdf_z[t_star],
        p=0.5 * (cdf_x[t_star] + cdf_z[t_star]),
        certified_qubits=report.certified_qubits,
    )


def figure3_sweep(
    n_range: Iterable[int] = range(5, 91),
    totals: Sequence[float] = FIGURE3_TOTALS,
    options: NoiseOptions = NoiseOptions(),
    workers: int = 1,
) -> list[SweepRow]:
    """Maximum certified qubits over thresholds, for every (total, n) cell.

    Rows are ordered by total, then n, regardless of ``workers``.
    """
    cells = [(n, total) for total in totals for n in n_range]
    if workers <= 1:
        return [_sweep_cell(n, total, options) for n, total in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: _sweep_cell(c[0], c[1], options), cells))
