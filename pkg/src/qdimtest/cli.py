"""Command-line front end: ``qdimtest bound | sweep | simulate | verify``.

Tables go to stdout (or ``--output``) as CSV with a header row, or as JSON
lines with one record per row.  Floats carry 12 significant digits in both
encodings.  Exit codes: 0 success, 1 oracle violation, 2 bad arguments.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
from collections.abc import Sequence

from . import __version__
from .bounds import (
    Family,
    ProtocolParams,
    bound_corollary,
    bound_exact,
    bound_mub_extractor,
    bound_stirling,
)
from .entropy import threshold_from_alpha
from .noisemodel import FIGURE3_TOTALS, NoiseOptions, NoiseParams, figure3_sweep, scale_noise
from .oracle import SUITES, run_suite
from .simulator import Strategy, iter_trials, run_trials, write_trial_log

SEED_ENV = "QDIMTEST_SEED"
SIG_DIGITS = 12


class UsageError(Exception):
    """Invalid flag combination detected after parsing."""


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Parsed command parameters; serialises to JSON and back unchanged."""

    command: str
    params: dict
    fmt: str = "csv"
    seed: int | None = None
    output: str | None = None

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunConfig":
        skip = {"command", "format", "seed", "output", "func"}
        params = {k: v for k, v in sorted(vars(ns).items()) if k not in skip}
        return cls(ns.command, params, ns.format, getattr(ns, "seed", None), ns.output)


# -- formatting --------------------------------------------------------------


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, f".{SIG_DIGITS}g")
    return str(value)


def _json_value(value):
    if isinstance(value, float):
        if not math.isfinite(value):
            return _fmt(value)
        return float(format(value, f".{SIG_DIGITS}g"))
    return value


def render(rows: Sequence[dict], fmt: str) -> str:
    """Encode rows as CSV (with header) or JSON lines."""
    if fmt == "jsonl":
        return "".join(
            json.dumps({k: _json_value(v) for k, v in row.items()}) + "\n" for row in rows
        )
    buf = io.StringIO()
    if rows:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(rows[0].keys()))
        for row in rows:
            writer.writerow([_fmt(v) for v in row.values()])
    return buf.getvalue()


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


# -- shared argument groups --------------------------------------------------


def _add_threshold(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--t", type=int, help="max tolerated mismatches")
    g.add_argument("--alpha", type=float, help="mismatch fraction; t = floor(alpha n)")


def _threshold(ns) -> int:
    if ns.t is not None:
        if not 0 <= ns.t <= ns.n:
            raise UsageError(f"--t must lie in [0, {ns.n}]")
        return ns.t
    if not 0.0 <= ns.alpha <= 1.0:
        raise UsageError("--alpha must lie in [0, 1]")
    return threshold_from_alpha(ns.n, ns.alpha)


def _add_noise(p: argparse.ArgumentParser) -> None:
    p.add_argument("--depolarize-identity", action="store_true",
                   help="also depolarize when the encoding gate is the identity")
    p.add_argument("--per-gate-depolarizing", action="store_true",
                   help="charge the compiled HX encoding as two gates")


def _options(ns) -> NoiseOptions:
    return NoiseOptions(ns.depolarize_identity, ns.per_gate_depolarizing)


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--output", "-o", help="write the table here instead of stdout")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


# -- commands ----------------------------------------------------------------


def _report_row(report) -> dict:
    return {
        "variant": report.variant.value,
        "n": report.n,
        "t": report.t,
        "alpha": report.t / report.n,
        "p": report.p,
        "log2_dim_lower": report.log2_dim_lower,
        "certified_qubits": report.certified_qubits,
        "asymptotic": report.asymptotic,
        "vacuous": report.vacuous,
        "in_regime": report.in_regime,
        "caveats": "; ".join(report.caveats),
    }


def cmd_bound(ns) -> int:
    if ns.n < 1:
        raise UsageError("--n must be positive")
    if not 0.0 <= ns.p <= 1.0:
        raise UsageError("--p must lie in [0, 1]")
    t = _threshold(ns)
    try:
        params = ProtocolParams(ns.n, t, Family(ns.family), ns.d)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    reports = []
    if params.family is Family.XZ:
        reports.append(bound_exact(params, ns.p))
        if 2 * t <= ns.n:
            reports.append(bound_stirling(params, ns.p))
    elif params.family is Family.MUB:
        reports.append(bound_mub_extractor(params, ns.p))
    else:
        if 2 * t > ns.n:
            raise UsageError("corollary bounds need alpha <= 1/2")
        reports.append(bound_corollary(params, ns.p))
    if any(r.vacuous for r in reports):
        _warn(f"threshold t={t} tolerates every string (M = 2^n); the bound is vacuous")
    if not params.in_regime:
        _warn(f"t={t} >= n/2 lies outside the alpha < 1/2 regime")
    _emit(render([_report_row(r) for r in reports], ns.format), ns.output)
    return 0


def cmd_sweep(ns) -> int:
    if not 1 <= ns.n_min <= ns.n_max:
        raise UsageError("need 1 <= --n-min <= --n-max")
    if ns.workers < 1:
        raise UsageError("--workers must be >= 1")
    try:
        for total in ns.totals:
            scale_noise(total)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = figure3_sweep(range(ns.n_min, ns.n_max + 1), ns.totals, _options(ns), ns.workers)
    _emit(render([r.as_dict() for r in rows], ns.format), ns.output)
    return 0


def _noise(ns) -> NoiseParams:
    explicit = [ns.p1, ns.p2, ns.p3, ns.p4]
    if ns.total is not None:
        if any(v is not None for v in explicit):
            raise UsageError("give either --total or explicit --p1..--p4, not both")
        return scale_noise(ns.total)
    return NoiseParams(*(v or 0.0 for v in explicit))


def _strategy(ns) -> Strategy:
    if ns.strategy == "store-k":
        if ns.k is None:
            raise UsageError("--strategy store-k needs --k")
        return Strategy.store_k(ns.k)
    if ns.k is not None:
        raise UsageError("--k only applies to --strategy store-k")
    if ns.strategy == "fixed":
        if ns.answer is None:
            raise UsageError("--strategy fixed needs --answer")
        return Strategy.fixed(ns.answer)
    if ns.strategy == "classical":
        return Strategy.classical()
    return Strategy.honest()


def cmd_simulate(ns) -> int:
    if ns.n < 1:
        raise UsageError("--n must be positive")
    if ns.trials < 1:
        raise UsageError("--trials must be >= 1")
    if not 0.0 < ns.delta < 1.0:
        raise UsageError("--delta must lie in (0, 1)")
    t = _threshold(ns)
    seed = _default_seed() if ns.seed is None else ns.seed
    try:
        noise = _noise(ns)
        strategy = _strategy(ns)
        strategy.validate(ns.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    params = ProtocolParams(ns.n, t)
    result = run_trials(params, noise, strategy, ns.trials, seed, ns.delta, ns.method,
                        _options(ns), ns.workers)
    report = bound_exact(params, result.p_lower)
    row = {
        "n": ns.n,
        "t": t,
        "strategy": strategy.kind.value,
        "k": strategy.k if strategy.kind.value == "store-k" else "",
        "seed": seed,
        "trials": result.trials,
        "passes": result.passes,
        "p_hat": result.p_hat,
        "p_hat_Z": result.p_hat_Z,
        "p_hat_X": result.p_hat_X,
        "delta": ns.delta,
        "method": ns.method,
        "p_lower": result.p_lower,
        "log2_dim_lower": report.log2_dim_lower,
        "certified_qubits": report.certified_qubits,
    }
    if ns.trial_log:
        with open(ns.trial_log, "w") as fh:
            write_trial_log(iter_trials(params, noise, strategy, ns.trials, seed, _options(ns)), fh)
    _emit(render([row], ns.format), ns.output)
    return 0


def cmd_verify(ns) -> int:
    suites = SUITES if ns.suite == "all" else (ns.suite,)
    seed = _default_seed() if ns.seed is None else ns.seed
    if ns.count is not None and ns.count < 1:
        raise UsageError("--count must be >= 1")
    if ns.n:
        bad = [n for n in ns.n if n < 1 or n > 6]
        if bad:
            raise UsageError(f"--n values out of range: {bad}")
    rows, violations = [], []
    for name in suites:
        ns_for = ns.n
        if ns_for and name != "fano":
            ns_for = [n for n in ns_for if n <= 3] or None
        try:
            res = run_suite(name, seed, ns.count, ns_for, ns.force_violation)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        rows.append({
            "suite": name,
            "checked": res.checked,
            "violations": len(res.violations),
            "status": "pass" if res.ok else "FAIL",
        })
        violations.extend(res.violations)
    _emit(render(rows, ns.format), ns.output)
    if violations:
        dump = ns.dump or (f"{ns.output}.violations.jsonl" if ns.output else "verify-violations.jsonl")
        with open(dump, "w") as fh:
            for rec in violations:
                fh.write(json.dumps(rec) + "\n")
        print(f"{len(violations)} violation(s); details in {dump}", file=sys.stderr)
        return 1
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdimtest",
        description="Certified quantum-dimension bounds, simulation and verification.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="evaluate the dimension lower bounds")
    p.add_argument("--n", type=int, required=True)
    _add_threshold(p)
    p.add_argument("--p", type=float, required=True, help="pass probability")
    p.add_argument("--family", choices=[f.value for f in Family], default="xz")
    p.add_argument("--d", type=int, default=2, help="qudit dimension for --family mub")
    _add_output(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("sweep", help="certified qubits vs n, optimised over thresholds")
    p.add_argument("--n-min", type=int, default=5)
    p.add_argument("--n-max", type=int, default=90)
    p.add_argument("--totals", type=float, nargs="+", default=list(FIGURE3_TOTALS))
    p.add_argument("--workers", type=int, default=1)
    _add_noise(p)
    _add_output(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="Monte-Carlo runs of the test")
    p.add_argument("--n", type=int, required=True)
    _add_threshold(p)
    p.add_argument("--total", type=float, help="total noise in the base proportions")
    for j in range(1, 5):
        p.add_argument(f"--p{j}", type=float)
    p.add_argument("--strategy", choices=("honest", "store-k", "classical", "fixed"), default="honest")
    p.add_argument("--k", type=int, help="stored qubits for store-k")
    p.add_argument("--answer", help="bit string for the fixed strategy")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, help=f"defaults to ${SEED_ENV} or 0")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--method", choices=("clopper-pearson", "hoeffding"), default="clopper-pearson")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--trial-log", help="write every trial as a JSON line")
    _add_noise(p)
    _add_output(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="brute-force checks of the proof's inequalities")
    p.add_argument("--suite", choices=(*SUITES, "all"), default="all")
    p.add_argument("--n", type=int, action="append", help="repeatable; default per suite")
    p.add_argument("--count", type=int, help="instances per n; default per suite")
    p.add_argument("--seed", type=int, help=f"defaults to ${SEED_ENV} or 0")
    p.add_argument("--dump", help="violation records path (JSON lines)")
    p.add_argument("--force-violation", action="store_true",
                   help="inject a corrupted instance to exercise the failure path")
    _add_output(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return ns.func(ns)
    except UsageError as exc:
        parser.exit(2, f"{parser.prog} {ns.command}: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
