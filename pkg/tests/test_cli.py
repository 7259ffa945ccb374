import csv
import hashlib
import io
import json
import subprocess
import sys

import pytest

from qdimtest.cli import SEED_ENV, RunConfig, build_parser, main, render


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def rows_jsonl(text):
    return [json.loads(line) for line in text.splitlines()]


class TestBound:
    @pytest.mark.parametrize("n", [1, 10, 90, 1000])
    def test_perfect_play(self, capsys, n):
        code, out, _ = run(capsys, "bound", "--n", str(n), "--alpha", "0", "--p", "1")
        assert code == 0
        exact = rows_csv(out)[0]
        assert exact["variant"] == "ExactThm1" and float(exact["log2_dim_lower"]) == n

    def test_both_printed(self, capsys):
        code, out, _ = run(capsys, "bound", "--n", "90", "--t", "9", "--p", "0.99")
        rows = {r["variant"]: r for r in rows_csv(out)}
        assert set(rows) == {"ExactThm1", "StirlingEq2"}
        assert float(rows["ExactThm1"]["log2_dim_lower"]) == pytest.approx(9.77585840528, abs=1e-10)
        assert float(rows["ExactThm1"]["log2_dim_lower"]) >= float(rows["StirlingEq2"]["log2_dim_lower"])

    def test_asymptotic_flag(self, capsys):
        code, out, _ = run(capsys, "bound", "--n", "10", "--t", "5", "--p", "1", "--family", "bb84")
        row = rows_csv(out)[0]
        assert code == 0 and row["asymptotic"] == "true" and "asymptotic" in row["caveats"]

    def test_vacuous_warning(self, capsys):
        code, out, err = run(capsys, "bound", "--n", "4", "--t", "4", "--p", "0.9")
        assert code == 0 and "vacuous" in err
        assert rows_csv(out)[0]["log2_dim_lower"] == "-inf"

    def test_mub(self, capsys):
        code, out, _ = run(capsys, "bound", "--n", "10", "--t", "0", "--p", "1", "--family", "mub", "--d", "3",
                           "--format", "jsonl")
        assert code == 0 and rows_jsonl(out)[0]["log2_dim_lower"] == pytest.approx(10.0)

    @pytest.mark.parametrize(
        "argv",
        [
            ["bound", "--n", "10", "--p", "1"],
            ["bound", "--n", "10", "--t", "1", "--alpha", "0.1", "--p", "1"],
            ["bound", "--n", "10", "--t", "1", "--p", "1.5"],
            ["bound", "--n", "10", "--t", "11", "--p", "1"],
            ["bound", "--n", "10", "--t", "0", "--p", "1", "--family", "mub", "--d", "6"],
            ["bound", "--n", "0", "--t", "0", "--p", "1"],
            ["sweep", "--n-min", "10", "--n-max", "5"],
            ["sweep", "--totals", "-1"],
            ["simulate", "--n", "8", "--t", "0", "--strategy", "store-k"],
            ["simulate", "--n", "8", "--t", "0", "--strategy", "store-k", "--k", "9"],
            ["simulate", "--n", "8", "--t", "0", "--strategy", "fixed", "--answer", "01"],
            ["simulate", "--n", "8", "--t", "0", "--total", "0.01", "--p1", "0.1"],
            ["verify", "--suite", "nope"],
            ["verify", "--count", "0"],
            ["frobnicate"],
        ],
    )
    def test_bad_flags_exit_2(self, capsys, argv):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


class TestSweep:
    def test_columns_and_zero_noise(self, capsys):
        code, out, _ = run(capsys, "sweep", "--n-min", "5", "--n-max", "12", "--totals", "0")
        rows = rows_csv(out)
        assert list(rows[0]) == ["n", "total", "t_star", "alpha_star", "p_X", "p_Z", "p", "certified_qubits"]
        assert all(float(r["certified_qubits"]) == int(r["n"]) for r in rows)

    def test_defaults(self):
        ns = build_parser().parse_args(["sweep"])
        assert (ns.n_min, ns.n_max, ns.totals) == (5, 90, [0.001, 0.005, 0.01])

    def test_file_hash_and_workers(self, tmp_path):
        hashes = set()
        for i, workers in enumerate(["1", "1", "4"]):
            path = tmp_path / f"s{i}.csv"
            assert main(["sweep", "--n-max", "40", "--workers", workers, "-o", str(path)]) == 0
            hashes.add(hashlib.sha256(path.read_bytes()).hexdigest())
        assert len(hashes) == 1

    def test_csv_jsonl_identical(self, capsys):
        _, a, _ = run(capsys, "sweep", "--n-max", "20")
        _, b, _ = run(capsys, "sweep", "--n-max", "20", "--format", "jsonl")
        for rc, rj in zip(rows_csv(a), rows_jsonl(b), strict=True):
            assert set(rc) == set(rj)
            for key, val in rj.items():
                assert float(rc[key]) == pytest.approx(val, rel=0, abs=0)


class TestSimulate:
    def test_honest_zero_noise(self, capsys):
        code, out, _ = run(capsys, "simulate", "--n", "10", "--t", "0", "--trials", "10000", "--seed", "1",
                           "--format", "jsonl")
        row = rows_jsonl(out)[0]
        assert row["p_hat"] == 1.0
        assert row["p_lower"] == pytest.approx(0.05 ** 1e-4, rel=1e-11)
        assert row["certified_qubits"] == pytest.approx(9.98613417976, abs=1e-10)

    def test_store_k(self, capsys):
        code, out, _ = run(capsys, "simulate", "--n", "8", "--t", "0", "--strategy", "store-k", "--k", "3",
                           "--trials", "20000", "--format", "jsonl")
        assert code == 0 and rows_jsonl(out)[0]["certified_qubits"] <= 3

    def test_same_seed_and_workers(self, capsys):
        argv = ["simulate", "--n", "30", "--alpha", "0.1", "--total", "0.05", "--trials", "20000", "--seed", "5"]
        outs = {run(capsys, *argv, "--workers", w)[1] for w in ("1", "1", "3")}
        assert len(outs) == 1

    def test_env_seed(self, capsys, monkeypatch):
        argv = ["simulate", "--n", "12", "--t", "1", "--total", "0.2", "--trials", "3000"]
        _, explicit, _ = run(capsys, *argv, "--seed", "77")
        monkeypatch.setenv(SEED_ENV, "77")
        _, from_env, _ = run(capsys, *argv)
        assert explicit == from_env
        monkeypatch.setenv(SEED_ENV, "abc")
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2

    def test_trial_log(self, capsys, tmp_path):
        log = tmp_path / "trials.jsonl"
        code, out, _ = run(capsys, "simulate", "--n", "5", "--t", "1", "--total", "0.3", "--trials", "200",
                           "--trial-log", str(log), "--format", "jsonl")
        records = [json.loads(line) for line in log.read_text().splitlines()]
        assert len(records) == 200
        assert sum(r["passed"] for r in records) == rows_jsonl(out)[0]["passes"]


class TestVerify:
    def test_uncertainty_n1(self, capsys):
        code, out, _ = run(capsys, "verify", "--suite", "uncertainty", "--n", "1", "--count", "500")
        assert code == 0 and rows_csv(out)[0]["status"] == "pass"

    def test_all_small_deterministic(self, capsys):
        argv = ["verify", "--suite", "all", "--seed", "7", "--count", "5"]
        code1, a, _ = run(capsys, *argv)
        code2, b, _ = run(capsys, *argv)
        assert code1 == code2 == 0 and a == b
        assert [r["suite"] for r in rows_csv(a)] == ["uncertainty", "logdim", "data-processing", "fano", "averaged"]

    def test_forced_violation(self, capsys, tmp_path):
        out_path = tmp_path / "summary.csv"
        code, _, err = run(capsys, "verify", "--suite", "logdim", "--count", "3", "--force-violation",
                           "-o", str(out_path))
        assert code == 1 and "violation" in err
        dump = tmp_path / "summary.csv.violations.jsonl"
        rec = json.loads(dump.read_text().splitlines()[0])
        assert rec["forced"] and rec["lhs"] > rec["rhs"] and "instance" in rec
        assert rows_csv(out_path.read_text())[0]["status"] == "FAIL"


class TestRunConfig:
    @pytest.mark.parametrize(
        "argv",
        [
            ["bound", "--n", "90", "--t", "9", "--p", "0.99"],
            ["sweep", "--totals", "0.001", "0.02", "--format", "jsonl"],
            ["simulate", "--n", "8", "--alpha", "0.1", "--seed", "3", "-o", "x.csv"],
            ["verify", "--n", "1", "--n", "2"],
        ],
    )
    def test_round_trip(self, argv):
        cfg = RunConfig.from_namespace(build_parser().parse_args(argv))
        assert RunConfig.from_json(cfg.to_json()) == cfg
        assert RunConfig.from_json(cfg.to_json()).to_json() == cfg.to_json()


def test_render_empty():
    assert render([], "csv") == "" and render([], "jsonl") == ""


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qdimtest", "bound", "--n", "90", "--alpha", "0", "--p", "1", "--format", "jsonl"],
        capture_output=True, text=True, check=True,
    )
    assert json.loads(proc.stdout.splitlines()[0])["log2_dim_lower"] == 90
