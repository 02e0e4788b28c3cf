import csv
import json
import os

import pytest

from oplab.harness import ConfigError, ExperimentConfig, emit_report, get_suite, read_log, resolve, run_suite
from oplab.harness.cli import main
from oplab.harness.suites import UnknownSuiteError


def write(path, text):
    path.write_text(text)
    return str(path)


def test_config_file_and_precedence(tmp_path):
    p = write(tmp_path / "c.ini", "[experiment]\nsuite = phi-isometry\nseed = 3\nthreads = 2\n[params]\nmax_atoms = 4\n")
    cfg = ExperimentConfig.from_file(p)
    assert (cfg.seed, cfg.threads, cfg.params) == (3, 2, {"max_atoms": 4})
    env = {"OPLAB_SEED": "9", "OPLAB_THREADS": "5"}
    assert resolve(p, environ=env).seed == 9
    assert resolve(p, environ=env, seed=11).seed == 11
    assert resolve(p, environ=env).threads == 5


@pytest.mark.parametrize("text,match", [
    ("[experiment]\nsuite = x\ncolour = red\n", "colour"),
    ("[experiment]\nsuite = x\n[extras]\na = 1\n", "extras"),
    ("[experiment]\nseed = 1\n", "suite"),
    ("[experiment]\nsuite = x\nseed = -1\n", "64-bit"),
])
def test_bad_configs(tmp_path, text, match):
    with pytest.raises(ConfigError, match=match):
        ExperimentConfig.from_file(write(tmp_path / "c.ini", text))


def test_unknown_params_and_suites():
    with pytest.raises(ConfigError, match="unknown parameter"):
        list(run_suite(ExperimentConfig("phi-isometry", seed=1, params={"nope": 1})))
    with pytest.raises(UnknownSuiteError):
        get_suite("nope")


def test_seed_is_mandatory():
    with pytest.raises(ConfigError, match="seed"):
        list(run_suite(ExperimentConfig("phi-isometry")))


def test_radnorm_suite_has_zero_deviation():
    recs = list(run_suite(ExperimentConfig("radnorm-hilbert", seed=1, instances=20)))
    assert len(recs) == 20
    assert max(r.quantities["deviation"]["value"] for r in recs) < 1e-12


def test_jordan_suite_matches_closed_form():
    recs = list(run_suite(ExperimentConfig("jordan-calculus", seed=2, instances=3)))
    assert all(r.quantities["max_error"]["value"] < 1e-9 for r in recs)


def test_log_is_append_only_and_cached(tmp_path):
    log = str(tmp_path / "log.jsonl")
    cfg = ExperimentConfig("phi-isometry", seed=5, instances=6, out=log)
    first = list(run_suite(cfg))
    size = os.path.getsize(log)
    second = list(run_suite(cfg))
    assert os.path.getsize(log) == size
    assert [r.to_json() for r in first] == [r.to_json() for r in second]
    list(run_suite(cfg.with_flags(instances=8)))
    assert len(read_log(log)) == 6 + 8


def test_results_do_not_depend_on_threads():
    cfg = ExperimentConfig("thm-main-verify", seed=7, instances=6)
    one = [r.quantity_fields() for r in run_suite(cfg.with_flags(threads=1))]
    eight = [r.quantity_fields() for r in run_suite(cfg.with_flags(threads=8))]
    assert json.dumps(one, sort_keys=True) == json.dumps(eight, sort_keys=True)


def test_stochastic_quantities_carry_seed():
    rec = next(run_suite(ExperimentConfig("rbound-oracle", seed=3, instances=1)))
    assert rec.quantities["r_hat"]["kind"] == "lower_bound" and "seed" in rec.quantities["r_hat"]


def test_empty_log_gives_header_only(tmp_path):
    log = write(tmp_path / "empty.jsonl", "")
    files = emit_report(log, str(tmp_path / "out"))
    with open(files[0]) as fh:
        rows = list(csv.reader(fh))
    assert rows == [["suite", "instance", "seed", "config_hash"]]


def test_profile_report_is_two_columns(tmp_path):
    log = str(tmp_path / "u.jsonl")
    list(run_suite(ExperimentConfig("hcalc-uniform", seed=1, out=log)))
    files = emit_report(log, str(tmp_path / "out"))
    prof = [f for f in files if os.path.basename(f).startswith("profile_")]
    with open(prof[0]) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["theta", "M"] and len(rows) == 6


def test_trace_report(tmp_path):
    log = str(tmp_path / "b.jsonl")
    list(run_suite(ExperimentConfig("basis-transfer", seed=1, instances=1, out=log)))
    files = emit_report(log, str(tmp_path / "out"))
    with open([f for f in files if os.path.basename(f).startswith("trace_")][0]) as fh:
        assert next(csv.reader(fh)) == ["iteration", "objective"]


def test_missing_log(tmp_path):
    with pytest.raises(FileNotFoundError):
        emit_report(str(tmp_path / "none.jsonl"), str(tmp_path))


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["suite", "nope", "--seed", "1"]) == 3
    assert main(["suite", "phi-isometry"]) == 2
    assert main(["report", str(tmp_path / "none.jsonl")]) == 4
    out = tmp_path / "r.jsonl"
    assert main(["suite", "phi-isometry", "--seed", "1", "--instances", "3", "--out", str(out)]) == 0
    assert len(read_log(str(out))) == 3


def test_cli_operations(tmp_path, capsys):
    ops = write(tmp_path / "ops.json", json.dumps({"operators": [[[1, 2], [3, 4]]]}))
    assert main(["rbound", "--input", ops, "--p", "1", "--sizes", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["r_hat"] == pytest.approx(6.0)
    assert main(["hcalc", "--matrix", "[[1,1],[0,1]]"]) == 0
    m = json.loads(capsys.readouterr().out)["matrix"]
    assert m["re"][0][1] == pytest.approx(1 / 27, abs=1e-9)
    assert main(["uniform-profile", "--matrix", "[[1,0],[0,2]]", "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("theta,M\n")
    blocks = write(tmp_path / "b.json", json.dumps({"blocks": [[[[1]], [[2]]], [[[0]], [[1]]]]}))
    assert main(["matnorm", "--input", blocks]) == 0
    assert json.loads(capsys.readouterr().out)["mat_r_norm"] == pytest.approx(1 + 2 ** 0.5)
    assert main(["alpha", "--dim", "2", "--n", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["alpha"] == pytest.approx(1.0)
    basis = write(tmp_path / "e.json", json.dumps({"basis": [[1, 1], [0, 1]]}))
    assert main(["basis-transfer", "--input", basis, "--p", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["constant_after"] == pytest.approx(1 + 2 ** 0.5)
    assert main(["radnorm", "--k", "3", "--dim", "2"]) == 0
    assert main(["density", "--input", ops, "--p", "3"]) == 0
    assert main(["rbound", "--input", str(tmp_path / "missing.json")]) == 4
    bad = write(tmp_path / "bad.json", json.dumps({"operators": [[[1, 2, 3], [3, 4, 5]]]}))
    assert main(["rbound", "--input", bad]) == 5
