"""CLI behavior: exit codes, config handling, determinism of result files."""

import json
import os

import numpy as np
import pytest
from click.testing import CliRunner

from rescomp.cli import main
from rescomp.core import SubsystemShape, basis_state, maximally_coherent_state
from rescomp.freesets import PolytopeFamily


def _run(args):
    return CliRunner().invoke(main, args)


def test_measure_writes_csv_and_manifest(tmp_path):
    out = str(tmp_path / "out")
    res = _run([
        "measure", "--family", "incoherent:2", "--state", "plus_state:2",
        "--measures", "E,R,logR", "--output-dir", out,
    ])
    assert res.exit_code == 0
    lines = open(os.path.join(out, "measures.csv")).read().strip().split("\n")
    assert lines[0] == "measure,family,state_id,n,value,gap"
    assert len(lines) == 4
    # E(|+>) = 1, R = 1, logR = 1
    values = [float(l.split(",")[4]) for l in lines[1:]]
    np.testing.assert_allclose(values, 1.0, atol=1e-4)
    manifest = json.load(open(os.path.join(out, "manifest.json")))
    assert manifest["command"] == "measure"
    assert manifest["seed"] == 0
    assert "rescomp" in manifest["versions"]
    assert manifest["wall_time_s"] >= 0.0
    # stdout carries no data
    assert res.stdout.strip() == ""


def test_config_error_exit_code(tmp_path):
    out = str(tmp_path / "o")
    res = _run(["measure", "--family", "nosuch:2", "--state", "plus_state:2",
                "--output-dir", out])
    assert res.exit_code == 1
    res = _run(["measure", "--family", "incoherent:2", "--output-dir", out])
    assert res.exit_code == 1  # no states
    res = _run(["measure", "--config", str(tmp_path / "missing.toml")])
    assert res.exit_code == 1
    bad = tmp_path / "bad.toml"
    bad.write_text("family = [unterminated")
    res = _run(["measure", "--config", str(bad)])
    assert res.exit_code == 1


def test_nonconvergence_exit_code_results_still_written(tmp_path):
    out = str(tmp_path / "o")
    cfg = tmp_path / "c.toml"
    cfg.write_text(
        'family = "ppt:2,2:1"\nstates = ["random:11:2,2:4"]\nmeasures = "E"\n'
        f'output_dir = "{out}"\n[solver]\nmax_iterations = 1\ntolerance = 1e-14\n'
    )
    res = _run(["measure", "--config", str(cfg)])
    assert res.exit_code == 2
    lines = open(os.path.join(out, "measures.csv")).read().strip().split("\n")
    assert len(lines) == 2  # flagged result row still present
    detail = json.load(open(os.path.join(out, "measures.json")))
    assert detail["random:11:2,2:4"]["E"]["converged"] is False


def test_validate_pass_and_fail(tmp_path):
    out = str(tmp_path / "ok")
    res = _run(["validate", "--family", "incoherent:2", "--samples", "8",
                "--output-dir", out])
    assert res.exit_code == 0
    report = open(os.path.join(out, "postulates.txt")).read()
    assert report.count("PASS") == 5
    # adversarial naive polytope: exit 3 with counterexample serialized
    fam = PolytopeFamily(
        SubsystemShape((2,)),
        [basis_state((2,), 0), maximally_coherent_state(2)],
        n_copy_mode="naive",
    )
    fam_file = tmp_path / "family.json"
    fam_file.write_text(json.dumps(fam.to_obj()))
    out2 = str(tmp_path / "bad")
    res = _run(["validate", "--family", str(fam_file), "--samples", "8",
                "--output-dir", out2])
    assert res.exit_code == 3
    written = os.listdir(out2)
    assert any(name.startswith("counterexample_") for name in written)


def test_target_is_free_exit_code(tmp_path):
    out = str(tmp_path / "o")
    res = _run(["convert", "--source", "plus_state:2", "--target", "mixed:2",
                "--family", "incoherent:2", "--output-dir", out])
    assert res.exit_code == 4


def test_dimension_cap_exit_code(tmp_path):
    out = str(tmp_path / "o")
    res = _run(["stein", "--family", "incoherent:2", "--state", "plus_state:2",
                "--n-max", "20", "--output-dir", out])
    assert res.exit_code == 5


def test_stein_csv_contents(tmp_path):
    out = str(tmp_path / "o")
    res = _run(["stein", "--family", "maxmixed:2", "--state", "plus_state:2",
                "--n-max", "2", "--eps", "0.05", "--output-dir", out])
    assert res.exit_code == 0
    lines = open(os.path.join(out, "stein.csv")).read().strip().split("\n")
    assert lines[0] == "n,beta,exponent,e_infinity_estimate"
    beta1 = float(lines[1].split(",")[1])
    assert beta1 == pytest.approx(0.95 / 2, abs=1e-9)


def test_rescomp_seed_env_override(tmp_path, monkeypatch):
    out = str(tmp_path / "o")
    monkeypatch.setenv("RESCOMP_SEED", "42")
    res = _run(["validate", "--family", "incoherent:2", "--samples", "4",
                "--seed", "7", "--output-dir", out])
    assert res.exit_code == 0
    manifest = json.load(open(os.path.join(out, "manifest.json")))
    assert manifest["seed"] == 42  # env beats both flag and config


def test_flag_overrides_config(tmp_path):
    out = str(tmp_path / "o")
    cfg = tmp_path / "c.toml"
    cfg.write_text('family = "incoherent:3"\nsamples = 4\n')
    res = _run(["validate", "--config", str(cfg), "--family", "incoherent:2",
                "--output-dir", out])
    assert res.exit_code == 0
    manifest = json.load(open(os.path.join(out, "manifest.json")))
    assert manifest["config"]["family"] == "incoherent:2"


def test_rerun_byte_identical(tmp_path):
    args = ["measure", "--family", "incoherent:3",
            "--state", "plus_state:3", "--state", "random:7:3:2",
            "--measures", "E,R,logR,T"]
    outs = []
    for sub in ("a", "b"):
        out = str(tmp_path / sub)
        assert _run(args + ["--output-dir", out]).exit_code == 0
        outs.append(out)
    for name in ("measures.csv", "measures.json"):
        a = open(os.path.join(outs[0], name), "rb").read()
        b = open(os.path.join(outs[1], name), "rb").read()
        assert a == b, f"{name} differs between reruns"


def test_report_summarizes_runs(tmp_path):
    out = str(tmp_path / "o")
    res = _run(["measure", "--family", "incoherent:2", "--state", "plus_state:2",
                "--measures", "E", "--output-dir", out])
    assert res.exit_code == 0
    rep = str(tmp_path / "rep")
    res = _run(["report", "--input-dir", out, "--output-dir", rep])
    assert res.exit_code == 0
    summary = json.load(open(os.path.join(rep, "report.json")))
    assert summary["files"][0]["name"] == "measures.csv"
    assert summary["files"][0]["rows"] == 1
    assert summary["source_manifest"]["command"] == "measure"
