import csv
import json

import numpy as np
import pytest

from momentum_lab.cli import main
from momentum_lab.config import DEFAULTS, apply_overrides, load_config
from momentum_lab.sweep import SWEEP_COLUMNS


def test_config_defaults_and_unknown_key(tmp_path):
    cfg = load_config(None)
    assert cfg["kernel"]["gamma"] == 0.1
    bad = tmp_path / "c.json"
    bad.write_text(json.dumps({"nope": 1}))
    with pytest.raises(ValueError, match="unknown config keys"):
        load_config(str(bad))


def test_dotted_overrides():
    cfg = load_config(None)
    apply_overrides(cfg, [("kernel.gamma", "0.2"), ("dataset.path", "d.csv"),
                          ("m_grid", "[1,2]"), ("standardize", "false")])
    assert cfg["kernel"]["gamma"] == 0.2
    assert cfg["dataset"]["path"] == "d.csv"
    assert cfg["m_grid"] == [1, 2]
    assert cfg["standardize"] is False
    with pytest.raises(ValueError, match="unknown config key"):
        apply_overrides(cfg, [("bogus.path", "1")])


def test_synth_roundtrip_via_cli(tmp_path):
    out = tmp_path / "prob.npz"
    rc = main(["synth", "--n", "24", "--kappa", "500", "--seed", "3", "--out", str(out)])
    assert rc == 0 and out.exists()
    z = np.load(out)
    assert z["matrix"].shape == (24, 24)


def test_solve_on_synthetic(tmp_path, capsys):
    out = tmp_path / "run.csv"
    rc = main([
        "solve",
        "--dataset.synth", json.dumps({"n": 48, "kappa": 400, "seed": 0}),
        "--m_grid", "[4]", "--k_grid", "[8]", "--tolerance", "1e-7",
        "--max_iters", "20000", "--output_path", str(out),
    ])
    assert rc == 0
    rows = list(csv.reader(open(out)))
    assert rows[0] == SWEEP_COLUMNS
    assert rows[1][SWEEP_COLUMNS.index("converged")] == "true"
    manifest = json.load(open(tmp_path / "run.manifest.json"))
    assert manifest["config"]["m_grid"] == [4]


def test_sweep_cli_smoke(tmp_path):
    out = tmp_path / "sweep.csv"
    rc = main([
        "sweep",
        "--dataset.synth", json.dumps({"n": 32, "kappa": 300, "seed": 1}),
        "--variants", json.dumps([{"tag": "cd"}, {"tag": "cd-nag", "omega": 1.0}]),
        "--m_grid", "[1,4]", "--k_grid", "[4]", "--seeds", "[0]",
        "--tolerance", "1e-6", "--max_iters", "30000",
        "--output_path", str(out),
    ])
    assert rc == 0
    rows = list(csv.reader(open(out)))
    assert len(rows) == 1 + 2 * 2
    assert (tmp_path / "sweep.manifest.json").exists()


def test_adaptive_cli(tmp_path):
    out = tmp_path / "adaptive.csv"
    rc = main([
        "adaptive",
        "--dataset.synth", json.dumps({"n": 64, "kappa": 2000, "seed": 2}),
        "--m_grid", "[8]", "--k_grid", "[8]", "--tolerance", "1e-8",
        "--max_iters", "4000", "--output_path", str(out),
        "--adaptive", json.dumps({"warmup": 20, "check_interval": 5, "probe_rows": 48}),
    ])
    assert rc == 0
    manifest = json.load(open(tmp_path / "adaptive.manifest.json"))
    assert "adaptive" in manifest
    assert manifest["adaptive"]["selected_beta"] >= 0.5


def test_dataset_path_override_beats_default_synth(tmp_path):
    prob = tmp_path / "prob.npz"
    main(["synth", "--n", "20", "--kappa", "80", "--seed", "1", "--out", str(prob)])
    out = tmp_path / "run.csv"
    rc = main([
        "solve", "--dataset.path", str(prob),
        "--m_grid", "[2]", "--k_grid", "[4]", "--tolerance", "1e-6",
        "--max_iters", "20000", "--output_path", str(out),
    ])
    assert rc == 0
    rows = list(csv.reader(open(out)))
    assert rows[1][0].startswith("synth-n20-kappa80")


def test_kernel_pipeline_from_csv(tmp_path):
    rng = np.random.default_rng(0)
    path = tmp_path / "data.csv"
    with open(path, "w") as fh:
        fh.write("f1,f2,f3,target\n")
        for _ in range(40):
            x = rng.standard_normal(3)
            fh.write(f"{x[0]},{x[1]},{x[2]},{rng.standard_normal()}\n")
    out = tmp_path / "kernel.csv"
    rc = main([
        "solve", "--dataset", json.dumps({"path": str(path)}),
        "--target_column", "target", "--n_subsample", "32",
        "--kernel.lambda", "0.5", "--m_grid", "[2]", "--k_grid", "[4]",
        "--tolerance", "1e-6", "--max_iters", "20000",
        "--output_path", str(out),
    ])
    assert rc == 0
    rows = list(csv.reader(open(out)))
    assert rows[1][SWEEP_COLUMNS.index("dataset")] == "data.csv"


def test_verify_theory_cli(tmp_path, capsys):
    out = tmp_path / "records.csv"
    rc = main(["verify-theory", "--suite", "eigenvalues", "schur", "--seed", "1",
               "--out", str(out)])
    assert rc == 0
    captured = capsys.readouterr().out
    assert "pass" in captured
    rows = list(csv.reader(open(out)))
    assert rows[0] == ["name", "params", "lhs", "rhs", "margin", "passed"]
    assert len(rows) > 5


def test_mc_variance_cli(capsys):
    rc = main(["mc-variance", "--n", "8", "--m-grid", "1,2", "--draws", "20000",
               "--seed", "0"])
    assert rc == 0
    assert "minibatch-variance-envelope" in capsys.readouterr().out
