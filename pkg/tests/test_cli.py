"""End-to-end CLI contract tests: exit codes, schemas, determinism."""

import json
import math
import subprocess
import sys

import pytest

from treepressure.cli import validate_report_document


def run_cli(tmp_path, command, config, out_name, mode=None):
    cfg_path = tmp_path / f"cfg_{command}_{out_name}.json"
    cfg_path.write_text(json.dumps(config))
    out_path = tmp_path / out_name
    argv = [
        sys.executable, "-m", "treepressure",
        "--command", command,
        "--config", str(cfg_path),
        "--out", str(out_path),
    ]
    if mode:
        argv += ["--mode", mode]
    proc = subprocess.run(argv, capture_output=True, text=True)
    return proc, out_path


def read_csv(path):
    lines = path.read_text().strip().split("\n")
    assert lines[0].startswith("# schema=1")
    header = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:]]
    return header, rows


TREE_CFG = {
    "map": {"family": "chebyshev"},
    "potential": {"kind": "constant", "value": 0.0},
    "x": 0.3,
    "n_max": 12,
}


def test_tree_pressure_csv(tmp_path):
    proc, out = run_cli(tmp_path, "tree_pressure", TREE_CFG, "tree.csv")
    assert proc.returncode == 0
    header, rows = read_csv(out)
    assert header == ["n", "estimate", "log_sum", "leaf_count", "pole_hits",
                      "min_pole_distance", "cauchy_increment", "elapsed_ms"]
    assert len(rows) == 12
    for row in rows:
        assert abs(float(row[1]) - math.log(2.0)) < 1e-12


def test_missing_field_names_it(tmp_path):
    cfg = dict(TREE_CFG)
    del cfg["x"]
    proc, _ = run_cli(tmp_path, "tree_pressure", cfg, "t.csv")
    assert proc.returncode == 2
    assert '"x"' in proc.stderr


def test_depth_cap_is_runtime_error(tmp_path):
    cfg = dict(TREE_CFG, n_max=30)
    proc, _ = run_cli(tmp_path, "tree_pressure", cfg, "t.csv")
    assert proc.returncode == 3


def test_compare_tree_vs_ulam(tmp_path):
    cfg = {
        "map": {"family": "chebyshev"},
        "potential": {"kind": "polynomial", "coeffs": [0.0, 0.5]},
        "x": 0.3,
        "estimators": [
            {"method": "tree", "n": 14},
            {"method": "ulam", "bins": 2048},
        ],
    }
    proc, out = run_cli(tmp_path, "compare", cfg, "cmp.csv")
    assert proc.returncode == 0
    header, rows = read_csv(out)
    assert header == ["method", "value", "parameters", "discrepancy"]
    assert rows[0][0] == "tree" and rows[1][0] == "ulam"
    assert abs(float(rows[1][3])) <= 1e-2


def test_compare_rejects_ulam_on_repeller(tmp_path):
    cfg = {
        "map": {"family": "logistic", "a": 4.5},
        "potential": {"kind": "constant", "value": 0.0},
        "x": 0.3,
        "estimators": [{"method": "tree", "n": 8}, {"method": "ulam", "bins": 1024}],
    }
    proc, _ = run_cli(tmp_path, "compare", cfg, "cmp.csv")
    assert proc.returncode == 2


def test_compare_rejects_single_estimator(tmp_path):
    cfg = {
        "map": {"family": "chebyshev"},
        "potential": {"kind": "constant", "value": 0.0},
        "x": 0.3,
        "estimators": [{"method": "tree", "n": 8}],
    }
    proc, _ = run_cli(tmp_path, "compare", cfg, "cmp.csv")
    assert proc.returncode == 2


def test_exceptional_report_json(tmp_path):
    cfg = {
        "map": {"family": "chebyshev"},
        "potential": {"kind": "geometric", "t": -0.5},
    }
    proc, out = run_cli(tmp_path, "exceptional", cfg, "exc.json")
    assert proc.returncode == 0
    doc = json.loads(out.read_text())
    validate_report_document(doc)
    assert doc["report"]["status"] == "exceptional"
    assert doc["report"]["sigma"] == [0.0, 1.0]


def test_normality_report_json(tmp_path):
    cfg = {"map": {"family": "chebyshev"}, "lambda": [0.5], "x": 1.0, "n": 1}
    proc, out = run_cli(tmp_path, "normality", cfg, "norm.json")
    assert proc.returncode == 0
    doc = json.loads(out.read_text())
    validate_report_document(doc)
    assert doc["report"]["normal"] is False

    cfg = {"map": {"family": "chebyshev"}, "lambda": [0.5], "x": 0.3, "n": 12}
    proc, out = run_cli(tmp_path, "normality", cfg, "norm2.json")
    doc = json.loads(out.read_text())
    assert doc["report"]["normal"] is True
    assert len(doc["report"]["witness"]) == 12


def test_hyperbolicity_report_json(tmp_path):
    cfg = {
        "map": {"family": "chebyshev"},
        "potential": {"kind": "constant", "value": 0.0},
        "n": 5,
        "oracle": {"method": "ulam", "bins": 1024},
    }
    proc, out = run_cli(tmp_path, "hyperbolicity", cfg, "hyp.json")
    assert proc.returncode == 0
    doc = json.loads(out.read_text())
    validate_report_document(doc)
    assert doc["report"]["verdict"] == "hyperbolic"
    assert abs(doc["report"]["margin"] - math.log(2.0)) < 1e-2


def test_cohomology_report_json(tmp_path):
    cfg = {
        "map": {"family": "chebyshev"},
        "potential": {"kind": "polynomial", "coeffs": [0.0, 0.5]},
        "N": 4,
    }
    proc, out = run_cli(tmp_path, "cohomology", cfg, "coh.json")
    assert proc.returncode == 0
    doc = json.loads(out.read_text())
    validate_report_document(doc)
    rep = doc["report"]
    assert rep["max_residual"] < 1e-10
    assert rep["telescoping_residual"] < 1e-8
    assert rep["snbound_holds"] is True


def test_unreadable_config_is_config_error(tmp_path):
    out = tmp_path / "x.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "treepressure", "--command", "tree_pressure",
         "--config", str(tmp_path / "missing.json"), "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 2


def test_invalid_map_parameter_is_config_error(tmp_path):
    cfg = dict(TREE_CFG, map={"family": "logistic", "a": 4.2})
    proc, _ = run_cli(tmp_path, "tree_pressure", cfg, "t.csv")
    assert proc.returncode == 2


def test_determinism_modulo_elapsed(tmp_path):
    cfg = {
        "map": {"family": "chebyshev"},
        "potential": {"kind": "geometric", "t": -0.5},
        "x": 0.3,
        "n_max": 10,
    }
    _, out1 = run_cli(tmp_path, "tree_pressure", cfg, "a.csv")
    _, out2 = run_cli(tmp_path, "tree_pressure", cfg, "b.csv")
    h1, rows1 = read_csv(out1)
    h2, rows2 = read_csv(out2)
    assert h1 == h2
    drop = h1.index("elapsed_ms")
    for r1, r2 in zip(rows1, rows2):
        assert r1[:drop] == r2[:drop]


def test_parallel_mode_matches_serial(tmp_path):
    cfg = {
        "map": {"family": "chebyshev"},
        "potential": {"kind": "polynomial", "coeffs": [0.0, 0.5]},
        "x": 0.3,
        "n_max": 10,
    }
    _, out1 = run_cli(tmp_path, "tree_pressure", cfg, "s.csv", mode="serial")
    _, out2 = run_cli(tmp_path, "tree_pressure", cfg, "p.csv", mode="parallel")
    _, rows1 = read_csv(out1)
    _, rows2 = read_csv(out2)
    for r1, r2 in zip(rows1, rows2):
        assert abs(float(r1[2]) - float(r2[2])) <= 1e-12
        assert r1[3] == r2[3]


def test_real_columns_have_17_significant_digits(tmp_path):
    proc, out = run_cli(tmp_path, "tree_pressure", TREE_CFG, "digits.csv")
    _, rows = read_csv(out)
    # log 2 at 17 significant digits
    assert rows[0][1] == "0.69314718055994529"
