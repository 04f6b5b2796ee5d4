"""Command-line artifacts: sweeps, exit codes, bytes, and provenance."""

import csv
import json

import numpy as np
import pytest

from qplattice import __version__
from qplattice.cli import main
from qplattice.operators import config_digest

FREE_OPERATOR = {
    "hopping": [[1, 1.0, 0.0]],
    "potential": {"type": "fourier", "coefficients": []},
    "epsilon": 0.0,
}
AMO_HALF = {
    "hopping": [[1, 1.0, 0.0]],
    "potential": {"type": "fourier", "coefficients": [[1, 0.5, 0.0], [-1, 0.5, 0.0]]},
    "theta": 0.2,
    "epsilon": 1.0,
}
FREE_EXPONENT_AT_3 = 0.9624236501192069
STABLE_ANGLE_AT_3 = 0.3648638281134832


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def read_table(path):
    with open(path, newline="") as fh:
        lines = list(csv.reader(fh))
    assert lines[-1][0].startswith("# config=")
    return lines[0], lines[1:-1], lines[-1][0]


# ── sweeps and artifacts ─────────────────────────────────────────────────────

def test_lyapunov_artifact(tmp_path):
    cfg = {"operator": FREE_OPERATOR, "grid": {"values": [3.0, 4.0]},
           "steps": 3000, "samples": 4}
    assert main(["lyapunov", "--config", write_config(tmp_path, cfg),
                 "--out", str(tmp_path)]) == 0
    header, rows, footer = read_table(tmp_path / "lyapunov.csv")
    assert header == ["E", "L1", "L2", "spread"]
    assert len(rows) == 2
    energy, top, bottom, spread = (float(v) for v in rows[0])
    assert energy == 3.0
    assert abs(top - FREE_EXPONENT_AT_3) < 5e-3
    assert abs(top + bottom) < 1e-9      # exponents pair to zero
    assert spread < 1e-6                 # constant potential: no phase scatter
    assert footer == "# config=%s version=%s seed=0" % (config_digest(cfg),
                                                        __version__)


def test_parallel_runs_emit_identical_bytes(tmp_path):
    cfg = {"operator": FREE_OPERATOR,
           "grid": {"start": 2.5, "stop": 4.5, "count": 3},
           "steps": 1500, "samples": 4}
    path = write_config(tmp_path, cfg)
    serial, fanned = tmp_path / "serial", tmp_path / "fanned"
    assert main(["lyapunov", "--config", path, "--out", str(serial)]) == 0
    assert main(["lyapunov", "--config", path, "--out", str(fanned),
                 "--jobs", "3"]) == 0
    assert (serial / "lyapunov.csv").read_bytes() == (fanned / "lyapunov.csv").read_bytes()


def test_ids_artifact(tmp_path):
    cfg = {"operator": FREE_OPERATOR,
           "grid": {"start": -2.5, "stop": 2.5, "count": 41},
           "truncation": 256, "samples": 4}
    assert main(["ids", "--config", write_config(tmp_path, cfg),
                 "--out", str(tmp_path)]) == 0
    header, rows, _ = read_table(tmp_path / "ids.csv")
    assert header == ["E", "N"]
    assert len(rows) == 41
    values = np.array([float(r[1]) for r in rows])
    assert values[20] == 0.5             # grid midpoint sits at zero energy
    assert np.all(np.diff(values) >= 0)
    assert values[0] == 0.0 and values[-1] == 1.0


def test_splitting_survey(tmp_path):
    cfg = {"operator": FREE_OPERATOR, "grid": {"values": [3.0, 0.0]}}
    assert main(["splitting", "--config", write_config(tmp_path, cfg),
                 "--out", str(tmp_path)]) == 0
    header, rows, _ = read_table(tmp_path / "splitting.csv")
    assert header == ["E", "dim_unstable", "dim_center", "dim_stable", "gap",
                      "angle_stable", "angle_center"]
    hyperbolic, elliptic = rows
    assert [float(v) for v in hyperbolic[1:4]] == [1.0, 0.0, 1.0]
    assert float(hyperbolic[4]) > 1.0
    assert abs(float(hyperbolic[5]) - STABLE_ANGLE_AT_3) < 1e-6
    assert [float(v) for v in elliptic[1:4]] == [0.0, 2.0, 0.0]
    assert elliptic[4] == "nan"


def test_thouless_partial_failure_keeps_good_rows(tmp_path):
    # the second energy sits on the spectrum, where the quadrature refuses
    cfg = {"operator": FREE_OPERATOR, "grid": {"values": [3.0, 0.0]},
           "steps": 3000, "samples": 4,
           "ids": {"truncation": 256, "samples": 4}}
    assert main(["thouless", "--config", write_config(tmp_path, cfg),
                 "--out", str(tmp_path)]) == 2
    header, rows, _ = read_table(tmp_path / "thouless.csv")
    assert header == ["E", "exponent_sum", "residual", "error"]
    good, bad = rows
    assert float(good[2]) < 1e-2 and good[3] == ""
    assert bad[1] == "nan" and "grid step" in bad[3]


def test_weyl_artifact(tmp_path):
    cfg = {"operator": FREE_OPERATOR, "energy": 0.0,
           "eps_grid": {"values": [0.1, 0.03]}}
    assert main(["weyl", "--config", write_config(tmp_path, cfg),
                 "--out", str(tmp_path)]) == 0
    header, rows, _ = read_table(tmp_path / "weyl.csv")
    assert header == ["eps", "trace_im", "mu_bound", "growth_bound",
                      "criterion_lhs", "criterion_rhs"]
    for row in rows:
        values = [float(v) for v in row]
        assert values[1] > 0
        assert values[2] <= values[3] * (1 + 1e-9)


def test_weyl_needs_a_neutral_direction(tmp_path):
    cfg = {"operator": FREE_OPERATOR, "energy": 3.0,
           "eps_grid": {"values": [0.1]}}
    assert main(["weyl", "--config", write_config(tmp_path, cfg),
                 "--out", str(tmp_path)]) == 1


# ── config errors ────────────────────────────────────────────────────────────

def test_config_errors(tmp_path):
    assert main(["lyapunov", "--out", str(tmp_path)]) == 1
    assert main(["lyapunov", "--config", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path)]) == 1
    empty = write_config(tmp_path, {"operator": FREE_OPERATOR,
                                    "grid": {"values": []}}, "empty.json")
    assert main(["lyapunov", "--config", empty, "--out", str(tmp_path)]) == 1
    bad_root = tmp_path / "list.json"
    bad_root.write_text("[1, 2]")
    assert main(["ids", "--config", str(bad_root), "--out", str(tmp_path)]) == 1


# ── JSON commands ────────────────────────────────────────────────────────────

def test_subordinacy_report(tmp_path):
    cfg = {"operator": FREE_OPERATOR, "energy": 0.0, "radii": [64, 128]}
    assert main(["subordinacy", "--config", write_config(tmp_path, cfg),
                 "--out", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "subordinacy.json").read_text())
    assert payload["ok"] is True
    assert payload["trend"] == "saturating"
    assert len(payload["records"]) == 2
    prov = payload["provenance"]
    assert prov == {"config": config_digest(cfg), "version": __version__,
                    "seed": 0}


def test_duality_report(tmp_path):
    cfg = {"operator": AMO_HALF, "energy": 0.5,
           "truncation": 801, "window": 128}
    assert main(["duality", "--config", write_config(tmp_path, cfg),
                 "--out", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "duality.json").read_text())
    assert payload["residual"] < 1e-6
    assert 0.0 <= payload["dual_tail_mass"] <= 1.0
    assert payload["window"] == 128


def test_verify_filtered(tmp_path):
    cfg = {"filter": "free"}
    assert main(["verify", "--config", write_config(tmp_path, cfg),
                 "--out", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "verify.json").read_text())
    assert payload["ok"] is True
    (entry,) = payload["entries"]
    assert entry["name"] == "free_laplacian"
