import csv
import json

import numpy as np
import pytest

from cattaneo_hyp import cli
from cattaneo_hyp.config import ExperimentConfig
from cattaneo_hyp.errors import ConfigError, NumericalError

SMALL = {
    "gap_samples": 200, "sweep_states": 4, "sweep_directions": 4, "microlocal_samples": 10,
    "feasibility_directions": 5, "threads": 1,
    "wave": {"N": 16, "checkpoints": 6, "t_end": 5.0},
}


def run_cli(tmp_path, command, extra=None, flags=(), name="cfg.json"):
    cfg = {**SMALL, **(extra or {})}
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    out = tmp_path / ("out-" + name)
    code = cli.main([command, "--config", str(path), "--out", str(out), *flags])
    report = json.loads((out / "report.json").read_text()) if (out / "report.json").exists() else None
    return code, report, out


def test_config_roundtrip():
    cfg = ExperimentConfig(model="ccj-3d", seed=7, tolerances={"pairing": 1e-9})
    again = ExperimentConfig.from_dict(json.loads(cfg.to_json()))
    assert again == cfg and again.sha256() == cfg.sha256()
    assert cfg.tolerances["l2_drift"] == 1e-10


@pytest.mark.parametrize("data,field", [
    ({"tau": -1.0}, "tau"), ({"model": "navier"}, "model"), ({"state": {"rho": 0, "theta": 1}}, "state.rho"),
    ({"box": {"rho": [2, 1], "theta": [1, 1]}}, "box.rho"), ({"wave": {"M": 3}}, "wave"), ({"bogus": 1}, "bogus"),
])
def test_config_errors_name_the_field(data, field):
    with pytest.raises(ConfigError, match=field):
        ExperimentConfig.from_dict(data)


def test_bad_config_exit_code(tmp_path, capsys):
    code, report, _ = run_cli(tmp_path, "spectrum", {"tau": -0.5})
    assert code == 2 and report is None
    assert "tau" in capsys.readouterr().err


def test_usage_error_exit_code():
    assert cli.main(["frobnicate"]) == 2
    assert cli.main(["spectrum", "--config", "/nonexistent.json"]) == 2


def test_numerical_error_exit_code(tmp_path, monkeypatch):
    def boom(ctx):
        raise NumericalError("synthetic")
    monkeypatch.setattr(cli, "cmd_spectrum", boom)
    assert run_cli(tmp_path, "spectrum")[0] == 3


def test_spectrum_default(tmp_path):
    code, report, _ = run_cli(tmp_path, "spectrum", flags=["--strict"])
    assert code == 0 and report["all_passed"]
    sec = report["sections"]["spectrum"]
    assert sec["rows"][0]["z_plus_sq"] == pytest.approx(2, abs=1e-14)
    assert sec["rows"][0]["z_minus_sq"] == pytest.approx(1 / 3, abs=1e-14)
    assert sec["gap_bounds"]["delta1"] == 0.3203125
    for c in sec["checks"].values():
        assert "passed" in c and ("tolerance" in c or "expected" in c)


def test_christov_sweep_flagged(tmp_path):
    code, report, _ = run_cli(tmp_path, "spectrum", {"model": "general-lambda-nu", "lam": -1, "nu": 1})
    sweep = report["sections"]["spectrum"]["hyperbolicity_sweep"]
    assert not sweep["hyperbolic"] and sweep["witness"]["verdict"] in ("defective", "complex")
    assert sweep["max_abs_imag"] >= 0 and code == 0


def test_symmetrizer_reference(tmp_path):
    code, report, _ = run_cli(tmp_path, "symmetrizer", flags=["--strict"])
    sec = report["sections"]["symmetrizer"]
    assert code == 0 and sec["certificate"]["verdict"] == "infeasible"
    assert {"s66", "s77", "s88"} <= set(sec["certificate"]["forced_zero_diagonal"])
    assert sec["forced_zero_trace"][-1]["forced"] == ["s66", "s77", "s88"]


def test_coupling_one_d(tmp_path):
    code, report, out = run_cli(tmp_path, "coupling", {"model": "cattaneo-1d"}, ["--strict"])
    sec = report["sections"]["coupling"]
    assert code == 0 and sec["dissipativity"]["strictly_dissipative"]
    assert sec["dissipativity"]["max_real_part"] < -1e-10
    assert (out / "dissipativity.csv").exists()


def test_wave_outputs(tmp_path):
    code, report, out = run_cli(tmp_path, "wave", {"wave": {**SMALL["wave"], "write_field": True}}, ["--strict"])
    assert code == 0
    rows = list(csv.DictReader(open(out / "norms.csv")))
    assert len(rows) == 6
    l2 = np.array([float(r["l2_norm"]) for r in rows])
    assert np.max(np.abs(l2 - l2[0])) / l2[0] <= 1e-10
    assert json.loads((out / "wave_manifest.json").read_text())["grid"]["N"] == 16
    assert (out / "field.bin").stat().st_size == 8 + 32 + 16 + 16**3 * 8 * 8


def test_strict_flag(tmp_path):
    extra = {"model": "cattaneo-1d", "tolerances": {"strict_dissipativity": 1.0}}
    code, report, _ = run_cli(tmp_path, "coupling", extra)
    assert code == 0 and not report["all_passed"]
    assert run_cli(tmp_path, "coupling", extra, ["--strict"], name="b.json")[0] == 1


def test_reports_deterministic(tmp_path):
    _, _, a = run_cli(tmp_path, "all", name="a.json")
    _, _, b = run_cli(tmp_path, "all", {"threads": 3}, name="b.json")
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()


def test_seed_override(tmp_path):
    code, report, _ = run_cli(tmp_path, "spectrum", flags=["--seed", "11"])
    assert report["config"]["seed"] == 11
