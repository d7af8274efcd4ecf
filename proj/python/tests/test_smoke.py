import math

import numpy as np
import pytest

import stefan_etc as se

SHORT = """
material_preset = nondimensional
s0 = 0.05
s_r = 0.30
N = 16
c1 = 3.2
c2 = 5
delta1 = 10
delta2 = 0.3
"""


def test_dwell_time_of_the_zinc_gains():
    tau, tau1, tau2 = se.min_dwell_time(se.ControllerGains())
    assert tau == pytest.approx(29.9651, abs=1e-4)
    assert tau == min(tau1, tau2)


def test_config_roundtrip_and_validation():
    cfg = se.ScenarioConfig.parse(SHORT)
    assert cfg.gains.c1 == 3.2
    assert cfg.validate() == []
    again = se.ScenarioConfig.parse(cfg.to_text())
    assert again.to_text() == cfg.to_text()
    cfg.set("delta2", "1.5")
    assert any("delta2" in v for v in cfg.validate())
    with pytest.raises(se.ConfigError):
        se.ScenarioConfig.parse("unknown_key = 1")
    with pytest.raises(se.ConfigError):
        se.simulate(cfg)


def test_simulation_is_safe_and_nonovershooting():
    out = se.simulate(se.ScenarioConfig.parse(SHORT))
    tr, summary = out["trace"], out["summary"]
    assert summary["converged"]
    assert summary["safe_set_pass"] and summary["dwell_pass"]
    assert np.all(np.diff(tr["s"]) >= 0.0)
    assert tr["s"].max() <= 0.30
    for key in ("h1", "h2", "h3", "h_min"):
        assert tr[key].min() >= -1e-9 * max(abs(tr["h1"][0]), tr["qc"].max())
    assert len(out["events"]) == summary["event_count"]
    assert out["events"][0][2] == "initial"
    gaps = np.diff([e[0] for e in out["events"]])
    assert gaps.min() >= summary["tau"] - summary["dt"]


def test_event_count_is_far_below_the_baseline():
    cfg = se.ScenarioConfig.parse(SHORT)
    etc = se.simulate(cfg)["summary"]
    base = se.simulate(cfg, mode="continuous")["summary"]
    assert etc["event_count"] <= 0.1 * base["event_count"]


def test_run_directory_passes_audit(tmp_path):
    cfg = se.ScenarioConfig.parse(SHORT)
    summary = se.run_scenario(cfg, tmp_path / "run")
    ok, checks = se.audit(tmp_path / "run")
    assert ok, checks
    assert {c[0] for c in checks} >= {"safe_set", "dwell_time", "energy_balance", "decay"}
    trace = se.read_trace(tmp_path / "run" / "trace.csv")
    assert trace["s"][-1] == summary["final_s"]


def test_sweep_records_failing_cells(tmp_path):
    cells = se.sweep(se.ScenarioConfig.parse(SHORT), "delta2=0.3,1.5", tmp_path / "sweep")
    assert cells[0]["summary"] is not None
    assert cells[1]["summary"] is None and cells[1]["error_kind"] == "ConfigError"
    assert (tmp_path / "sweep" / "sweep_summary.csv").exists()


def test_transform_roundtrip():
    p = se.PlantParams(1.0, 1.0, 1.0, 0.35, 0.0)
    eps = se.default_epsilon(p, 3.2)
    s, X, n = 0.2, -0.05, 400
    x = np.linspace(0.0, s, n)
    h = np.cos(math.pi * x / (2 * s))
    h[-1] = 0.0
    w = se.forward_transform(h, s, X, p, 3.2, eps)
    assert w[-1] == eps * X
    back = np.asarray(se.inverse_transform(w, s, X, p, 3.2, eps))
    assert np.max(np.abs(back - h)) < 1e-6
