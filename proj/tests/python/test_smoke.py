import math
import pathlib

import numpy as np
import pytest

import cpecheck

SCENARIOS = pathlib.Path(__file__).resolve().parents[1] / "scenarios"


def test_catalogs():
    ids = {f["id"] for f in cpecheck.list_fixtures()}
    assert {"s4_round", "cp2_fubini_study", "s2xs2", "flat_torus"} <= ids
    checks = {c["id"]: c for c in cpecheck.list_checks()}
    assert checks["codazzi"]["needs_regular_point"]
    assert checks["weitzenbock"]["tier"] == "tier4"


def test_round_sphere_curvature():
    c = cpecheck.curvature_at("s4_round", [0.1, -0.2, 0.3, 0.05])
    assert c["riemann"].shape == (4, 4, 4, 4)
    assert c["scalar"] == pytest.approx(12.0, abs=1e-10)
    g, ric = c["metric"], c["ricci"]
    assert np.allclose(ric, 3.0 * g, atol=1e-10)
    r = c["riemann"]
    assert np.allclose(r, -np.transpose(r, (1, 0, 2, 3)), atol=1e-12)
    assert np.allclose(r, np.transpose(r, (2, 3, 0, 1)), atol=1e-12)


def test_cpe_residuals_sphere_and_negative_control():
    s4 = cpecheck.cpe_residuals("s4_round", "height5", [0.2, 0.1, -0.3, 0.4])
    assert np.abs(s4["cpe"]).max() < 1e-10
    assert abs(s4["trace"]) < 1e-10
    prod = cpecheck.cpe_residuals("s2xs2", "x1", [0.2, 0.1, -0.3, 0.4], params={"a": 1, "b": 2})
    assert np.abs(prod["cpe"]).max() > 1e-3
    # The two residual forms differ by -trace * g.
    g = cpecheck.curvature_at("s2xs2", [0.2, 0.1, -0.3, 0.4], params={"a": 1, "b": 2})["metric"]
    assert np.allclose(prod["cpe"] + prod["cpe_via_adjoint"], -prod["trace"] * g, atol=1e-10)


def test_run_scenario_file():
    report = cpecheck.run_scenario((SCENARIOS / "s4_cpe.json").read_text())
    assert report["pass"]
    assert "run_info" not in report
    for check in report["checks"]:
        assert math.isfinite(check["summary"]["max"])


def test_thread_count_does_not_change_report():
    text = (SCENARIOS / "generic_identities.json").read_text()
    assert cpecheck.run_scenario_json(text, 1) == cpecheck.run_scenario_json(text, 3)


def test_errors():
    with pytest.raises(cpecheck.ScenarioError, match="line 3, column"):
        cpecheck.run_scenario((SCENARIOS / "malformed.json").read_text())
    with pytest.raises(ValueError, match="/checks/1"):
        cpecheck.run_scenario((SCENARIOS / "unknown_check.json").read_text())
    with pytest.raises(ValueError):
        cpecheck.curvature_at("s4_round", [0.0, 0.0, 0.0])
