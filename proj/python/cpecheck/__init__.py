"""Numerical identity checks for critical point equation metrics on 4-manifolds."""

import json

from ._core import (
    CheckEvaluationError,
    ScenarioError,
    __version__,
    cpe_residuals,
    curvature_at,
    list_checks,
    list_fixtures,
    run_scenario_json,
)


def run_scenario(scenario, threads=1, include_run_info=False):
    """Run a scenario (dict or JSON text) and return the report as a dict."""
    text = scenario if isinstance(scenario, str) else json.dumps(scenario)
    return json.loads(run_scenario_json(text, threads, include_run_info))


__all__ = [
    "CheckEvaluationError",
    "ScenarioError",
    "__version__",
    "cpe_residuals",
    "curvature_at",
    "list_checks",
    "list_fixtures",
    "run_scenario",
    "run_scenario_json",
]
