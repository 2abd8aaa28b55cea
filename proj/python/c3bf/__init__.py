"""Collision-cone control barrier function safety filter."""

import json as _json
from pathlib import Path as _Path

from ._core import (
    CbfEvaluation,
    FilterConfig,
    FilterResult,
    ModelParams,
    Obstacle,
    SimulationError,
    UnsupportedError,
    ValidationError,
    c3bf_eval,
    c3bf_value,
    derivative,
    evaluate_cbf,
    filter_qp,
    filter_single,
    integrate_step,
    normalize_scenario,
    render_svg,
    validate_scenario,
)
from ._core import simulate as _simulate

__all__ = [
    "CbfEvaluation",
    "FilterConfig",
    "FilterResult",
    "ModelParams",
    "Obstacle",
    "SimulationError",
    "UnsupportedError",
    "ValidationError",
    "c3bf_eval",
    "c3bf_value",
    "derivative",
    "evaluate_cbf",
    "filter_qp",
    "filter_single",
    "integrate_step",
    "normalize_scenario",
    "render_svg",
    "simulate",
    "validate_scenario",
]


def simulate(scenario, dt=None, duration=None, gamma=None):
    """Run a scenario given as a dict, a JSON string or a path to a JSON file.

    Returns a dict of NumPy arrays (t, state, u_ref, u_star, h, psi, dist, r), the
    collision flag, the parsed run summary and the trajectory CSV text.
    """
    if isinstance(scenario, dict):
        text = _json.dumps(scenario)
    elif isinstance(scenario, _Path) or (isinstance(scenario, str) and not scenario.lstrip().startswith("{")):
        text = _Path(scenario).read_text()
    else:
        text = scenario
    out = _simulate(text, dt, duration, gamma)
    out["summary"] = _json.loads(out.pop("summary_json"))
    return out
