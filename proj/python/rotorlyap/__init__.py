"""Transient stability assessment from rotor-angle trajectories."""

import json

from ._core import RotorlyapError, classify_swing, rls_fit, simulate, assess_json

__all__ = ["RotorlyapError", "assess", "assess_simulation", "classify_swing", "rls_fit", "simulate"]


def assess(ids, t0, dt, angles, speeds, fault_time, clear_time, rate=120, sigma=0.7, t_max=10.0):
    """Assess traces given per generator; returns the report as a dict."""
    return json.loads(assess_json(ids, t0, dt, angles, speeds, fault_time, clear_time, rate, sigma, t_max))


def assess_simulation(result, **kwargs):
    """Assess the dict returned by simulate()."""
    return assess(result["ids"], result["t0"], result["dt"], result["angles"], result["speeds"],
                  result["fault_time"], result["clear_time"], **kwargs)
