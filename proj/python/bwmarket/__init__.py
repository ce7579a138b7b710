"""Bandwidth market simulator and SDE calibration toolkit."""

import json

from ._core import *  # noqa: F401,F403
from ._core import NoiseKind, _estimate_report_json, __version__  # noqa: F401


def estimate_report(values, dt=0.01, model=NoiseKind.MULTIPLICATIVE, bins=15, k_max=20,
                    guard=0.04, k_fit=0):
    """Full calibration report for one series, as a dict."""
    return json.loads(_estimate_report_json(values, dt, model, bins, k_max, guard, k_fit))
