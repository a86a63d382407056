"""Python access to the highway simulator, safety rules and experiment harness."""

import json as _json

from ._core import (
    AFFORDANCE_DIM,
    NUM_ACTIONS,
    ConfigError,
    EpisodeState,
    FormatError,
    Highway,
    TrainingError,
    command_names,
    gmm_nll,
    heuristic_check,
    run_command,
    state_safety,
)


def make_highway(scenario=None):
    """Build a Highway from a scenario dict; None gives the defaults."""
    return Highway(_json.dumps(scenario) if scenario else "")


__all__ = [
    "AFFORDANCE_DIM",
    "NUM_ACTIONS",
    "ConfigError",
    "EpisodeState",
    "FormatError",
    "Highway",
    "TrainingError",
    "command_names",
    "gmm_nll",
    "heuristic_check",
    "make_highway",
    "run_command",
    "state_safety",
]
