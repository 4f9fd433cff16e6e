"""Multiple-model Kalman TD and successor-representation learners."""

import json

from ._maktd import (
    InvalidInput,
    MakSrLearner,
    MakTdLearner,
    MmaeFilter,
    ParticleWorld,
    RbfBank,
    RgdBranch,
    RunAborted,
    scenarios,
)
from . import _maktd

__all__ = [
    "InvalidInput",
    "MakSrLearner",
    "MakTdLearner",
    "MmaeFilter",
    "ParticleWorld",
    "RbfBank",
    "RgdBranch",
    "RunAborted",
    "default_config",
    "evaluate",
    "monte_carlo",
    "run",
    "scenarios",
]


def default_config():
    return json.loads(_maktd.default_config_json())


def run(config=None, run_index=0):
    """Train then test one run. Returns (train_records, test_records, checkpoint)."""
    train, test, checkpoint = _maktd.run(json.dumps(config or {}), run_index)
    return train, test, json.loads(checkpoint)


def evaluate(checkpoint):
    """Greedy test episodes for a checkpoint dict returned by run()."""
    return _maktd.evaluate_checkpoint(json.dumps(checkpoint))


def monte_carlo(config=None):
    """Summary statistics over config["mc_runs"] independent runs."""
    return json.loads(_maktd.monte_carlo(json.dumps(config or {})))
