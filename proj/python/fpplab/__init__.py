"""Python front end for the fpplab C++ core.

JSON-valued functions return decoded Python objects; configs may be passed as
dicts.
"""

import json as _json

from . import _core
from ._core import (
    QuantileCoupling,
    ResourceError,
    ValidationError,
    WeightLaw,
    annulus_size,
    binomial_log_tail,
    concentration_function,
    count_paths_pk,
    passage_time,
    scales,
    tau_norm2,
    variance_estimate,
)

__version__ = _core.__version__


def _encode(config):
    return config if isinstance(config, str) else _json.dumps(config)


def default_config():
    return _json.loads(_core.default_config())


def config_hash(config):
    return _core.config_hash(_encode(config))


def run_experiment(config, out_dir=""):
    """Run the study; returns (csv_text, summary_dict)."""
    csv_text, summary = _core.run_experiment(_encode(config), str(out_dir))
    return csv_text, _json.loads(summary)


def coupling_checks(law, seed=1):
    return _json.loads(_core.coupling_checks(law, seed))


def mw_checks(law, trials=100000, seed=1):
    return _json.loads(_core.mw_checks(law, trials, seed))


__all__ = [
    "QuantileCoupling",
    "ResourceError",
    "ValidationError",
    "WeightLaw",
    "annulus_size",
    "binomial_log_tail",
    "concentration_function",
    "config_hash",
    "count_paths_pk",
    "coupling_checks",
    "default_config",
    "mw_checks",
    "passage_time",
    "run_experiment",
    "scales",
    "tau_norm2",
    "variance_estimate",
]
