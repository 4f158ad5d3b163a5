"""Random Green potentials, measures and mixing on the Riemann sphere.

Points are complex numbers (affine coordinate, ``complex('inf')`` for the
point at infinity) or homogeneous pairs ``(z, w)``. Driver-level functions
take the experiment config as a dict or JSON text.
"""

import json as _json

from . import _core
from ._core import (
    ConfigError,
    DegenerateMapError,
    Error,
    GreenMeasure,
    HypothesisError,
    Observable,
    PotentialSeries,
    RationalMap,
    __version__,
    cloud_measure,
    estimate_dsh_norm,
    green_potential_at,
    green_series,
    log_eta_max,
    measure_by_preimages,
    measure_distance,
    measure_from_potential,
    potential_u,
    spherical_distance,
    subcommands,
    sup_norm_u,
)


def _text(config):
    return config if isinstance(config, str) else _json.dumps(config)


def parse_config(config):
    """Validated config with every default filled in."""
    return _json.loads(_core.parse_config(_text(config)))


def orbit(config, length):
    return _core.orbit(_text(config), length)


def birkhoff_diagnostics(config, length=64):
    return _core.birkhoff_diagnostics(_text(config), length)


def mixing_experiment(config, force=False):
    return _core.mixing_experiment(_text(config), force)


def run_experiment(subcommand, config, out=None, seed=None, strict=False, force=False):
    return _core.run_experiment(subcommand, _text(config), out, seed, strict, force)
