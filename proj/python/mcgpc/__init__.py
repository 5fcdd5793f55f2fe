"""Monte Carlo generalized polynomial chaos solver for uncertain swarming models."""

from ._mcgpc import (
    ConfigError,
    DimensionError,
    ExperimentConfig,
    GpcBasis,
    NumericalError,
    __version__,
    converge,
    load_config,
    oracle,
    parse_config,
    parse_affine,
    project,
    reconstruct_at,
    run,
)

__all__ = [
    "ConfigError",
    "DimensionError",
    "ExperimentConfig",
    "GpcBasis",
    "NumericalError",
    "__version__",
    "converge",
    "load_config",
    "oracle",
    "parse_config",
    "parse_affine",
    "project",
    "reconstruct_at",
    "run",
]
