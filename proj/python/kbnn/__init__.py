"""Kalman Bayesian neural networks."""

from ._core import (
    ConfigError,
    ContractError,
    DimensionError,
    KbnnError,
    LoadError,
    Network,
    NumericError,
    SingularMatrixError,
    Split,
    accuracy,
    avg_nll,
    evaluate,
    gen_circles,
    gen_cubic,
    gen_moons,
    load_csv,
    make_split,
    propagate,
    rmse,
    rotate_points,
    train,
)

__all__ = [
    "ConfigError",
    "ContractError",
    "DimensionError",
    "KbnnError",
    "LoadError",
    "Network",
    "NumericError",
    "SingularMatrixError",
    "Split",
    "accuracy",
    "avg_nll",
    "evaluate",
    "gen_circles",
    "gen_cubic",
    "gen_moons",
    "load_csv",
    "make_split",
    "propagate",
    "rmse",
    "rotate_points",
    "train",
]
