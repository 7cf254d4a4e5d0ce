# SPDX-License-Identifier: MIT
"""Retrieval-seeded symbolic regression for 2D trajectories."""

from pathlib import Path as _Path

from ._core import (
    BankError,
    ConfigError,
    Expr,
    ForecastError,
    LoadError,
    ParseError,
    commutative_ted_similarity,
    discover,
    dtw_distance,
    forecast,
    generate,
    load_trajectories,
    normalized_dtw,
    optimize_constants,
    parse,
    rescale_to_range,
    resample_for_export,
    retrieve,
    ted_similarity,
    tree_edit_distance,
)
from ._core import default_bank_path as _compiled_bank_path
from ._core import load_bank as _load_bank

__version__ = "0.1.0"


def default_bank_path() -> _Path:
    """The bank installed with the package, else the one the extension was built against."""
    packaged = _Path(__file__).with_name("data") / "default.tsv"
    return packaged if packaged.exists() else _Path(_compiled_bank_path())


def load_bank(path=None):
    return _load_bank(str(path) if path is not None else str(default_bank_path()))


__all__ = [
    "BankError",
    "ConfigError",
    "Expr",
    "ForecastError",
    "LoadError",
    "ParseError",
    "commutative_ted_similarity",
    "default_bank_path",
    "discover",
    "dtw_distance",
    "forecast",
    "generate",
    "load_bank",
    "load_trajectories",
    "normalized_dtw",
    "optimize_constants",
    "parse",
    "rescale_to_range",
    "resample_for_export",
    "retrieve",
    "ted_similarity",
    "tree_edit_distance",
]
