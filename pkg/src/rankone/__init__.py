"""Rank-one subshift words, Mobius statistics and Mobius-disjointness checks."""

from rankone.errors import (
    IntegrityError,
    InvalidArgumentError,
    OutOfRangeError,
    RankOneError,
    ResourceLimitError,
)
from rankone.mobius import MobiusTable, mertens, mobius_sieve
from rankone.words import RankOneParams, StageWord, build_stage

__all__ = [
    "IntegrityError",
    "InvalidArgumentError",
    "MobiusTable",
    "OutOfRangeError",
    "RankOneError",
    "RankOneParams",
    "ResourceLimitError",
    "StageWord",
    "build_stage",
    "mertens",
    "mobius_sieve",
]

__version__ = "0.1.0"
