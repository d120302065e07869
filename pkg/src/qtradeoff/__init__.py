"""Error trade-off analysis for two-parameter unitary models with commuting generators."""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    DegenerateGeometry,
    DomainError,
    NoIntersection,
    NonRegularModel,
    PositivityViolation,
    RankDeficient,
    TradeoffError,
)
from .qfi import (
    Classification,
    DensityMatrix,
    FisherPair,
    TradeoffReport,
    UnitaryModel,
    classify,
    fisher_pair,
)

__all__ = [
    "Classification",
    "ConvergenceError",
    "DegenerateGeometry",
    "DensityMatrix",
    "DomainError",
    "FisherPair",
    "NoIntersection",
    "NonRegularModel",
    "PositivityViolation",
    "RankDeficient",
    "TradeoffError",
    "TradeoffReport",
    "UnitaryModel",
    "classify",
    "fisher_pair",
]
