"""Transport-capacity optimization for single-cell multihop networks.

Core pipeline: a fading model (`fading.FadingModel`) feeds the
water-pouring solver (`waterfill.solve`), whose value function drives
the hop-distance optimization (`hopopt`); the MAC layer converts rates
and powers to network units (`macmodel`), and a Monte Carlo simulator
(`simulator`) validates the renewal formulas.
"""

__version__ = "0.1.0"

from .errors import (
    BracketFailure,
    BudgetExhausted,
    ConfigError,
    DiscreteKindError,
    HopcapError,
    HypothesisNotMet,
    NoBracket,
    NonPositivePi,
    NoStationaryPoint,
    NotDiscrete,
    NumericalError,
    OrderingViolation,
    ValidationError,
)
from .fading import FadingModel
from .hopopt import BoundaryLimits, HopProblem, ScalingCheck
from .macmodel import MacProfile
from .simulator import ConstantPowerPolicy, SimConfig, SimReport, WaterfillPolicy
from .stationary import StationaryPoint, StationarySet
from .waterfill import WaterfillSolution

__all__ = [
    "__version__",
    "BoundaryLimits",
    "BracketFailure",
    "BudgetExhausted",
    "ConfigError",
    "ConstantPowerPolicy",
    "DiscreteKindError",
    "FadingModel",
    "HopcapError",
    "HopProblem",
    "HypothesisNotMet",
    "MacProfile",
    "NoBracket",
    "NonPositivePi",
    "NoStationaryPoint",
    "NotDiscrete",
    "NumericalError",
    "OrderingViolation",
    "ScalingCheck",
    "SimConfig",
    "SimReport",
    "StationaryPoint",
    "StationarySet",
    "ValidationError",
    "WaterfillPolicy",
    "WaterfillSolution",
]
