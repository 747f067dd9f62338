"""Online learning with additive statistics and pathwise potential certificates.

The library turns regret statements into properties of a single potential
function over a statistic space: start at most zero, dominate the bound
function, and shrink in conditional expectation. Prediction strategies,
potential families, and the numerical certification suite all speak that
one interface.
"""

from .errors import ConfigError, DomainError, NumericError, TagMismatchError
from .losses import Loss, make_loss
from .potential import MappedPotential, Potential, Round, Trajectory, accumulate
from .potentials import (AdaGradPotential, CombinedPotential, MatrixPotential,
                         MetaPotential, ParamFreePotential, VawPotential,
                         combine_convex, combine_min, doubling_run,
                         standard_families, usq)
from .statistics import (ProductStat, ScalarSymPsd, ScalarVec, ScalarVecScalar,
                         VecSym, stats_allclose)
from .strategies import (STRATEGIES, predict_convex, predict_linearized,
                         predict_randomized, realized_game_value, run_online,
                         run_randomized_expected)

__version__ = "0.1.0"

__all__ = [
    "AdaGradPotential", "CombinedPotential", "ConfigError", "DomainError",
    "Loss", "MappedPotential", "MatrixPotential", "MetaPotential",
    "NumericError", "ParamFreePotential", "Potential", "ProductStat", "Round",
    "STRATEGIES", "ScalarSymPsd", "ScalarVec", "ScalarVecScalar",
    "TagMismatchError", "Trajectory", "VawPotential", "VecSym", "accumulate",
    "combine_convex", "combine_min", "doubling_run", "make_loss",
    "predict_convex", "predict_linearized", "predict_randomized",
    "realized_game_value", "run_online", "run_randomized_expected",
    "standard_families", "stats_allclose", "usq",
]
