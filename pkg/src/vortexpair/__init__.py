"""Steady vortex pairs by energy maximization over rearrangements."""
from .grid import Domain, Field, impulse, integrate, lp_norm, xp_norm
from .greens import energy, stream
from .optimizer import SolverConfig, solve
from .estimators import ConcentrationCompactness, EnergyMaximizer

__all__ = [
    "Domain", "Field", "impulse", "integrate", "lp_norm", "xp_norm",
    "energy", "stream", "SolverConfig", "solve",
    "EnergyMaximizer", "ConcentrationCompactness",
]
__version__ = "0.1.0"
