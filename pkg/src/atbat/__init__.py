"""atbat: a baseball at-bat solved as a zero-sum stochastic game.

The count is the state, the pitcher mixes over (pitch type, intended zone),
the batter over swing/take; the game's value at 0-0 is the matchup's
equilibrium on-base percentage.  Transition probabilities are learned from
pitch-level data: a Gaussian aiming-error model per pitch type (identified
from 3-0 counts), a four-outcome swing model over tensor representations of
both players, and a batter-patience override that forces the take at obvious
balls.
"""

from .game import (COUNTS, ON_BASE, OUT, Count, PitcherAction,
                   TransitionKernel, build_kernel)
from .solver import (EquilibriumSolution, SolverConfig, exploitability,
                     solve_acyclic, value_iterate)
from .zones import FAR, PITCH_TYPES, ZoneGrid, default_grid, zone_of

__version__ = "0.1.0"

__all__ = [
    "COUNTS", "ON_BASE", "OUT", "Count", "PitcherAction", "TransitionKernel",
    "build_kernel", "EquilibriumSolution", "SolverConfig", "exploitability",
    "solve_acyclic", "value_iterate", "FAR", "PITCH_TYPES", "ZoneGrid",
    "default_grid", "zone_of", "__version__",
]
