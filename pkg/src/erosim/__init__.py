"""Simulation toolkit for competitive erosion on the integer line and its variants."""

from .coloring import BLUE, RED, UNCOLORED, Color, RunLengthView, SiteColoring, run_lengths
from .constants import C_constant, alpha, constants_table, w_recursion
from .engine import Engine
from .excursions import ExcursionDecomposition, decompose_excursions
from .goodness import GoodnessCounters, goodness_label, record_goodness
from .killed import estimate_ratio, run_killed, run_killed_batch
from .layers import LayerStack, update_layers
from .oracle import DiscretePath, LimitSample, alternating_extrema, hitting_functional, sample_limit
from .rng import BitStream, trial_seed
from .state import ErosionState, new_state, stopping_set_boundaries
from .trajectory import Trajectory, record_trajectory
from .variants import ColorRule, run_variant_line, run_zd

__all__ = [
    "BLUE", "RED", "UNCOLORED", "Color", "RunLengthView", "SiteColoring", "run_lengths",
    "C_constant", "alpha", "constants_table", "w_recursion", "Engine", "ExcursionDecomposition",
    "decompose_excursions", "GoodnessCounters", "goodness_label", "record_goodness",
    "estimate_ratio", "run_killed", "run_killed_batch", "LayerStack", "update_layers",
    "DiscretePath", "LimitSample", "alternating_extrema", "hitting_functional", "sample_limit",
    "BitStream", "trial_seed", "ErosionState", "new_state", "stopping_set_boundaries",
    "Trajectory", "record_trajectory", "ColorRule", "run_variant_line", "run_zd",
]
