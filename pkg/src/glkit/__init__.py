"""glkit: Graves-Lai lower bounds and exploration allocations for combinatorial semi-bandits.

Decision structures with linear and budgeted oracles, the GLPG solver, brute-force
references for small instances, and a semi-bandit simulator.
"""

__all__ = [
    "MSet",
    "StPathDag",
    "BipartiteMatching",
    "Explicit",
    "linear_max",
    "budgeted_linear_max",
    "hull",
    "make_theta",
    "discretize",
    "gap_profile",
    "solve",
    "solve_discretized",
    "brute_force_gl",
    "closed_form_1set",
    "check_feasible",
    "run_experiment",
    "load_instance",
    "Settings",
    "load_settings",
    "GlkitError",
]

__version__ = "0.1.0"

from .config import Settings, load_settings  # noqa: E402
from .errors import GlkitError  # noqa: E402
from .glpg import solve, solve_discretized  # noqa: E402
from .instance import discretize, gap_profile, make_theta  # noqa: E402
from .parse import load_instance  # noqa: E402
from .reference import brute_force_gl, check_feasible, closed_form_1set  # noqa: E402
from .simulator import run_experiment  # noqa: E402
from .structures import (  # noqa: E402
    BipartiteMatching,
    Explicit,
    MSet,
    StPathDag,
    budgeted_linear_max,
    hull,
    linear_max,
)
