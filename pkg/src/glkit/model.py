from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

Decision = np.ndarray
"""A 0/1 integer vector of length d."""


def as_decision(x) -> Decision:
    return np.asarray(x, dtype=np.int64).reshape(-1)


def decision_key(x) -> Tuple[int, ...]:
    return tuple(int(v) for v in np.asarray(x).reshape(-1))


@dataclass(frozen=True)
class Theta:
    """Integer reward means (the form every solver expects).

    values: positive integers, one per coordinate.
    origin: the real-valued vector this was discretized from, if any.
    epsilon: discretization step used to produce ``values``.
    certified: False when the discretization step is too coarse for the
      real-θ guarantee; None when it could not be checked.
    """

    values: np.ndarray
    origin: Optional[np.ndarray] = None
    epsilon: Optional[float] = None
    certified: Optional[bool] = None

    @property
    def d(self) -> int:
        return int(self.values.shape[0])

    @property
    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


@dataclass(frozen=True)
class GapProfile:
    """Optimal decision, gap range and the set I for one (X, θ) pair.

    delta_min is exact when ``delta_min_exact``; otherwise it is the integer
    lower bound 1 (enumeration was too large). delta_min is +inf and
    delta_max is 0 when every decision is optimal.
    """

    x_star: Decision
    opt_value: float
    delta_min: float
    delta_max: float
    m: int
    I: Tuple[int, ...]
    delta_min_exact: bool = True

    def general_bound(self, d: int) -> float:
        """Upper bound m·d·Δmax/Δmin² on the optimal value."""
        if not self.I or not math.isfinite(self.delta_min):
            return 0.0
        return self.m * d * self.delta_max / self.delta_min**2


@dataclass(frozen=True, eq=False)
class HullRep:
    """Lifted equality form conv(X) = {z : A z = b, z >= 0}.

    The first ``d`` lifted coordinates are the original ones. For hulls whose
    lift is affine, lift(x) = lift_matrix @ x + lift_offset; otherwise (the
    convex-combination form used for arbitrary explicit sets) the lift appends
    the indicator of x among ``vertices``.
    """

    A: np.ndarray
    b: np.ndarray
    d: int
    lift_matrix: Optional[np.ndarray] = None
    lift_offset: Optional[np.ndarray] = None
    vertices: Tuple[Tuple[int, ...], ...] = ()
    form: str = "affine"

    @property
    def d_lifted(self) -> int:
        return int(self.A.shape[1])

    @property
    def is_affine(self) -> bool:
        return self.lift_matrix is not None

    def lift(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if self.lift_matrix is not None:
            return self.lift_matrix @ x + self.lift_offset
        key = decision_key(x)
        try:
            k = self.vertices.index(key)
        except ValueError:
            raise ValueError(f"{key} is not a vertex of this hull") from None
        z = np.zeros(self.d_lifted)
        z[: self.d] = x
        z[self.d + k] = 1.0
        return z


@dataclass
class GLOutput:
    """Sparse exploration allocation returned by the solver."""

    atoms: List[Decision]
    weights: List[float]
    w_bar_prime: np.ndarray
    objective: float
    objective_q: float
    certified_max_violation: float
    iterations: int
    wallclock: float = 0.0
    d: int = 0
    certified_discretization: Optional[bool] = None
    meta: Dict[str, object] = field(default_factory=dict)

    def allocation(self) -> Dict[Tuple[int, ...], float]:
        return {decision_key(x): w for x, w in zip(self.atoms, self.weights)}

    def rates(self) -> np.ndarray:
        """Per-coordinate sample rates Σ α_k x^k over the original coordinates."""
        out = np.zeros(self.d)
        for x, w in zip(self.atoms, self.weights):
            out += w * np.asarray(x, dtype=float)
        return out


@dataclass
class BruteForceResult:
    C: float
    w: np.ndarray
    alpha: Dict[Tuple[int, ...], float]
    slacks: np.ndarray
    method: str
    kkt_residual: float = 0.0


@dataclass
class RegretTrace:
    """Cumulative pseudo-regret of one run; ``cumulative[t]`` is regret after t rounds."""

    cumulative: np.ndarray
    seed: int
    algorithm: str
    instance_id: str

    @property
    def horizon(self) -> int:
        return int(self.cumulative.shape[0] - 1)

    def at(self, t: int) -> float:
        return float(self.cumulative[t])
