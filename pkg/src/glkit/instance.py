"""Instance analysis: optimal decision, gaps, the set I and discretization."""

from __future__ import annotations

import logging
import math
from typing import Mapping, Optional, Tuple, Union

import numpy as np

from .config import Settings, default_settings
from .errors import NonPositiveEntry, TooLarge
from .model import Decision, GapProfile, Theta
from .structures import DecisionSet, decision_matrix, linear_max

logger = logging.getLogger(__name__)

ThetaLike = Union[Theta, np.ndarray, list, tuple]


def make_theta(values) -> Theta:
    """Wrap integer reward means; every entry must be a positive integer."""
    arr = np.asarray(values)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("theta must be a non-empty vector")
    if not np.all(np.equal(np.mod(arr, 1), 0)):
        raise ValueError("theta must be integer-valued; use discretize() for real means")
    arr = arr.astype(np.int64)
    if np.any(arr < 1):
        raise NonPositiveEntry("theta entries must be >= 1")
    return Theta(values=arr)


def theta_vector(theta: ThetaLike) -> np.ndarray:
    if isinstance(theta, Theta):
        return theta.values
    return np.asarray(theta)


def _tol(scale: float) -> float:
    return 1e-9 * max(1.0, abs(scale))


def gap(profile: GapProfile, theta: ThetaLike, x) -> float:
    """Δ_x = θᵀx* − θᵀx."""
    values = theta_vector(theta)
    return float(profile.opt_value - values @ np.asarray(x))


def suboptimal_items(
    decision_set: DecisionSet, theta: ThetaLike, settings: Optional[Settings] = None
) -> Tuple[int, ...]:
    """Coordinates that appear in no optimal decision (penalty method).

    Boosting coordinate i by 2d‖θ‖∞ makes every decision containing i beat every
    decision without it, so the boosted argmax is the best decision through i.
    """
    values = theta_vector(theta).astype(float)
    d = decision_set.d
    opt = float(values @ linear_max(decision_set, values, settings))
    boost = 2 * d * float(np.max(np.abs(values)))
    out = []
    for i in range(d):
        a = values.copy()
        a[i] += boost
        y = linear_max(decision_set, a, settings)
        if y[i] != 1:
            logger.debug("coordinate %d is uncovered; not classified", i)
            continue
        if values @ y < opt - _tol(opt):
            out.append(i)
    return tuple(out)


def gap_profile(
    decision_set: DecisionSet, theta: ThetaLike, settings: Optional[Settings] = None
) -> GapProfile:
    settings = settings or default_settings()
    values = theta_vector(theta)
    integer = np.issubdtype(values.dtype, np.integer)
    fvalues = values.astype(float)
    x_star = linear_max(decision_set, fvalues, settings)
    opt = float(fvalues @ x_star)
    worst = linear_max(decision_set, -fvalues, settings)
    delta_max = opt - float(fvalues @ worst)
    items = suboptimal_items(decision_set, values, settings)
    if delta_max <= _tol(opt):
        return GapProfile(x_star, opt, math.inf, 0.0, decision_set.m, items)
    try:
        X = decision_matrix(decision_set, settings.enum_cap)
        gaps = opt - X @ fvalues
        delta_min = float(np.min(gaps[gaps > _tol(opt)]))
        exact = True
    except TooLarge:
        # integer means force every positive gap to be at least 1
        delta_min = 1.0 if integer else math.nan
        exact = False
        logger.info("gap profile: Δmin not enumerated (|X| above cap); using %s", delta_min)
    return GapProfile(
        x_star=x_star,
        opt_value=opt,
        delta_min=delta_min,
        delta_max=delta_max,
        m=decision_set.m,
        I=items,
        delta_min_exact=exact,
    )


def decision_gaps(profile: GapProfile, theta: ThetaLike, X: np.ndarray) -> np.ndarray:
    """Gap of every row of an enumerated decision matrix."""
    return profile.opt_value - X @ theta_vector(theta).astype(float)


# ---------- Discretization ----------


def discretize(
    theta_real,
    epsilon: float,
    decision_set: Optional[DecisionSet] = None,
    settings: Optional[Settings] = None,
) -> Theta:
    """Integer vector ⌈θ/ε⌉ for real means θ.

    With ``decision_set`` given, the result records whether ε <= Δmin/(2m),
    the regime in which the inflated discretized solution is certified.
    """
    arr = np.asarray(theta_real, dtype=float).reshape(-1)
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise NonPositiveEntry("theta_real entries must be finite and > 0")
    # snap ratios a few ulps off an integer (1.1/0.1 = 11.000000000000002); never round down otherwise
    ratio = arr / epsilon
    nearest = np.round(ratio)
    snap = np.abs(ratio - nearest) <= 8 * np.finfo(float).eps * np.maximum(1.0, ratio)
    values = np.where(snap, nearest, np.ceil(ratio)).astype(np.int64)
    values = np.maximum(values, 1)
    certified: Optional[bool] = None
    if decision_set is not None:
        profile = gap_profile(decision_set, arr, settings)
        if not profile.I or not math.isfinite(profile.delta_max) or profile.delta_max == 0:
            certified = True
        elif math.isnan(profile.delta_min):
            certified = None
        else:
            certified = epsilon <= profile.delta_min / (2 * max(profile.m, 1))
        if certified is False:
            logger.warning(
                "discretization step %.4g exceeds Δmin/(2m) = %.4g; the real-θ guarantee "
                "is not certified",
                epsilon,
                profile.delta_min / (2 * max(profile.m, 1)),
            )
    return Theta(values=values, origin=arr, epsilon=float(epsilon), certified=certified)


def inflation_factor(m: int, epsilon: float, delta_min: float) -> float:
    return (1.0 + 2.0 * m * epsilon / delta_min) ** 2


def objective_ratio_bound(m: int, epsilon: float, delta_min: float) -> float:
    return (1.0 + 4.0 * m * epsilon / delta_min) ** 4


def inflate_discretized_solution(
    solution: Union[np.ndarray, Mapping, list], m: int, epsilon: float, delta_min: float
):
    """Scale a discretized-problem allocation so it is feasible for the real means."""
    factor = inflation_factor(m, epsilon, delta_min)
    if isinstance(solution, Mapping):
        return {key: value * factor for key, value in solution.items()}
    return np.asarray(solution, dtype=float) * factor


def optimal_decision(decision_set: DecisionSet, theta: ThetaLike) -> Decision:
    return linear_max(decision_set, theta_vector(theta).astype(float))
