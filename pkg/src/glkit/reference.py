"""Brute-force reference solutions for small instances."""

from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np
from scipy.optimize import minimize, nnls

from .config import Settings, default_settings
from .instance import ThetaLike, gap_profile, theta_vector
from .model import BruteForceResult, decision_key
from .structures import DecisionSet, decision_matrix

logger = logging.getLogger(__name__)


def closed_form_1set(theta: ThetaLike) -> BruteForceResult:
    """Exact optimum when every decision is a single item: α_i = 1/Δ_i², C = Σ 1/Δ_i."""
    values = theta_vector(theta).astype(float)
    d = values.shape[0]
    opt = float(np.max(values))
    gaps = opt - values
    w = np.zeros(d)
    alpha = {}
    for i in np.flatnonzero(gaps > 1e-12 * max(1.0, opt)):
        w[i] = gaps[i] ** -2
        e = np.zeros(d, dtype=np.int64)
        e[i] = 1
        alpha[decision_key(e)] = float(w[i])
    C = float(sum(1.0 / gaps[i] for i in np.flatnonzero(w > 0)))
    return BruteForceResult(C=C, w=w, alpha=alpha, slacks=np.zeros(d), method="closed-form")


def check_feasible(
    decision_set: DecisionSet, theta: ThetaLike, w, settings: Optional[Settings] = None
) -> float:
    """max over suboptimal x of Σ_{i∈I} x_i/w_i − Δ_x²; <= 0 means w is feasible.

    Returns -inf when every decision is optimal. A zero rate on I counts as an
    infinite violation.
    """
    settings = settings or default_settings()
    values = theta_vector(theta).astype(float)
    w = np.asarray(w, dtype=float)[: decision_set.d]
    profile = gap_profile(decision_set, values, settings)
    X = decision_matrix(decision_set, settings.enum_cap)
    gaps = profile.opt_value - X @ values
    sub = gaps > 1e-9 * max(1.0, abs(profile.opt_value))
    if not np.any(sub):
        return -math.inf
    I = list(profile.I)
    with np.errstate(divide="ignore"):
        inv = np.where(w[I] > 0, 1.0 / np.where(w[I] > 0, w[I], 1.0), np.inf)
    X_I = X[sub][:, I].astype(float)
    sums = np.where(X_I > 0, X_I * inv, 0.0).sum(axis=1)
    return float(np.max(sums - gaps[sub] ** 2))


def brute_force_gl(
    decision_set: DecisionSet,
    theta: ThetaLike,
    tol: float = 1e-9,
    settings: Optional[Settings] = None,
) -> BruteForceResult:
    """Solve the Graves-Lai program over all suboptimal decisions (small |X| only).

    Sequential quadratic programming in α with analytic constraint gradients,
    started from a covering feasible point, then scaled back onto the feasible
    set and checked against the KKT conditions.
    """
    settings = settings or default_settings()
    values = theta_vector(theta).astype(float)
    d = decision_set.d
    X = decision_matrix(decision_set, settings.brute_force_cap)
    profile = gap_profile(decision_set, values, settings)
    gaps = profile.opt_value - X @ values
    I = list(profile.I)
    if not I:
        return BruteForceResult(
            C=0.0, w=np.zeros(d), alpha={}, slacks=gaps**2, method="empty", kkt_residual=0.0
        )

    scale = max(1.0, abs(profile.opt_value))
    variables = np.flatnonzero(gaps > 1e-9 * scale)
    Y = X[variables].astype(float)
    cost = gaps[variables]
    Y_I = Y[:, I].T  # |I| x n
    rows = np.flatnonzero(X[:, I].sum(axis=1) > 0)
    X_C = X[rows][:, I].astype(float)
    need = gaps[rows] ** 2
    floor = (1.0 - 1e-9) / float(np.max(gaps)) ** 2

    def rates(alpha):
        return np.maximum(Y_I @ alpha, 1e-12)

    def constraint(alpha):
        return need - X_C @ (1.0 / rates(alpha))

    def constraint_jac(alpha):
        return (X_C / rates(alpha) ** 2) @ Y_I

    # every i in I gets m/Δmin² from one decision through it
    delta_min = float(np.min(cost))
    start = np.zeros(len(variables))
    for i in I:
        through = np.flatnonzero(Y[:, i] > 0)
        start[through[0]] += max(profile.m, 1) / delta_min**2

    result = minimize(
        lambda a: float(cost @ a),
        start,
        jac=lambda a: cost,
        method="SLSQP",
        bounds=[(0.0, None)] * len(variables),
        constraints=[
            {"type": "ineq", "fun": constraint, "jac": constraint_jac},
            {"type": "ineq", "fun": lambda a: Y_I @ a - floor, "jac": lambda a: Y_I},
        ],
        options={"ftol": 1e-15, "maxiter": 2_000},
    )
    if not result.success:
        logger.warning("brute force: SLSQP stopped early (%s)", result.message)
    alpha = np.maximum(result.x, 0.0)

    ratio = float(np.max(X_C @ (1.0 / rates(alpha)) / need))
    if ratio > 1.0:
        alpha *= ratio
    slacks = constraint(alpha)

    # KKT: cost = Σ μ_x ∇c_x on the support, reduced costs >= 0 off it
    active = np.flatnonzero(slacks <= 1e-7 * float(np.max(need)))
    support = np.flatnonzero(alpha > 1e-10 * max(1.0, float(np.max(alpha))))
    J = constraint_jac(alpha)[active]
    residual = 0.0
    if len(active) and len(support):
        mu, rnorm = nnls(J[:, support].T, cost[support])
        reduced = cost - mu @ J
        off = np.setdiff1d(np.arange(len(variables)), support)
        residual = (rnorm + float(np.sum(np.maximum(-reduced[off], 0.0)))) / float(
            np.linalg.norm(cost)
        )
    if residual > settings.kkt_tol:
        logger.warning("brute force: KKT residual %.3g above %.1g", residual, settings.kkt_tol)

    keep = alpha > tol * max(1.0, float(np.max(alpha)))
    return BruteForceResult(
        C=float(cost @ alpha),
        w=Y.T @ alpha,
        alpha={decision_key(X[variables[j]]): float(alpha[j]) for j in np.flatnonzero(keep)},
        slacks=slacks,
        method="slsqp",
        kkt_residual=residual,
    )
