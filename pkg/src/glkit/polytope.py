"""Reduced problem over per-coordinate sample rates, and projection onto its region.

The hull {z : Az = b, z >= 0} is homogenized into the cone {z : Mz = 0, z >= 0}
with M = A − b bᵀA/‖b‖², so that lifted sample rates Σ α_x lift(x) are exactly
the points of the cone and the exploration cost is the linear form qᵀw.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, null_space, orth, solve
from scipy.optimize import nnls

from .config import Settings, default_settings
from .errors import DivisionGuard, IdentityViolation, NumericFailure
from .instance import ThetaLike, theta_vector
from .model import Decision, GapProfile, HullRep
from .structures import DecisionSet, coordinate_witnesses

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ReducedProblem:
    """M, q and the floor w̄ of the reduced program, with the data they came from."""

    M: np.ndarray
    q: np.ndarray
    w_floor: float
    I: Tuple[int, ...]
    hull: HullRep
    gaps: GapProfile
    theta_lifted: np.ndarray

    @property
    def d(self) -> int:
        return self.hull.d

    @property
    def d_lifted(self) -> int:
        return self.hull.d_lifted


@dataclass(eq=False)
class FeasibleRegion:
    """{w : Mw = 0, w >= lower} with frozen coordinates pinned at zero.

    lower is w̄ on I and 0 elsewhere. A lifted coordinate is frozen when no
    decision lifts to a positive value there; the cone forces it to zero.
    """

    M: np.ndarray
    lower: np.ndarray
    free: np.ndarray
    interior: np.ndarray

    @property
    def d_lifted(self) -> int:
        return int(self.lower.shape[0])


def homogenize(hull: HullRep) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """M and the row bᵀA/‖b‖² (None when b = 0)."""
    A, b = hull.A, hull.b
    bb = float(b @ b)
    if bb == 0.0:
        return A.copy(), None
    bA = (b @ A) / bb
    return A - np.outer(b, bA), bA


def lift_all(hull: HullRep, decisions: Iterable) -> np.ndarray:
    return np.vstack([hull.lift(x) for x in decisions])


def reduce(
    hull: HullRep,
    theta: ThetaLike,
    gaps: GapProfile,
    sample: Optional[Sequence[Decision]] = None,
    settings: Optional[Settings] = None,
) -> ReducedProblem:
    """Build (M, q, w̄) and check qᵀlift(x) = Δ_x on ``sample`` (plus x*)."""
    settings = settings or default_settings()
    values = theta_vector(theta).astype(float)
    theta_lifted = np.zeros(hull.d_lifted)
    theta_lifted[: hull.d] = values
    M, bA = homogenize(hull)
    q = -theta_lifted if bA is None else gaps.opt_value * bA - theta_lifted
    w_floor = (max(gaps.m, 1) * float(np.max(np.abs(values)))) ** -2

    scale = max(1.0, abs(gaps.opt_value))
    for x in [gaps.x_star, *(sample or [])]:
        z = hull.lift(x)
        delta = gaps.opt_value - float(values @ x)
        if abs(float(q @ z) - delta) > settings.identity_tol * scale:
            raise IdentityViolation(
                f"qᵀlift(x) = {float(q @ z):.12g} but Δ_x = {delta:.12g} for x = {list(x)}"
            )
        if np.max(np.abs(M @ z), initial=0.0) > settings.identity_tol * scale:
            raise IdentityViolation(f"M does not annihilate lift(x) for x = {list(x)}")
    return ReducedProblem(
        M=M,
        q=q,
        w_floor=w_floor,
        I=tuple(gaps.I),
        hull=hull,
        gaps=gaps,
        theta_lifted=theta_lifted,
    )


def feasible_region(
    problem: ReducedProblem,
    decision_set: DecisionSet,
    witnesses: Optional[Dict[int, Decision]] = None,
    settings: Optional[Settings] = None,
) -> FeasibleRegion:
    """Region of the reduced problem with a strictly feasible point.

    The point is a positive combination of lifted decisions that covers every
    coordinate a decision can reach, scaled so that I-coordinates sit at 2w̄ or
    more.
    """
    hull = problem.hull
    reach = coordinate_witnesses(decision_set, hull, settings)
    spanning = {tuple(int(v) for v in problem.gaps.x_star): problem.gaps.x_star}
    for x in list(reach.values()) + list((witnesses or {}).values()):
        spanning.setdefault(tuple(int(v) for v in x), x)
    point = lift_all(hull, spanning.values()).mean(axis=0)

    free = np.zeros(hull.d_lifted, dtype=bool)
    free[list(reach)] = True
    point[~free] = 0.0
    lower = np.zeros(hull.d_lifted)
    I = list(problem.I)
    if I:
        lower[I] = problem.w_floor
        point *= max(1.0, 2.0 * problem.w_floor / float(np.min(point[I])))
    residual = np.max(np.abs(problem.M @ point), initial=0.0)
    if residual > 1e-12 * max(1.0, float(np.max(point))):
        logger.warning("interior point has ‖Mw‖∞ = %.3g", residual)
    if np.any(~free):
        logger.debug("frozen lifted coordinates: %s", np.flatnonzero(~free).tolist())
    return FeasibleRegion(M=problem.M, lower=lower, free=free, interior=point)


# ---------- Projection ----------


class Projector:
    """Euclidean projection onto a FeasibleRegion, warm-started across calls.

    M = 0 is a componentwise clamp. Otherwise an active-set guess (seeded by the
    previous call) is tried first and checked against the KKT conditions; when
    that fails the log-barrier path-following Newton method takes over.
    """

    _CACHE_LIMIT = 512

    def __init__(
        self, region: FeasibleRegion, settings: Optional[Settings] = None, method: str = "auto"
    ):
        if method not in ("auto", "barrier"):
            raise ValueError(f"unknown projection method {method!r}")
        self.region = region
        self.settings = settings or default_settings()
        self.method = method
        self._free = np.flatnonzero(region.free)
        self._lower = region.lower[self._free]
        self._interior = region.interior[self._free]
        M_free = region.M[:, self._free]
        scale = max(1.0, float(np.max(np.abs(region.M), initial=0.0)))
        self.is_clamp = not np.any(np.abs(M_free) > 1e-14 * scale)
        if self.is_clamp:
            self._R = np.zeros((0, len(self._free)))
            self._N = np.eye(len(self._free))
        else:
            self._R = orth(M_free.T).T
            self._N = null_space(M_free)
        self._last = self._interior.copy()
        self._active: Tuple[int, ...] = ()
        self._cache: Dict[Tuple[int, ...], Tuple[np.ndarray, np.ndarray]] = {}
        self.calls = {"clamp": 0, "active_set": 0, "barrier": 0}

    # -- public --

    def project(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        y_free = y[self._free]
        if self.is_clamp:
            self.calls["clamp"] += 1
            w_free = np.maximum(y_free, self._lower)
        else:
            w_free = None
            if self.method == "auto":
                w_free = self._active_set(y_free)
            if w_free is None:
                w_free = self._barrier(y_free)
                self.calls["barrier"] += 1
            else:
                self.calls["active_set"] += 1
            self._last = w_free
        out = np.zeros(self.region.d_lifted)
        out[self._free] = w_free
        return out

    def tangent(self, g) -> np.ndarray:
        """Component of g along the null space of M (zero on frozen coordinates)."""
        g = np.asarray(g, dtype=float)
        out = np.zeros_like(g)
        g_free = g[self._free]
        out[self._free] = g_free if self.is_clamp else self._N @ (self._N.T @ g_free)
        return out

    # -- active set --

    def _affine(self, y: np.ndarray, active: Tuple[int, ...]):
        if active not in self._cache:
            if len(self._cache) >= self._CACHE_LIMIT:
                self._cache.clear()
            rows = np.zeros((len(active), len(y)))
            rows[np.arange(len(active)), list(active)] = 1.0
            C = np.vstack([self._R, rows])
            self._cache[active] = (C, np.linalg.pinv(C))
        C, C_pinv = self._cache[active]
        k = self._R.shape[0]
        e = np.concatenate([np.zeros(k), self._lower[list(active)]])
        w = y - C_pinv @ (C @ y - e)
        coeffs = C_pinv.T @ (y - w)
        residual = float(np.max(np.abs(C @ w - e), initial=0.0))
        return w, coeffs[k:], residual

    def _active_set(self, y: np.ndarray) -> Optional[np.ndarray]:
        scale = max(1.0, float(np.max(np.abs(y), initial=0.0)))
        tol = self.settings.feasibility_tol * scale
        active = set(self._active) | set(np.flatnonzero(y < self._lower).tolist())
        seen = set()
        for _ in range(self.settings.active_set_max_rounds):
            key = tuple(sorted(active))
            if key in seen:
                return None
            seen.add(key)
            w, coeffs, residual = self._affine(y, key)
            if residual > tol:
                return None
            below = [j for j in np.flatnonzero(w < self._lower - tol) if j not in active]
            if below:
                active.update(int(j) for j in below)
                continue
            # a positive coefficient means the bound pushes the wrong way
            if coeffs.size and float(np.max(coeffs)) > tol and not self._certified(w - y, key, tol):
                active.discard(key[int(np.argmax(coeffs))])
                continue
            self._active = key
            w[list(key)] = self._lower[list(key)]
            return np.maximum(w, self._lower)
        return None

    def _certified(self, r: np.ndarray, active: Tuple[int, ...], tol: float) -> bool:
        """Is r = w − y a nonnegative combination of active bound normals modulo rows of M?

        The least-norm multipliers are not unique when the bound normals and
        the rows of M are dependent; nnls finds a nonnegative set if one exists.
        """
        if self._N.shape[1] == 0:
            return True
        NE = self._N[list(active), :].T
        _, residual = nnls(NE, self._N.T @ r)
        return residual <= tol

    # -- barrier --

    def _barrier(self, y: np.ndarray) -> np.ndarray:
        s_cfg = self.settings
        N, lower = self._N, self._lower
        n, p = N.shape
        scale = max(1.0, float(np.max(np.abs(y), initial=0.0)))
        x0 = 0.95 * self._last + 0.05 * self._interior
        if np.any(x0 <= lower):
            x0 = self._interior.copy()
        v = np.zeros(p)
        t = 1.0 / scale
        # duality gap n/t bounds ½‖w − w*‖²; the polish below recovers the exact face
        gap_tol = s_cfg.kkt_tol * scale**2

        def phi(v_: np.ndarray, t_: float) -> float:
            w_ = x0 + N @ v_
            slack = w_ - lower
            if np.any(slack <= 0):
                return np.inf
            return t_ * 0.5 * float((w_ - y) @ (w_ - y)) - float(np.sum(np.log(slack)))

        stalled = False
        for _ in range(s_cfg.barrier_max_outer):
            for _ in range(s_cfg.barrier_max_newton):
                w = x0 + N @ v
                slack = w - lower
                grad = t * (N.T @ (w - y)) - N.T @ (1.0 / slack)
                H = t * np.eye(p) + (N.T * (1.0 / slack**2)) @ N
                try:
                    dv = -solve(H, grad, assume_a="pos")
                except LinAlgError:
                    stalled = True
                    break
                decrement = float(-grad @ dv)
                f0 = phi(v, t)
                if decrement / 2.0 <= 1e-12 * max(1.0, abs(f0)):
                    break
                dw = N @ dv
                step = 1.0
                shrinking = dw < 0
                if np.any(shrinking):
                    step = min(1.0, 0.99 * float(np.min(-slack[shrinking] / dw[shrinking])))
                while phi(v + step * dv, t) > f0 - 0.25 * step * decrement:
                    step *= 0.5
                    if step < 1e-12:
                        break
                if step < 1e-12:
                    # no representable decrease left at this t
                    stalled = True
                    break
                v = v + step * dv
            else:
                logger.debug("barrier: Newton cap reached at t=%.3g", t)
            if stalled or n / t < gap_tol:
                break
            t *= s_cfg.barrier_mu

        w = x0 + N @ v
        if not np.all(np.isfinite(w)) or np.any(w < lower):
            raise NumericFailure("barrier projection left the feasible region")
        if stalled:
            logger.debug("barrier: stopped at t=%.3g (gap %.3g)", t, n / t)
        return self._polish(y, w, max(1e-7 * scale, float(np.sqrt(n / t))))

    def _polish(self, y: np.ndarray, w: np.ndarray, reach: float) -> np.ndarray:
        """Snap a barrier point onto the face of the bounds it is approaching."""
        scale = max(1.0, float(np.max(np.abs(y), initial=0.0)))
        near = tuple(int(j) for j in np.flatnonzero(w - self._lower <= reach))
        self._active = near
        exact = self._active_set(y)
        if exact is not None:
            return exact
        candidate, _, residual = self._affine(y, near)
        tol = self.settings.feasibility_tol * scale
        if residual <= tol and np.all(candidate >= self._lower - tol):
            candidate = np.maximum(candidate, self._lower)
            if (candidate - y) @ (candidate - y) <= (w - y) @ (w - y) + 1e-12 * scale**2:
                self._active = near
                return candidate
        return w


def project(region: FeasibleRegion, y, projector: Optional[Projector] = None) -> np.ndarray:
    """argmin over the region of ‖w − y‖²."""
    return (projector or Projector(region)).project(y)


# ---------- Constraints ----------


def violation(w, x, I: Sequence[int], delta_x: float) -> float:
    """h_x(w) = Σ_{i∈I} x_i / w_i − Δ_x²."""
    w = np.asarray(w, dtype=float)
    idx = [i for i in I if x[i]]
    if idx and np.any(w[idx] <= 0):
        raise DivisionGuard(f"non-positive sample rate on coordinates {idx}")
    return float(np.sum(1.0 / w[idx])) - float(delta_x) ** 2


def violation_gradient(w, x, I: Sequence[int]) -> np.ndarray:
    """∇h_x(w): −x_i/w_i² on I, zero elsewhere."""
    w = np.asarray(w, dtype=float)
    grad = np.zeros_like(w)
    idx = [i for i in I if x[i]]
    if idx and np.any(w[idx] <= 0):
        raise DivisionGuard(f"non-positive sample rate on coordinates {idx}")
    grad[idx] = -1.0 / w[idx] ** 2
    return grad
