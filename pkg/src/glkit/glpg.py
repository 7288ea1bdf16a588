"""Projected-subgradient solver for the Graves-Lai program (GLPG).

Pipeline: classify items → lifted hull → reduced program (M, q, w̄) → penalized
projected subgradient loop with a most-violated-constraint oracle → averaging
and inflation → sparse decomposition into decisions.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog, nnls

from .config import Settings, default_settings
from .errors import (
    DecompositionFailure,
    DivisionGuard,
    IdentityViolation,
    InvalidStructure,
    IterationBudgetExhausted,
    TooLarge,
)
from .instance import (
    ThetaLike,
    discretize,
    gap_profile,
    inflation_factor,
    make_theta,
    theta_vector,
)
from .model import Decision, GapProfile, GLOutput, HullRep, Theta, as_decision
from .polytope import (
    FeasibleRegion,
    Projector,
    ReducedProblem,
    feasible_region,
    homogenize,
    lift_all,
    reduce,
)
from .structures import (
    INFEASIBLE,
    BudgetOracle,
    DecisionSet,
    budgeted_sweep,
    check_covering,
    decision_matrix,
    hull as build_hull,
    lifted_support_completion,
)

logger = logging.getLogger(__name__)


# ---------- Parameter schedule ----------


@dataclass(frozen=True)
class GLPGParams:
    """Step size, penalty and horizon of the subgradient loop.

    ``T`` and ``eta`` are the theoretical values. Unless ``theoretical`` is set
    the loop runs at most ``max_iters`` iterations with normalized steps.
    """

    delta: float
    epsilon: float
    delta2: float
    delta1: float
    lam: float
    T: float
    eta: float
    m: int
    d: int
    theta_inf: float
    q_norm: float
    max_iters: Optional[int] = None
    theoretical: bool = False
    stop_on_plateau: bool = True
    plateau_window: int = 1_000
    plateau_tol: float = 1e-7
    restarts: int = 5

    @property
    def iterations(self) -> int:
        if self.theoretical or self.max_iters is None:
            return max(1, math.ceil(self.T))
        return max(1, int(self.max_iters))

    @property
    def _g_sq(self) -> float:
        eps, m, d, th = self.epsilon, self.m, self.d, self.theta_inf
        return self.q_norm**2 + self.lam**2 * eps**-2 * d * m**8 * th**8

    def eta_for(self, T: float) -> float:
        """Constant step size of the schedule for a horizon of T iterations."""
        eps, m, d, th = self.epsilon, self.m, self.d, self.theta_inf
        return math.sqrt(eps**-2 * m**5 * d**2 * th**2 / (T * self._g_sq))


def schedule(
    delta: float,
    epsilon: float,
    m: int,
    d: int,
    theta_inf: float,
    q_norm: float,
    *,
    max_iters: Optional[int] = None,
    theoretical: bool = False,
    stop_on_plateau: bool = True,
    plateau_window: int = 1_000,
    plateau_tol: float = 1e-7,
    restarts: int = 5,
) -> GLPGParams:
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    m = max(int(m), 1)
    spread = m**2 * d * theta_inf
    delta2 = delta * epsilon / spread
    delta1 = delta / (2.0 * (1.0 + delta2))
    lam = (delta1 + spread) / delta2
    K = epsilon**-2 * m**5 * d**2 * theta_inf**2
    g_sq = q_norm**2 + lam**2 * epsilon**-2 * d * m**8 * theta_inf**8
    T = K * g_sq / delta1**2
    eta = math.sqrt(K / (T * g_sq))
    return GLPGParams(
        delta=delta,
        epsilon=epsilon,
        delta2=delta2,
        delta1=delta1,
        lam=lam,
        T=T,
        eta=eta,
        m=m,
        d=d,
        theta_inf=float(theta_inf),
        q_norm=float(q_norm),
        max_iters=max_iters,
        theoretical=theoretical,
        stop_on_plateau=stop_on_plateau,
        plateau_window=plateau_window,
        plateau_tol=plateau_tol,
        restarts=restarts,
    )


def solution_bounds(m: int, d: int, theta_inf: float) -> Tuple[float, float]:
    """Upper bounds (qᵀw*, ‖w*‖) for integer means."""
    m = max(int(m), 1)
    return m**2 * d * theta_inf, m**2.5 * d * theta_inf


# ---------- Most-violated-constraint oracles ----------


class EnumeratedOracle:
    """Exact search over a stored decision matrix.

    Ties: largest violation, then smallest gap, then lexicographic order.
    """

    def __init__(self, X: np.ndarray, gaps: np.ndarray, I: Sequence[int]):
        self.X = X
        self.gaps = np.asarray(gaps, dtype=float)
        self.I = np.asarray(I, dtype=np.int64)
        self._X_I = X[:, self.I].astype(float)
        self._delta_sq = self.gaps**2

    def scores(self, w: np.ndarray) -> np.ndarray:
        w_I = np.asarray(w, dtype=float)[self.I]
        if np.any(w_I <= 0):
            raise DivisionGuard("non-positive sample rate on I")
        return self._X_I @ (1.0 / w_I) - self._delta_sq

    def most_violated(self, w: np.ndarray) -> Tuple[Decision, float, float]:
        scores = self.scores(w)
        best = float(np.max(scores))
        tied = scores >= best - 1e-12 * max(1.0, abs(best))
        gaps = np.where(tied, self.gaps, np.inf)
        row = int(np.argmax(gaps <= np.min(gaps) + 1e-12))
        return as_decision(self.X[row]), best, float(self.gaps[row])

    def max_violation(self, w: np.ndarray) -> float:
        return float(np.max(self.scores(w)))


class SweepOracle:
    """Most violated constraint from one budgeted sweep over gap levels s = 0..m‖θ‖∞.

    For each s the budgeted oracle returns the decision maximizing Σ_{i∈I} x_i/w_i
    among decisions with gap at most s; the sweep keeps the best Σ − s².
    """

    def __init__(
        self,
        decision_set: DecisionSet,
        theta: np.ndarray,
        gaps: GapProfile,
        settings: Optional[Settings] = None,
        blm: Optional[BudgetOracle] = None,
    ):
        self.decision_set = decision_set
        self.theta = np.asarray(theta, dtype=np.int64)
        self.I = np.asarray(gaps.I, dtype=np.int64)
        self.opt = int(round(gaps.opt_value))
        self.s_max = int(round(max(gaps.m, 1) * float(np.max(self.theta))))
        self.settings = settings or default_settings()
        self.blm = blm

    def most_violated(self, w: np.ndarray) -> Tuple[Decision, float, float]:
        d = self.decision_set.d
        w = np.asarray(w, dtype=float)
        if np.any(w[self.I] <= 0):
            raise DivisionGuard("non-positive sample rate on I")
        a = np.zeros(d)
        a[self.I] = 1.0 / w[self.I]
        if self.blm is not None:
            table = self.blm(a, self.theta, self.opt)
        else:
            table = budgeted_sweep(self.decision_set, a, self.theta, self.opt, settings=self.settings)
        best: Optional[Tuple[float, Decision]] = None
        for s in range(self.s_max + 1):
            x = table[max(0, self.opt - s)]
            if x is INFEASIBLE:
                continue
            score = float(a @ x) - s * s
            if best is None or score > best[0] + 1e-12 * max(1.0, abs(best[0])):
                best = (score, x)
        assert best is not None  # s = opt admits every decision
        x = best[1]
        return x, best[0], float(self.opt - self.theta @ x)

    def max_violation(self, w: np.ndarray) -> float:
        return self.most_violated(w)[1]


def make_oracle(
    decision_set: DecisionSet,
    theta: np.ndarray,
    gaps: GapProfile,
    settings: Optional[Settings] = None,
    mode: str = "auto",
    blm: Optional[BudgetOracle] = None,
):
    settings = settings or default_settings()
    if mode not in ("auto", "sweep", "enumerated"):
        raise ValueError(f"unknown oracle mode {mode!r}")
    if blm is not None or mode == "sweep":
        return SweepOracle(decision_set, theta, gaps, settings, blm)
    try:
        X = decision_matrix(decision_set, settings.dense_oracle_cap)
    except TooLarge:
        if mode == "enumerated":
            raise
        logger.info("violation oracle: |X| above %d, using the budgeted sweep", settings.dense_oracle_cap)
        return SweepOracle(decision_set, theta, gaps, settings)
    return EnumeratedOracle(X, gaps.opt_value - X @ np.asarray(theta, dtype=float), gaps.I)


def most_violated(
    decision_set: DecisionSet,
    w,
    theta: ThetaLike,
    I: Sequence[int],
    epsilon: float = 1.0,
    settings: Optional[Settings] = None,
    blm: Optional[BudgetOracle] = None,
) -> Tuple[Decision, float]:
    """Decision maximizing h_x(εw) via the budgeted sweep, and its sweep score."""
    values = theta_vector(theta)
    profile = gap_profile(decision_set, values, settings)
    if tuple(I) != tuple(profile.I):
        profile = GapProfile(
            profile.x_star,
            profile.opt_value,
            profile.delta_min,
            profile.delta_max,
            profile.m,
            tuple(I),
            profile.delta_min_exact,
        )
    oracle = SweepOracle(decision_set, values, profile, settings, blm)
    x, score, _ = oracle.most_violated(epsilon * np.asarray(w, dtype=float))
    return x, score


# ---------- Subgradient loop ----------


@dataclass
class ReducedSolution:
    w: np.ndarray
    w_average: np.ndarray
    iterations: int
    certified_max_violation: float
    inflation: float
    plateau: bool = False
    projector_calls: Dict[str, int] = field(default_factory=dict)


def inflate(w, factor: float) -> np.ndarray:
    return np.asarray(w, dtype=float) * factor


def _certify(w: np.ndarray, oracle, settings: Settings) -> Tuple[np.ndarray, float, float]:
    """Scale w up until no constraint is violated; returns (w, violation, factor)."""
    total = 1.0
    rounds = settings.inflation_rounds
    for k in range(rounds + 1):
        x, violation, delta = oracle.most_violated(w)
        if violation <= settings.feasibility_tol:
            return w, violation, total
        if k == rounds - 1 or delta <= 0:
            # Δ_x >= 1 for integer means, so 1 + v clears every constraint at once
            factor = 1.0 + violation
        else:
            factor = (violation + delta**2) / delta**2 * (1.0 + 1e-12)
        logger.debug("inflation round %d: violation %.3g, factor %.6g", k, violation, factor)
        w = w * factor
        total *= factor
    raise IterationBudgetExhausted(
        f"could not certify feasibility after {rounds} inflation rounds", partial=w
    )


def _step_radius(problem: ReducedProblem, witnesses: Optional[Dict[int, Decision]],
                 region: FeasibleRegion) -> float:
    """Norm of the feasible point Σ_{i∈I} (m/Δmin²) lift(xⁱ)."""
    delta_min = problem.gaps.delta_min
    if not math.isfinite(delta_min) or delta_min <= 0:
        delta_min = 1.0
    if witnesses:
        point = np.zeros(problem.d_lifted)
        for i in problem.I:
            if i in witnesses:
                point += problem.hull.lift(witnesses[i])
        point *= max(problem.gaps.m, 1) / delta_min**2
        radius = float(np.linalg.norm(point))
        if radius > 0:
            return radius
    return float(np.linalg.norm(region.interior))


class _Stage:
    """One pass of the subgradient loop from a given start; tracks the running average."""

    def __init__(self, problem: ReducedProblem, params: GLPGParams, oracle, projector: Projector):
        self.q = problem.q
        self.I = np.asarray(problem.I, dtype=np.int64)
        self.params = params
        self.oracle = oracle
        self.projector = projector

    def subgradient(self, w: np.ndarray) -> np.ndarray:
        """q + λε∇h_{x_t}(εw) when the most violated constraint is violated, else q."""
        eps, I = self.params.epsilon, self.I
        scaled = eps * w
        x_t, _, delta_t = self.oracle.most_violated(scaled)
        on = x_t[I] == 1
        w_on = scaled[I][on]
        g = self.q.copy()
        if float(np.sum(1.0 / w_on)) - delta_t**2 > 0:
            g[I[on]] -= self.params.lam * eps / w_on**2
        return g

    def run(self, w: np.ndarray, T: int, radius: Optional[float]) -> Tuple[np.ndarray, int, bool]:
        params, projector = self.params, self.projector
        total = np.zeros_like(w)
        previous: Optional[Tuple[float, float]] = None
        t = 0
        for t in range(1, T + 1):
            g = self.subgradient(w)
            if radius is None:
                step = params.eta
            else:
                norm = float(np.linalg.norm(projector.tangent(g)))
                step = radius / (math.sqrt(t) * norm) if norm > 0 else 0.0
            w = projector.project(w - step * g)
            total += w

            if params.stop_on_plateau and t % params.plateau_window == 0:
                average = total / t
                current = (float(self.q @ average), self.oracle.max_violation(average))
                logger.debug("GLPG t=%d objective=%.8g violation=%.3g", t, *current)
                if previous is not None and _settled(current, previous, params.plateau_tol):
                    return average, t, True
                previous = current
        return total / t, t, False


def _settled(current, previous, tol: float) -> bool:
    return all(abs(c - p) < tol * max(1.0, abs(c)) for c, p in zip(current, previous))


def solve_reduced(
    problem: ReducedProblem,
    params: GLPGParams,
    decision_set: DecisionSet,
    theta: ThetaLike,
    *,
    oracle=None,
    region: Optional[FeasibleRegion] = None,
    witnesses: Optional[Dict[int, Decision]] = None,
    settings: Optional[Settings] = None,
) -> ReducedSolution:
    """Run the penalized subgradient loop and return the inflated average iterate.

    Theoretical mode: constant step η for T iterations, averaging every iterate.
    Practical mode: normalized steps r/(√t‖Pg‖), restarted ``params.restarts``
    times from the previous average with the radius halved each time; the last
    stage's average is returned.
    """
    settings = settings or default_settings()
    d_lifted = problem.d_lifted
    if not problem.I:
        zero = np.zeros(d_lifted)
        return ReducedSolution(zero, zero.copy(), 0, 0.0, 1.0)

    values = theta_vector(theta)
    if oracle is None:
        oracle = make_oracle(decision_set, values, problem.gaps, settings)
    if region is None:
        region = feasible_region(problem, decision_set, witnesses, settings)
    projector = Projector(region, settings)
    stage = _Stage(problem, params, oracle, projector)

    T = params.iterations
    logger.info(
        "GLPG: d'=%d |I|=%d λ=%.4g T=%d (%s)",
        d_lifted,
        len(problem.I),
        params.lam,
        T,
        "theoretical" if params.theoretical else "practical",
    )

    w = projector.project(np.full(d_lifted, problem.w_floor))
    if params.theoretical:
        average, iterations, plateau = stage.run(w, T, None)
    else:
        radius = _step_radius(problem, witnesses, region)
        stages = max(1, min(params.restarts, T))
        iterations, plateau = 0, False
        average = w
        for k in range(stages):
            length = T // stages + (1 if k < T % stages else 0)
            average, used, plateau = stage.run(average, length, radius)
            iterations += used
            logger.debug("GLPG stage %d: radius %.3g, %d iterations", k, radius, used)
            radius /= 2.0
        if plateau:
            logger.info("GLPG: plateau after %d iterations", iterations)

    w_prime = inflate(average, 1.0 + params.delta2)
    w_prime, violation, factor = _certify(w_prime, oracle, settings)
    if factor > 1.0:
        logger.info("GLPG: adaptive inflation by %.6g", factor)
    return ReducedSolution(
        w=w_prime,
        w_average=average,
        iterations=iterations,
        certified_max_violation=violation,
        inflation=(1.0 + params.delta2) * factor,
        plateau=plateau,
        projector_calls=dict(projector.calls),
    )


# ---------- Decomposition ----------


def _decompose_exact(
    decision_set: DecisionSet, hull: HullRep, w: np.ndarray, settings: Settings
) -> Tuple[List[Decision], List[float]]:
    try:
        X = decision_matrix(decision_set, settings.enum_cap)
    except TooLarge as exc:
        raise DecompositionFailure("greedy decomposition failed and |X| is above the cap") from exc
    Z = lift_all(hull, X).T
    scale = max(1.0, float(np.max(np.abs(w))))
    alpha, residual = nnls(Z, w)
    if residual > 1e-6 * scale:
        raise DecompositionFailure(f"w is not in the cone of lifted decisions (residual {residual:.3g})")
    support = np.flatnonzero(alpha > 1e-12 * scale)
    if len(support) > hull.d_lifted:
        # a basic solution on the same support has at most d' atoms
        res = linprog(
            c=np.ones(len(support)),
            A_eq=Z[:, support],
            b_eq=w,
            bounds=(0, None),
            method="highs-ds",
        )
        if res.status == 0:
            alpha = np.zeros_like(alpha)
            alpha[support] = res.x
            support = np.flatnonzero(alpha > 1e-12 * scale)
    return [as_decision(X[j]) for j in support], [float(alpha[j]) for j in support]


def decompose(
    decision_set: DecisionSet,
    hull: HullRep,
    w,
    settings: Optional[Settings] = None,
    M: Optional[np.ndarray] = None,
) -> Tuple[List[Decision], List[float]]:
    """Write a lifted cone point as Σ α_k lift(x^k) with at most d' atoms."""
    settings = settings or default_settings()
    w = np.asarray(w, dtype=float)
    scale = float(np.max(np.abs(w), initial=0.0))
    if scale == 0.0:
        return [], []
    if M is None:
        M = homogenize(hull)[0]
    tol = 1e-9 * scale
    m_tol = tol * max(1.0, float(np.max(np.abs(M), initial=0.0)))
    remainder = w.copy()
    remainder[np.abs(remainder) <= tol] = 0.0
    atoms: List[Decision] = []
    weights: List[float] = []
    ok = True
    for _ in range(hull.d_lifted + 1):
        if np.max(np.abs(remainder)) <= tol:
            break
        support = np.flatnonzero(remainder > tol)
        x = lifted_support_completion(decision_set, hull, support, settings)
        z = hull.lift(x)
        on = z > 0.5
        if np.any(on & (remainder <= tol)):
            ok = False
            break
        alpha = float(np.min(remainder[on]))
        remainder = remainder - alpha * z
        remainder[np.abs(remainder) <= tol] = 0.0
        atoms.append(x)
        weights.append(alpha)
        if np.min(remainder) < -tol or np.max(np.abs(M @ remainder), initial=0.0) > m_tol:
            ok = False
            break
    else:
        ok = np.max(np.abs(remainder)) <= tol
    if ok:
        return atoms, weights
    logger.info("decomposition: greedy step failed, solving exactly over enumerated decisions")
    return _decompose_exact(decision_set, hull, w, settings)


# ---------- Full pipeline ----------


@dataclass(frozen=True)
class SolveOverrides:
    max_iters: Optional[int] = None
    theoretical: bool = False
    stop_on_plateau: bool = True
    oracle: str = "auto"  # "auto" | "sweep" | "enumerated"


def _as_theta(theta: ThetaLike) -> Theta:
    if isinstance(theta, Theta):
        return theta
    return make_theta(theta)


def solve(
    decision_set: DecisionSet,
    theta: ThetaLike,
    delta: float = 0.1,
    epsilon: float = 1.0,
    overrides: Optional[SolveOverrides] = None,
    settings: Optional[Settings] = None,
    blm: Optional[BudgetOracle] = None,
) -> GLOutput:
    """(ε, δ)-optimal allocation for integer means θ."""
    started = time.perf_counter()
    settings = settings or default_settings()
    overrides = overrides or SolveOverrides()
    th = _as_theta(theta)
    values = th.values
    if values.shape[0] != decision_set.d:
        raise ValueError(f"theta has length {values.shape[0]}, structure has d={decision_set.d}")

    covering = check_covering(decision_set, settings)
    if covering.uncovered:
        raise InvalidStructure(
            f"coordinates {covering.uncovered} are never selected; drop them before solving"
        )
    gaps = gap_profile(decision_set, th, settings)
    hull = build_hull(decision_set, settings, drop_redundant=True)
    if not gaps.I:
        logger.info("no suboptimal items: zero exploration")
        return GLOutput(
            atoms=[],
            weights=[],
            w_bar_prime=np.zeros(hull.d_lifted),
            objective=0.0,
            objective_q=0.0,
            certified_max_violation=0.0,
            iterations=0,
            wallclock=time.perf_counter() - started,
            d=decision_set.d,
        )

    problem = reduce(hull, th, gaps, sample=list(covering.witnesses.values()), settings=settings)
    params = schedule(
        delta,
        epsilon,
        gaps.m,
        decision_set.d,
        th.norm_inf,
        float(np.linalg.norm(problem.q)),
        max_iters=overrides.max_iters or settings.max_iters,
        theoretical=overrides.theoretical,
        stop_on_plateau=overrides.stop_on_plateau,
        plateau_window=settings.plateau_window,
        plateau_tol=settings.plateau_tol,
        restarts=settings.step_restarts,
    )
    oracle = make_oracle(decision_set, values, gaps, settings, overrides.oracle, blm)
    reduced = solve_reduced(
        problem,
        params,
        decision_set,
        th,
        oracle=oracle,
        witnesses=covering.witnesses,
        settings=settings,
    )
    atoms, weights = decompose(decision_set, hull, reduced.w, settings, M=problem.M)
    # certify the allocation that is reported, not the point it was cut from
    w_bar = np.zeros(hull.d_lifted)
    for x, a in zip(atoms, weights):
        w_bar += a * hull.lift(x)
    w_bar, violation, factor = _certify(w_bar, oracle, settings)
    if factor > 1.0:
        logger.debug("GLPG: decomposition rounding cleared by %.12g", factor)
        weights = [a * factor for a in weights]

    objective = float(sum(a * (gaps.opt_value - float(values @ x)) for x, a in zip(atoms, weights)))
    objective_q = float(problem.q @ w_bar)
    if abs(objective - objective_q) > 1e-6 * max(1.0, abs(objective)):
        raise IdentityViolation(
            f"decomposed objective {objective:.10g} differs from qᵀw {objective_q:.10g}"
        )
    q_bound, norm_bound = solution_bounds(gaps.m, decision_set.d, th.norm_inf)
    if objective_q > q_bound * (1.0 + params.delta2) + delta:
        logger.warning("objective %.6g exceeds the a priori bound %.6g", objective_q, q_bound)
    if np.linalg.norm(w_bar[: decision_set.d]) > norm_bound * (1.0 + params.delta2) + delta:
        logger.warning("allocation norm exceeds the a priori bound %.6g", norm_bound)

    elapsed = time.perf_counter() - started
    logger.info("GLPG objective %.6g after %d iterations (%.2fs)", objective, reduced.iterations, elapsed)
    return GLOutput(
        atoms=atoms,
        weights=weights,
        w_bar_prime=w_bar,
        objective=objective,
        objective_q=objective_q,
        certified_max_violation=violation,
        iterations=reduced.iterations,
        wallclock=elapsed,
        d=decision_set.d,
        meta={
            "inflation": reduced.inflation * factor,
            "plateau": reduced.plateau,
            "lambda": params.lam,
            "delta2": params.delta2,
            "projector": reduced.projector_calls,
        },
    )


def solve_discretized(
    decision_set: DecisionSet,
    theta_real,
    epsilon: float,
    delta: float = 0.1,
    overrides: Optional[SolveOverrides] = None,
    settings: Optional[Settings] = None,
) -> GLOutput:
    """Allocation for real means: solve on ⌈θ/ε⌉, rescale and inflate.

    Gaps of εθ' are ε times the integer gaps, so the integer allocation is
    divided by ε² before the real-means inflation (1 + 2mε/Δmin)².
    """
    settings = settings or default_settings()
    real = np.asarray(theta_real, dtype=float)
    th = discretize(real, epsilon, decision_set, settings)
    out = solve(decision_set, th, delta, 1.0, overrides, settings)

    profile = gap_profile(decision_set, real, settings)
    factor = epsilon**-2
    if profile.I and math.isfinite(profile.delta_min) and profile.delta_min > 0:
        factor *= inflation_factor(profile.m, epsilon, profile.delta_min)
    weights = [w * factor for w in out.weights]
    objective = float(
        sum(a * (profile.opt_value - float(real @ x)) for x, a in zip(out.atoms, weights))
    )
    hull = build_hull(decision_set, settings, drop_redundant=True)
    w_bar = out.w_bar_prime * factor
    objective_q = objective
    if profile.I:
        objective_q = float(reduce(hull, real, profile, settings=settings).q @ w_bar)

    violation = math.nan
    if profile.I:
        try:
            X = decision_matrix(decision_set, settings.enum_cap)
            gaps = profile.opt_value - X @ real
            rates = np.zeros(decision_set.d)
            for x, a in zip(out.atoms, weights):
                rates += a * x
            with np.errstate(divide="ignore"):
                inv = np.where(rates[list(profile.I)] > 0, 1.0 / rates[list(profile.I)], np.inf)
            violation = float(np.max(X[:, list(profile.I)] @ inv - gaps**2))
        except TooLarge:
            logger.info("real-means violation not enumerated (|X| above cap)")
    else:
        violation = 0.0

    return GLOutput(
        atoms=out.atoms,
        weights=weights,
        w_bar_prime=w_bar,
        objective=objective,
        objective_q=objective_q,
        certified_max_violation=violation,
        iterations=out.iterations,
        wallclock=out.wallclock,
        d=decision_set.d,
        certified_discretization=th.certified,
        meta={**out.meta, "epsilon": epsilon, "scale": factor, "integer_theta": th.values.tolist()},
    )
