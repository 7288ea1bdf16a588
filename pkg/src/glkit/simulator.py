"""Semi-bandit simulator: Gaussian environment, index policies and regret traces."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .config import Settings, default_settings
from .errors import GlkitError, InvalidStructure
from .glpg import SolveOverrides, solve
from .instance import discretize
from .model import Decision, RegretTrace, as_decision, decision_key
from .structures import DecisionSet, _pick_lexmin, check_covering, decision_matrix, linear_max

logger = logging.getLogger(__name__)

NOISE_VARIANCE = 0.5


# ---------- Environment and learner state ----------


class Environment:
    """Rewards Y(t) ~ N(θ, ½ I), drawn independently every round."""

    def __init__(self, theta, rng: np.random.Generator):
        self.theta = np.asarray(theta, dtype=float)
        self.rng = rng

    @property
    def d(self) -> int:
        return int(self.theta.shape[0])

    def draw(self) -> np.ndarray:
        return self.rng.normal(self.theta, math.sqrt(NOISE_VARIANCE))

    def pull(self, x) -> np.ndarray:
        """Semi-bandit feedback: the reward vector masked by the decision."""
        return self.draw() * np.asarray(x, dtype=float)


@dataclass
class LearnerState:
    """Per-coordinate counts and sums, per-decision play counts, and the CE cache."""

    n: np.ndarray
    sums: np.ndarray
    t: int = 0
    plays: Dict[Tuple[int, ...], int] = field(default_factory=dict)
    ce: Optional["CertaintyEquivalencePolicy"] = field(default=None, repr=False, compare=False)

    @classmethod
    def empty(cls, d: int) -> "LearnerState":
        return cls(n=np.zeros(d, dtype=np.int64), sums=np.zeros(d))

    @property
    def theta_hat(self) -> np.ndarray:
        return self.sums / np.maximum(self.n, 1)

    def update(self, x, observed) -> None:
        x = np.asarray(x)
        self.n += x.astype(np.int64)
        self.sums += np.where(x == 1, observed, 0.0)
        key = decision_key(x)
        self.plays[key] = self.plays.get(key, 0) + 1


# ---------- Selection rules ----------


def cucb_select(
    state: LearnerState,
    decision_set: DecisionSet,
    horizon: int,
    bonus: str = "printed",
    settings: Optional[Settings] = None,
) -> Decision:
    """argmax θ̂ᵀx + Σ x_i b_i with b_i = ln T / n_i, or √(1.5 ln t / n_i) for ``bonus="sqrt"``."""
    n = state.n.astype(float)
    if bonus == "printed":
        b = math.log(horizon) / n
    elif bonus == "sqrt":
        b = np.sqrt(1.5 * math.log(max(state.t, 2)) / n)
    else:
        raise ValueError(f"unknown CUCB bonus {bonus!r}")
    return linear_max(decision_set, state.theta_hat + b, settings)


def ts_select(
    state: LearnerState,
    decision_set: DecisionSet,
    rng: np.random.Generator,
    variance_scale: float = 1.0,
    settings: Optional[Settings] = None,
) -> Decision:
    """Thompson sampling: V ~ N(θ̂, diag(1/n)), play argmax Vᵀx."""
    sd = np.sqrt(variance_scale / state.n.astype(float))
    sample = state.theta_hat + sd * rng.standard_normal(state.n.shape[0])
    return linear_max(decision_set, sample, settings)


def escb_select(
    state: LearnerState,
    decision_set: DecisionSet,
    horizon: int,
    settings: Optional[Settings] = None,
) -> Decision:
    """argmax θ̂ᵀx + √(Σ x_i ln T / n_i) by enumeration."""
    settings = settings or default_settings()
    X = decision_matrix(decision_set, settings.enum_cap)
    index = X @ state.theta_hat + np.sqrt(X @ (math.log(horizon) / state.n.astype(float)))
    return as_decision(X[_pick_lexmin(index)])


# ---------- Policies ----------


class Policy:
    name = "policy"
    initialize = True

    def __init__(self, decision_set: DecisionSet, horizon: int,
                 rng: Optional[np.random.Generator], settings: Settings):
        self.decision_set = decision_set
        self.horizon = horizon
        self.rng = rng
        self.settings = settings

    def select(self, state: LearnerState) -> Decision:
        raise NotImplementedError

    def observe(self, x: Decision) -> None:
        pass


class CucbPolicy(Policy):
    name = "cucb"

    def select(self, state):
        return cucb_select(state, self.decision_set, self.horizon, self.settings.cucb_bonus,
                           self.settings)


class ThompsonPolicy(Policy):
    name = "ts"

    def select(self, state):
        return ts_select(state, self.decision_set, self.rng, settings=self.settings)


class EscbPolicy(Policy):
    name = "escb"

    def select(self, state):
        return escb_select(state, self.decision_set, self.horizon, self.settings)


class OraclePolicy(Policy):
    """Plays the true optimal decision every round."""

    name = "oracle"
    initialize = False

    def __init__(self, decision_set, horizon, rng, settings, theta=None):
        super().__init__(decision_set, horizon, rng, settings)
        self.x_star = linear_max(decision_set, np.asarray(theta, dtype=float), settings)

    def select(self, state):
        return self.x_star


class CertaintyEquivalencePolicy(Policy):
    """Explores along GLPG allocations computed from the empirical means.

    The allocation is recomputed at t = 2^j with discretization step
    max(2^{-j/2}, ossb_min_epsilon). Between recomputations an atom is played
    while its count is below ⌈α ln t⌉ (largest deficit first); otherwise the
    empirically best decision is played. A failed solve falls back to CUCB for
    that epoch. Play counts are read from the learner state.
    """

    name = "ossb"

    def __init__(self, decision_set, horizon, rng, settings):
        super().__init__(decision_set, horizon, rng, settings)
        self.allocation: Dict[Tuple[int, ...], float] = {}
        self.epoch = -1
        self.next_boundary = 1
        self.fallback = False

    def resolve(self, state: LearnerState) -> None:
        j = int(math.floor(math.log2(max(state.t, 1))))
        self.epoch = j
        self.next_boundary = 2 ** (j + 1)
        eps = max(2.0 ** (-j / 2.0), self.settings.ossb_min_epsilon)
        clipped = np.maximum(state.theta_hat, eps)
        try:
            theta = discretize(clipped, eps)
            out = solve(
                self.decision_set,
                theta,
                delta=self.settings.ossb_delta,
                overrides=SolveOverrides(max_iters=self.settings.ossb_max_iters),
                settings=self.settings,
            )
        except GlkitError as exc:
            logger.warning("ossb epoch %d: solver failed (%s); using CUCB", j, exc)
            self.allocation = {}
            self.fallback = True
            return
        self.fallback = False
        self.allocation = {decision_key(x): a / eps**2 for x, a in zip(out.atoms, out.weights)}
        logger.debug("ossb epoch %d: eps=%.3g, %d atoms", j, eps, len(self.allocation))

    def targets(self, t: int) -> Dict[Tuple[int, ...], int]:
        log_t = math.log(max(t, 1))
        return {key: math.ceil(a * log_t) for key, a in self.allocation.items()}

    def select(self, state):
        if state.t >= self.next_boundary:
            self.resolve(state)
        if self.fallback:
            return cucb_select(state, self.decision_set, self.horizon, self.settings.cucb_bonus,
                               self.settings)
        best_key, best_deficit = None, 0
        for key, target in self.targets(state.t).items():
            deficit = target - state.plays.get(key, 0)
            if deficit > best_deficit:
                best_key, best_deficit = key, deficit
        if best_key is not None:
            return as_decision(best_key)
        return linear_max(self.decision_set, state.theta_hat, self.settings)


ALGORITHMS = {
    cls.name: cls
    for cls in (CucbPolicy, ThompsonPolicy, EscbPolicy, CertaintyEquivalencePolicy, OraclePolicy)
}


def ossb_ce_select(
    state: LearnerState,
    decision_set: DecisionSet,
    settings: Optional[Settings] = None,
    horizon: Optional[int] = None,
) -> Decision:
    """Certainty-equivalence choice; the epoch allocation is cached on ``state``.

    ``settings`` carries the solver configuration (ossb_delta, ossb_max_iters,
    ossb_min_epsilon). ``horizon`` only matters for the CUCB fallback.
    """
    policy = state.ce
    if policy is None or policy.decision_set is not decision_set:
        policy = CertaintyEquivalencePolicy(
            decision_set, horizon or max(state.t, 2), None, settings or default_settings()
        )
        state.ce = policy
    return policy.select(state)


# ---------- Experiments ----------


def checkpoints(horizon: int) -> List[int]:
    """t in {1, 2, 5}·10^k up to the horizon, plus the horizon itself."""
    out = []
    scale = 1
    while scale <= horizon:
        out.extend(t for t in (scale, 2 * scale, 5 * scale) if t <= horizon)
        scale *= 10
    if horizon not in out:
        out.append(horizon)
    return out


@dataclass
class ExperimentSpec:
    decision_set: DecisionSet
    theta: np.ndarray
    algorithm: str
    horizon: int
    instance_id: str = "instance"
    settings: Settings = field(default_factory=default_settings)


def run_single(spec: ExperimentSpec, seed: int) -> RegretTrace:
    decision_set, horizon = spec.decision_set, spec.horizon
    theta = np.asarray(spec.theta, dtype=float)
    env_seq, policy_seq = np.random.SeedSequence(seed).spawn(2)
    env = Environment(theta, np.random.default_rng(env_seq))
    rng = np.random.default_rng(policy_seq)
    settings = spec.settings

    cls = ALGORITHMS[spec.algorithm]
    if cls is OraclePolicy:
        policy = OraclePolicy(decision_set, horizon, rng, settings, theta=theta)
    else:
        policy = cls(decision_set, horizon, rng, settings)

    x_star = linear_max(decision_set, theta, settings)
    opt = float(theta @ x_star)
    witnesses = check_covering(decision_set, settings).witnesses
    pending = [witnesses[i] for i in sorted(witnesses)] if policy.initialize else []

    state = LearnerState.empty(decision_set.d)
    regret = np.zeros(horizon + 1)
    for t in range(1, horizon + 1):
        state.t = t
        while pending and np.all(state.n[pending[0] == 1] > 0):
            pending.pop(0)
        x = pending.pop(0) if pending else policy.select(state)
        state.update(x, env.pull(x))
        policy.observe(x)
        regret[t] = regret[t - 1] + max(0.0, opt - float(theta @ x))
    return RegretTrace(cumulative=regret, seed=seed, algorithm=spec.algorithm,
                       instance_id=spec.instance_id)


def _run_packed(args: Tuple[ExperimentSpec, int]) -> RegretTrace:
    return run_single(*args)


def run_experiment(
    decision_set: DecisionSet,
    theta,
    algorithm: str,
    horizon: int,
    replications: int,
    base_seed: int = 0,
    instance_id: str = "instance",
    settings: Optional[Settings] = None,
    workers: Optional[int] = None,
) -> List[RegretTrace]:
    """R independent runs with seeds base_seed+1 .. base_seed+R."""
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {sorted(ALGORITHMS)}")
    if horizon < decision_set.d:
        raise ValueError(f"horizon {horizon} is shorter than d={decision_set.d}")
    report = check_covering(decision_set, settings)
    if report.uncovered:
        raise InvalidStructure(f"coordinates {report.uncovered} are never selected")
    spec = ExperimentSpec(
        decision_set=decision_set,
        theta=np.asarray(theta, dtype=float),
        algorithm=algorithm,
        horizon=int(horizon),
        instance_id=instance_id,
        settings=settings or default_settings(),
    )
    seeds = [base_seed + r for r in range(1, replications + 1)]
    logger.info("simulate %s: T=%d, R=%d", algorithm, horizon, replications)
    if workers and workers > 1 and replications > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_packed, [(spec, s) for s in seeds]))
    return [run_single(spec, s) for s in seeds]
