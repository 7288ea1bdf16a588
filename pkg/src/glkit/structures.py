"""Decision sets X ⊂ {0,1}^d and the oracles the solver needs on them.

Supported structures: m-sets, source→sink paths in a DAG, bipartite matchings
and explicit lists. Every oracle breaks ties towards the lexicographically
smallest binary vector (a 0 in the first differing coordinate wins).
"""

from __future__ import annotations

import itertools
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, ClassVar, Dict, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linear_sum_assignment, linprog

from .config import Settings, default_settings
from .errors import (
    EmptySet,
    InvalidStructure,
    OracleUnavailable,
    TooLarge,
    Unsupported,
)
from .model import Decision, HullRep, as_decision, decision_key

logger = logging.getLogger(__name__)

_TIE_RTOL = 1e-12


class _Infeasible:
    """Answer of a budgeted query when no decision meets the budget."""

    _instance: ClassVar[Optional["_Infeasible"]] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __bool__(self) -> bool:
        return False

    def __repr__(self) -> str:
        return "INFEASIBLE"


INFEASIBLE = _Infeasible()

BudgetAnswer = Decision | _Infeasible
BudgetOracle = Callable[[np.ndarray, np.ndarray, int], List[BudgetAnswer]]
"""Pluggable budgeted oracle: (a, u, s_max) -> answer for every budget 0..s_max."""


# ---------- Tie-breaking helpers ----------


def _tie_tol(*values: float) -> float:
    return _TIE_RTOL * max(1.0, *(abs(v) for v in values))


def _better(value: float, mask: int, best_value: Optional[float], best_mask: int) -> bool:
    """True if (value, mask) beats the incumbent: larger value, then smaller vector."""
    if best_value is None:
        return True
    tol = _tie_tol(value, best_value)
    if value > best_value + tol:
        return True
    if value < best_value - tol:
        return False
    return mask < best_mask


def _bit(i: int, d: int) -> int:
    # coordinate 0 is the most significant bit, so integer order == lexicographic order
    return 1 << (d - 1 - i)


def _mask_to_decision(mask: int, d: int) -> Decision:
    return as_decision([(mask >> (d - 1 - i)) & 1 for i in range(d)])


def _pick_lexmin(values: np.ndarray, feasible: Optional[np.ndarray] = None) -> int:
    """Index of the best value among rows already sorted lexicographically."""
    vals = values if feasible is None else np.where(feasible, values, -np.inf)
    best = float(np.max(vals))
    if not np.isfinite(best):
        return -1
    return int(np.argmax(vals >= best - _tie_tol(best)))


def _check_binary(x: np.ndarray, d: int) -> bool:
    return x.shape == (d,) and bool(np.all((x == 0) | (x == 1)))


# ---------- Decision sets ----------


class DecisionSet(ABC):
    """Common interface of the combinatorial structures."""

    kind: ClassVar[str] = ""

    @property
    @abstractmethod
    def d(self) -> int: ...

    @abstractmethod
    def iter_decisions(self) -> Iterator[Tuple[int, ...]]:
        """Yield every decision once, in any order."""

    @abstractmethod
    def contains(self, x) -> bool: ...

    @abstractmethod
    def restrict(self, keep: Sequence[int]) -> "DecisionSet":
        """Same structure on the kept coordinates (dropped ones must be uncovered)."""

    @abstractmethod
    def _hull(self, settings: Settings, drop_redundant: bool) -> HullRep: ...

    def _linear_max(self, a: np.ndarray, settings: Settings) -> Decision:
        X = decision_matrix(self, settings.enum_cap)
        if X.shape[0] == 0:
            raise EmptySet(f"{self.kind}: no decision")
        return as_decision(X[_pick_lexmin(X @ a)])

    def _budgeted_table(
        self, a: np.ndarray, u: np.ndarray, s_max: int
    ) -> Optional[List[BudgetAnswer]]:
        """Exact DP for every budget 0..s_max, or None when the structure has none."""
        return None

    @cached_property
    def m(self) -> int:
        """Largest decision size."""
        try:
            return int(linear_max(self, np.ones(self.d)).sum())
        except EmptySet:
            return 0


@dataclass(frozen=True)
class MSet(DecisionSet):
    """All binary vectors of length ``size`` with exactly ``cardinality`` ones."""

    kind: ClassVar[str] = "mset"

    size: int
    cardinality: int

    def __post_init__(self):
        if self.size < 1:
            raise InvalidStructure("mset: d must be positive")
        if not 0 <= self.cardinality <= self.size:
            raise InvalidStructure(f"mset: m={self.cardinality} outside 0..{self.size}")

    @property
    def d(self) -> int:
        return self.size

    @cached_property
    def m(self) -> int:
        return self.cardinality

    def iter_decisions(self) -> Iterator[Tuple[int, ...]]:
        for combo in itertools.combinations(range(self.size), self.cardinality):
            x = [0] * self.size
            for i in combo:
                x[i] = 1
            yield tuple(x)

    def contains(self, x) -> bool:
        x = np.asarray(x)
        return _check_binary(x, self.size) and int(x.sum()) == self.cardinality

    def restrict(self, keep: Sequence[int]) -> "MSet":
        return MSet(len(keep), min(self.cardinality, len(keep)))

    def _linear_max(self, a: np.ndarray, settings: Settings) -> Decision:
        # equal weights: later indices first, which keeps the vector lexicographically small
        order = sorted(range(self.size), key=lambda i: (-a[i], -i))[: self.cardinality]
        x = np.zeros(self.size, dtype=np.int64)
        x[order] = 1
        return x

    def _budgeted_table(self, a, u, s_max):
        d, m, S = self.size, self.cardinality, s_max + 1
        # V[i, k, r]: best value using items i.. with exactly k ones and budget still needed r
        V = np.full((d + 1, m + 1, S), -np.inf)
        V[d, 0, 0] = 0.0
        rs = np.arange(S)
        for i in range(d - 1, -1, -1):
            shifted = np.maximum(rs - int(u[i]), 0)
            V[i] = V[i + 1]
            for k in range(1, m + 1):
                take = a[i] + V[i + 1, k - 1, shifted]
                V[i, k] = np.maximum(V[i + 1, k], take)
        out: List[BudgetAnswer] = []
        for r in range(S):
            if not np.isfinite(V[0, m, r]):
                out.append(INFEASIBLE)
                continue
            x = np.zeros(d, dtype=np.int64)
            k, need = m, r
            for i in range(d):
                skip = V[i + 1, k, need]
                take = -np.inf
                if k > 0:
                    take = a[i] + V[i + 1, k - 1, max(0, need - int(u[i]))]
                if np.isfinite(take) and (
                    not np.isfinite(skip) or take > skip + _tie_tol(take, skip)
                ):
                    x[i] = 1
                    k, need = k - 1, max(0, need - int(u[i]))
            out.append(x)
        return out

    def _hull(self, settings: Settings, drop_redundant: bool) -> HullRep:
        d, m = self.size, self.cardinality
        if drop_redundant and m == 1:
            # Σw = 1 with w >= 0 already implies w <= 1
            return HullRep(
                A=np.ones((1, d)),
                b=np.array([1.0]),
                d=d,
                lift_matrix=np.eye(d),
                lift_offset=np.zeros(d),
            )
        eye = np.eye(d)
        A = np.vstack([np.hstack([np.ones((1, d)), np.zeros((1, d))]), np.hstack([eye, eye])])
        b = np.concatenate([[float(m)], np.ones(d)])
        return HullRep(
            A=A,
            b=b,
            d=d,
            lift_matrix=np.vstack([eye, -eye]),
            lift_offset=np.concatenate([np.zeros(d), np.ones(d)]),
        )


@dataclass(frozen=True)
class StPathDag(DecisionSet):
    """Edge indicators of source→sink paths in a directed acyclic multigraph."""

    kind: ClassVar[str] = "path_dag"

    n_nodes: int
    edges: Tuple[Tuple[int, int], ...]
    source: int
    sink: int

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(u), int(v)) for u, v in self.edges))
        for node in (self.source, self.sink):
            if not 0 <= node < self.n_nodes:
                raise InvalidStructure(f"path_dag: node {node} outside 0..{self.n_nodes - 1}")
        if self.source == self.sink:
            raise InvalidStructure("path_dag: source and sink must differ")
        for u, v in self.edges:
            if not (0 <= u < self.n_nodes and 0 <= v < self.n_nodes):
                raise InvalidStructure(f"path_dag: edge ({u}, {v}) has an unknown endpoint")
        if not self.edges:
            raise InvalidStructure("path_dag: no edges")
        if not nx.is_directed_acyclic_graph(self.graph):
            raise InvalidStructure("Cycle detected in graph")

    @property
    def d(self) -> int:
        return len(self.edges)

    @cached_property
    def graph(self) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        g.add_nodes_from(range(self.n_nodes))
        for idx, (u, v) in enumerate(self.edges):
            g.add_edge(u, v, key=idx)
        return g

    @cached_property
    def _reverse_topological(self) -> List[int]:
        return list(reversed(list(nx.topological_sort(self.graph))))

    def iter_decisions(self) -> Iterator[Tuple[int, ...]]:
        for path in nx.all_simple_edge_paths(self.graph, self.source, self.sink):
            x = [0] * self.d
            for _, _, key in path:
                x[key] = 1
            yield tuple(x)

    def contains(self, x) -> bool:
        x = np.asarray(x)
        if not _check_binary(x, self.d):
            return False
        chosen = {i for i in range(self.d) if x[i]}
        node, used = self.source, 0
        while node != self.sink:
            out = [i for i in chosen if self.edges[i][0] == node]
            if len(out) != 1:
                return False
            node = self.edges[out[0]][1]
            used += 1
        return used == len(chosen)

    def restrict(self, keep: Sequence[int]) -> "StPathDag":
        return StPathDag(self.n_nodes, tuple(self.edges[i] for i in keep), self.source, self.sink)

    def _table(self, a, u, s_max) -> List[Optional[Tuple[float, int]]]:
        d, S = self.d, s_max + 1
        # F[v][r]: best (value, mask) of a v→sink path whose u-weight is at least r
        F: Dict[int, List[Optional[Tuple[float, int]]]] = {}
        for v in self._reverse_topological:
            row: List[Optional[Tuple[float, int]]] = [None] * S
            if v == self.sink:
                row[0] = (0.0, 0)
                F[v] = row
                continue
            for _, w, idx in self.graph.out_edges(v, keys=True):
                sub_row = F[w]
                bit = _bit(idx, d)
                for r in range(S):
                    sub = sub_row[max(0, r - int(u[idx]))]
                    if sub is None:
                        continue
                    value, mask = a[idx] + sub[0], sub[1] | bit
                    best = row[r]
                    if best is None or _better(value, mask, best[0], best[1]):
                        row[r] = (value, mask)
            F[v] = row
        return F[self.source]

    def _linear_max(self, a, settings):
        best = self._table(a, np.zeros(self.d, dtype=np.int64), 0)[0]
        if best is None:
            raise EmptySet("path_dag: no source→sink path")
        return _mask_to_decision(best[1], self.d)

    def _budgeted_table(self, a, u, s_max):
        return [
            INFEASIBLE if cell is None else _mask_to_decision(cell[1], self.d)
            for cell in self._table(a, u, s_max)
        ]

    def _hull(self, settings: Settings, drop_redundant: bool) -> HullRep:
        d = self.d
        rows, rhs = [], []
        for node in range(self.n_nodes):
            if node in (self.source, self.sink):
                continue
            row = np.zeros(d)
            for idx, (u, v) in enumerate(self.edges):
                if v == node:
                    row[idx] += 1.0
                if u == node:
                    row[idx] -= 1.0
            if np.any(row):
                rows.append(row)
                rhs.append(0.0)
        row = np.zeros(d)
        for idx, (u, v) in enumerate(self.edges):
            if u == self.source:
                row[idx] += 1.0
            if v == self.source:
                row[idx] -= 1.0
        rows.append(row)
        rhs.append(1.0)
        return HullRep(
            A=np.vstack(rows),
            b=np.array(rhs),
            d=d,
            lift_matrix=np.eye(d),
            lift_offset=np.zeros(d),
        )


@dataclass(frozen=True)
class BipartiteMatching(DecisionSet):
    """Matchings (or perfect matchings) of a bipartite graph, one coordinate per edge."""

    kind: ClassVar[str] = "bipartite_matching"

    n_left: int
    n_right: int
    edges: Tuple[Tuple[int, int], ...]
    perfect: bool = False

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(u), int(v)) for u, v in self.edges))
        if not self.edges:
            raise InvalidStructure("bipartite_matching: no edges")
        for u, v in self.edges:
            if not (0 <= u < self.n_left and 0 <= v < self.n_right):
                raise InvalidStructure(f"bipartite_matching: edge ({u}, {v}) out of range")
        if len(set(self.edges)) != len(self.edges):
            raise InvalidStructure("bipartite_matching: duplicate edge")

    @property
    def d(self) -> int:
        return len(self.edges)

    def iter_decisions(self) -> Iterator[Tuple[int, ...]]:
        if self.perfect and self.n_left != self.n_right:
            return
        d = self.d
        x = [0] * d
        used_l: set = set()
        used_r: set = set()

        def rec(i: int) -> Iterator[Tuple[int, ...]]:
            if i == d:
                if not self.perfect or len(used_l) == self.n_left:
                    yield tuple(x)
                return
            yield from rec(i + 1)
            u, v = self.edges[i]
            if u not in used_l and v not in used_r:
                used_l.add(u)
                used_r.add(v)
                x[i] = 1
                yield from rec(i + 1)
                x[i] = 0
                used_l.discard(u)
                used_r.discard(v)

        yield from rec(0)

    def contains(self, x) -> bool:
        x = np.asarray(x)
        if not _check_binary(x, self.d):
            return False
        chosen = [self.edges[i] for i in range(self.d) if x[i]]
        lefts = [u for u, _ in chosen]
        rights = [v for _, v in chosen]
        if len(set(lefts)) != len(lefts) or len(set(rights)) != len(rights):
            return False
        if self.perfect:
            return len(chosen) == self.n_left == self.n_right
        return True

    def restrict(self, keep: Sequence[int]) -> "BipartiteMatching":
        return BipartiteMatching(
            self.n_left, self.n_right, tuple(self.edges[i] for i in keep), self.perfect
        )

    @cached_property
    def incidence(self) -> np.ndarray:
        """Vertex-by-edge incidence, left vertices first."""
        inc = np.zeros((self.n_left + self.n_right, self.d))
        for idx, (u, v) in enumerate(self.edges):
            inc[u, idx] = 1.0
            inc[self.n_left + v, idx] = 1.0
        return inc

    def _assignment(
        self, a: np.ndarray, forbidden: set, forced: set
    ) -> Optional[float]:
        """Best matching value given fixed edges, or None when no matching is left."""
        taken_l = {self.edges[i][0] for i in forced}
        taken_r = {self.edges[i][1] for i in forced}
        rows = [u for u in range(self.n_left) if u not in taken_l]
        cols = [v for v in range(self.n_right) if v not in taken_r]
        base = float(sum(a[i] for i in forced))
        if self.perfect and len(rows) != len(cols):
            return None
        if not rows:
            return base
        width = len(cols) if self.perfect else len(cols) + len(rows)
        cost = np.full((len(rows), width), np.inf)
        if not self.perfect:
            cost[:, len(cols):] = 0.0  # leave the row unmatched
        row_at = {u: k for k, u in enumerate(rows)}
        col_at = {v: k for k, v in enumerate(cols)}
        for idx, (u, v) in enumerate(self.edges):
            if idx in forbidden or idx in forced or u not in row_at or v not in col_at:
                continue
            cost[row_at[u], col_at[v]] = -a[idx]
        try:
            r_ind, c_ind = linear_sum_assignment(cost)
        except ValueError:
            return None
        total = cost[r_ind, c_ind]
        if not np.all(np.isfinite(total)):
            return None
        return base - float(total.sum())

    def _linear_max(self, a, settings):
        best = self._assignment(a, set(), set())
        if best is None:
            raise EmptySet("bipartite_matching: no perfect matching")
        forbidden: set = set()
        forced: set = set()
        # fix coordinates in order, keeping a 0 whenever the optimum survives it
        for i in range(self.d):
            u, v = self.edges[i]
            if any(self.edges[j][0] == u or self.edges[j][1] == v for j in forced):
                forbidden.add(i)
                continue
            value = self._assignment(a, forbidden | {i}, forced)
            if value is not None and value >= best - 1e-9 * max(1.0, abs(best)):
                forbidden.add(i)
            else:
                forced.add(i)
        x = np.zeros(self.d, dtype=np.int64)
        x[sorted(forced)] = 1
        return x

    def _hull(self, settings: Settings, drop_redundant: bool) -> HullRep:
        inc = self.incidence
        n_vertices = inc.shape[0]
        if self.perfect:
            return HullRep(
                A=inc.copy(),
                b=np.ones(n_vertices),
                d=self.d,
                lift_matrix=np.eye(self.d),
                lift_offset=np.zeros(self.d),
            )
        return HullRep(
            A=np.hstack([inc, np.eye(n_vertices)]),
            b=np.ones(n_vertices),
            d=self.d,
            lift_matrix=np.vstack([np.eye(self.d), -inc]),
            lift_offset=np.concatenate([np.zeros(self.d), np.ones(n_vertices)]),
        )


@dataclass(frozen=True)
class Explicit(DecisionSet):
    """A stored list of decisions (deduplicated, kept in lexicographic order)."""

    kind: ClassVar[str] = "explicit"

    vectors: Tuple[Tuple[int, ...], ...]
    dim: Optional[int] = None

    def __post_init__(self):
        vecs = sorted({tuple(int(v) for v in vec) for vec in self.vectors})
        if self.dim is None and not vecs:
            raise InvalidStructure("explicit: empty list needs an explicit dimension")
        dim = self.dim if self.dim is not None else len(vecs[0])
        for vec in vecs:
            if len(vec) != dim:
                raise InvalidStructure("explicit: vectors must share one length")
            if any(v not in (0, 1) for v in vec):
                raise InvalidStructure("explicit: entries must be 0 or 1")
        object.__setattr__(self, "vectors", tuple(vecs))
        object.__setattr__(self, "dim", dim)

    @property
    def d(self) -> int:
        return int(self.dim)

    def iter_decisions(self) -> Iterator[Tuple[int, ...]]:
        yield from self.vectors

    def contains(self, x) -> bool:
        return decision_key(x) in set(self.vectors)

    def restrict(self, keep: Sequence[int]) -> "Explicit":
        return Explicit(tuple(tuple(v[i] for i in keep) for v in self.vectors), dim=len(keep))

    def _hull(self, settings: Settings, drop_redundant: bool) -> HullRep:
        if not self.vectors:
            raise EmptySet("explicit: no decision")
        d = self.d
        V = np.array(self.vectors, dtype=float)
        A_eq, b_eq = _affine_hull(V)
        if A_eq.shape[0] and _is_bounded(A_eq, b_eq):
            members = set(self.vectors)
            try:
                vertices = basic_feasible_solutions(A_eq, b_eq, cap=settings.enum_cap)
            except TooLarge:
                vertices = None
            if vertices is not None and all(
                np.allclose(z, np.rint(z), atol=1e-9) and decision_key(np.rint(z)) in members
                for z in vertices
            ):
                return HullRep(
                    A=A_eq,
                    b=b_eq,
                    d=d,
                    lift_matrix=np.eye(d),
                    lift_offset=np.zeros(d),
                    form="affine-hull",
                )
        logger.debug("explicit hull: using the convex-combination lift (%d vertices)", len(V))
        n = len(self.vectors)
        A = np.block([[np.eye(d), -V.T], [np.zeros((1, d)), np.ones((1, n))]])
        b = np.concatenate([np.zeros(d), [1.0]])
        return HullRep(A=A, b=b, d=d, vertices=self.vectors, form="convex-combination")


# ---------- Polyhedral helpers ----------


def _affine_hull(V: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Rows (a, β) with a·v = β for every row v of V, scaled to max |a_i| = 1."""
    n, d = V.shape
    basis = null_space(np.hstack([V, -np.ones((n, 1))]))
    rows, rhs = [], []
    for col in basis.T:
        a, beta = col[:d], col[d]
        scale = np.max(np.abs(a))
        if scale < 1e-12:
            continue
        a, beta = a / scale, beta / scale
        a[np.abs(a) < 1e-12] = 0.0
        rows.append(a)
        rhs.append(0.0 if abs(beta) < 1e-12 else beta)
    if not rows:
        return np.zeros((0, d)), np.zeros(0)
    return np.vstack(rows), np.array(rhs)


def _is_bounded(A: np.ndarray, b: np.ndarray) -> bool:
    res = linprog(
        c=-np.ones(A.shape[1]), A_eq=A, b_eq=b, bounds=(0, None), method="highs"
    )
    return res.status == 0


def _independent_rows(A: np.ndarray) -> List[int]:
    keep: List[int] = []
    for i in range(A.shape[0]):
        if np.linalg.matrix_rank(A[keep + [i]]) > len(keep):
            keep.append(i)
    return keep


def basic_feasible_solutions(
    A: np.ndarray, b: np.ndarray, cap: int = 1_000_000, tol: float = 1e-9
) -> List[np.ndarray]:
    """All vertices of {z : A z = b, z >= 0}, by enumerating column bases."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = A.shape[1]
    rows = _independent_rows(A)
    if not rows:
        return [np.zeros(n)]
    A_r, b_r = A[rows], b[rows]
    r = len(rows)
    if math.comb(n, r) > cap:
        raise TooLarge(f"{math.comb(n, r)} candidate bases exceed cap {cap}", cap)
    found: Dict[Tuple[float, ...], np.ndarray] = {}
    for cols in itertools.combinations(range(n), r):
        B = A_r[:, cols]
        if np.linalg.matrix_rank(B) < r:
            continue
        z_b = np.linalg.solve(B, b_r)
        if np.any(z_b < -tol):
            continue
        z = np.zeros(n)
        z[list(cols)] = z_b
        z[np.abs(z) < tol] = 0.0
        found.setdefault(tuple(np.round(z, 9)), z)
    return list(found.values())


# ---------- Enumeration ----------


def enumerate_decisions(
    decision_set: DecisionSet, cap: Optional[int] = None, settings: Optional[Settings] = None
) -> List[Decision]:
    """All decisions in lexicographic order; TooLarge once more than ``cap`` turn up."""
    settings = settings or default_settings()
    cap = settings.enum_cap if cap is None else cap
    found: List[Tuple[int, ...]] = []
    for key in decision_set.iter_decisions():
        if len(found) >= cap:
            raise TooLarge(f"{decision_set.kind}: more than {cap} decisions", cap)
        found.append(key)
    return [as_decision(k) for k in sorted(found)]


@lru_cache(maxsize=64)
def _decision_matrix(decision_set: DecisionSet, cap: int) -> np.ndarray:
    decisions = enumerate_decisions(decision_set, cap=cap)
    if not decisions:
        X = np.zeros((0, decision_set.d), dtype=np.int64)
    else:
        X = np.vstack(decisions)
    X.setflags(write=False)
    return X


def decision_matrix(decision_set: DecisionSet, cap: Optional[int] = None) -> np.ndarray:
    """Enumerated decisions stacked row-wise (read-only, lexicographic order)."""
    cap = default_settings().enum_cap if cap is None else cap
    return _decision_matrix(decision_set, cap)


# ---------- Oracles ----------


def _as_weights(decision_set: DecisionSet, a) -> np.ndarray:
    a = np.asarray(a, dtype=float).reshape(-1)
    if a.shape[0] != decision_set.d:
        raise ValueError(f"weight vector has length {a.shape[0]}, expected {decision_set.d}")
    if not np.all(np.isfinite(a)):
        raise ValueError("weight vector must be finite")
    return a


def linear_max(
    decision_set: DecisionSet, a, settings: Optional[Settings] = None
) -> Decision:
    """argmax of aᵀx over X, lexicographically smallest among ties."""
    return decision_set._linear_max(_as_weights(decision_set, a), settings or default_settings())


def budgeted_sweep(
    decision_set: DecisionSet,
    a,
    u,
    s_max: int,
    cap: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> List[BudgetAnswer]:
    """Budgeted maxima for every requirement uᵀx >= r, r = 0..s_max, in one pass."""
    settings = settings or default_settings()
    a = _as_weights(decision_set, a)
    u = np.asarray(u).reshape(-1)
    if u.shape[0] != decision_set.d:
        raise ValueError(f"budget vector has length {u.shape[0]}, expected {decision_set.d}")
    if np.any(u < 0) or not np.all(np.equal(np.mod(u, 1), 0)):
        raise ValueError("budget weights must be nonnegative integers")
    u = u.astype(np.int64)
    s_max = max(0, int(s_max))
    table = decision_set._budgeted_table(a, u, s_max)
    if table is not None:
        return table
    cap = settings.enum_cap if cap is None else cap
    try:
        X = decision_matrix(decision_set, cap)
    except TooLarge as exc:
        raise OracleUnavailable(
            f"{decision_set.kind}: no budgeted DP and enumeration exceeds cap {cap}"
        ) from exc
    values = X @ a
    spend = X @ u
    out: List[BudgetAnswer] = []
    for r in range(s_max + 1):
        idx = _pick_lexmin(values, spend >= r)
        out.append(INFEASIBLE if idx < 0 else as_decision(X[idx]))
    return out


def budgeted_linear_max(
    decision_set: DecisionSet,
    a,
    u,
    s: int,
    cap: Optional[int] = None,
    settings: Optional[Settings] = None,
    oracle: Optional[BudgetOracle] = None,
) -> BudgetAnswer:
    """max aᵀx subject to uᵀx >= s, or INFEASIBLE."""
    if oracle is not None:
        return oracle(np.asarray(a, dtype=float), np.asarray(u, dtype=np.int64), int(s))[int(s)]
    return budgeted_sweep(decision_set, a, u, s, cap=cap, settings=settings)[max(0, int(s))]


def min_support_completion(
    decision_set: DecisionSet, allowed, settings: Optional[Settings] = None
) -> Decision:
    """Decision with the fewest ones outside ``allowed``."""
    a = -np.ones(decision_set.d)
    a[list(allowed)] = 0.0
    return linear_max(decision_set, a, settings)


def lifted_support_completion(
    decision_set: DecisionSet,
    hull: HullRep,
    allowed,
    settings: Optional[Settings] = None,
) -> Decision:
    """Decision whose lift has the fewest positive entries outside ``allowed`` (lifted indices)."""
    allowed = set(int(j) for j in allowed)
    outside = [j for j in range(hull.d_lifted) if j not in allowed]
    if hull.is_affine:
        a = -hull.lift_matrix[outside].sum(axis=0) if outside else np.zeros(hull.d)
        return linear_max(decision_set, a, settings)
    best_cost, best = None, None
    for vec in hull.vertices:
        z = hull.lift(vec)
        cost = int(np.count_nonzero(z[outside] > 0))
        if best_cost is None or cost < best_cost:
            best_cost, best = cost, vec
    if best is None:
        raise EmptySet("explicit: no decision")
    return as_decision(best)


@dataclass
class CoveringReport:
    """Uncovered coordinates and one witness decision per covered coordinate."""

    uncovered: List[int]
    witnesses: Dict[int, Decision] = field(default_factory=dict)

    @property
    def covered(self) -> bool:
        return not self.uncovered


def check_covering(
    decision_set: DecisionSet, settings: Optional[Settings] = None
) -> CoveringReport:
    uncovered: List[int] = []
    witnesses: Dict[int, Decision] = {}
    for i in range(decision_set.d):
        a = np.zeros(decision_set.d)
        a[i] = 1.0
        try:
            x = linear_max(decision_set, a, settings)
        except EmptySet:
            uncovered.append(i)
            continue
        if x[i] == 1:
            witnesses[i] = x
        else:
            uncovered.append(i)
    return CoveringReport(uncovered, witnesses)


def drop_coordinates(
    decision_set: DecisionSet, drop
) -> Tuple[DecisionSet, List[int]]:
    """Remove (uncovered) coordinates; returns the smaller set and the kept indices."""
    drop = set(int(i) for i in drop)
    keep = [i for i in range(decision_set.d) if i not in drop]
    if not drop:
        return decision_set, keep
    if not keep:
        raise InvalidStructure(f"{decision_set.kind}: every coordinate would be dropped")
    return decision_set.restrict(keep), keep


def coordinate_witnesses(
    decision_set: DecisionSet, hull: HullRep, settings: Optional[Settings] = None
) -> Dict[int, Decision]:
    """For each lifted coordinate, a decision whose lift is positive there (if any)."""
    out: Dict[int, Decision] = {}
    if hull.is_affine:
        for j in range(hull.d_lifted):
            x = linear_max(decision_set, hull.lift_matrix[j], settings)
            if hull.lift(x)[j] > 0.5:
                out[j] = x
        return out
    for vec in hull.vertices:
        z = hull.lift(vec)
        for j in np.flatnonzero(z > 0.5):
            out.setdefault(int(j), as_decision(vec))
    return out


def hull(
    decision_set: DecisionSet,
    settings: Optional[Settings] = None,
    drop_redundant: bool = False,
) -> HullRep:
    """Lifted equality-form hull of X.

    ``drop_redundant`` removes rows implied by the others (the per-item upper
    bounds of a 1-set), which makes the homogenized matrix vanish there.
    """
    if not isinstance(decision_set, DecisionSet):
        raise Unsupported(f"no exact hull for {type(decision_set).__name__}")
    return decision_set._hull(settings or default_settings(), drop_redundant)
