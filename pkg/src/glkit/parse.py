"""Instance files: schema, loading and conversion to solver inputs.

An instance file is JSON (or YAML) of the form

    {"instance_id": "onesets",
     "structure": {"kind": "mset", "d": 3, "m": 1},
     "theta": [3, 1, 2]}

with ``theta_real`` plus ``epsilon`` in place of ``theta`` for real means.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator
from ruamel.yaml import YAML

from .config import Settings
from .errors import InstanceError
from .instance import make_theta
from .model import Theta
from .structures import (
    BipartiteMatching,
    DecisionSet,
    Explicit,
    MSet,
    StPathDag,
    check_covering,
    drop_coordinates,
)


class MSetSpec(BaseModel):
    kind: Literal["mset"]
    d: int = Field(ge=1)
    m: int = Field(ge=0)

    def build(self) -> DecisionSet:
        return MSet(self.d, self.m)


class PathDagSpec(BaseModel):
    kind: Literal["path_dag"]
    nodes: int = Field(ge=2)
    edges: List[Tuple[int, int]]
    source: int
    sink: int

    def build(self) -> DecisionSet:
        return StPathDag(self.nodes, tuple(self.edges), self.source, self.sink)


class MatchingSpec(BaseModel):
    kind: Literal["bipartite_matching"]
    left: int = Field(ge=1)
    right: int = Field(ge=1)
    edges: List[Tuple[int, int]]
    perfect: bool = False

    def build(self) -> DecisionSet:
        return BipartiteMatching(self.left, self.right, tuple(self.edges), self.perfect)


class ExplicitSpec(BaseModel):
    kind: Literal["explicit"]
    decisions: List[List[int]]
    d: Optional[int] = None

    def build(self) -> DecisionSet:
        return Explicit(tuple(tuple(x) for x in self.decisions), self.d)


StructureSpec = Annotated[
    Union[MSetSpec, PathDagSpec, MatchingSpec, ExplicitSpec], Field(discriminator="kind")
]


class InstanceFile(BaseModel):
    instance_id: str = "instance"
    structure: StructureSpec
    theta: Optional[List[float]] = None
    theta_real: Optional[List[float]] = None
    epsilon: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _one_theta(self) -> "InstanceFile":
        if (self.theta is None) == (self.theta_real is None):
            raise ValueError("give exactly one of 'theta' or 'theta_real'")
        if self.theta_real is not None and self.epsilon is None:
            raise ValueError("'theta_real' needs 'epsilon'")
        return self

    @property
    def values(self) -> List[float]:
        return self.theta if self.theta is not None else self.theta_real


@dataclass
class Instance:
    """A loaded instance, restricted to the coordinates some decision selects.

    ``keep`` maps reduced coordinates back to the file's coordinates.
    """

    instance_id: str
    decision_set: DecisionSet
    theta: Optional[Theta]
    theta_real: Optional[np.ndarray]
    epsilon: Optional[float]
    d_original: int
    keep: List[int]

    @property
    def is_real(self) -> bool:
        return self.theta_real is not None

    @property
    def means(self) -> np.ndarray:
        return self.theta_real if self.theta_real is not None else self.theta.values

    def expand(self, x) -> np.ndarray:
        """Map a reduced vector back to the original dimension (zeros on dropped coordinates)."""
        x = np.asarray(x)
        out = np.zeros(self.d_original, dtype=x.dtype)
        out[self.keep] = x[: len(self.keep)]
        return out


def _load_mapping(text: str):
    # JSON first, then YAML
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    try:
        return YAML(typ="safe").load(text)
    except Exception as exc:
        raise InstanceError(f"instance is neither JSON nor YAML: {exc}") from exc


def read_instance_file(path: str | Path) -> InstanceFile:
    text = Path(path).read_text(encoding="utf-8")
    data = _load_mapping(text)
    if not isinstance(data, dict):
        raise InstanceError(f"{path}: instance must be a mapping")
    try:
        return InstanceFile.model_validate(data)
    except ValidationError as exc:
        raise InstanceError(f"{path}: {exc}") from exc


def build_instance(spec: InstanceFile, settings: Optional[Settings] = None) -> Instance:
    decision_set = spec.structure.build()
    values = spec.values
    if len(values) != decision_set.d:
        raise InstanceError(
            f"theta has {len(values)} entries but the structure has d={decision_set.d}"
        )
    report = check_covering(decision_set, settings)
    reduced, keep = drop_coordinates(decision_set, report.uncovered)
    arr = np.asarray(values, dtype=float)[keep]
    theta = theta_real = None
    if spec.theta is not None:
        try:
            theta = make_theta(arr)
        except ValueError as exc:
            raise InstanceError(str(exc)) from exc
    else:
        theta_real = arr
    return Instance(
        instance_id=spec.instance_id,
        decision_set=reduced,
        theta=theta,
        theta_real=theta_real,
        epsilon=spec.epsilon,
        d_original=decision_set.d,
        keep=keep,
    )


def load_instance(path: str | Path, settings: Optional[Settings] = None) -> Instance:
    return build_instance(read_instance_file(path), settings)
