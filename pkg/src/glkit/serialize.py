from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .model import GLOutput, RegretTrace, as_decision

FORMAT = "glkit-solution/1"
CSV_COLUMNS = ("instance_id", "algo", "seed", "t", "cum_regret")


def _finite(value: float):
    # JSON has no inf/nan
    value = float(value)
    return value if math.isfinite(value) else str(value)


def _number(value) -> float:
    return float(value)


def solution_to_dict(out: GLOutput, instance_id: str = "instance", atoms=None) -> dict:
    """JSON-ready form of a solution; ``atoms`` overrides the stored decisions (e.g. expanded)."""
    decisions = out.atoms if atoms is None else atoms
    return {
        "format": FORMAT,
        "instance_id": instance_id,
        "d": int(len(decisions[0])) if decisions else out.d,
        "objective": out.objective,
        "objective_q": out.objective_q,
        "certified_max_violation": _finite(out.certified_max_violation),
        "iterations": out.iterations,
        "wallclock": out.wallclock,
        "certified_discretization": out.certified_discretization,
        "atoms": [[int(v) for v in x] for x in decisions],
        "weights": [float(w) for w in out.weights],
        "w_bar_prime": [float(v) for v in out.w_bar_prime],
        "meta": json.loads(json.dumps(out.meta, default=str)),
    }


def dumps_solution(out: GLOutput, instance_id: str = "instance", atoms=None) -> str:
    return json.dumps(solution_to_dict(out, instance_id, atoms), indent=2) + "\n"


def write_solution(path: str | Path, out: GLOutput, instance_id: str = "instance",
                   atoms=None) -> None:
    Path(path).write_text(dumps_solution(out, instance_id, atoms), encoding="utf-8")


def solution_from_dict(data: dict) -> GLOutput:
    if data.get("format") != FORMAT:
        raise ValueError(f"not a glkit solution (format={data.get('format')!r})")
    atoms = [as_decision(x) for x in data.get("atoms", [])]
    weights = [_number(w) for w in data.get("weights", [])]
    if len(weights) != len(atoms):
        raise ValueError(f"{len(atoms)} atoms but {len(weights)} weights")
    return GLOutput(
        atoms=atoms,
        weights=weights,
        w_bar_prime=np.asarray(data.get("w_bar_prime", []), dtype=float),
        objective=_number(data["objective"]),
        objective_q=_number(data.get("objective_q", data["objective"])),
        certified_max_violation=_number(data.get("certified_max_violation", "nan")),
        iterations=int(data.get("iterations", 0)),
        wallclock=_number(data.get("wallclock", 0.0)),
        d=int(data.get("d", 0)),
        certified_discretization=data.get("certified_discretization"),
        meta=data.get("meta", {}),
    )


def read_solution(path: str | Path) -> GLOutput:
    return solution_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# ---------- Regret traces ----------


def regret_rows(traces: Iterable[RegretTrace], points: Sequence[int]) -> List[tuple]:
    rows = []
    for trace in traces:
        for t in points:
            if t <= trace.horizon:
                rows.append((trace.instance_id, trace.algorithm, trace.seed, t, trace.at(t)))
    return rows


def dumps_regret_csv(traces: Iterable[RegretTrace], points: Sequence[int]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for instance_id, algo, seed, t, value in regret_rows(traces, points):
        writer.writerow([instance_id, algo, seed, t, repr(float(value))])
    return buf.getvalue()


def write_regret_csv(path: str | Path, traces: Iterable[RegretTrace],
                     points: Sequence[int]) -> None:
    Path(path).write_text(dumps_regret_csv(traces, points), encoding="utf-8")


def read_regret_csv(path: str | Path) -> List[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        row["seed"] = int(row["seed"])
        row["t"] = int(row["t"])
        row["cum_regret"] = float(row["cum_regret"])
    return rows


def mean_final_regret(traces: Sequence[RegretTrace]) -> Optional[float]:
    if not traces:
        return None
    return float(np.mean([trace.cumulative[-1] for trace in traces]))
