from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .config import Settings, load_settings
from .errors import GlkitError, InstanceError, InvalidStructure, NonPositiveEntry, TooLarge
from .glpg import SolveOverrides, solve, solve_discretized
from .instance import gap_profile
from .model import GLOutput
from .parse import Instance, load_instance
from .reference import brute_force_gl, check_feasible
from .serialize import dumps_regret_csv, mean_final_regret, read_solution, write_solution
from .simulator import ALGORITHMS, checkpoints, run_experiment

EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_MISMATCH = 4


def _fmt(value: float) -> str:
    return "0" if value == 0 else f"{value:.4f}"


def _run_solver(inst: Instance, args, settings: Settings) -> GLOutput:
    overrides = SolveOverrides(
        max_iters=getattr(args, "max_iters", None),
        theoretical=getattr(args, "theoretical_schedule", False),
        oracle=getattr(args, "oracle", "auto"),
    )
    if inst.is_real:
        return solve_discretized(
            inst.decision_set, inst.theta_real, inst.epsilon, args.delta, overrides, settings
        )
    return solve(inst.decision_set, inst.theta, args.delta, args.epsilon, overrides, settings)


def _cmd_solve(args, settings: Settings) -> int:
    if args.theoretical_schedule and not args.confirm_theoretical:
        print(
            "solve: --theoretical-schedule runs the full worst-case horizon; "
            "add --yes-i-know to confirm"
        )
        return EXIT_INPUT
    inst = load_instance(args.instance, settings)
    out = _run_solver(inst, args, settings)
    atoms = [inst.expand(x) for x in out.atoms]
    print(
        f"objective={out.objective:.6f} certified_violation={out.certified_max_violation:.3g} "
        f"atoms={len(atoms)} iterations={out.iterations}"
    )
    if out.certified_discretization is False:
        print("WARN: discretization step is above Δmin/(2m); real-θ guarantee not certified")
    if args.out:
        write_solution(args.out, out, inst.instance_id, atoms)
        print(f"Wrote {args.out}")
    return 0


def _cmd_lowerbound(args, settings: Settings) -> int:
    inst = load_instance(args.instance, settings)
    out = _run_solver(inst, args, settings)
    try:
        brute = _fmt(brute_force_gl(inst.decision_set, inst.means, settings=settings).C)
    except TooLarge:
        brute = "n/a (|X| cap)"
    print(f"glpg={_fmt(out.objective)} brute={brute}")
    return 0


def _cmd_simulate(args, settings: Settings) -> int:
    inst = load_instance(args.instance, settings)
    traces = run_experiment(
        inst.decision_set,
        inst.means,
        args.algo,
        args.horizon,
        args.reps,
        base_seed=args.seed,
        instance_id=inst.instance_id,
        settings=settings,
        workers=args.workers,
    )
    text = dumps_regret_csv(traces, checkpoints(args.horizon))
    if not args.out:
        sys.stdout.write(text)
        return 0
    Path(args.out).write_text(text, encoding="utf-8")
    print(f"{args.algo}: mean final regret {mean_final_regret(traces):.4f} over {len(traces)} runs")
    print(f"Wrote {args.out}")
    return 0


def _reduced(inst: Instance, x) -> np.ndarray:
    x = np.asarray(x)
    return x[inst.keep] if x.shape[0] == inst.d_original else x


def _check_solution(inst: Instance, path: str, brute_c: float, delta: float,
                    settings: Settings) -> int:
    out = read_solution(path)
    means = np.asarray(inst.means, dtype=float)
    profile = gap_profile(inst.decision_set, means, settings)
    rates = np.zeros(inst.decision_set.d)
    objective = 0.0
    for x, w in zip(out.atoms, out.weights):
        x = _reduced(inst, x)
        rates += w * x
        objective += w * (profile.opt_value - float(means @ x))
    violation = check_feasible(inst.decision_set, means, rates, settings)
    print(
        f"stored={out.objective:.6f} recomputed={objective:.6f} brute={brute_c:.6f} "
        f"violation={violation:.3g}"
    )
    ok = abs(objective - out.objective) <= 1e-6 * max(1.0, abs(objective))
    ok = ok and violation <= settings.feasibility_tol and objective - brute_c <= delta
    if not ok:
        print("MISMATCH: saved solution does not check out")
        return EXIT_MISMATCH
    print("OK")
    return 0


def _cmd_validate(args, settings: Settings) -> int:
    inst = load_instance(args.instance, settings)
    brute = brute_force_gl(inst.decision_set, inst.means, settings=settings)
    if args.check_solution:
        return _check_solution(inst, args.check_solution, brute.C, args.delta, settings)
    out = _run_solver(inst, args, settings)
    violation = check_feasible(inst.decision_set, inst.means, out.rates(), settings)
    print(f"glpg={out.objective:.6f} brute={brute.C:.6f} violation={violation:.3g}")
    if abs(out.objective - brute.C) > args.delta or violation > settings.feasibility_tol:
        print("MISMATCH: GLPG and brute force disagree")
        return EXIT_MISMATCH
    print("OK")
    return 0


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", required=True, help="Instance file (JSON or YAML)")
    p.add_argument("--delta", type=float, default=0.1, help="Additive accuracy (default 0.1)")
    p.add_argument("--epsilon", type=float, default=1.0, help="Oracle approximation ratio")
    p.add_argument("--max-iters", dest="max_iters", type=int, help="Iteration cap")
    p.add_argument(
        "--oracle",
        choices=("auto", "sweep", "enumerated"),
        default="auto",
        help="Most-violated-constraint search",
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="glkit", description="Graves-Lai bounds for semi-bandits")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    parser.add_argument("--config", help="YAML settings file")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_solve = sub.add_parser("solve", help="Compute a GLPG exploration allocation")
    _add_solver_flags(p_solve)
    p_solve.add_argument("--out", help="Write the solution JSON here")
    p_solve.add_argument(
        "--theoretical-schedule",
        dest="theoretical_schedule",
        action="store_true",
        help="Constant step and worst-case horizon",
    )
    p_solve.add_argument(
        "--yes-i-know",
        dest="confirm_theoretical",
        action="store_true",
        help="Confirm --theoretical-schedule",
    )

    p_lb = sub.add_parser("lowerbound", help="Print C(θ) from GLPG and brute force")
    _add_solver_flags(p_lb)

    p_sim = sub.add_parser("simulate", help="Run a bandit policy and write regret CSV")
    p_sim.add_argument("--instance", required=True)
    p_sim.add_argument("--algo", choices=sorted(ALGORITHMS), required=True)
    p_sim.add_argument("--horizon", type=int, default=10_000)
    p_sim.add_argument("--reps", type=int, default=10)
    p_sim.add_argument("--seed", type=int, default=0, help="Base seed; runs use seed+1..seed+R")
    p_sim.add_argument("--workers", type=int, help="Parallel worker processes")
    p_sim.add_argument("--out", help="CSV path (default: stdout)")

    p_val = sub.add_parser("validate", help="Cross-check GLPG against brute force")
    _add_solver_flags(p_val)
    p_val.add_argument("--check-solution", dest="check_solution", help="Saved solution JSON")

    args = parser.parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    commands = {
        "solve": _cmd_solve,
        "lowerbound": _cmd_lowerbound,
        "simulate": _cmd_simulate,
        "validate": _cmd_validate,
    }
    try:
        settings = load_settings(args.config)
        return commands[args.cmd](args, settings)
    except (InstanceError, InvalidStructure, NonPositiveEntry, TooLarge, OSError) as exc:
        print(f"{args.cmd}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except GlkitError as exc:
        print(f"{args.cmd}: solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"{args.cmd}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
