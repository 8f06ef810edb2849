"""Command-line benchmark runner.

``gussp plan`` solves one instance with one algorithm and executes a trial
batch; ``gussp arbor`` prints the goal-graph analysis for deterministic
instances.  Exit codes: 0 success, 2 bad instance or model, 3 solver
failure (non-convergence, budget exhaustion, no eligible target).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional, TextIO

from .arborescence import audit_goal_graph
from .compiler import DEFAULT_STATE_BUDGET, compile_gussp, dump_compiled, enumerate_reachable
from .errors import GusspError, ModelError
from .harness import (
    ALGORITHMS,
    HEURISTICS,
    CellSpec,
    emit_trace,
    format_pretty,
    run_cell,
    strip_timing,
    write_report_csv,
    write_trials_csv,
)
from .domains import load_instance
from .solvers import value_iteration


def _horizon(text: str) -> Optional[float]:
    if text.lower() in ("inf", "none"):
        return None
    return float(text)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gussp",
        description="Plan and benchmark goal-uncertain shortest-path instances.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    plan = sub.add_parser("plan", help="solve an instance and run execution trials")
    plan.add_argument("instance", help="instance file path")
    plan.add_argument("--algorithm", choices=ALGORITHMS, default="vi")
    plan.add_argument("--heuristic", choices=HEURISTICS, default="hpg",
                      help="heuristic for lao and flares")
    plan.add_argument("--trials", type=int, default=30)
    plan.add_argument("--seed", type=int, default=0)
    plan.add_argument("--epsilon", type=float, default=1e-6)
    plan.add_argument("--flares-horizon", type=_horizon, default=1,
                      help="labeling depth; 'inf' checks the full envelope")
    plan.add_argument("--state-budget", type=int, default=DEFAULT_STATE_BUDGET)
    plan.add_argument("--out", help="report CSV path (default: stdout)")
    plan.add_argument("--per-trial", help="write per-trial CSV here")
    plan.add_argument("--trace", help="write executed trajectories here")
    plan.add_argument("--pretty", action="store_true",
                      help="human-readable table instead of CSV")
    plan.add_argument("--no-timing", action="store_true",
                      help="zero wall-clock fields for reproducible output")
    plan.add_argument("--dump-compiled", metavar="PATH",
                      help="write the reachable compiled state space here")
    plan.add_argument("--convergence-log", metavar="PATH",
                      help="log per-sweep residuals (vi only)")

    arbor = sub.add_parser("arbor", help="goal-graph arborescence and visit order")
    arbor.add_argument("instance", help="instance file path")
    arbor.add_argument("--out", help="output CSV path (default: stdout)")
    arbor.add_argument("--with-value", action="store_true",
                       help="also solve the instance and report its value")
    arbor.add_argument("--epsilon", type=float, default=1e-6)
    return parser


def _open_out(path: Optional[str]):
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8"), True


def _cmd_plan(args) -> int:
    _params, model = load_instance(args.instance)
    name = Path(args.instance).stem
    spec = CellSpec(
        name=name,
        algorithm=args.algorithm,
        heuristic=args.heuristic,
        trials=args.trials,
        seed=args.seed,
        epsilon=args.epsilon,
        flares_horizon=args.flares_horizon,
        state_budget=args.state_budget,
    )

    if args.dump_compiled:
        ssp = compile_gussp(model)
        with open(args.dump_compiled, "w", encoding="utf-8") as fh:
            dump_compiled(ssp, fh, state_budget=args.state_budget)

    sweep_log: Optional[TextIO] = None
    on_sweep = None
    if args.convergence_log:
        if args.algorithm != "vi":
            print("gussp: --convergence-log needs --algorithm vi", file=sys.stderr)
            return 2
        sweep_log = open(args.convergence_log, "w", encoding="utf-8")
        sweep_log.write("sweep,residual\n")

        def on_sweep(sweep: int, residual: float, _values) -> None:
            sweep_log.write(f"{sweep},{residual:.9e}\n")

    try:
        result = run_cell(
            model, spec,
            collect_traces=args.trace is not None,
            on_sweep=on_sweep,
        )
    finally:
        if sweep_log is not None:
            sweep_log.close()

    report = strip_timing(result.report) if args.no_timing else result.report
    out, close = _open_out(args.out)
    try:
        if args.pretty:
            out.write(format_pretty([report]))
        else:
            write_report_csv(out, [report])
    finally:
        if close:
            out.close()

    if args.per_trial:
        with open(args.per_trial, "w", encoding="utf-8") as fh:
            write_trials_csv(fh, result.trials)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            emit_trace(fh, result.traces)
    return 0


def _cmd_arbor(args) -> int:
    _params, model = load_instance(args.instance)
    optimal = None
    if args.with_value:
        ssp = compile_gussp(model)
        reachable = enumerate_reachable(ssp)
        result = value_iteration(ssp, epsilon=args.epsilon, reachable=reachable)
        optimal = result.table.value(ssp.start_id)
    audit = audit_goal_graph(model, optimal_value=optimal)

    out, close = _open_out(args.out)
    try:
        out.write("u,v,distance,weight\n")
        for (u, v), w in sorted(audit.graph.weights.items()):
            d = audit.graph.distances[(u, v)]
            out.write(f"{u},{v},{d:.6f},{w:.6f}\n")
        out.write("\nmetric,value\n")
        for key, value in audit.rows():
            out.write(f"{key},{value}\n")
    finally:
        if close:
            out.close()
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        if args.command == "plan":
            return _cmd_plan(args)
        return _cmd_arbor(args)
    except FileNotFoundError as e:
        print(f"gussp: {e}", file=sys.stderr)
        return 2
    except ModelError as e:
        print(f"gussp: bad instance or model: {e}", file=sys.stderr)
        return 2
    except GusspError as e:
        print(f"gussp: solver failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
