"""Operator command line: run episodes, aggregate reports, validate tasks."""

from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
from dataclasses import replace
from pathlib import Path

from . import agents as agents_mod
from . import wire
from .behavior import SIGNALS
from .controller import run_batch
from .errors import InfraError, SchemaError, UnknownAgent, ValidationError
from .infra import InfraStatus, provision
from .task import TaskSpec, load_task, parse_task
from .trace import read_trace

CSV_COLUMNS = [
    "task",
    "tier",
    "agent",
    "rep",
    "score_c",
    "score_r",
    "score_x",
    "score_final",
    "valid",
    *SIGNALS,
    "exploration_ratio",
    "token_efficiency",
    "turns",
    "terminal_reason",
]


def _collect_task_paths(spec: str) -> list[Path]:
    path = Path(spec)
    if path.is_dir():
        return sorted(path.glob("*.json"))
    if path.exists():
        return [path]
    shipped = Path(__file__).parent / "data" / "tasks" / f"{spec}.json"
    if shipped.exists():
        return [shipped]
    raise FileNotFoundError(f"no task file or shipped task named {spec!r}")


def _apply_overrides(task: TaskSpec, args) -> TaskSpec:
    updates = {}
    if args.turns is not None:
        updates["turn_budget"] = args.turns
    if args.timeout_s is not None:
        updates["time_budget_s"] = float(args.timeout_s)
    if args.weights is not None:
        parts = [float(w) for w in args.weights.split(",")]
        if len(parts) != 3:
            raise ValidationError("weights: expected three comma-separated numbers")
        updates["weights"] = tuple(parts)
    if not updates:
        return task
    candidate = replace(task, **updates)
    # Re-run document validation so overrides respect the same invariants.
    from .task import to_document

    return parse_task(to_document(candidate))


def make_agent_factory(spec: str, task: TaskSpec, default_seed: int | None = None):
    """Turn an --agent spec into a per-rep handle factory.

    Forms: builtin:<name>[:<params>] | subprocess:<command line> | tcp:<host>:<port>
    """
    kind, _, rest = spec.partition(":")
    if kind == "builtin":
        name, _, params = rest.partition(":")
        if not name:
            raise UnknownAgent("builtin spec needs a name, e.g. builtin:replay:ccna_ref")
        params = params or None
        if name == "random" and params is None and default_seed is not None:
            params = f"seed={default_seed}"

        def factory(rep: int):
            return agents_mod.builtin(name, params, task=task)

        agents_mod.builtin(name, params, task=task)  # fail fast on bad specs
        return factory
    if kind == "subprocess":
        if not rest:
            raise UnknownAgent("subprocess spec needs a command line")

        def factory(rep: int):
            return wire.SubprocessAgent(rest)

        return factory
    if kind == "tcp":
        host, _, port = rest.rpartition(":")
        if not host or not port.isdigit():
            raise UnknownAgent("tcp spec must be tcp:<host>:<port>")

        def factory(rep: int):
            return wire.TcpAgent(host, int(port))

        return factory
    raise UnknownAgent(f"unknown agent spec {spec!r}")


def _summary_line(task: TaskSpec, agent_spec: str, traces) -> str:
    finals = [t.score.score_final for t in traces if t.score is not None]
    mean = statistics.fmean(finals) if finals else 0.0
    sd = statistics.pstdev(finals) if len(finals) > 1 else 0.0
    success = sum(1 for t in traces if t.score is not None and t.score.valid)
    melted = sum(
        1
        for t in traces
        if t.behavior is not None and t.behavior.meltdown_signals
    )
    turns = statistics.fmean(len(t.records) for t in traces) if traces else 0.0
    tokens = statistics.fmean(
        sum(r.tokens_in + r.tokens_out for r in t.records) for t in traces
    ) if traces else 0.0
    n = len(traces)
    return (
        f"{task.id} | {agent_spec} | reps={n} "
        f"| score {mean:.3f}+/-{sd:.3f} "
        f"| success {100.0 * success / n:.1f}% "
        f"| meltdown {100.0 * melted / n:.1f}% "
        f"| turns {turns:.1f} | tokens {tokens:.0f}"
    )


def cmd_run(args) -> int:
    try:
        task_paths = _collect_task_paths(args.task)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    exit_code = 0
    for path in task_paths:
        try:
            task = _apply_overrides(load_task(path), args)
        except (SchemaError, ValidationError) as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            return 2
        try:
            factory = make_agent_factory(args.agent, task, default_seed=args.seed)
        except UnknownAgent as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        try:
            traces = run_batch(task, factory, args.reps, out_dir=out_dir, jobs=args.jobs)
        except InfraError as exc:
            print(f"error: {task.id}: provisioning failed: {exc.detail}", file=sys.stderr)
            exit_code = 1
            continue
        print(_summary_line(task, args.agent, traces))
    return exit_code


def cmd_report(args) -> int:
    import glob as globmod

    if any(ch in args.traces for ch in "*?["):
        paths = [Path(p) for p in sorted(globmod.glob(args.traces))]
    elif Path(args.traces).is_dir():
        paths = sorted(Path(args.traces).glob("*.trace"))
    else:
        paths = [Path(args.traces)]
    paths = [p for p in paths if p.exists()]
    if not paths:
        print(f"error: no trace files match {args.traces!r}", file=sys.stderr)
        return 2
    rows = []
    for path in paths:
        try:
            trace = read_trace(path)
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            print(f"error: unreadable trace {path}: {exc}", file=sys.stderr)
            return 1
        score = trace.score
        signals = trace.behavior.meltdown_signals if trace.behavior else {}
        row = {
            "task": trace.task_id,
            "tier": trace.tier,
            "agent": trace.agent_id,
            "rep": trace.rep,
            "score_c": score.score_c if score else "",
            "score_r": score.score_r if score else "",
            "score_x": score.score_x if score else "",
            "score_final": score.score_final if score else "",
            "valid": score.valid if score else "",
            "exploration_ratio": (
                _csv_float(trace.behavior.exploration_ratio) if trace.behavior else ""
            ),
            "token_efficiency": (
                _csv_float(trace.behavior.token_efficiency) if trace.behavior else ""
            ),
            "turns": len(trace.records),
            "terminal_reason": trace.terminal.reason if trace.terminal else "",
        }
        for signal in SIGNALS:
            row[signal] = signal in signals
        rows.append(row)

    output = Path(args.csv) if args.csv else None
    stream = output.open("w", newline="", encoding="utf-8") if output else sys.stdout
    try:
        writer = csv.DictWriter(stream, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if output:
            stream.close()
    if output:
        print(f"wrote {len(rows)} rows to {output}")
    return 0


def _csv_float(value: float) -> str:
    return "inf" if value == float("inf") else repr(value)


def cmd_validate(args) -> int:
    try:
        task = load_task(args.task)
    except (SchemaError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    state = provision(task.topology)
    if state.status is not InfraStatus.ACCEPT:
        print(f"error: topology invalid: {state.error_detail}", file=sys.stderr)
        return 1
    print(
        f"ok: {task.id} ({task.tier.value}) "
        f"nodes={len(state.nodes)} links={len(state.links)} properties={len(task.intent)}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simnetbench",
        description="Deterministic benchmark harness for network-configuration agents",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run repetition batches of episodes")
    run.add_argument("--task", required=True, help="task file, directory, or shipped task name")
    run.add_argument("--agent", required=True, help="builtin:<name>[:params] | subprocess:<cmd> | tcp:<host>:<port>")
    run.add_argument("--reps", type=int, default=25)
    run.add_argument("--turns", type=int, default=None, help="override turn budget")
    run.add_argument("--timeout-s", type=float, default=None, help="override time budget")
    run.add_argument("--weights", default=None, help="override weights, e.g. 0.5,0.3,0.2")
    run.add_argument("--out", default="runs", help="trace output directory")
    run.add_argument("--jobs", type=int, default=1, help="parallel episodes")
    run.add_argument("--seed", type=int, default=None, help="default seed for builtin:random")
    run.set_defaults(func=cmd_run)

    report = sub.add_parser("report", help="aggregate trace files into CSV")
    report.add_argument("traces", help="trace file, directory, or glob")
    report.add_argument("--csv", default=None, help="write CSV here instead of stdout")
    report.set_defaults(func=cmd_report)

    validate = sub.add_parser("validate", help="parse a task and provision it in memory")
    validate.add_argument("task", help="task file path")
    validate.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
