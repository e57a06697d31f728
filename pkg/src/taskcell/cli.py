"""Operator command line: validate fixtures, query the knowledge base,
expand and run processes headlessly, serve the bridge, run analytics.

Exit codes: 0 success, 1 validation/processing issues, 2 usage errors.
The TASKCELL_CELL environment variable supplies a default --cell path.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional

from . import analytics, serde
from .engine import Phase, SessionEngine
from .errors import EmptySegment, InvalidRank, MalformedCsv, MalformedTable, TaskcellError
from .kb import KnowledgeBase, load_cell
from .model import DataKind, DataType, ParameterSpec, validate_process
from .sim import trace_to_jsonl
from .tasks import applicable_modalities, task_index
from .wsserver import BridgeServer

ENV_CELL = "TASKCELL_CELL"


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_cell_arg(args) -> "CellConfiguration":  # noqa: F821
    path = args.cell or os.environ.get(ENV_CELL)
    if not path:
        raise UsageError("no cell file given (use --cell or TASKCELL_CELL)")
    return load_cell(_read(path))


class UsageError(Exception):
    pass


def _print_json(doc) -> None:
    print(serde.dumps(doc))


# --- subcommands ------------------------------------------------------------------

def _cmd_cell_validate(args) -> int:
    try:
        cell = load_cell(_read(args.file))
    except (TaskcellError, ValueError, KeyError, OSError) as err:
        if args.json:
            _print_json({"valid": False, "error": str(err)})
        else:
            print(f"invalid cell: {err}", file=sys.stderr)
        return 1
    if args.json:
        _print_json(
            {
                "valid": True,
                "cell": cell.cell_id,
                "components": [c.value for c in cell.components],
                "objects": [o.object_id for o in cell.initial_objects],
            }
        )
    else:
        print(f"cell {cell.cell_id}: ok ({len(cell.components)} components, "
              f"{len(cell.initial_objects)} objects)")
    return 0


def _cmd_kb_modalities(args) -> int:
    try:
        kind = DataKind(args.datatype)
    except ValueError:
        raise UsageError(f"unknown data type {args.datatype!r}")
    cell = _load_cell_arg(args)
    kb = KnowledgeBase.default()
    spec = ParameterSpec(
        "query",
        DataType(kind, unit="mm" if kind is DataKind.NUMBER else None),
        applicable_modalities(kind),
    )
    ranked = kb.modalities_for_parameter(spec, cell)
    if args.json:
        _print_json({"dataType": kind.value, "modalities": [m.value for m in ranked]})
    else:
        print(" ".join(m.value for m in ranked))
    return 0


def _load_process(path: str):
    return serde.process_from_json(serde.loads_strict(_read(path)))


def _cmd_process_validate(args) -> int:
    proc = _load_process(args.file)
    issues = validate_process(proc, task_index())
    if args.json:
        _print_json(
            {"process": proc.process_id, "issues": [i.as_dict() for i in issues]}
        )
    else:
        for issue in issues:
            where = f"{issue.instance_id}.{issue.param}" if issue.param else issue.instance_id
            print(f"{issue.code}: {where} {issue.message}".rstrip())
        if not issues:
            print(f"process {proc.process_id}: ok ({len(proc.tasks)} tasks)")
    return 1 if issues else 0


def _run_headless(args):
    """Shared path for expand/run: executes on the simulated cell so each
    task expands against the live world model."""
    proc = _load_process(args.file)
    cell = _load_cell_arg(args)
    issues = validate_process(proc, task_index())
    if issues:
        for issue in issues:
            print(f"{issue.code}: {issue.instance_id} {issue.message}", file=sys.stderr)
        return None, None, 1
    engine = SessionEngine(cell)
    engine.start_session(proc)
    engine.execute()
    # headless batch runs confirm human steps automatically
    while engine.session.phase is Phase.EXECUTING and engine.session.blocked:
        engine.confirm_human_step()
    return proc, engine, 0


def _cmd_process_expand(args) -> int:
    proc, engine, rc = _run_headless(args)
    if rc:
        return rc
    session = engine.session
    doc = {
        "process": proc.process_id,
        "phase": session.phase.value,
        "plans": [
            {
                "instance": instance_id,
                "skills": [
                    {
                        "skill": inv.skill_id,
                        "args": _args_json(inv),
                        "inferred": {k: v for k, v in inv.provenance},
                    }
                    for inv in plan
                ],
            }
            for instance_id, plan in session.plans
        ],
    }
    if session.failure_reason:
        doc["reason"] = session.failure_reason
    if args.json:
        _print_json(doc)
    else:
        for planned in doc["plans"]:
            print(planned["instance"])
            for inv in planned["skills"]:
                print(f"  {inv['skill']} {serde.dumps(inv['args'])}")
    return 0 if session.phase is Phase.DONE else 1


def _args_json(inv) -> dict:
    from .sim import invocation_args_json

    return invocation_args_json(inv)


def _cmd_process_run(args) -> int:
    proc, engine, rc = _run_headless(args)
    if rc:
        return rc
    session = engine.session
    trace = session.state.trace
    if args.trace:
        Path(args.trace).write_text(trace_to_jsonl(trace), encoding="utf-8")
    ok = session.phase is Phase.DONE
    if args.json:
        doc = {
            "process": proc.process_id,
            "phase": session.phase.value,
            "events": len(trace),
        }
        if session.failure_reason:
            doc["reason"] = session.failure_reason
        _print_json(doc)
    else:
        status = session.phase.value
        print(f"{proc.process_id}: {status}, {len(trace)} events")
        if session.failure_reason:
            print(f"reason: {session.failure_reason}", file=sys.stderr)
    return 0 if ok else 1


def _cmd_serve(args) -> int:
    cell = _load_cell_arg(args)
    process = _load_process(args.process) if args.process else None
    server = BridgeServer(cell, process=process, host=args.host, port=args.port)
    print(f"bridge listening on ws://{args.host}:{args.port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:  # pragma: no cover
        pass
    return 0


def _segment_predicate(expr: str):
    if "=" not in expr:
        raise UsageError("--segment expects key=value")
    key, _, value = expr.partition("=")
    key = key.strip()
    value = value.strip()
    fields = {"gender", "expertise", "robotics", "teachpad"}
    if key not in fields:
        raise UsageError(f"--segment key must be one of {sorted(fields)}")
    return lambda r: getattr(r, key) == value


def _cmd_study_analyze(args) -> int:
    table = analytics.load_responses(_read(args.file))
    where = _segment_predicate(args.segment) if args.segment else None
    try:
        if args.compare:
            result = analytics.segment_compare(table, args.question, args.compare)
            doc = {
                name: (summary.as_json() if summary else None)
                for name, summary in result.items()
            }
            if args.json:
                _print_json({"question": args.question, "segments": doc})
            else:
                for name, summary in doc.items():
                    print(f"[{name}]")
                    _print_summary_text(summary)
            return 0
        if args.question in analytics.RANK_QUESTIONS:
            summary = analytics.rank_summary(table, args.question, where)
            if args.json:
                _print_json(summary.as_json())
            else:
                _print_summary_text(summary.as_json())
        elif args.question in analytics.NUMERIC_QUESTIONS:
            summary = analytics.numeric_summary(table, args.question, where)
            if args.json:
                _print_json({"question": args.question, **summary.as_json()})
            else:
                print(
                    f"{args.question}: mean {summary.mean:g} sd "
                    f"{summary.sd if summary.sd is not None else '-'} "
                    f"min {summary.min:g} max {summary.max:g} n {summary.n}"
                )
        else:
            raise UsageError(f"unknown question {args.question!r}")
    except EmptySegment as err:
        print(f"empty segment: {err}", file=sys.stderr)
        return 1
    return 0


def _print_summary_text(doc: Optional[dict]) -> None:
    if doc is None:
        print("  (empty segment)")
        return
    for name, stats in doc["modalities"].items():
        sd = f"{stats['sd']:.3f}" if stats["sd"] is not None else "-"
        print(f"  {name:<14} mean {stats['mean']:.3f} sd {sd} n {stats['n']}")
    print("  ordering: " + " ".join(doc["ordering"]))


def _cmd_study_export(args) -> int:
    table = analytics.load_responses(_read(args.file))
    doc = analytics.export_preference_table(table)
    text = json.dumps(doc, indent=2) + "\n"
    Path(args.output).write_text(text, encoding="utf-8")
    print(f"wrote {args.output}")
    return 0


# --- argument parsing -----------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taskcell",
        description="Task-based robot programming workbench",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cell = sub.add_parser("cell", help="cell configuration commands")
    cell_sub = cell.add_subparsers(dest="subcommand", required=True)
    cv = cell_sub.add_parser("validate", help="validate a cell file")
    cv.add_argument("file")
    cv.add_argument("--json", action="store_true")
    cv.set_defaults(fn=_cmd_cell_validate)

    kb = sub.add_parser("kb", help="knowledge base queries")
    kb_sub = kb.add_subparsers(dest="subcommand", required=True)
    km = kb_sub.add_parser("modalities", help="ranked modalities for a data type")
    km.add_argument("--cell")
    km.add_argument("--datatype", required=True)
    km.add_argument("--json", action="store_true")
    km.set_defaults(fn=_cmd_kb_modalities)

    proc = sub.add_parser("process", help="process commands")
    proc_sub = proc.add_subparsers(dest="subcommand", required=True)
    pv = proc_sub.add_parser("validate", help="validate a process file")
    pv.add_argument("file")
    pv.add_argument("--json", action="store_true")
    pv.set_defaults(fn=_cmd_process_validate)
    pe = proc_sub.add_parser("expand", help="expand tasks into skill plans")
    pe.add_argument("file")
    pe.add_argument("--cell")
    pe.add_argument("--json", action="store_true")
    pe.set_defaults(fn=_cmd_process_expand)
    pr = proc_sub.add_parser("run", help="run a process on the simulated cell")
    pr.add_argument("file")
    pr.add_argument("--cell")
    pr.add_argument("--trace", help="write the trace as JSON lines")
    pr.add_argument("--json", action="store_true")
    pr.set_defaults(fn=_cmd_process_run)

    serve = sub.add_parser("serve", help="serve the bridge and engine")
    serve.add_argument("--cell")
    serve.add_argument("--process", help="process to open a session for")
    serve.add_argument("--port", type=int, default=9090)
    serve.add_argument("--host", default="127.0.0.1")
    serve.set_defaults(fn=_cmd_serve)

    study = sub.add_parser("study", help="questionnaire analytics")
    study_sub = study.add_subparsers(dest="subcommand", required=True)
    sa = study_sub.add_parser("analyze", help="summarize a question")
    sa.add_argument("file")
    sa.add_argument("--question", required=True)
    sa.add_argument("--segment", help="filter rows, e.g. gender=female")
    sa.add_argument("--compare", help="split by dimension (gender, expertise, ...)")
    sa.add_argument("--json", action="store_true")
    sa.set_defaults(fn=_cmd_study_analyze)
    se = study_sub.add_parser("export-kb", help="export a preference table")
    se.add_argument("file")
    se.add_argument("-o", "--output", required=True)
    se.set_defaults(fn=_cmd_study_export)

    return parser


def dispatch(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    except (MalformedCsv, InvalidRank, MalformedTable) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except TaskcellError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
