"""Operator command line: episodes, benchmark sweeps, config checks, server.

Subcommands:
  run       one agent episode, episode JSON on stdout
  bench     seeded trial batches over robot x difficulty, report files
  validate  schema-check scene / contingency / manifest files
  serve     start the JSON-over-TCP protocol server
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench, contingency, engine, server, tasks
from . import world as W
from .errors import DualhabError


def _add_common(parser):
    parser.add_argument("--robot", choices=["x1", "h1"], default="x1")
    parser.add_argument("--difficulty", default="easy",
                        help="easy | medium | hard | custom=<p>")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-steps", type=int,
                        default=engine.MAX_EPISODE_STEPS)
    parser.add_argument("--agent", choices=["random", "greedy"],
                        default="greedy")
    parser.add_argument("--contingency", metavar="FILE",
                        help="JSON file of outcome-table overrides")
    parser.add_argument("--no-kinematics", action="store_true",
                        help="skip IK/trajectory solving (fast mode)")


def _load_table(path):
    if path is None:
        return None
    config = json.loads(Path(path).read_text())
    return contingency.default_table().with_overrides(config)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dualhab",
        description="Headless dual-arm household simulation benchmark.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    run = sub.add_parser("run", help="run one episode")
    run.add_argument("--task", required=True, help="task instance id")
    _add_common(run)

    bench_p = sub.add_parser("bench", help="run seeded benchmark batches")
    bench_p.add_argument("--task", action="append", default=None,
                         help="task id filter (repeatable; default: all)")
    bench_p.add_argument("--template", action="append", default=None,
                         help="template name filter (repeatable)")
    bench_p.add_argument("--manifest", help="alternative task manifest JSON")
    bench_p.add_argument("--trials", type=int, default=bench.DEFAULT_TRIALS)
    bench_p.add_argument("--robots", default="x1,h1",
                         help="comma-separated robot profiles")
    bench_p.add_argument("--difficulties", default="easy,medium,hard",
                         help="comma-separated difficulty levels")
    bench_p.add_argument("--out", metavar="DIR",
                         help="write report.json/.csv/.txt here")
    _add_common(bench_p)

    val = sub.add_parser("validate", help="schema-check config files")
    val.add_argument("files", nargs="+")

    srv = sub.add_parser("serve", help="start the TCP protocol server")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=None,
                     help=f"default: ${server.PORT_ENV_VAR} or "
                          f"{server.DEFAULT_PORT}")
    return parser


def cmd_run(args) -> int:
    record = bench.run_episode(
        args.task, agent=args.agent, robot=args.robot,
        difficulty=args.difficulty, seed=args.seed, max_steps=args.max_steps,
        solve_kinematics=not args.no_kinematics, keep_trace=True,
        contingency_table=_load_table(args.contingency))
    print(json.dumps(record.to_dict(), indent=2, sort_keys=True))
    return 0


def cmd_bench(args) -> int:
    task_ids = args.task
    if args.manifest:
        raw = json.loads(Path(args.manifest).read_text())
        known = {entry["id"] for entry in raw["tasks"]}
        task_ids = sorted(known if task_ids is None
                          else set(task_ids) & known)
    if args.template:
        pool = task_ids if task_ids is not None else sorted(tasks.manifest())
        task_ids = [t for t in pool
                    if t in tasks.manifest()
                    and tasks.manifest()[t].template in set(args.template)]
    matrix = bench.run_matrix(
        task_ids=task_ids, agent=args.agent,
        robots=tuple(args.robots.split(",")),
        difficulties=tuple(args.difficulties.split(",")),
        trials=args.trials, base_seed=args.seed, max_steps=args.max_steps,
        solve_kinematics=not args.no_kinematics,
        contingency_table=_load_table(args.contingency))
    text = bench.matrix_to_text(matrix)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(
            json.dumps(bench.matrix_to_dict(matrix), indent=2, sort_keys=True))
        (out / "report.csv").write_text(bench.matrix_to_csv(matrix))
        (out / "report.txt").write_text(text)
    sys.stdout.write(text)
    missing = sorted({t for rep in matrix["cells"].values()
                      for t in rep.missing})
    if missing:
        print(f"warning: {len(missing)} unknown task ids skipped: "
              f"{', '.join(missing[:5])}...", file=sys.stderr)
    return 0


def _validate_file(path: Path) -> list[str]:
    problems = []
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        return [f"{path}: unreadable: {exc}"]
    try:
        if isinstance(doc, dict) and "grid" in doc:
            W.parse_scene(doc)
        elif isinstance(doc, dict) and "tasks" in doc:
            problems.extend(f"{path}: {p}" for p in _validate_manifest(doc))
            return problems
        else:
            contingency.default_table().with_overrides(doc)
    except DualhabError as exc:
        problems.append(f"{path}: {exc}")
    return problems


def _validate_manifest(doc: dict) -> list[str]:
    problems = []
    scenes = {}
    for entry in doc.get("tasks", []):
        name = entry.get("template")
        if name not in tasks.TEMPLATES:
            problems.append(f"task {entry.get('id')}: unknown template {name}")
            continue
        scene_id = entry.get("scene")
        if scene_id not in scenes:
            try:
                scenes[scene_id] = W.load_scene(
                    engine.load_scene_document(scene_id))
            except DualhabError as exc:
                problems.append(f"task {entry.get('id')}: {exc}")
                scenes[scene_id] = None
                continue
        world = scenes[scene_id]
        if world is None:
            continue
        slots = {s.role: s.types for s in tasks.TEMPLATES[name].slots}
        for role, oid in entry.get("bindings", {}).items():
            if role not in slots:
                problems.append(f"task {entry['id']}: unknown role {role}")
            elif oid not in world.objects:
                problems.append(f"task {entry['id']}: missing object {oid}")
            elif world.objects[oid].object_type not in slots[role]:
                problems.append(
                    f"task {entry['id']}: {oid} has wrong type for {role}")
    return problems


def cmd_validate(args) -> int:
    problems = []
    for name in args.files:
        problems.extend(_validate_file(Path(name)))
    for problem in problems:
        print(problem, file=sys.stderr)
    print(f"{len(args.files)} file(s) checked, {len(problems)} problem(s)")
    return 1 if problems else 0


def cmd_serve(args) -> int:
    server.serve(host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        handler = {"run": cmd_run, "bench": cmd_bench,
                   "validate": cmd_validate, "serve": cmd_serve}[args.subcommand]
        return handler(args)
    except DualhabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
