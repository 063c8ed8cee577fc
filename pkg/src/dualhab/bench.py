"""Benchmark harness: repeated-trial episode runner and report writers."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from . import agents, tasks
from .engine import MAX_EPISODE_STEPS, Environment

DEFAULT_TRIALS = 50


@dataclass
class EpisodeRecord:
    task_id: str
    seed: int
    success: bool
    steps: int
    commands: int
    final_status: str
    trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {"taskId": self.task_id, "seed": self.seed,
               "success": self.success, "steps": self.steps,
               "commands": self.commands, "finalStatus": self.final_status}
        if self.trace:
            out["trace"] = self.trace
        return out


def run_episode(task_id, agent="greedy", robot="X1", difficulty="easy",
                seed=0, max_steps=MAX_EPISODE_STEPS, solve_kinematics=True,
                keep_trace=False, contingency_table=None) -> EpisodeRecord:
    """One episode: the agent acts until success, the step budget runs out,
    or the policy yields no further command."""
    env = Environment(task_id=task_id, robot=robot, difficulty=difficulty,
                      seed=seed, solve_kinematics=solve_kinematics,
                      max_steps=max_steps, contingency_table=contingency_table)
    policy = agents.make_agent(agent, seed=seed)
    task = env.task
    feedback = env.load_state()
    commands = 0
    trace = []
    # Non-advancing commands (failed preconditions, loadstate) still count
    # against a command budget so a stuck policy terminates.
    command_budget = 4 * max_steps
    while env.state.step_count < max_steps and commands < command_budget:
        if env.task_status() == "success":
            break
        command = policy.act(task, feedback)
        if command is None:
            break
        result = env.step(command)
        feedback = result.feedback or env.load_state()
        commands += 1
        if keep_trace:
            trace.append({"command": command, "outcome": result.outcome,
                          "success": result.success,
                          "stepCount": env.state.step_count})
    status = env.task_status() or "none"
    return EpisodeRecord(task_id=task_id, seed=seed,
                         success=status == "success",
                         steps=env.state.step_count, commands=commands,
                         final_status=status, trace=trace)


@dataclass
class BenchmarkReport:
    agent: str
    robot: str
    difficulty: str
    trials: int
    base_seed: int
    records: list = field(default_factory=list)
    missing: list = field(default_factory=list)

    def success_rate(self, task_ids=None) -> float:
        rows = [r for r in self.records
                if task_ids is None or r.task_id in task_ids]
        return sum(r.success for r in rows) / len(rows) if rows else 0.0

    def by_classification(self) -> dict:
        groups = {}
        for record in self.records:
            key = tasks.get_instance(record.task_id).classification
            groups.setdefault(key, []).append(record)
        return {k: sum(r.success for r in v) / len(v)
                for k, v in sorted(groups.items())}

    def to_dict(self) -> dict:
        return {
            "agent": self.agent, "robot": self.robot,
            "difficulty": self.difficulty, "trials": self.trials,
            "baseSeed": self.base_seed,
            "successRate": self.success_rate(),
            "byClassification": self.by_classification(),
            "missingTasks": list(self.missing),
            "episodes": [r.to_dict() for r in self.records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(
            buf, fieldnames=["taskId", "seed", "success", "steps",
                             "commands", "finalStatus"])
        writer.writeheader()
        for record in self.records:
            writer.writerow(record.to_dict())
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [
            f"agent={self.agent} robot={self.robot} "
            f"difficulty={self.difficulty} trials={self.trials}",
            f"overall success rate: {self.success_rate():.3f}",
        ]
        for key, rate in self.by_classification().items():
            lines.append(f"  {key}: {rate:.3f}")
        return "\n".join(lines) + "\n"


def run_benchmark(task_ids=None, agent="greedy", robot="X1",
                  difficulty="easy", trials=DEFAULT_TRIALS, base_seed=0,
                  max_steps=MAX_EPISODE_STEPS, solve_kinematics=True,
                  contingency_table=None, progress=None) -> BenchmarkReport:
    """Run ``trials`` episodes per task, varying the seed as base+i."""
    if task_ids is None:
        task_ids = sorted(tasks.manifest())
    report = BenchmarkReport(agent=agent, robot=robot, difficulty=difficulty,
                             trials=trials, base_seed=base_seed)
    for task_id in task_ids:
        if task_id not in tasks.manifest():
            report.missing.append(task_id)
            continue
        for i in range(trials):
            record = run_episode(
                task_id, agent=agent, robot=robot, difficulty=difficulty,
                seed=base_seed + i, max_steps=max_steps,
                solve_kinematics=solve_kinematics,
                contingency_table=contingency_table)
            report.records.append(record)
            if progress:
                progress(record)
    return report


def run_matrix(task_ids=None, agent="greedy", robots=("x1", "h1"),
               difficulties=("easy", "medium", "hard"),
               trials=DEFAULT_TRIALS, base_seed=0,
               max_steps=MAX_EPISODE_STEPS, solve_kinematics=True,
               contingency_table=None, progress=None) -> dict:
    """Benchmark sweep over robot profiles and difficulty levels.

    Output table: rows are task categories, columns robot x difficulty.
    """
    cells = {}
    table = {}
    for robot in robots:
        for difficulty in difficulties:
            report = run_benchmark(
                task_ids=task_ids, agent=agent, robot=robot,
                difficulty=difficulty, trials=trials, base_seed=base_seed,
                max_steps=max_steps, solve_kinematics=solve_kinematics,
                contingency_table=contingency_table, progress=progress)
            column = f"{robot}/{difficulty}"
            cells[column] = report
            for category, rate in report.by_classification().items():
                table.setdefault(category, {})[column] = rate
    return {"cells": cells, "table": table}


def matrix_to_dict(matrix: dict) -> dict:
    return {"table": matrix["table"],
            "cells": {col: rep.to_dict() for col, rep in matrix["cells"].items()}}


def matrix_to_text(matrix: dict) -> str:
    columns = sorted(matrix["cells"])
    header = ["category"] + columns
    lines = ["\t".join(header)]
    for category in sorted(matrix["table"]):
        row = [category] + [f"{matrix['table'][category].get(c, 0.0):.3f}"
                            for c in columns]
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"


def matrix_to_csv(matrix: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    columns = sorted(matrix["cells"])
    writer.writerow(["category"] + columns)
    for category in sorted(matrix["table"]):
        writer.writerow([category] + [matrix["table"][category].get(c, 0.0)
                                      for c in columns])
    return buf.getvalue()
