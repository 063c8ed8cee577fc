"""Top-level episode environment tying scenes, actions, history and tasks.

An :class:`Environment` owns one episode at a time: an immutable world state,
the bounded undo/redo history, the active contingency difficulty, and an
optional task whose completion is re-evaluated after every step.
"""

from __future__ import annotations

import json
from dataclasses import replace
from importlib import resources

import numpy as np

from . import actions, contingency, kinematics, tasks
from . import world as W
from .errors import NothingToRedo, NothingToUndo, SchemaError, UnknownEntity
from .history import HistoryStack

MAX_EPISODE_STEPS = 50


def scene_names() -> list[str]:
    """Names of the scene documents shipped with the package."""
    root = resources.files("dualhab.data.scenes")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_scene_document(name: str) -> dict:
    root = resources.files("dualhab.data.scenes")
    path = root / f"{name}.json"
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        raise UnknownEntity(f"unknown scene {name!r}") from None


class Environment:
    """One episode of the grid-world household simulation."""

    def __init__(self, scene="kitchen_small", robot="X1", difficulty="easy",
                 seed=0, solve_kinematics=True, contingency_table=None,
                 task_id=None, max_steps=MAX_EPISODE_STEPS):
        self.solve_kinematics = solve_kinematics
        self.max_steps = max_steps
        self.table = contingency_table or contingency.default_table()
        self.reset(scene=scene, robot=robot, difficulty=difficulty, seed=seed,
                   task_id=task_id)

    # -- episode lifecycle --------------------------------------------------

    def reset(self, scene=None, robot=None, difficulty=None, seed=None,
              task_id=None) -> dict:
        """Start a fresh episode; returns the initial full-state feedback."""
        if scene is not None:
            self.scene_name = scene
            self._scene_doc = (scene if isinstance(scene, dict)
                               else load_scene_document(scene))
            if isinstance(scene, dict):
                self.scene_name = scene.get("name", "inline")
        if robot is not None:
            profile = str(robot).upper()
            if profile not in W.PROFILES:
                raise SchemaError(f"unknown robot profile {robot!r}")
            self.robot_profile = profile
        if difficulty is not None:
            self.difficulty = contingency.difficulty_from_name(difficulty)
        if seed is not None:
            self.seed = int(seed)
        state = W.load_scene(self._scene_doc, profile=self.robot_profile,
                             seed=self.seed)
        self.history = HistoryStack(state)
        self.task = None
        if task_id is not None:
            self.task = tasks.get_instance(task_id)
            if self.task.scene != self.scene_name:
                self._scene_doc = load_scene_document(self.task.scene)
                self.scene_name = self.task.scene
                state = W.load_scene(self._scene_doc, profile=self.robot_profile,
                                     seed=self.seed)
                self.history = HistoryStack(state)
        return actions.load_state(self.state)

    @property
    def state(self) -> W.WorldState:
        return self.history.current

    # -- stepping -----------------------------------------------------------

    def step(self, command) -> actions.StepResult:
        """Execute one command (text or JSON form)."""
        cmd = command if isinstance(command, actions.ActionCommand) \
            else actions.parse(command)
        if cmd.kind == "Undo":
            return self._history_step(self.undo)
        if cmd.kind == "Redo":
            return self._history_step(self.redo)
        if cmd.kind == "LoadState":
            return actions.StepResult(success=True, outcome="ok",
                                      feedback=self.load_state())
        before = self.state
        world, result = actions.execute(
            before, cmd, difficulty=self.difficulty, table=self.table,
            solve_kinematics=self.solve_kinematics)
        if world.step_count != before.step_count:
            self.history.record(world)
        return result

    def step_parallel(self, left, right):
        lcmd = left if isinstance(left, actions.ActionCommand) else actions.parse(left)
        rcmd = right if isinstance(right, actions.ActionCommand) else actions.parse(right)
        before = self.state
        world, results = actions.execute_parallel(
            before, lcmd, rcmd, difficulty=self.difficulty, table=self.table,
            solve_kinematics=self.solve_kinematics)
        if world.step_count != before.step_count:
            self.history.record(world)
        return results

    def _history_step(self, fn):
        try:
            fn()
        except (NothingToUndo, NothingToRedo) as exc:
            return actions.StepResult(success=False, outcome="precondition_failed",
                                      error_message=str(exc),
                                      feedback=self.load_state())
        return actions.StepResult(success=True, outcome="ok",
                                  feedback=self.load_state())

    # -- history ------------------------------------------------------------

    def undo(self) -> dict:
        self.history.undo()
        return self.load_state()

    def redo(self) -> dict:
        self.history.redo()
        return self.load_state()

    def dump_history(self) -> list[dict]:
        return self.history.dump()

    # -- queries ------------------------------------------------------------

    def load_state(self) -> dict:
        return actions.load_state(self.state)

    def task_status(self) -> str | None:
        if self.task is None:
            return None
        if self.task.evaluate(self.state):
            return "success"
        if self.state.step_count >= self.max_steps:
            return "failed"
        return "in_progress"

    def solve_ik(self, target, arm="Right", position_only=False) -> list[float]:
        """Joint solution for an explicit 4x4 end-effector target."""
        matrix = np.asarray(target, dtype=float)
        if matrix.shape != (4, 4):
            raise SchemaError("IK target must be a 4x4 matrix")
        chain = kinematics.default_chain(self.robot_profile, arm)
        pose = kinematics.Pose.from_homogeneous(matrix)
        joints = self.state.robot.arm(arm).joints
        current = np.asarray(joints if joints else np.zeros(chain.n_joints))
        solution = kinematics.solve_ik_decoupled(chain, pose, current,
                                                 position_only=position_only)
        return [float(q) for q in solution]

    @staticmethod
    def list_tasks() -> list[dict]:
        return tasks.list_tasks()
