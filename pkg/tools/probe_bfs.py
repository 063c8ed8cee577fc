#!/usr/bin/env python3
"""Prototype of the exhaustive single-arm reachability search on the minis."""
import json
import sys
import time
from collections import deque
from pathlib import Path

SRC = Path(__file__).resolve().parent.parent / "src"
sys.path.insert(0, str(SRC))

from dualhab import actions, contingency, tasks, world as W  # noqa: E402
from dualhab.engine import load_scene_document  # noqa: E402

EASY = contingency.difficulty_from_name("easy")
TABLE = contingency.default_table()
KINDS = ("Pick", "Open", "Toggle", "Fill", "Slice", "Cook", "Use")


def state_key(state):
    d = state.to_dict()
    d.pop("stepCount")
    d.pop("rngState")
    return json.dumps(d, sort_keys=True)


def expand(state):
    """Single-arm (left only) successor states."""
    out = []
    for oid in sorted(state.objects):
        cmds = [actions.ActionCommand(kind="Teleport", arm="Left", object_id=oid)]
        for kind in KINDS:
            cmds.append(actions.ActionCommand(kind=kind, arm="Left", object_id=oid))
        held = state.robot.left.held
        if held:
            if state.objects[oid].object_type in (
                    tasks.catalog.CONTAINER_TYPES):
                cmds.append(actions.ActionCommand(
                    kind="Place", arm="Left", object_id=held, container_id=oid))
        for cmd in cmds:
            try:
                new, res = actions.execute(state, cmd, difficulty=EASY,
                                           table=TABLE, solve_kinematics=False)
            except Exception:
                continue
            if new.step_count != state.step_count and res.success:
                out.append(new)
    return out


def bfs(scene_name, depth):
    doc = load_scene_document(scene_name)
    start = W.load_scene(doc, profile="X1", seed=0)
    seen = {state_key(start)}
    frontier = [start]
    states = [start]
    for _ in range(depth):
        nxt = []
        for s in frontier:
            for new in expand(s):
                k = state_key(new)
                if k not in seen:
                    seen.add(k)
                    nxt.append(new)
        states.extend(nxt)
        frontier = nxt
        if not frontier:
            break
    return states


def main():
    for scene in ("mini_pantry", "mini_tap", "mini_cold"):
        t0 = time.time()
        states = bfs(scene, 12)
        print(f"{scene}: {len(states)} states in {time.time()-t0:.1f}s")
        doc = load_scene_document(scene)
        start = W.load_scene(doc, profile="X1", seed=0)
        for name, template in sorted(tasks.TEMPLATES.items()):
            for i, binding in enumerate(tasks.enumerate_bindings(template, start)):
                inst = tasks.TaskInstance(
                    task_id=f"probe_{name}_{i}", template=name, scene=scene,
                    bindings=tuple(sorted(binding.items())))
                solved = any(inst.evaluate(s) for s in states)
                tag = template.classification
                status = "OK" if (solved != (tag == "dual_arm_essential")) else "PROBLEM"
                print(f"  {status} {tag:18s} {name} {dict(binding)} solved={solved}")


if __name__ == "__main__":
    main()
