"""Language-level action set: parsing, preconditions, execution semantics.

Execution pipeline for object-dependent actions: validate, solve IK and build
an approach trajectory, draw one contingency outcome at the approach
threshold, apply the outcome's effects, advance the step counter.
Object-independent actions (moves, rotations, teleport, posture, perception)
are deterministic and never sample.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import catalog, contingency, kinematics
from . import world as W
from .errors import NoFreeAdjacentCell, ParseError, Unreachable
from .rng import RandomStream

KINDS = (
    "MoveAhead", "MoveBack", "MoveLeft", "MoveRight",
    "RotateLeft", "RotateRight",
    "Pick", "Lift", "Place", "Toggle", "Open", "Fill", "Slice", "Cook", "Use",
    "Teleport", "Undo", "Redo", "LoadState", "SolveIK",
    "Crouch", "Stand", "Observe",
)

_KIND_ALIASES = {k.lower(): k for k in KINDS}
_KIND_ALIASES["tp"] = "Teleport"
_KIND_ALIASES["pickup"] = "Pick"

OBJECT_DEPENDENT = frozenset(
    {"Pick", "Lift", "Place", "Toggle", "Open", "Fill", "Slice", "Cook", "Use"})
ARM_REQUIRED = OBJECT_DEPENDENT - {"Lift"}
MAGNITUDE_REQUIRED = frozenset(
    {"MoveAhead", "MoveBack", "MoveLeft", "MoveRight", "RotateLeft", "RotateRight"})

DEFAULT_TRAJECTORY_WAYPOINTS = 20

# Licensing: which actionable property (or licensed flag) an action needs.
_ACTION_PROPERTY = {
    "Pick": catalog.PICKUPABLE,
    "Slice": catalog.SLICEABLE,
    "Open": catalog.OPENABLE,
    "Toggle": catalog.TOGGLEABLE,
    "Lift": catalog.MOVABLE,
}


@dataclass(frozen=True)
class ActionCommand:
    kind: str
    arm: str | None = None  # "Left" | "Right"
    object_id: str | None = None
    container_id: str | None = None
    magnitude: float | None = None

    def to_dict(self) -> dict:
        out = {"action": self.kind.lower()}
        if self.arm:
            out["arm"] = self.arm.lower()
        if self.object_id:
            out["objectID"] = self.object_id
        if self.container_id:
            out["containerID"] = self.container_id
        if self.magnitude is not None:
            out["magnitude"] = self.magnitude
        return out


@dataclass
class StepResult:
    success: bool
    outcome: str
    error_message: str | None = None
    collisions: list = field(default_factory=list)
    trajectory_len: int = 0
    feedback: dict | None = None

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "outcome": self.outcome,
            "errorMessage": self.error_message,
            "collisions": [list(pair) for pair in self.collisions],
            "trajectoryLen": self.trajectory_len,
            "feedback": self.feedback,
        }


@dataclass(frozen=True)
class PreconditionReport:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations


# ---------------------------------------------------------------------------
# Parsing


def _normalize_arm(value: str) -> str:
    v = value.strip().lower()
    if v in ("left", "l"):
        return "Left"
    if v in ("right", "r"):
        return "Right"
    raise ParseError(f"bad arm {value!r}")


def parse(command) -> ActionCommand:
    """Parse a Table-style text command or its JSON-object equivalent."""
    if isinstance(command, dict):
        return _parse_dict(command)
    text = command.strip()
    if text.startswith("{"):
        try:
            return _parse_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON command: {exc}") from exc
    if text.startswith("(") and text.endswith(")"):
        text = text[1:-1]
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ParseError("empty command")
    head = parts[0].split(None, 1)
    fields = {"action": head[0]}
    rest = head[1:] + parts[1:]
    for token in rest:
        if "=" not in token:
            raise ParseError(f"expected key=value, got {token!r}")
        key, value = (s.strip() for s in token.split("=", 1))
        fields[key.lower()] = value
    return _parse_dict(fields)


def _parse_dict(fields: dict) -> ActionCommand:
    fields = {str(k).lower(): v for k, v in fields.items()}
    name = str(fields.pop("action", fields.pop("command", ""))).strip()
    kind = _KIND_ALIASES.get(name.lower())
    if kind is None:
        raise ParseError(f"unknown action {name!r}")
    arm = fields.pop("arm", None)
    object_id = fields.pop("objectid", None)
    container_id = fields.pop("containerid", None)
    magnitude = fields.pop("magnitude", None)
    if fields:
        raise ParseError(f"unknown fields {sorted(fields)}")
    cmd = ActionCommand(
        kind=kind,
        arm=_normalize_arm(arm) if arm is not None else None,
        object_id=object_id,
        container_id=container_id,
        magnitude=float(magnitude) if magnitude is not None else None,
    )
    if kind in ARM_REQUIRED and cmd.arm is None:
        raise ParseError(f"{kind} requires an arm")
    if kind in OBJECT_DEPENDENT | {"Teleport"} and cmd.object_id is None:
        raise ParseError(f"{kind} requires objectID")
    if kind == "Place" and cmd.container_id is None:
        raise ParseError("Place requires containerID")
    if kind in MAGNITUDE_REQUIRED and cmd.magnitude is None:
        raise ParseError(f"{kind} requires Magnitude")
    if cmd.magnitude is not None and cmd.magnitude <= 0:
        raise ParseError("Magnitude must be positive")
    return cmd


# ---------------------------------------------------------------------------
# Preconditions


def _terminal_flags(kind: str):
    return {"Cook": catalog.IS_COOKED, "Slice": catalog.IS_SLICED,
            "Use": catalog.IS_USED_UP}.get(kind)


def _source_running(world: W.WorldState, robot: W.RobotState) -> bool:
    for oid in sorted(world.objects):
        obj = world.objects[oid]
        if (obj.object_type in catalog.SOURCE_TYPES
                and obj.flag(catalog.IS_TOGGLED_ON)
                and np.hypot(obj.x - robot.x, obj.y - robot.y) <= robot.reach_radius):
            return True
    return False


def _appliance_running(world: W.WorldState, robot: W.RobotState) -> bool:
    for oid in sorted(world.objects):
        obj = world.objects[oid]
        if (obj.object_type in catalog.COOKING_APPLIANCE_TYPES
                and obj.flag(catalog.IS_TOGGLED_ON)
                and np.hypot(obj.x - robot.x, obj.y - robot.y) <= robot.reach_radius):
            return True
    return False


def _holds_knife(world: W.WorldState) -> bool:
    for arm in (world.robot.left, world.robot.right):
        if arm.held and world.obj(arm.held).object_type == "Knife":
            return True
    return False


def validate(world: W.WorldState, cmd: ActionCommand) -> PreconditionReport:
    """Report every violated precondition; empty report means executable."""
    if cmd.kind not in OBJECT_DEPENDENT:
        return PreconditionReport()
    v = []
    robot = world.robot
    obj = world.objects.get(cmd.object_id)
    if obj is None:
        return PreconditionReport(("unknown_object",))
    if not obj.intact:
        v.append("not_intact")

    prop = _ACTION_PROPERTY.get(cmd.kind)
    if prop is not None and prop not in obj.actionable:
        v.append("not_actionable")
    if cmd.kind == "Fill" and not catalog.fillable(obj.object_type):
        v.append("not_actionable")
    if cmd.kind == "Cook" and not catalog.cookable(obj.object_type):
        v.append("not_actionable")
    if cmd.kind == "Use" and not catalog.consumable(obj.object_type):
        v.append("not_actionable")
    if cmd.kind == "Place" and obj.object_type and cmd.container_id is not None:
        container = world.objects.get(cmd.container_id)
        if container is None:
            v.append("unknown_container")
        else:
            if container.object_type not in catalog.CONTAINER_TYPES:
                v.append("not_container")
            if not container.intact:
                v.append("container_broken")

    terminal = _terminal_flags(cmd.kind)
    if terminal is not None and obj.flag(terminal):
        v.append("terminal_state")
    already = contingency.TARGET_FLAG.get(cmd.kind)
    if (cmd.kind in ("Pick", "Lift", "Open", "Fill") and already
            and obj.flag(already)):
        v.append("already_done")

    # Arm availability
    if cmd.kind in ("Pick", "Open", "Toggle", "Cook", "Use"):
        if not robot.arm(cmd.arm).free:
            v.append("arm_occupied")
    if cmd.kind == "Slice":
        arm = robot.arm(cmd.arm)
        held_knife = arm.held and world.obj(arm.held).object_type == "Knife"
        if not (arm.free or held_knife):
            v.append("arm_occupied")
        if not _holds_knife(world):
            v.append("no_knife")
    if cmd.kind == "Lift":
        if not (robot.left.free and robot.right.free):
            v.append("arms_occupied")
    if cmd.kind in ("Place", "Fill"):
        if robot.arm(cmd.arm).held != cmd.object_id:
            v.append("not_held")

    # Reachability
    if cmd.kind == "Lift":
        if not (kinematics.check_reachable(robot, "Left", obj)
                and kinematics.check_reachable(robot, "Right", obj)):
            v.append("unreachable")
    elif cmd.kind == "Place":
        container = world.objects.get(cmd.container_id)
        if container is not None and not kinematics.check_reachable(
                robot, cmd.arm, container):
            v.append("unreachable")
    elif cmd.kind == "Fill":
        pass  # target is in-hand; the source check below covers reach
    elif not kinematics.check_reachable(robot, cmd.arm, obj):
        v.append("unreachable")

    # Containment / container state
    if cmd.kind == "Pick" and obj.contained_in is not None:
        container = world.objects.get(obj.contained_in)
        if container is not None and container.licensed(catalog.IS_OPEN) \
                and not container.flag(catalog.IS_OPEN):
            v.append("container_closed")
    if cmd.kind == "Place":
        container = world.objects.get(cmd.container_id)
        if container is not None and container.intact:
            if container.licensed(catalog.IS_OPEN) and not container.flag(catalog.IS_OPEN):
                v.append("container_closed")
            if container.object_type in catalog.AFFORDANCE_CONTAINER_TYPES:
                other = robot.left if cmd.arm == "Right" else robot.right
                if other.holding_open != container.object_id:
                    v.append("container_not_held_open")

    if cmd.kind == "Fill" and not _source_running(world, robot):
        v.append("no_active_source")
    if cmd.kind == "Cook" and not _appliance_running(world, robot):
        v.append("no_active_appliance")

    return PreconditionReport(tuple(v))


# ---------------------------------------------------------------------------
# Feedback


def load_state(world: W.WorldState) -> dict:
    """Full structured snapshot; never advances the step counter."""
    return {
        "robot": world.robot.to_dict(),
        "objects": {oid: world.objects[oid].to_dict()
                    for oid in sorted(world.objects)},
        "stepCount": world.step_count,
    }


def observe(world: W.WorldState) -> dict:
    """LoadState payload restricted to the frontal sector."""
    feedback = load_state(world)
    frontal = {}
    for oid, entry in feedback["objects"].items():
        obj = world.objects[oid]
        if abs(kinematics.bearing_degrees(world.robot, obj.x, obj.y)) <= 45.0 + 1e-9:
            frontal[oid] = entry
    feedback["objects"] = frontal
    return feedback


# ---------------------------------------------------------------------------
# Execution


def _release_holds(world: W.WorldState) -> W.WorldState:
    """Navigation lets go of any spring-loaded container being held open."""
    for arm in (world.robot.left, world.robot.right):
        if arm.holding_open is not None:
            oid = arm.holding_open
            world = W.apply_effect(world, W.SetHoldingOpen(arm.side, None))
            if oid in world.objects and world.obj(oid).intact:
                world = W.apply_effect(world, W.SetFlag(oid, catalog.IS_OPEN, False))
    return world


def _advance(world: W.WorldState) -> W.WorldState:
    return replace(world, step_count=world.step_count + 1)


_STRAFE = {"MoveAhead": 0, "MoveRight": 1, "MoveBack": 2, "MoveLeft": 3}
_HEADING_ORDER = ("N", "E", "S", "W")


def _direction(heading: str, kind: str) -> tuple[int, int]:
    idx = (_HEADING_ORDER.index(heading) + _STRAFE[kind]) % 4
    return W.heading_vector(_HEADING_ORDER[idx])


def _result(world, success, outcome, *, error=None, collisions=(),
            trajectory_len=0):
    return StepResult(
        success=success, outcome=outcome, error_message=error,
        collisions=list(collisions), trajectory_len=trajectory_len,
        feedback=load_state(world))


def _solve_action_ik(world: W.WorldState, cmd: ActionCommand):
    """IK + spline approach for the command's interaction point.

    Returns (new_world, trajectory_len); raises Unreachable on failure.
    """
    robot = world.robot
    sides = ("Left", "Right") if cmd.kind == "Lift" else (cmd.arm,)
    target_obj = world.obj(cmd.container_id if cmd.kind == "Place"
                           else cmd.object_id)
    chains = {s: kinematics.default_chain(robot.profile, s) for s in sides}
    currents = {}
    for s in sides:
        joints = robot.arm(s).joints
        currents[s] = np.asarray(joints if joints else
                                 np.zeros(chains[s].n_joints), dtype=float)
    targets = {s: kinematics.interaction_point(robot, target_obj, chains[s])
               for s in sides}
    if robot.profile == "H1":
        left = chains.get("Left", kinematics.default_chain("H1", "Left"))
        right = chains.get("Right", kinematics.default_chain("H1", "Right"))
        cl = currents.get("Left", np.zeros(left.n_joints))
        cr = currents.get("Right", np.zeros(right.n_joints))
        tl = targets.get("Left",
                         kinematics.forward_kinematics(left, cl))
        tr = targets.get("Right",
                         kinematics.forward_kinematics(right, cr))
        sols = kinematics.solve_ik_wholebody(
            left, right, (tl, tr), (cl, cr), position_only=True,
            balance_bound=10.0)
        solutions = {"Left": sols[0], "Right": sols[1]}
    else:
        solutions = {
            s: kinematics.solve_ik_decoupled(chains[s], targets[s], currents[s],
                                             position_only=True)
            for s in sides
        }
    total = 0
    for s in sides:
        traj = kinematics.interpolate_trajectory(
            currents[s], solutions[s], DEFAULT_TRAJECTORY_WAYPOINTS, clamped=True)
        total = max(total, len(traj))
        arm = replace(world.robot.arm(s), joints=tuple(float(a) for a in solutions[s]))
        world = world.with_robot(world.robot.with_arm(arm))
    return world, total


def execute(world: W.WorldState, cmd: ActionCommand, rng: RandomStream = None,
            difficulty: contingency.DifficultyLevel = contingency.EASY,
            table: contingency.ContingencyTable = None,
            solve_kinematics: bool = True):
    """Execute one command; returns (world', StepResult). Never raises for
    in-episode failures — they surface through the StepResult."""
    if table is None:
        table = contingency.default_table()

    kind = cmd.kind
    if kind in ("Undo", "Redo"):
        return world, _result(world, False, "precondition_failed",
                              error="undo/redo are handled by the history layer")
    if kind == "LoadState":
        return world, _result(world, True, "ok")
    if kind == "Observe":
        result = _result(world, True, "ok")
        result.feedback = observe(world)
        return world, result
    if kind in ("Crouch", "Stand"):
        world = _release_holds(world)
        world = _advance(W.apply_effect(world, W.SetPosture(kind)))
        return world, _result(world, True, "ok")
    if kind in ("RotateLeft", "RotateRight"):
        world = _release_holds(world)
        steps = int(cmd.magnitude) % 4
        delta = steps if kind == "RotateRight" else -steps
        idx = (_HEADING_ORDER.index(world.robot.heading) + delta) % 4
        world = world.with_robot(replace(world.robot, heading=_HEADING_ORDER[idx]))
        world = _advance(world)
        return world, _result(world, True, "ok")
    if kind in _STRAFE:
        return _execute_move(world, cmd)
    if kind == "Teleport":
        try:
            world, result = teleport(world, cmd.object_id)
        except (NoFreeAdjacentCell, W.UnknownEntity) as exc:
            return world, _result(world, False, "precondition_failed",
                                  error=str(exc) or type(exc).__name__)
        return world, result
    if kind == "SolveIK":
        return world, _result(world, False, "precondition_failed",
                              error="solveik is a protocol-level command")

    # Object-dependent pipeline
    report = validate(world, cmd)
    if not report.ok:
        return world, _result(world, False, "precondition_failed",
                              error=", ".join(report.violations))

    trajectory_len = 0
    if solve_kinematics:
        try:
            world, trajectory_len = _solve_action_ik(world, cmd)
        except Unreachable as exc:
            return world, _result(world, False, "precondition_failed",
                                  error=f"ik_unreachable: {exc}")

    obj = world.obj(cmd.object_id)
    blocked = obj.blocked_outcome(kind)
    if blocked is not None:
        world = _advance(world)
        return world, _result(world, False, blocked,
                              error=f"{cmd.object_id} is {blocked}",
                              trajectory_len=trajectory_len)

    stream = rng if rng is not None else RandomStream.from_state(world.rng_state)
    dist = contingency.outcome_table(obj, kind, table)
    dist = contingency.scale_difficulty(dist, difficulty)
    outcome = contingency.sample_outcome(dist, stream)
    world = replace(world, rng_state=stream.state)

    world, message = contingency.apply_outcome(world, cmd.object_id, cmd, outcome)
    world = _advance(world)
    success = outcome == contingency.SUCCESS
    return world, _result(world, success, outcome,
                          error=None if success else message,
                          trajectory_len=trajectory_len)


def _execute_move(world: W.WorldState, cmd: ActionCommand):
    dx, dy = _direction(world.robot.heading, cmd.kind)
    steps = int(cmd.magnitude)
    x, y = world.robot.x, world.robot.y
    collisions = []
    for _ in range(steps):
        nx, ny = x + dx, y + dy
        if not world.scene.in_bounds(nx, ny):
            return world, _result(world, False, "precondition_failed",
                                  error="out_of_bounds")
        blockers = W.objects_at(world, nx, ny)
        carried = {a.held for a in (world.robot.left, world.robot.right) if a.held}
        blockers = [b for b in blockers if b.object_id not in carried]
        if blockers:
            collisions = [("robot", blockers[0].object_id)]
            world = _advance(world)
            return world, _result(world, False, "collision",
                                  error=f"collision with {blockers[0].object_id}",
                                  collisions=collisions)
        x, y = nx, ny
    world = _release_holds(world)
    world = W.apply_effect(world, W.MoveRobot(x, y))
    world = _advance(world)
    return world, _result(world, True, "ok")


def teleport(world: W.WorldState, object_id: str):
    """Move the robot to the nearest free cell adjacent to the object,
    facing it. Tie-break: smallest (x, then y)."""
    obj = world.obj(object_id)
    candidates = []
    for ax, ay in ((obj.x - 1, obj.y), (obj.x + 1, obj.y),
                   (obj.x, obj.y - 1), (obj.x, obj.y + 1)):
        if not world.scene.in_bounds(ax, ay):
            continue
        if (ax, ay) == (world.robot.x, world.robot.y) or W.cell_free(world, ax, ay):
            dist = abs(ax - world.robot.x) + abs(ay - world.robot.y)
            candidates.append((dist, ax, ay))
    if not candidates:
        raise NoFreeAdjacentCell(f"no free cell adjacent to {object_id}")
    _, tx, ty = min(candidates)
    fx, fy = obj.x - tx, obj.y - ty
    heading = {(0, 1): "N", (1, 0): "E", (0, -1): "S", (-1, 0): "W"}[(fx, fy)]
    world = _release_holds(world)
    world = W.apply_effect(world, W.MoveRobot(tx, ty, heading=heading))
    world = _advance(world)
    return world, _result(world, True, "ok")


def execute_parallel(world: W.WorldState, left_cmd: ActionCommand,
                     right_cmd: ActionCommand, rng: RandomStream = None,
                     difficulty: contingency.DifficultyLevel = contingency.EASY,
                     table: contingency.ContingencyTable = None,
                     solve_kinematics: bool = True):
    """Run one command per arm as a single environment step.

    Both commands validate against the same pre-step world; effects apply
    left first, then right, each with its own contingency draw.
    """
    if table is None:
        table = contingency.default_table()
    results = {}
    pre = world

    def invalid(msg):
        return StepResult(success=False, outcome="precondition_failed",
                          error_message=msg, feedback=load_state(pre))

    if left_cmd.arm != "Left" or right_cmd.arm != "Right":
        bad = invalid("parallel commands must be (left, right)")
        return world, (bad, bad)
    reports = {}
    for label, cmd in (("left", left_cmd), ("right", right_cmd)):
        if cmd.kind not in OBJECT_DEPENDENT:
            reports[label] = PreconditionReport(("not_object_dependent",))
        else:
            reports[label] = validate(pre, cmd)
    conflict = (reports["left"].ok and reports["right"].ok
                and left_cmd.object_id == right_cmd.object_id)

    stream = rng if rng is not None else RandomStream.from_state(world.rng_state)
    executed = False
    for label, cmd in (("left", left_cmd), ("right", right_cmd)):
        report = reports[label]
        if not report.ok:
            results[label] = StepResult(
                success=False, outcome="precondition_failed",
                error_message=", ".join(report.violations),
                feedback=load_state(world))
            continue
        if label == "right" and conflict:
            results[label] = StepResult(
                success=False, outcome="conflict",
                error_message="both arms target the same object",
                feedback=load_state(world))
            continue
        trajectory_len = 0
        if solve_kinematics:
            try:
                world, trajectory_len = _solve_action_ik(world, cmd)
            except Unreachable as exc:
                results[label] = StepResult(
                    success=False, outcome="precondition_failed",
                    error_message=f"ik_unreachable: {exc}",
                    feedback=load_state(world))
                continue
        obj = world.obj(cmd.object_id)
        blocked = obj.blocked_outcome(cmd.kind)
        if blocked is not None:
            executed = True
            results[label] = StepResult(
                success=False, outcome=blocked,
                error_message=f"{cmd.object_id} is {blocked}",
                trajectory_len=trajectory_len, feedback=load_state(world))
            continue
        dist = contingency.scale_difficulty(
            contingency.outcome_table(obj, cmd.kind, table), difficulty)
        outcome = contingency.sample_outcome(dist, stream)
        world = replace(world, rng_state=stream.state)
        world, message = contingency.apply_outcome(world, cmd.object_id, cmd, outcome)
        executed = True
        results[label] = StepResult(
            success=outcome == contingency.SUCCESS, outcome=outcome,
            error_message=None if outcome == contingency.SUCCESS else message,
            trajectory_len=trajectory_len, feedback=load_state(world))

    if executed:
        world = _advance(world)
    feedback = load_state(world)
    for result in results.values():
        result.feedback = feedback
    return world, (results["left"], results["right"])
