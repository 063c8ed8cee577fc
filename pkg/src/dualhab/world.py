"""Scene/object/robot data model and the deterministic state-transition layer.

World snapshots are immutable values: every mutation flows through
``apply_effect`` and returns a fresh ``WorldState``.  Two snapshots with equal
fields serialize to identical canonical JSON bytes, which is what the history
module relies on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from . import catalog
from .errors import PlacementError, SchemaError, UnknownEntity

SCHEMA_VERSION = 1

HEADINGS = ("N", "E", "S", "W")
_HEADING_VEC = {"N": (0, 1), "E": (1, 0), "S": (0, -1), "W": (-1, 0)}
BANDS = ("low", "counter", "high")

PROFILES = {"X1": {"reach_radius": 1.0}, "H1": {"reach_radius": 1.5}}


def heading_vector(heading: str) -> tuple[int, int]:
    return _HEADING_VEC[heading]


@dataclass(frozen=True)
class ObjectSpec:
    object_id: str
    object_type: str
    x: int
    y: int
    band: str
    flags: tuple  # ((flag, bool), ...)


@dataclass(frozen=True)
class SceneSpec:
    scene_id: str
    room_kind: str
    width: int
    height: int
    robot_start: tuple  # (x, y, heading)
    objects: tuple  # ObjectSpec, ...
    document: str = ""  # canonical JSON of the source document

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height


@dataclass(frozen=True)
class ObjectInstance:
    object_id: str
    object_type: str
    x: int
    y: int
    band: str
    flags: frozenset = frozenset()  # flags currently true
    intact: bool = True
    spilled: bool = False
    contained_in: str | None = None
    half_open: bool = False
    blocked: tuple = ()  # ((action_kind, outcome_name), ...) persistent blocks
    use_count: int = 0

    def flag(self, name: str) -> bool:
        return name in self.flags

    def licensed(self, name: str) -> bool:
        return catalog.licenses_flag(self.object_type, name)

    def with_flag(self, name: str, value: bool) -> "ObjectInstance":
        if not self.licensed(name):
            raise PlacementError(
                f"{self.object_type} does not license flag {name}"
            )
        flags = set(self.flags)
        if value:
            flags.add(name)
        else:
            flags.discard(name)
        return replace(self, flags=frozenset(flags))

    def blocked_outcome(self, action_kind: str) -> str | None:
        for kind, outcome in self.blocked:
            if kind == action_kind:
                return outcome
        return None

    @property
    def actionable(self) -> frozenset:
        return catalog.CATALOG[self.object_type].actionable

    def to_dict(self) -> dict:
        row = catalog.CATALOG[self.object_type]
        return {
            "id": self.object_id,
            "type": self.object_type,
            "position": [self.x, self.y],
            "band": self.band,
            "flags": {f: (f in self.flags) for f in sorted(row.flags)},
            "intact": self.intact,
            "spilled": self.spilled,
            "containedIn": self.contained_in,
            "halfOpen": self.half_open,
            "blocked": {k: o for k, o in sorted(self.blocked)},
            "useCount": self.use_count,
        }


@dataclass(frozen=True)
class ArmState:
    side: str  # "Left" | "Right"
    held: str | None = None
    holding_open: str | None = None
    joints: tuple = ()
    busy: bool = False

    @property
    def free(self) -> bool:
        return self.held is None and self.holding_open is None

    def to_dict(self) -> dict:
        return {
            "side": self.side,
            "held": self.held,
            "holdingOpen": self.holding_open,
            "joints": list(self.joints),
            "busy": self.busy,
        }


@dataclass(frozen=True)
class RobotState:
    profile: str  # "X1" | "H1"
    x: int
    y: int
    heading: str
    posture: str = "Stand"  # "Stand" | "Crouch"
    left: ArmState = ArmState("Left")
    right: ArmState = ArmState("Right")

    @property
    def reach_radius(self) -> float:
        return PROFILES[self.profile]["reach_radius"]

    def arm(self, side: str) -> ArmState:
        return self.left if side == "Left" else self.right

    def with_arm(self, arm: ArmState) -> "RobotState":
        if arm.side == "Left":
            return replace(self, left=arm)
        return replace(self, right=arm)

    def to_dict(self) -> dict:
        return {
            "profile": self.profile,
            "cell": [self.x, self.y],
            "heading": self.heading,
            "posture": self.posture,
            "arms": {"left": self.left.to_dict(), "right": self.right.to_dict()},
        }


@dataclass(frozen=True)
class WorldState:
    scene: SceneSpec
    objects: dict  # id -> ObjectInstance; treated as immutable
    robot: RobotState
    step_count: int = 0
    rng_state: tuple = (0, 0)  # (seed, counter)

    def obj(self, object_id: str) -> ObjectInstance:
        try:
            return self.objects[object_id]
        except KeyError:
            raise UnknownEntity(object_id) from None

    def with_object(self, obj: ObjectInstance) -> "WorldState":
        objects = dict(self.objects)
        objects[obj.object_id] = obj
        return replace(self, objects=objects)

    def with_robot(self, robot: RobotState) -> "WorldState":
        return replace(self, robot=robot)

    def to_dict(self) -> dict:
        return {
            "scene": json.loads(self.scene.document),
            "objects": {oid: o.to_dict() for oid, o in sorted(self.objects.items())},
            "robot": self.robot.to_dict(),
            "stepCount": self.step_count,
            "rngState": list(self.rng_state),
        }

    def canonical(self) -> bytes:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode()

    def equals(self, other: "WorldState") -> bool:
        return self.canonical() == other.canonical()


# ---------------------------------------------------------------------------
# Scene loading


_SCENE_KEYS = {"schema_version", "scene_id", "room_kind", "grid", "robot_start", "objects"}
_OBJECT_KEYS = {"id", "type", "x", "y", "band", "flags"}


def _require_keys(mapping, required, optional=frozenset(), where="document"):
    if not isinstance(mapping, dict):
        raise SchemaError(f"{where}: expected an object")
    unknown = set(mapping) - required - optional
    if unknown:
        raise SchemaError(f"{where}: unknown fields {sorted(unknown)}")
    missing = required - set(mapping)
    if missing:
        raise SchemaError(f"{where}: missing fields {sorted(missing)}")


def parse_scene(document: dict) -> SceneSpec:
    _require_keys(document, _SCENE_KEYS, where="scene")
    if document["schema_version"] != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {document['schema_version']}")
    if document["room_kind"] not in catalog.ROOM_KINDS:
        raise SchemaError(f"unknown room_kind {document['room_kind']}")
    grid = document["grid"]
    _require_keys(grid, {"w", "h"}, where="grid")
    width, height = grid["w"], grid["h"]
    if not (isinstance(width, int) and isinstance(height, int) and width > 0 and height > 0):
        raise SchemaError("grid dimensions must be positive integers")
    rs = document["robot_start"]
    _require_keys(rs, {"x", "y", "heading"}, where="robot_start")
    if rs["heading"] not in HEADINGS:
        raise SchemaError(f"invalid heading {rs['heading']}")

    specs = []
    seen_ids = set()
    for entry in document["objects"]:
        _require_keys(entry, _OBJECT_KEYS - {"flags"}, optional={"flags"},
                      where=f"object {entry.get('id', '?')}")
        oid, otype = entry["id"], entry["type"]
        if otype not in catalog.CATALOG:
            raise SchemaError(f"unknown object type {otype}")
        if oid in seen_ids:
            raise SchemaError(f"duplicate object id {oid}")
        seen_ids.add(oid)
        if entry["band"] not in BANDS:
            raise SchemaError(f"invalid band {entry['band']} for {oid}")
        flags = entry.get("flags", {})
        row = catalog.CATALOG[otype]
        for flag, value in flags.items():
            if flag not in row.flags:
                raise SchemaError(f"{otype} does not license flag {flag}")
            if not isinstance(value, bool):
                raise SchemaError(f"flag {flag} of {oid} must be boolean")
        specs.append(ObjectSpec(
            object_id=oid, object_type=otype, x=entry["x"], y=entry["y"],
            band=entry["band"], flags=tuple(sorted(flags.items())),
        ))

    spec = SceneSpec(
        scene_id=document["scene_id"],
        room_kind=document["room_kind"],
        width=width,
        height=height,
        robot_start=(rs["x"], rs["y"], rs["heading"]),
        objects=tuple(specs),
        document=json.dumps(document, sort_keys=True, separators=(",", ":")),
    )

    # Placement checks live here so parse errors stay schema-only.
    occupied = set()
    for ospec in specs:
        if not spec.in_bounds(ospec.x, ospec.y):
            raise PlacementError(f"{ospec.object_id} at ({ospec.x},{ospec.y}) outside grid")
        key = (ospec.x, ospec.y, ospec.band)
        if key in occupied:
            raise PlacementError(f"two objects share cell+band {key}")
        occupied.add(key)
    if not spec.in_bounds(rs["x"], rs["y"]):
        raise PlacementError("robot_start outside grid")
    return spec


def load_scene(document: dict, profile: str = "X1", seed: int = 0) -> WorldState:
    """Build the initial world from a validated scene document."""
    spec = parse_scene(document)
    objects = {}
    for ospec in spec.objects:
        flags = frozenset(f for f, v in ospec.flags if v)
        objects[ospec.object_id] = ObjectInstance(
            object_id=ospec.object_id, object_type=ospec.object_type,
            x=ospec.x, y=ospec.y, band=ospec.band, flags=flags,
        )
    sx, sy, heading = spec.robot_start
    robot = RobotState(profile=profile, x=sx, y=sy, heading=heading)
    return WorldState(scene=spec, objects=objects, robot=robot,
                      step_count=0, rng_state=(seed, 0))


# ---------------------------------------------------------------------------
# Queries


def query_objects(world: WorldState, predicate=None, *, object_type=None,
                  actionable=None, flag=None, reachable_by=None):
    """Matching objects in deterministic (id-sorted) order.

    ``reachable_by`` takes a check function (robot, side, obj) -> bool so the
    world layer stays independent of the kinematics module.
    """
    out = []
    for oid in sorted(world.objects):
        obj = world.objects[oid]
        if object_type is not None and obj.object_type != object_type:
            continue
        if actionable is not None and actionable not in obj.actionable:
            continue
        if flag is not None and not obj.flag(flag):
            continue
        if reachable_by is not None:
            check = reachable_by
            if not (check(world.robot, "Left", obj) or check(world.robot, "Right", obj)):
                continue
        if predicate is not None and not predicate(obj):
            continue
        out.append(obj)
    return out


def objects_at(world: WorldState, x: int, y: int, *, include_contained=False):
    return [
        o for oid, o in sorted(world.objects.items())
        if o.x == x and o.y == y and (include_contained or o.contained_in is None)
    ]


def cell_free(world: WorldState, x: int, y: int) -> bool:
    """A cell the robot can stand on: in bounds and with no loose objects."""
    if not world.scene.in_bounds(x, y):
        return False
    return not objects_at(world, x, y)


# ---------------------------------------------------------------------------
# Effects: the single mutation primitive


@dataclass(frozen=True)
class Effect:
    kind: str
    object_id: str | None = None
    flag: str | None = None
    value: bool | None = None
    side: str | None = None
    x: int | None = None
    y: int | None = None
    band: str | None = None
    heading: str | None = None
    posture: str | None = None
    container_id: str | None = None
    action_kind: str | None = None
    outcome: str | None = None


def SetFlag(object_id, flag, value):
    return Effect("set_flag", object_id=object_id, flag=flag, value=value)


def MoveObject(object_id, x, y, band, container_id=None):
    return Effect("move_object", object_id=object_id, x=x, y=y, band=band,
                  container_id=container_id)


def AttachArm(side, object_id):
    return Effect("attach_arm", side=side, object_id=object_id)


def DetachArm(side):
    return Effect("detach_arm", side=side)


def MarkBroken(object_id):
    return Effect("mark_broken", object_id=object_id)


def MarkSpilled(object_id):
    return Effect("mark_spilled", object_id=object_id)


def MoveRobot(x, y, heading=None, posture=None):
    return Effect("move_robot", x=x, y=y, heading=heading, posture=posture)


def SetPosture(posture):
    return Effect("set_posture", posture=posture)


def SetBlocked(object_id, action_kind, outcome):
    return Effect("set_blocked", object_id=object_id, action_kind=action_kind,
                  outcome=outcome)


def SetHalfOpen(object_id, value=True):
    return Effect("set_half_open", object_id=object_id, value=value)


def SetHoldingOpen(side, object_id):
    return Effect("set_holding_open", side=side, object_id=object_id)


def IncrementUse(object_id):
    return Effect("increment_use", object_id=object_id)


def _carried_ids(robot: RobotState):
    ids = set()
    for arm in (robot.left, robot.right):
        if arm.held:
            ids.add(arm.held)
    return ids


def apply_effect(world: WorldState, effect: Effect) -> WorldState:
    """Apply one primitive mutation, returning a fresh world."""
    kind = effect.kind
    if kind == "set_flag":
        obj = world.obj(effect.object_id)
        return world.with_object(obj.with_flag(effect.flag, effect.value))

    if kind == "move_object":
        obj = world.obj(effect.object_id)
        return world.with_object(replace(
            obj, x=effect.x, y=effect.y, band=effect.band,
            contained_in=effect.container_id))

    if kind == "attach_arm":
        world.obj(effect.object_id)
        arm = replace(world.robot.arm(effect.side), held=effect.object_id)
        return world.with_robot(world.robot.with_arm(arm))

    if kind == "detach_arm":
        arm = replace(world.robot.arm(effect.side), held=None)
        return world.with_robot(world.robot.with_arm(arm))

    if kind == "mark_broken":
        obj = world.obj(effect.object_id)
        out = world.with_object(replace(obj, intact=False))
        robot = out.robot
        for arm in (robot.left, robot.right):
            if arm.held == effect.object_id:
                robot = robot.with_arm(replace(arm, held=None))
            if arm.holding_open == effect.object_id:
                robot = robot.with_arm(replace(robot.arm(arm.side), holding_open=None))
        # A broken object no longer holds IsPickedUp/IsLifted.
        obj = out.obj(effect.object_id)
        flags = set(obj.flags) - {catalog.IS_PICKED_UP, catalog.IS_LIFTED}
        out = out.with_object(replace(obj, flags=frozenset(flags)))
        return out.with_robot(robot)

    if kind == "mark_spilled":
        obj = world.obj(effect.object_id)
        flags = set(obj.flags) - {catalog.IS_FILLED}
        return world.with_object(replace(obj, spilled=True, flags=frozenset(flags)))

    if kind == "move_robot":
        robot = world.robot
        updates = {"x": effect.x, "y": effect.y}
        if effect.heading is not None:
            updates["heading"] = effect.heading
        if effect.posture is not None:
            updates["posture"] = effect.posture
        out = world.with_robot(replace(robot, **updates))
        # Carried objects ride along.
        for oid in _carried_ids(robot):
            obj = out.obj(oid)
            out = out.with_object(replace(obj, x=effect.x, y=effect.y))
        return out

    if kind == "set_posture":
        return world.with_robot(replace(world.robot, posture=effect.posture))

    if kind == "set_blocked":
        obj = world.obj(effect.object_id)
        blocked = dict(obj.blocked)
        blocked[effect.action_kind] = effect.outcome
        return world.with_object(replace(obj, blocked=tuple(sorted(blocked.items()))))

    if kind == "set_half_open":
        obj = world.obj(effect.object_id)
        return world.with_object(replace(obj, half_open=effect.value))

    if kind == "set_holding_open":
        arm = replace(world.robot.arm(effect.side), holding_open=effect.object_id)
        return world.with_robot(world.robot.with_arm(arm))

    if kind == "increment_use":
        obj = world.obj(effect.object_id)
        return world.with_object(replace(obj, use_count=obj.use_count + 1))

    raise UnknownEntity(f"unknown effect kind {kind}")


def check_invariants(world: WorldState) -> None:
    """Raise AssertionError if a structural invariant is violated."""
    for oid, obj in world.objects.items():
        row = catalog.CATALOG[obj.object_type]
        extra = obj.flags - row.flags
        assert not extra, f"{oid} carries unlicensed flags {extra}"
        holders = [a.side for a in (world.robot.left, world.robot.right) if a.held == oid]
        if obj.flag(catalog.IS_LIFTED):
            assert len(holders) == 2, f"{oid} lifted but held by {holders}"
        elif obj.flag(catalog.IS_PICKED_UP):
            assert len(holders) == 1, f"{oid} picked but held by {holders}"
    for arm in (world.robot.left, world.robot.right):
        if arm.held is not None:
            obj = world.obj(arm.held)
            assert obj.flag(catalog.IS_PICKED_UP) or obj.flag(catalog.IS_LIFTED)
