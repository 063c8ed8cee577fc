"""Probabilistic outcome layer: categorical outcome tables, difficulty
scaling, seeded sampling, and outcome -> effect mapping."""

from __future__ import annotations

from dataclasses import dataclass

from . import catalog, world as W
from .errors import SchemaError, UnknownOutcome
from .rng import RandomStream

SUCCESS = "success"
BROKEN = "broken"
NOTHING_HAPPENS = "nothing_happens"
LIQUID_SPILL = "liquid_spill"
PARTIAL_SLICE = "partial_slice"
LOCKED = "locked"
HALF_OPEN = "half_open"
STUCK = "stuck"

OUTCOME_NAMES = (SUCCESS, BROKEN, NOTHING_HAPPENS, LIQUID_SPILL, PARTIAL_SLICE,
                 LOCKED, HALF_OPEN, STUCK)

# State flag each object-dependent action targets.
TARGET_FLAG = {
    "Pick": catalog.IS_PICKED_UP,
    "Lift": catalog.IS_LIFTED,
    "Open": catalog.IS_OPEN,
    "Toggle": catalog.IS_TOGGLED_ON,
    "Fill": catalog.IS_FILLED,
    "Slice": catalog.IS_SLICED,
    "Cook": catalog.IS_COOKED,
    "Use": catalog.IS_USED_UP,
    "Place": None,
}

USE_UP_REPETITIONS = 3
NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class OutcomeDistribution:
    entries: tuple  # ((name, probability), ...) with success first

    def __post_init__(self):
        names = [n for n, _ in self.entries]
        if names.count(SUCCESS) != 1 or names[0] != SUCCESS:
            raise SchemaError("distribution must list success exactly once, first")
        if len(set(names)) != len(names):
            raise SchemaError("duplicate outcome names")
        for name, p in self.entries:
            if name not in OUTCOME_NAMES:
                raise SchemaError(f"unknown outcome {name}")
            if p < 0:
                raise SchemaError(f"negative probability for {name}")
        if abs(sum(p for _, p in self.entries) - 1.0) > NORMALIZATION_TOL:
            raise SchemaError("probabilities must sum to 1")

    @property
    def success_probability(self) -> float:
        return self.entries[0][1]

    @property
    def degenerate(self) -> bool:
        return len(self.entries) == 1

    def probability(self, name: str) -> float:
        for n, p in self.entries:
            if n == name:
                return p
        return 0.0

    def to_dict(self) -> dict:
        return {n: p for n, p in self.entries}


DEGENERATE = OutcomeDistribution(((SUCCESS, 1.0),))


def _split(success_p: float, failures) -> OutcomeDistribution:
    share = (1.0 - success_p) / len(failures)
    return OutcomeDistribution(((SUCCESS, success_p),
                                *((f, share) for f in failures)))


@dataclass(frozen=True)
class DifficultyLevel:
    name: str
    success_rate: float


EASY = DifficultyLevel("Easy", 1.0)
MEDIUM = DifficultyLevel("Medium", 0.5)
HARD = DifficultyLevel("Hard", 0.2)
_NAMED = {"easy": EASY, "medium": MEDIUM, "hard": HARD}


def difficulty_from_name(name: str) -> DifficultyLevel:
    key = name.lower()
    if key in _NAMED:
        return _NAMED[key]
    if key.startswith("custom=") or key.startswith("custom:"):
        rate = float(key.split("=" if "=" in key else ":", 1)[1])
        if not 0.0 <= rate <= 1.0:
            raise SchemaError("custom success rate must lie in [0, 1]")
        return DifficultyLevel("Custom", rate)
    raise SchemaError(f"unknown difficulty {name!r}")


@dataclass(frozen=True)
class ContingencyTable:
    rows: tuple  # (((flag, action), OutcomeDistribution), ...)

    def lookup(self, flag: str, action: str) -> OutcomeDistribution | None:
        for (f, a), dist in self.rows:
            if f == flag and a == action:
                return dist
        return None

    def with_overrides(self, config: dict) -> "ContingencyTable":
        rows = dict(self.rows)
        for (flag, action), dist in parse_config(config).rows:
            rows[(flag, action)] = dist
        return ContingencyTable(tuple(sorted(rows.items())))

    def to_config(self) -> dict:
        return {f"{flag}.{action}": dist.to_dict()
                for (flag, action), dist in self.rows}


def default_table() -> ContingencyTable:
    base = 0.8
    rows = {
        (catalog.IS_PICKED_UP, "Pick"): _split(base, (BROKEN, NOTHING_HAPPENS)),
        (catalog.IS_LIFTED, "Lift"): _split(base, (BROKEN, NOTHING_HAPPENS)),
        (catalog.IS_FILLED, "Fill"): _split(base, (LIQUID_SPILL, NOTHING_HAPPENS)),
        (catalog.IS_SLICED, "Slice"): _split(base, (PARTIAL_SLICE, NOTHING_HAPPENS)),
        (catalog.IS_OPEN, "Open"): _split(base, (LOCKED, HALF_OPEN, NOTHING_HAPPENS)),
        (catalog.IS_TOGGLED_ON, "Toggle"): _split(base, (STUCK, NOTHING_HAPPENS)),
        # Picking something currently filled is the "pourable" scenario; its
        # dedicated multi-state row carries the demo probabilities.
        (catalog.IS_FILLED, "Pick"): OutcomeDistribution(
            ((SUCCESS, 0.8), (LIQUID_SPILL, 0.1), (BROKEN, 0.1))),
    }
    return ContingencyTable(tuple(sorted(rows.items())))


def parse_config(config: dict) -> ContingencyTable:
    """Parse the user-facing {"<StateFlag>.<Action>": {...}} map."""
    rows = {}
    for key, probs in config.items():
        if "." not in key:
            raise SchemaError(f"bad contingency key {key!r}")
        flag, action = key.split(".", 1)
        if flag not in catalog.ALL_FLAGS:
            raise SchemaError(f"unknown state flag {flag}")
        if action not in TARGET_FLAG:
            raise SchemaError(f"unknown action {action}")
        if SUCCESS not in probs:
            raise SchemaError(f"row {key} missing success probability")
        entries = [(SUCCESS, float(probs[SUCCESS]))]
        entries += [(n, float(p)) for n, p in probs.items() if n != SUCCESS]
        try:
            rows[(flag, action)] = OutcomeDistribution(tuple(entries))
        except SchemaError as exc:
            raise SchemaError(f"row {key}: {exc}") from exc
    return ContingencyTable(tuple(sorted(rows.items())))


# ---------------------------------------------------------------------------
# Lookup, scaling, sampling


def outcome_table(obj: W.ObjectInstance, action_kind: str,
                  table: ContingencyTable) -> OutcomeDistribution:
    """Distribution for the state the action targets.

    A row keyed on a non-target flag (e.g. IsFilled.Pick) is an explicit
    multi-state configuration: when the object currently carries that flag it
    takes precedence over the target-flag row.  Several applicable carried
    rows merge by outcome union with the non-success mass renormalized.
    """
    target = TARGET_FLAG.get(action_kind)
    if target is None:
        return DEGENERATE
    carried = []
    for flag in sorted(obj.flags):
        if flag != target:
            dist = table.lookup(flag, action_kind)
            if dist is not None:
                carried.append(dist)
    if len(carried) == 1:
        return carried[0]
    if carried:
        success_p = carried[0].success_probability
        weights = {}
        order = []
        for dist in carried:
            for name, p in dist.entries[1:]:
                if name not in weights:
                    order.append(name)
                    weights[name] = 0.0
                weights[name] += p
        total = sum(weights.values())
        scale = (1.0 - success_p) / total if total > 0 else 0.0
        return OutcomeDistribution(
            ((SUCCESS, success_p), *((n, weights[n] * scale) for n in order)))
    return table.lookup(target, action_kind) or DEGENERATE


def scale_difficulty(dist: OutcomeDistribution,
                     level: DifficultyLevel) -> OutcomeDistribution:
    if dist.degenerate:
        return dist
    rate = level.success_rate
    if rate >= 1.0:
        return OutcomeDistribution(((SUCCESS, 1.0),))
    base_residual = sum(p for _, p in dist.entries[1:])
    entries = [(SUCCESS, rate)]
    for name, p in dist.entries[1:]:
        entries.append((name, (1.0 - rate) * p / base_residual))
    return OutcomeDistribution(tuple(entries))


def sample_outcome(dist: OutcomeDistribution, rng: RandomStream) -> str:
    """Inverse-CDF draw in entry order; consumes exactly one variate."""
    u = rng.uniform()
    acc = 0.0
    for name, p in dist.entries:
        acc += p
        if u < acc:
            return name
    return dist.entries[-1][0]


# ---------------------------------------------------------------------------
# Outcome -> effects


def _fill_via_source(world: W.WorldState, source: W.ObjectInstance) -> W.WorldState:
    """A running source fills held containers; latching ones also fill
    whatever sits at their cell."""
    robot = world.robot
    candidates = []
    for arm in (robot.left, robot.right):
        if arm.held:
            candidates.append(arm.held)
    if source.object_type in catalog.LATCHING_SOURCE_TYPES:
        for obj in W.objects_at(world, source.x, source.y, include_contained=True):
            if obj.object_id != source.object_id:
                candidates.append(obj.object_id)
        for oid, obj in sorted(world.objects.items()):
            if obj.contained_in == source.object_id:
                candidates.append(oid)
    for oid in candidates:
        obj = world.obj(oid)
        if (obj.intact and catalog.fillable(obj.object_type)
                and not obj.flag(catalog.IS_FILLED)):
            world = W.apply_effect(world, W.SetFlag(oid, catalog.IS_FILLED, True))
    return world


def _nominal(world: W.WorldState, cmd) -> tuple[W.WorldState, str]:
    kind = cmd.kind
    obj = world.obj(cmd.object_id)
    robot = world.robot

    if kind == "Pick":
        world = W.apply_effect(world, W.AttachArm(cmd.arm, obj.object_id))
        world = W.apply_effect(world, W.SetFlag(obj.object_id, catalog.IS_PICKED_UP, True))
        world = W.apply_effect(world, W.MoveObject(
            obj.object_id, robot.x, robot.y, obj.band, container_id=None))
        return world, f"picked up {obj.object_id} with the {cmd.arm.lower()} arm"

    if kind == "Lift":
        world = W.apply_effect(world, W.AttachArm("Left", obj.object_id))
        world = W.apply_effect(world, W.AttachArm("Right", obj.object_id))
        world = W.apply_effect(world, W.SetFlag(obj.object_id, catalog.IS_LIFTED, True))
        world = W.apply_effect(world, W.MoveObject(
            obj.object_id, robot.x, robot.y, obj.band, container_id=None))
        return world, f"lifted {obj.object_id} with both arms"

    if kind == "Place":
        container = world.obj(cmd.container_id)
        world = W.apply_effect(world, W.DetachArm(cmd.arm))
        world = W.apply_effect(world, W.SetFlag(obj.object_id, catalog.IS_PICKED_UP, False))
        world = W.apply_effect(world, W.MoveObject(
            obj.object_id, container.x, container.y, container.band,
            container_id=container.object_id))
        msg = f"placed {obj.object_id} into {container.object_id}"
        if (container.object_type in catalog.LATCHING_SOURCE_TYPES
                and container.flag(catalog.IS_TOGGLED_ON)
                and catalog.fillable(obj.object_type)):
            world = W.apply_effect(world, W.SetFlag(obj.object_id, catalog.IS_FILLED, True))
            msg += "; it filled up"
        return world, msg

    if kind == "Open":
        world = W.apply_effect(world, W.SetFlag(obj.object_id, catalog.IS_OPEN, True))
        world = W.apply_effect(world, W.SetHalfOpen(obj.object_id, False))
        if obj.object_type in catalog.AFFORDANCE_CONTAINER_TYPES:
            world = W.apply_effect(world, W.SetHoldingOpen(cmd.arm, obj.object_id))
            return world, (f"opened {obj.object_id}; the {cmd.arm.lower()} arm "
                           "is holding it open")
        return world, f"opened {obj.object_id}"

    if kind == "Toggle":
        turning_on = not obj.flag(catalog.IS_TOGGLED_ON)
        world = W.apply_effect(world, W.SetFlag(
            obj.object_id, catalog.IS_TOGGLED_ON, turning_on))
        msg = f"toggled {obj.object_id} {'on' if turning_on else 'off'}"
        if turning_on and obj.object_type in catalog.SOURCE_TYPES:
            world = _fill_via_source(world, world.obj(obj.object_id))
            if obj.object_type in catalog.MOMENTARY_SOURCE_TYPES:
                # Spring-loaded: runs only for this step.
                world = W.apply_effect(world, W.SetFlag(
                    obj.object_id, catalog.IS_TOGGLED_ON, False))
                msg += " (it shut off again)"
        return world, msg

    if kind == "Fill":
        world = W.apply_effect(world, W.SetFlag(obj.object_id, catalog.IS_FILLED, True))
        return world, f"filled {obj.object_id}"

    if kind == "Slice":
        world = W.apply_effect(world, W.SetFlag(obj.object_id, catalog.IS_SLICED, True))
        return world, f"sliced {obj.object_id}"

    if kind == "Cook":
        world = W.apply_effect(world, W.SetFlag(obj.object_id, catalog.IS_COOKED, True))
        return world, f"cooked {obj.object_id}"

    if kind == "Use":
        world = W.apply_effect(world, W.IncrementUse(obj.object_id))
        if world.obj(obj.object_id).use_count >= USE_UP_REPETITIONS:
            world = W.apply_effect(world, W.SetFlag(
                obj.object_id, catalog.IS_USED_UP, True))
            return world, f"used {obj.object_id}; it is used up"
        return world, f"used {obj.object_id}"

    raise UnknownOutcome(f"no nominal effect for action {kind}")


def apply_outcome(world: W.WorldState, object_id: str, cmd,
                  outcome_name: str) -> tuple[W.WorldState, str]:
    """Apply a sampled outcome's effects; returns (world, feedback text)."""
    if outcome_name == SUCCESS:
        return _nominal(world, cmd)
    if outcome_name == BROKEN:
        world = W.apply_effect(world, W.MarkBroken(object_id))
        return world, f"{object_id} broke and is unusable"
    if outcome_name == LIQUID_SPILL:
        world = W.apply_effect(world, W.MarkSpilled(object_id))
        return world, f"the liquid in {object_id} spilled"
    if outcome_name == NOTHING_HAPPENS:
        return world, f"nothing happened to {object_id}"
    if outcome_name == PARTIAL_SLICE:
        return world, f"{object_id} was only partially sliced"
    if outcome_name == LOCKED:
        world = W.apply_effect(world, W.SetBlocked(object_id, cmd.kind, LOCKED))
        return world, f"{object_id} is locked"
    if outcome_name == STUCK:
        world = W.apply_effect(world, W.SetBlocked(object_id, cmd.kind, STUCK))
        return world, f"{object_id} is stuck"
    if outcome_name == HALF_OPEN:
        world = W.apply_effect(world, W.SetHalfOpen(object_id, True))
        return world, f"{object_id} is only half open"
    raise UnknownOutcome(outcome_name)
