"""Benchmark task suite: templates, bindings, goal evaluation.

A *template* is a parameterized goal (e.g. "slice <food> and place it into
<container>") with typed binding slots and a dual-arm classification:

- ``single_arm``: solvable with either arm on its own;
- ``dual_arm_optional``: solvable one-armed, but two arms help;
- ``dual_arm_essential``: unsolvable without coordinated use of both arms
  (two-handed lifts, filling a held vessel at a momentary tap, loading a
  spring-shut container).

An *instance* binds a template's slots to concrete objects in a concrete
scene. The shipped manifest pins the full instance set; goal evaluation
re-binds broken objects at the type level, so destroying the bound apple does
not make "slice an apple" unachievable while another apple exists.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from . import catalog
from . import world as W
from .errors import UnknownEntity

SINGLE_ARM = "single_arm"
DUAL_OPTIONAL = "dual_arm_optional"
DUAL_ESSENTIAL = "dual_arm_essential"

_NON_MOMENTARY_TOGGLE = tuple(sorted(
    t for t, row in catalog.CATALOG.items()
    if catalog.TOGGLEABLE in row.actionable
    and t not in catalog.MOMENTARY_SOURCE_TYPES))
_OPENABLE_FIXTURES = ("Cabinet", "Curtains", "Drawer", "Window")
_MOVABLE = tuple(sorted(
    t for t, row in catalog.CATALOG.items() if catalog.MOVABLE in row.actionable))


def _types(predicate) -> tuple:
    return tuple(sorted(t for t in catalog.CATALOG if predicate(t)))


_PICKUPABLE = _types(lambda t: catalog.PICKUPABLE in catalog.CATALOG[t].actionable)
_SLICEABLE = _types(lambda t: catalog.SLICEABLE in catalog.CATALOG[t].actionable)
_COOKABLE_ITEMS = _types(
    lambda t: catalog.cookable(t) and catalog.PICKUPABLE in catalog.CATALOG[t].actionable)
_VESSELS = _types(
    lambda t: catalog.fillable(t) and catalog.PICKUPABLE in catalog.CATALOG[t].actionable)
_CONSUMABLE = _types(catalog.consumable)


@dataclass(frozen=True)
class Slot:
    role: str
    types: tuple


@dataclass(frozen=True)
class TaskTemplate:
    name: str
    classification: str
    description: str
    slots: tuple  # Slot, ...

    def goal(self, world: W.WorldState, binding: dict) -> bool:
        return _GOALS[self.name](world, binding)


def _contained(world, oid, cid):
    return world.obj(oid).contained_in == cid


_GENERAL = tuple(sorted(catalog.GENERAL_CONTAINER_TYPES))
_SPRINGS = tuple(sorted(catalog.AFFORDANCE_CONTAINER_TYPES))
_SLICE_ITEMS = tuple(sorted(set(_SLICEABLE) & set(_PICKUPABLE)))

_GOALS = {
    "pick_object": lambda w, b: w.obj(b["target"]).flag(catalog.IS_PICKED_UP),
    "toggle_device": lambda w, b: w.obj(b["device"]).flag(catalog.IS_TOGGLED_ON),
    "open_container": lambda w, b: w.obj(b["container"]).flag(catalog.IS_OPEN),
    "fill_liquid": lambda w, b: w.obj(b["vessel"]).flag(catalog.IS_FILLED),
    "use_item": lambda w, b: w.obj(b["item"]).flag(catalog.IS_USED_UP),
    "slice_food": lambda w, b: w.obj(b["food"]).flag(catalog.IS_SLICED),
    "cook_food": lambda w, b: w.obj(b["food"]).flag(catalog.IS_COOKED),
    "place_different_containers": lambda w, b: (
        _contained(w, b["first"], b["first_container"])
        and _contained(w, b["second"], b["second_container"])),
    "place_same_container": lambda w, b: (
        _contained(w, b["first"], b["container"])
        and _contained(w, b["second"], b["container"])),
    "open_general_and_stow": lambda w, b: (
        w.obj(b["container"]).flag(catalog.IS_OPEN)
        and _contained(w, b["target"], b["container"])),
    "pick_and_slice": lambda w, b: (
        w.obj(b["food"]).flag(catalog.IS_SLICED)
        and w.obj(b["food"]).flag(catalog.IS_PICKED_UP)),
    "pick_filled": lambda w, b: (
        w.obj(b["item"]).flag(catalog.IS_PICKED_UP)
        and w.obj(b["item"]).flag(catalog.IS_FILLED)),
    "affordance_stow": lambda w, b: _contained(w, b["item"], b["container"]),
    "lift_object": lambda w, b: w.obj(b["target"]).flag(catalog.IS_LIFTED),
    "hold_fill": lambda w, b: w.obj(b["vessel"]).flag(catalog.IS_FILLED),
}

TEMPLATES: dict[str, TaskTemplate] = {t.name: t for t in (
    TaskTemplate(
        "pick_object", SINGLE_ARM,
        "Pick up the target object.",
        (Slot("target", _PICKUPABLE),)),
    TaskTemplate(
        "toggle_device", SINGLE_ARM,
        "Switch the device on.",
        (Slot("device", _NON_MOMENTARY_TOGGLE),)),
    TaskTemplate(
        "open_container", SINGLE_ARM,
        "Open the fixture.",
        (Slot("container", _OPENABLE_FIXTURES),)),
    TaskTemplate(
        "fill_liquid", SINGLE_ARM,
        "Fill the vessel at the running brewing machine.",
        (Slot("vessel", _VESSELS),
         Slot("machine", tuple(sorted(catalog.LATCHING_SOURCE_TYPES))))),
    TaskTemplate(
        "use_item", SINGLE_ARM,
        "Use the consumable until it is used up.",
        (Slot("item", _CONSUMABLE),)),
    TaskTemplate(
        "slice_food", SINGLE_ARM,
        "Slice the food item with a knife.",
        (Slot("food", _SLICEABLE),)),
    TaskTemplate(
        "cook_food", SINGLE_ARM,
        "Cook the food item on a running appliance.",
        (Slot("food", _COOKABLE_ITEMS),)),
    TaskTemplate(
        "place_different_containers", DUAL_OPTIONAL,
        "Put each object into its own storage container.",
        (Slot("first", _PICKUPABLE), Slot("second", _PICKUPABLE),
         Slot("first_container", _GENERAL), Slot("second_container", _GENERAL))),
    TaskTemplate(
        "place_same_container", DUAL_OPTIONAL,
        "Put both objects into the same storage container.",
        (Slot("first", _PICKUPABLE), Slot("second", _PICKUPABLE),
         Slot("container", _GENERAL))),
    TaskTemplate(
        "open_general_and_stow", DUAL_OPTIONAL,
        "Open the storage container and put the object inside.",
        (Slot("target", _PICKUPABLE), Slot("container", _GENERAL))),
    TaskTemplate(
        "pick_and_slice", DUAL_OPTIONAL,
        "Slice the food and end up holding it.",
        (Slot("food", _SLICE_ITEMS),)),
    TaskTemplate(
        "pick_filled", DUAL_OPTIONAL,
        "Pick up the liquid-filled vessel without spilling it.",
        (Slot("item", _VESSELS),)),
    TaskTemplate(
        "affordance_stow", DUAL_ESSENTIAL,
        "Put the item into the spring-shut container while holding it open.",
        (Slot("item", _PICKUPABLE), Slot("container", _SPRINGS))),
    TaskTemplate(
        "lift_object", DUAL_ESSENTIAL,
        "Lift the heavy appliance with both arms.",
        (Slot("target", _MOVABLE),)),
    TaskTemplate(
        "hold_fill", DUAL_ESSENTIAL,
        "Fill the vessel under the tap: one arm holds, the other operates it.",
        (Slot("vessel", _VESSELS),
         Slot("faucet", tuple(sorted(catalog.MOMENTARY_SOURCE_TYPES))))),
)}

# Required number of instances per template in the shipped manifest.
QUOTAS = {
    "pick_object": 20, "toggle_device": 12, "open_container": 12,
    "fill_liquid": 6, "use_item": 4, "slice_food": 2, "cook_food": 2,
    "place_different_containers": 63, "place_same_container": 27,
    "open_general_and_stow": 19, "pick_and_slice": 15, "pick_filled": 9,
    "affordance_stow": 97, "lift_object": 39, "hold_fill": 32,
}

CLASSIFICATION_TOTALS = {SINGLE_ARM: 58, DUAL_OPTIONAL: 133, DUAL_ESSENTIAL: 168}


@dataclass(frozen=True)
class TaskInstance:
    task_id: str
    template: str
    scene: str
    bindings: tuple  # ((role, object_id), ...)

    @property
    def classification(self) -> str:
        return TEMPLATES[self.template].classification

    @property
    def binding_map(self) -> dict:
        return dict(self.bindings)

    def evaluate(self, world: W.WorldState) -> bool:
        """Goal test with type-level re-binding of broken bound objects."""
        template = TEMPLATES[self.template]
        pools = []
        for role, oid in self.bindings:
            obj = world.objects.get(oid)
            if obj is not None and obj.intact:
                pools.append((role, (oid,)))
            else:
                wanted = obj.object_type if obj is not None else None
                alts = tuple(
                    o for o in sorted(world.objects)
                    if world.objects[o].intact
                    and (world.objects[o].object_type == wanted
                         or (wanted is None
                             and world.objects[o].object_type
                             in dict(template_slots(template))[role])))
                pools.append((role, alts or (oid,)))
        roles = [r for r, _ in pools]
        for combo in itertools.product(*(ids for _, ids in pools)):
            binding = dict(zip(roles, combo))
            try:
                if template.goal(world, binding):
                    return True
            except UnknownEntity:
                continue
        return False

    def to_dict(self) -> dict:
        return {"id": self.task_id, "template": self.template,
                "scene": self.scene, "bindings": dict(self.bindings),
                "classification": self.classification,
                "description": TEMPLATES[self.template].description}


def template_slots(template: TaskTemplate) -> tuple:
    return tuple((slot.role, slot.types) for slot in template.slots)


# ---------------------------------------------------------------------------
# Binding enumeration (used by the scene-pack generator and tests)


def enumerate_bindings(template: TaskTemplate, world: W.WorldState):
    """Yield deterministic candidate bindings for a template in a scene.

    Enforces the template's side conditions: a knife for slicing, a cooking
    appliance for cooking, a latching source for machine fills, and — for the
    tap-fill template — the *absence* of any latching source in the scene, so
    the instance stays two-arm essential.
    """
    kinds = {world.objects[o].object_type for o in world.objects}
    name = template.name
    if name == "slice_food" and "Knife" not in kinds:
        return
    if name == "pick_and_slice" and not (
            "Knife" in kinds and kinds & catalog.GENERAL_CONTAINER_TYPES):
        # A storage container is what lets a lone arm park the knife, which
        # keeps this template optional rather than essential.
        return
    if name == "cook_food" and not kinds & catalog.COOKING_APPLIANCE_TYPES:
        return
    if name == "hold_fill" and kinds & catalog.LATCHING_SOURCE_TYPES:
        return

    pools = []
    for slot in template.slots:
        ids = []
        for oid in sorted(world.objects):
            obj = world.objects[oid]
            if obj.object_type not in slot.types:
                continue
            filled = obj.flag(catalog.IS_FILLED)
            if name == "pick_filled" and not filled:
                continue
            if name in ("fill_liquid", "hold_fill") \
                    and slot.role == "vessel" and filled:
                continue
            ids.append(oid)
        pools.append(ids)
    for combo in itertools.product(*pools):
        if len(set(combo)) != len(combo):
            continue
        binding = dict(zip((s.role for s in template.slots), combo))
        if name in ("place_same_container", "place_different_containers") \
                and binding["first"] >= binding["second"]:
            continue  # unordered object pair: keep one orientation
        yield binding


# ---------------------------------------------------------------------------
# Manifest


@lru_cache(maxsize=1)
def manifest() -> dict:
    """task_id -> TaskInstance for the shipped benchmark suite."""
    raw = json.loads(
        (resources.files("dualhab.data") / "tasks.json").read_text())
    out = {}
    for entry in raw["tasks"]:
        inst = TaskInstance(
            task_id=entry["id"], template=entry["template"],
            scene=entry["scene"],
            bindings=tuple(sorted(entry["bindings"].items())))
        out[inst.task_id] = inst
    return out


def get_instance(task_id: str) -> TaskInstance:
    try:
        return manifest()[task_id]
    except KeyError:
        raise UnknownEntity(f"unknown task {task_id!r}") from None


def list_tasks() -> list[dict]:
    return [inst.to_dict() for _, inst in sorted(manifest().items())]


def counts_by_template() -> dict:
    counts = {}
    for inst in manifest().values():
        counts[inst.template] = counts.get(inst.template, 0) + 1
    return counts


def counts_by_classification() -> dict:
    counts = {}
    for inst in manifest().values():
        counts[inst.classification] = counts.get(inst.classification, 0) + 1
    return counts
