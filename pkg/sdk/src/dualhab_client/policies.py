"""Reference policies over protocol feedback dicts.

These mirror the engine CLI's built-in agents decision-for-decision: given
the same task metadata, feedback, and seed they emit the same command
sequence, so episodes driven through the SDK reproduce CLI episodes.

Tasks are plain dicts as returned by the ``listtasks`` protocol command:
``{"id", "template", "scene", "bindings", "classification", "description"}``.
"""

from __future__ import annotations

import random

# Domain constants from the engine's documented semantics.
SPRING_CONTAINER_TYPES = frozenset({"Fridge", "Microwave"})
COOKING_APPLIANCE_TYPES = frozenset({"StoveKnob", "Microwave", "Toaster"})

OBJECT_ACTIONS = ("Pick", "Open", "Toggle", "Slice", "Cook", "Use", "Lift")


def _objects(feedback):
    return feedback["objects"]


def _robot_cell(feedback):
    return tuple(feedback["robot"]["cell"])


def _held(feedback, side):
    return feedback["robot"]["arms"][side]["held"]


def _adjacent(feedback, object_id):
    ox, oy = _objects(feedback)[object_id]["position"]
    rx, ry = _robot_cell(feedback)
    return abs(ox - rx) + abs(oy - ry) == 1


class RandomPolicy:
    """Uniformly samples syntactically valid commands over scene objects."""

    def __init__(self, seed=0):
        self.rng = random.Random(seed)

    def act(self, task, feedback) -> str:
        ids = sorted(_objects(feedback))
        roll = self.rng.random()
        if roll < 0.3:
            return f"(tp, objectID={self.rng.choice(ids)})"
        if roll < 0.4:
            kind = self.rng.choice(["MoveAhead", "RotateLeft", "RotateRight"])
            return f"({kind} Magnitude=1)"
        action = self.rng.choice(OBJECT_ACTIONS)
        arm = self.rng.choice(["left", "right"])
        target = self.rng.choice(ids)
        if action == "Lift":
            return f"(lift, objectID={target})"
        return f"({action.lower()}, arm={arm}, objectID={target})"


class GreedyPolicy:
    """Template-aware scripted policy (port of the CLI greedy agent)."""

    def __init__(self, seed=0):
        self.rng = random.Random(seed)

    # -- helpers ------------------------------------------------------------

    def _goto(self, feedback, object_id):
        if _adjacent(feedback, object_id):
            return None
        return f"(tp, objectID={object_id})"

    def _free_arm(self, feedback, prefer="left"):
        order = (prefer, "right" if prefer == "left" else "left")
        for side in order:
            arm = feedback["robot"]["arms"][side]
            if arm["held"] is None and arm["holdingOpen"] is None:
                return side
        return None

    def _arm_holding(self, feedback, object_id):
        for side in ("left", "right"):
            if _held(feedback, side) == object_id:
                return side
        return None

    def _flag(self, feedback, object_id, flag):
        return _objects(feedback)[object_id]["flags"].get(flag, False)

    def _nearest(self, feedback, object_types):
        rx, ry = _robot_cell(feedback)
        best = None
        for oid in sorted(_objects(feedback)):
            entry = _objects(feedback)[oid]
            if entry["type"] in object_types and entry["intact"]:
                ox, oy = entry["position"]
                d = abs(ox - rx) + abs(oy - ry)
                if best is None or d < best[0]:
                    best = (d, oid)
        return best[1] if best else None

    def _rebind(self, feedback, object_id):
        entry = _objects(feedback).get(object_id)
        if entry is not None and entry["intact"]:
            return object_id
        if entry is None:
            return None
        return self._nearest(feedback, (entry["type"],))

    # -- subgoal scripts ----------------------------------------------------

    def _pick(self, feedback, object_id):
        if self._arm_holding(feedback, object_id):
            return None
        entry = _objects(feedback)[object_id]
        container = entry["containedIn"]
        if container is not None and not self._flag(feedback, container, "IsOpen"):
            return self._open(feedback, container)
        step = self._goto(feedback, object_id)
        if step:
            return step
        arm = self._free_arm(feedback)
        if arm is None:
            return None
        return f"(pick, arm={arm}, objectID={object_id})"

    def _open(self, feedback, container_id):
        if self._flag(feedback, container_id, "IsOpen"):
            return None
        step = self._goto(feedback, container_id)
        if step:
            return step
        arm = self._free_arm(feedback)
        if arm is None:
            return None
        return f"(open, arm={arm}, objectID={container_id})"

    def _toggle_on(self, feedback, device_id):
        if self._flag(feedback, device_id, "IsToggledOn"):
            return None
        step = self._goto(feedback, device_id)
        if step:
            return step
        arm = self._free_arm(feedback, prefer="right")
        if arm is None:
            return None
        return f"(toggle, arm={arm}, objectID={device_id})"

    def _place_into(self, feedback, object_id, container_id):
        if _objects(feedback)[object_id]["containedIn"] == container_id:
            return None
        ctype = _objects(feedback)[container_id]["type"]
        springs = ctype in SPRING_CONTAINER_TYPES
        if not springs and not self._flag(feedback, container_id, "IsOpen"):
            return self._open(feedback, container_id)
        arm = self._arm_holding(feedback, object_id)
        if arm is None:
            return self._pick(feedback, object_id)
        if not self._flag(feedback, container_id, "IsOpen"):
            step = self._goto(feedback, container_id)
            if step:
                return step
            other = "right" if arm == "left" else "left"
            return f"(open, arm={other}, objectID={container_id})"
        step = self._goto(feedback, container_id)
        if step:
            return step
        return f"(place, arm={arm}, objectID={object_id}, containerID={container_id})"

    # -- policy -------------------------------------------------------------

    def act(self, task, feedback) -> str | None:
        b = {role: self._rebind(feedback, oid)
             for role, oid in sorted(task["bindings"].items())}
        if any(v is None for v in b.values()):
            return "(loadstate)"
        name = task["template"]
        if name == "pick_object":
            return self._pick(feedback, b["target"])
        if name == "toggle_device":
            return self._toggle_on(feedback, b["device"])
        if name == "open_container":
            return self._open(feedback, b["container"])
        if name == "fill_liquid":
            return self._brew(feedback, b["vessel"], b["machine"])
        if name == "use_item":
            return self._use(feedback, b["item"])
        if name == "slice_food":
            return self._slice(feedback, b["food"])
        if name == "cook_food":
            return self._cook(feedback, b["food"])
        if name == "place_different_containers":
            return (self._place_into(feedback, b["first"], b["first_container"])
                    or self._place_into(feedback, b["second"],
                                        b["second_container"]))
        if name == "place_same_container":
            return (self._place_into(feedback, b["first"], b["container"])
                    or self._place_into(feedback, b["second"], b["container"]))
        if name == "open_general_and_stow":
            return self._place_into(feedback, b["target"], b["container"])
        if name == "pick_and_slice":
            if not self._flag(feedback, b["food"], "IsSliced"):
                return self._slice(feedback, b["food"])
            return self._pick(feedback, b["food"])
        if name == "pick_filled":
            return self._pick(feedback, b["item"])
        if name == "affordance_stow":
            return self._place_into(feedback, b["item"], b["container"])
        if name == "lift_object":
            if self._flag(feedback, b["target"], "IsLifted"):
                return None
            return self._goto(feedback, b["target"]) \
                or f"(lift, objectID={b['target']})"
        if name == "hold_fill":
            return self._tap_fill(feedback, b["vessel"], b["faucet"])
        return None

    def _slice(self, feedback, food_id):
        if self._flag(feedback, food_id, "IsSliced"):
            return None
        knife = self._nearest(feedback, ("Knife",))
        if knife is None:
            return None
        arm = self._arm_holding(feedback, knife)
        if arm is None:
            return self._pick(feedback, knife)
        step = self._goto(feedback, food_id)
        if step:
            return step
        return f"(slice, arm={arm}, objectID={food_id})"

    def _cook(self, feedback, food_id):
        if self._flag(feedback, food_id, "IsCooked"):
            return None
        appliance = self._nearest(feedback, COOKING_APPLIANCE_TYPES)
        if appliance is None:
            return None
        if not self._flag(feedback, appliance, "IsToggledOn"):
            return self._toggle_on(feedback, appliance)
        arm = self._arm_holding(feedback, food_id)
        if arm is None:
            return self._pick(feedback, food_id)
        step = self._goto(feedback, appliance)
        if step:
            return step
        other = "right" if arm == "left" else "left"
        return f"(cook, arm={other}, objectID={food_id})"

    def _use(self, feedback, item_id):
        if self._flag(feedback, item_id, "IsUsedUp"):
            return None
        step = self._goto(feedback, item_id)
        if step:
            return step
        arm = self._free_arm(feedback)
        return f"(use, arm={arm}, objectID={item_id})" if arm else None

    def _brew(self, feedback, vessel_id, machine_id):
        if self._flag(feedback, vessel_id, "IsFilled"):
            return None
        if not self._flag(feedback, machine_id, "IsToggledOn"):
            return self._toggle_on(feedback, machine_id)
        arm = self._arm_holding(feedback, vessel_id)
        if arm is None:
            return self._pick(feedback, vessel_id)
        step = self._goto(feedback, machine_id)
        if step:
            return step
        return f"(fill, arm={arm}, objectID={vessel_id})"

    def _tap_fill(self, feedback, vessel_id, faucet_id):
        if self._flag(feedback, vessel_id, "IsFilled"):
            return None
        arm = self._arm_holding(feedback, vessel_id)
        if arm is None:
            return self._pick(feedback, vessel_id)
        step = self._goto(feedback, faucet_id)
        if step:
            return step
        other = "right" if arm == "left" else "left"
        return f"(toggle, arm={other}, objectID={faucet_id})"


def make_policy(name: str, seed: int = 0):
    if name == "random":
        return RandomPolicy(seed)
    if name == "greedy":
        return GreedyPolicy(seed)
    raise ValueError(f"unknown policy {name!r}")
