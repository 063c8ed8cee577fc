#!/usr/bin/env python3
"""Generate the shipped scene pack and the benchmark task manifest.

Deterministic: running it twice produces byte-identical JSON. Scenes place
all objects on non-corner perimeter cells of the grid so every object keeps
a free interior cell for teleport approaches.
"""

from __future__ import annotations

import json
from collections import deque
import sys
from pathlib import Path

SRC = Path(__file__).resolve().parent.parent / "src"
sys.path.insert(0, str(SRC))

from dualhab import tasks, world  # noqa: E402

DATA = SRC / "dualhab" / "data"
SCENES = DATA / "scenes"

KITCHEN_FOODS = ["Apple", "Bread", "Tomato", "Lettuce", "Onion", "Orange",
                 "Pizza", "Egg"]


def perimeter_cells(w, h):
    cells = []
    for x in range(1, w - 1):
        cells.append((x, 0))
    for y in range(1, h - 1):
        cells.append((w - 1, y))
    for x in range(w - 2, 0, -1):
        cells.append((x, h - 1))
    for y in range(h - 2, 0, -1):
        cells.append((0, y))
    return cells


def build_scene(scene_id, room_kind, size, types, offset=0):
    """``types`` entries are either a type name or (type, initial_flags)."""
    w = h = size
    cells = perimeter_cells(w, h)
    if len(types) > len(cells):
        raise SystemExit(f"{scene_id}: {len(types)} objects > {len(cells)} cells")
    counts = {}
    objects = []
    for i, entry in enumerate(types):
        otype, flags = entry if isinstance(entry, tuple) else (entry, None)
        counts[otype] = counts.get(otype, 0) + 1
        x, y = cells[(i + offset) % len(cells)]
        spec = {
            "id": f"{room_kind}_{otype}_{counts[otype]:02d}",
            "type": otype, "x": x, "y": y, "band": "counter",
        }
        if flags:
            spec["flags"] = flags
        objects.append(spec)
    return {
        "schema_version": 1,
        "scene_id": scene_id,
        "room_kind": room_kind,
        "grid": {"w": w, "h": h},
        "robot_start": {"x": w // 2, "y": h // 2, "heading": "N"},
        "objects": objects,
    }


FILLED = {"IsFilled": True}


def kitchen(i):
    foods = [KITCHEN_FOODS[(i + j) % len(KITCHEN_FOODS)] for j in range(5)]
    types = (["Cabinet", "Cabinet", "Drawer", "Fridge", "Microwave",
              "CoffeeMachine", "CoffeeMachine", "Toaster", "Toaster",
              "StoveKnob", "Faucet", "Knife"]
             + foods
             + ["Mug", "Cup", "Bowl", ("Bottle", FILLED),
                ("WineBottle", FILLED), ("Pot", FILLED),
                "Fork", "Plate", "SaltShaker"])
    return build_scene(f"kitchen_{i:02d}", "Kitchen", 9, types, offset=i)


def bathroom(i):
    types = ["Faucet", "Faucet", "SoapBottle", "SoapBottle", "SoapBottle",
             "SoapBottle", "SoapBottle", "SoapBar", "Towel", "Plunger",
             "ToiletPaper", "Window"]
    return build_scene(f"bathroom_{i:02d}", "Bathroom", 6, types, offset=i)


def livingroom(i):
    types = ["Television", "Television", "Television", "Television",
             "DeskLamp", "LightSwitch", "Laptop", "Candle", "RemoteControl",
             "Book", "Pillow", "Plant", "Pen", "Picture", "Window"]
    return build_scene(f"livingroom_{i:02d}", "LivingRoom", 7, types, offset=i)


def bedroom(i):
    types = ["AlarmClock", "Watch", "BaseballBat", "Pillow", "Pen", "Pencil",
             "Picture", "LightSwitch", "DeskLamp", "Cabinet", "Window"]
    return build_scene(f"bedroom_{i:02d}", "Bedroom", 7, types, offset=i)


def minis():
    yield build_scene("kitchen_small", "Kitchen", 5,
                      ["Cabinet", "Apple", "Knife", "Mug", "CoffeeMachine",
                       "Toaster", "Faucet"])
    # Miniature scenes for exhaustive single-arm search checks.  The toaster
    # and the apple sit on diagonally adjacent perimeter cells (across the
    # grid corner) so one interior cell has both in reach, which keeps
    # cooking achievable with a single free arm.
    yield build_scene("mini_pantry", "Kitchen", 5,
                      ["Cabinet", "Drawer", "Knife", ("Bottle", FILLED),
                       "CoffeeMachine", "Toaster", "Apple", "Fork", "Mug"])
    yield build_scene("mini_tap", "Kitchen", 5, ["Faucet", "Mug"])
    yield build_scene("mini_cold", "Kitchen", 5,
                      ["Microwave", "Apple", "Fridge"], offset=2)


def all_scenes():
    for i in range(12):
        yield kitchen(i)
    for i in range(4):
        yield bathroom(i)
    for i in range(4):
        yield livingroom(i)
    for i in range(2):
        yield bedroom(i)
    yield from minis()


def build_manifest(scene_docs):
    """Round-robin binding selection across scenes until each quota is met."""
    pack = {doc["scene_id"]: world.load_scene(doc) for doc in scene_docs
            if not doc["scene_id"].startswith(("mini_", "kitchen_small"))}
    entries = []
    for name, template in sorted(tasks.TEMPLATES.items()):
        quota = tasks.QUOTAS[name]
        iterators = {sid: iter(tasks.enumerate_bindings(template, pack[sid]))
                     for sid in sorted(pack)}
        queue = deque(sorted(iterators))
        chosen = []
        while queue and len(chosen) < quota:
            scene_id = queue.popleft()
            binding = next(iterators[scene_id], None)
            if binding is None:
                continue
            chosen.append((scene_id, binding))
            queue.append(scene_id)
        if len(chosen) < quota:
            raise SystemExit(
                f"template {name}: only {len(chosen)} bindings for quota {quota}")
        for idx, (scene_id, binding) in enumerate(chosen):
            entries.append({
                "id": f"{name}_{idx:03d}",
                "template": name,
                "scene": scene_id,
                "bindings": binding,
            })
    return {"schema_version": 1, "tasks": entries}


def main():
    SCENES.mkdir(parents=True, exist_ok=True)
    docs = list(all_scenes())
    for doc in docs:
        world.parse_scene(doc)  # fail fast on schema/placement mistakes
        path = SCENES / f"{doc['scene_id']}.json"
        path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    manifest = build_manifest(docs)
    (DATA / "tasks.json").write_text(
        json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    print(f"wrote {len(docs)} scenes, {len(manifest['tasks'])} task instances")


if __name__ == "__main__":
    main()
