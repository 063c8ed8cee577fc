"""Object-type catalog: actionable properties, licensed state flags, rooms.

Each type licenses a fixed set of boolean state flags; an object instance may
never carry a flag its type does not license.
"""

from __future__ import annotations

from dataclasses import dataclass

PICKUPABLE = "Pickupable"
SLICEABLE = "Sliceable"
OPENABLE = "Openable"
TOGGLEABLE = "Toggleable"
MOVABLE = "Movable"
FILLABLE = "Fillable"

# State flags
IS_PICKED_UP = "IsPickedUp"
IS_SLICED = "IsSliced"
IS_COOKED = "IsCooked"
IS_OPEN = "IsOpen"
IS_FILLED = "IsFilled"
IS_TOGGLED_ON = "IsToggledOn"
IS_LIFTED = "IsLifted"
IS_USED_UP = "IsUsedUp"

ALL_FLAGS = (
    IS_PICKED_UP,
    IS_SLICED,
    IS_COOKED,
    IS_OPEN,
    IS_FILLED,
    IS_TOGGLED_ON,
    IS_LIFTED,
    IS_USED_UP,
)

ROOM_KINDS = ("Kitchen", "Bedroom", "LivingRoom", "Bathroom", "Mixed")


@dataclass(frozen=True)
class CatalogRow:
    actionable: frozenset
    flags: frozenset
    rooms: tuple


def _row(actionable, flags, rooms):
    return CatalogRow(frozenset(actionable), frozenset(flags), tuple(rooms))


_K, _B, _L, _BA = "Kitchen", "Bedroom", "LivingRoom", "Bathroom"
_ALL = (_K, _B, _L, _BA)

CATALOG: dict[str, CatalogRow] = {
    "AlarmClock": _row({PICKUPABLE}, {IS_PICKED_UP}, (_B,)),
    "Apple": _row({PICKUPABLE, SLICEABLE}, {IS_PICKED_UP, IS_SLICED}, (_K,)),
    "BaseballBat": _row({PICKUPABLE}, {IS_PICKED_UP}, (_B,)),
    "Book": _row({PICKUPABLE, OPENABLE}, {IS_PICKED_UP, IS_OPEN}, (_L,)),
    "Bottle": _row({PICKUPABLE}, {IS_PICKED_UP, IS_FILLED}, (_K,)),
    "Bowl": _row({PICKUPABLE}, {IS_PICKED_UP, IS_FILLED}, (_K,)),
    "Bread": _row({PICKUPABLE, SLICEABLE}, {IS_PICKED_UP, IS_SLICED, IS_COOKED}, (_K,)),
    "Cabinet": _row({OPENABLE}, {IS_OPEN}, (_K, _B)),
    "Candle": _row({PICKUPABLE, TOGGLEABLE}, {IS_PICKED_UP, IS_TOGGLED_ON}, (_L,)),
    "Coat": _row({PICKUPABLE}, {IS_PICKED_UP}, (_L,)),
    "CoffeeMachine": _row({TOGGLEABLE, MOVABLE}, {IS_TOGGLED_ON, IS_LIFTED}, (_K,)),
    "Cup": _row({PICKUPABLE}, {IS_PICKED_UP, IS_FILLED}, (_K,)),
    "Curtains": _row({OPENABLE}, {IS_OPEN}, (_K,)),
    "DeskLamp": _row({TOGGLEABLE}, {IS_TOGGLED_ON}, (_B, _L)),
    "Drawer": _row({OPENABLE}, {IS_OPEN}, (_K,)),
    "Egg": _row({PICKUPABLE}, {IS_PICKED_UP, IS_COOKED}, (_K,)),
    "Faucet": _row({TOGGLEABLE}, {IS_TOGGLED_ON}, (_K, _BA)),
    "Fork": _row({PICKUPABLE}, {IS_PICKED_UP}, (_K,)),
    "Fridge": _row({OPENABLE}, {IS_OPEN}, (_K,)),
    "Knife": _row({PICKUPABLE}, {IS_PICKED_UP}, (_K,)),
    "Laptop": _row({PICKUPABLE, TOGGLEABLE}, {IS_PICKED_UP, IS_TOGGLED_ON}, (_L,)),
    "Lettuce": _row({PICKUPABLE, SLICEABLE}, {IS_PICKED_UP, IS_SLICED}, (_K,)),
    "LightSwitch": _row({TOGGLEABLE}, {IS_TOGGLED_ON}, (_B, _L)),
    "Microwave": _row({OPENABLE, TOGGLEABLE}, {IS_OPEN, IS_TOGGLED_ON}, (_K,)),
    "Mug": _row({PICKUPABLE, FILLABLE}, {IS_PICKED_UP, IS_FILLED}, (_K,)),
    "Onion": _row({PICKUPABLE, SLICEABLE}, {IS_PICKED_UP, IS_SLICED}, (_K,)),
    "Orange": _row({PICKUPABLE, SLICEABLE}, {IS_PICKED_UP, IS_SLICED}, (_K,)),
    "Pan": _row({PICKUPABLE}, {IS_PICKED_UP}, (_K,)),
    "Pant": _row({PICKUPABLE}, {IS_PICKED_UP}, (_L,)),
    "Pen": _row({PICKUPABLE}, {IS_PICKED_UP}, (_L, _B)),
    "Pencil": _row({PICKUPABLE}, {IS_PICKED_UP}, (_L, _B)),
    "PepperShaker": _row({PICKUPABLE}, {IS_PICKED_UP}, (_K,)),
    "Picture": _row({PICKUPABLE}, {IS_PICKED_UP}, (_L, _B)),
    "Pillow": _row({PICKUPABLE}, {IS_PICKED_UP}, (_B, _L)),
    "Pizza": _row({PICKUPABLE, SLICEABLE}, {IS_PICKED_UP, IS_SLICED}, (_K,)),
    "Plant": _row({PICKUPABLE}, {IS_PICKED_UP}, _ALL),
    "Plate": _row({PICKUPABLE}, {IS_PICKED_UP}, (_K,)),
    "Plunger": _row({PICKUPABLE}, {IS_PICKED_UP}, (_BA,)),
    "Pot": _row({PICKUPABLE}, {IS_PICKED_UP, IS_FILLED}, (_K,)),
    "RemoteControl": _row({PICKUPABLE}, {IS_PICKED_UP}, (_L,)),
    "SaltShaker": _row({PICKUPABLE}, {IS_PICKED_UP}, (_K,)),
    "SoapBar": _row({PICKUPABLE}, {IS_PICKED_UP}, (_BA,)),
    "SoapBottle": _row({PICKUPABLE}, {IS_PICKED_UP, IS_FILLED}, (_BA, _K)),
    "Shirt": _row({PICKUPABLE}, {IS_PICKED_UP}, (_L,)),
    "StoveKnob": _row({TOGGLEABLE}, {IS_TOGGLED_ON}, (_K,)),
    "Television": _row({TOGGLEABLE, MOVABLE}, {IS_TOGGLED_ON, IS_LIFTED}, (_L,)),
    "Toaster": _row({TOGGLEABLE, MOVABLE}, {IS_TOGGLED_ON, IS_LIFTED}, (_K,)),
    "ToiletPaper": _row({PICKUPABLE}, {IS_PICKED_UP, IS_USED_UP}, (_BA,)),
    "Tomato": _row({PICKUPABLE, SLICEABLE}, {IS_PICKED_UP, IS_SLICED, IS_COOKED}, (_K,)),
    "Towel": _row({PICKUPABLE}, {IS_PICKED_UP}, (_BA,)),
    "Watch": _row({PICKUPABLE}, {IS_PICKED_UP}, (_B,)),
    "WineBottle": _row({PICKUPABLE}, {IS_PICKED_UP, IS_FILLED}, (_K,)),
    "Window": _row({OPENABLE}, {IS_OPEN}, _ALL),
}

# Containers whose lid/door springs shut unless an arm keeps it open.
AFFORDANCE_CONTAINER_TYPES = frozenset({"Fridge", "Microwave"})

# Openable containers an object can be placed into.
GENERAL_CONTAINER_TYPES = frozenset({"Cabinet", "Drawer"})
CONTAINER_TYPES = GENERAL_CONTAINER_TYPES | AFFORDANCE_CONTAINER_TYPES | {"CoffeeMachine"}

# Liquid sources: momentary ones run only for the step they are toggled on;
# latching ones stay on and fill whatever sits at (or is placed at) their cell.
MOMENTARY_SOURCE_TYPES = frozenset({"Faucet"})
LATCHING_SOURCE_TYPES = frozenset({"CoffeeMachine"})
SOURCE_TYPES = MOMENTARY_SOURCE_TYPES | LATCHING_SOURCE_TYPES

COOKING_APPLIANCE_TYPES = frozenset({"StoveKnob", "Microwave", "Toaster"})


def licenses_flag(object_type: str, flag: str) -> bool:
    return flag in CATALOG[object_type].flags


def fillable(object_type: str) -> bool:
    """Fill targets anything that can carry liquid, not just Fillable-tagged types."""
    row = CATALOG[object_type]
    return FILLABLE in row.actionable or IS_FILLED in row.flags


def cookable(object_type: str) -> bool:
    return IS_COOKED in CATALOG[object_type].flags


def consumable(object_type: str) -> bool:
    return IS_USED_UP in CATALOG[object_type].flags
