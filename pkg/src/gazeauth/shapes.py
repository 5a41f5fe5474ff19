"""Identities of the twelve movable shapes."""

SHAPE_IDS = ("a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l")

SHAPE_NAMES = {
    "a": "Circle",
    "b": "Open Hexagon",
    "c": "Triangle",
    "d": "Pie",
    "e": "Rectangle",
    "f": "Eye",
    "g": "Open Rectangle",
    "h": "Ring",
    "i": "Star",
    "j": "Open Pentagon",
    "k": "Pentagon",
    "l": "Hexagon",
}

SHAPE_INDEX = {sid: i for i, sid in enumerate(SHAPE_IDS)}


def is_shape_id(value) -> bool:
    return value in SHAPE_INDEX


def check_shape_id(value) -> str:
    if value not in SHAPE_INDEX:
        raise ValueError(f"unknown shape id: {value!r} (expected one of {','.join(SHAPE_IDS)})")
    return value
