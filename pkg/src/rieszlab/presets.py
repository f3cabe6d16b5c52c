"""Built-in named set definitions for the flagship experiments."""

from __future__ import annotations


def _four_corner_ifs() -> dict:
    # Four quarter-scale maps pushing toward the corners of the unit square;
    # the attractor has similarity dimension 1.
    return {
        "type": "ifs",
        "maps": [
            {"scale": 0.25, "translation": [0.0, 0.0]},
            {"scale": 0.25, "translation": [0.75, 0.0]},
            {"scale": 0.25, "translation": [0.0, 0.75]},
            {"scale": 0.25, "translation": [0.75, 0.75]},
        ],
    }


def _unit_segment_offset() -> dict:
    return {"type": "segment", "a": [3.0, 0.0], "b": [4.0, 0.0]}


def _example_union() -> dict:
    return {"type": "union", "A1": _four_corner_ifs(), "A2": _unit_segment_offset()}


PRESETS = {
    "example-union": _example_union,
    "example-fractal": _four_corner_ifs,
    "example-segment": _unit_segment_offset,
}


def preset_dict(name: str) -> dict:
    """Set definition for a named preset; raises KeyError for unknown names."""
    try:
        return PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {sorted(PRESETS)}") from None
