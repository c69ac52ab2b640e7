"""JSON input schemas and loaders."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Tuple

import jsonschema

_NUM = {"type": "number"}
_VEC = {"type": "array", "items": _NUM, "minItems": 1}
_TERMS = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["coeff", "powers"],
        "properties": {"coeff": _NUM, "powers": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
    },
}
_CHART = {
    "type": "object",
    "required": ["lo", "hi"],
    "properties": {"lo": _VEC, "hi": _VEC},
}

POLYTOPE = {
    "type": "object",
    "required": ["dim", "vertices", "halfspaces"],
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "vertices": {"type": "array", "items": _VEC, "minItems": 2},
        "halfspaces": {
            "type": "array",
            "minItems": 2,
            "items": {"type": "object", "required": ["normal", "offset"], "properties": {"normal": _VEC, "offset": _NUM}},
        },
    },
}

GEODESIC_POLYTOPE = {
    "type": "object",
    "required": ["curvature", "dim", "vertices"],
    "properties": {
        "curvature": {"enum": [-1, 0, 1]},
        "dim": {"type": "integer", "minimum": 1, "maximum": 4},
        "vertices": {
            "type": "array",
            "minItems": 2,
            "items": {"type": "object", "required": ["coords"], "properties": {"coords": _VEC, "ideal": {"type": "boolean"}}},
        },
    },
}

REGION = {
    "type": "object",
    "required": ["curvature", "arcs"],
    "properties": {
        "curvature": {"enum": [-1, 0, 1]},
        "arcs": {
            "type": "array",
            "minItems": 1,
            "items": {
                "oneOf": [
                    {
                        "type": "object",
                        "required": ["kind", "from", "to"],
                        "properties": {"kind": {"const": "geodesic"}, "from": _VEC, "to": _VEC},
                    },
                    {
                        "type": "object",
                        "required": ["kind", "center", "radius"],
                        "properties": {
                            "kind": {"const": "parametric"},
                            "shape": {"const": "circle"},
                            "center": _VEC,
                            "radius": {"type": "number", "exclusiveMinimum": 0},
                            "t0": _NUM,
                            "t1": _NUM,
                        },
                    },
                ]
            },
        },
        "corners": {"type": "array", "items": _NUM},
    },
}

CONNECTION = {
    "type": "object",
    "required": ["base_dim", "fiber_rank", "omega"],
    "properties": {
        "base_dim": {"type": "integer", "minimum": 1},
        "fiber_rank": {"type": "integer", "minimum": 2, "multipleOf": 2},
        "signature": {"type": "array", "items": {"enum": [-1, 1]}},
        "omega": {"type": "array", "items": {"type": "array", "items": {"type": "array", "items": _TERMS}}},
        "chart": _CHART,
    },
}

FAMILY = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["angle", "normalized"]},
        "param_dim": {"type": "integer", "minimum": 0, "maximum": 3},
        "theta": _TERMS,
        "components": {"type": "array", "items": _TERMS},
    },
}

TRANSGRESSION = {
    "type": "object",
    "required": ["connection", "family"],
    "properties": {"connection": CONNECTION, "family": FAMILY, "mode": {"enum": ["exact", "fd"]}},
}

MATRICES = {
    "type": "object",
    "required": ["matrices"],
    "properties": {
        "matrices": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["entries"],
                "properties": {
                    "entries": {"type": "array", "items": _VEC},
                    "signature": {"type": "array", "items": {"enum": [-1, 1]}},
                },
            },
        }
    },
}

PF_INPUT = {"oneOf": [MATRICES, CONNECTION]}

SCHEMAS: Dict[str, Dict[str, Any]] = {
    "pf": PF_INPUT,
    "angles": POLYTOPE,
    "gb-const": GEODESIC_POLYTOPE,
    "gb-surface": REGION,
    "transgression": TRANSGRESSION,
}


class InputError(ValueError):
    """Malformed input file (exit code 2 on the command line)."""


def load_input(path: str | Path, kind: str) -> Tuple[Dict[str, Any], str]:
    """Parse and validate ``path`` against the schema for ``kind``; returns ``(data, sha256)``."""
    raw = Path(path).read_bytes()
    digest = hashlib.sha256(raw).hexdigest()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from exc
    validate(data, kind, str(path))
    return data, digest


def validate(data: Any, kind: str, label: str = "input") -> None:
    schema = SCHEMAS[kind]
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        best = jsonschema.exceptions.best_match(errors)
        where = "/".join(str(p) for p in best.absolute_path) or "<root>"
        raise InputError(f"{label}: schema violation at {where}: {best.message}")
