"""Diagram files (JSON) and DOT output.

A diagram file looks like::

    {
      "shape": "square",
      "backend": {"kind": "set"},
      "objects": {"C": {"size": 3}, ...},
      "morphisms": {"c": {"src": "C", "dst": "A", "table": [0, 0, 1]}, ...}
    }

Objects of an algebra backend are ``{"fixture": "z4"}``, an inline
``{"algebra": {...}}``, or ``{"subproduct": ["L", "R"], "elements": [[x, y],
...]}`` naming two other objects of the same file.  Morphism names are the
role names of the shape (``c, g, d, f, s, t`` for squares, plus ``w, delta,
beta`` for cubes, and so on).  Cube files only need the nine input maps; the
pullback corners are recomputed on load.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from . import fixtures
from .algcore import FiniteAlgebra, SubproductAlgebra, algebra_from_dict, algebra_to_dict
from .diagrams import (
    CUBE_INPUTS,
    CUBOID_ROLES,
    SQUARE_ROLES,
    AlgebraBackend,
    CubeDiagram,
    CuboidDiagram,
    DiagramError,
    Fork,
    Mor,
    SetBackend,
    SquareDiagram,
    diagram_objects,
    make_cube,
    shape_of,
    validate,
)
from .relcore import Carrier, FunctionArrow, PermutexError


class DiagramFormatError(PermutexError, ValueError):
    def __init__(self, msg: str, line: int | None = None, col: int | None = None):
        super().__init__(msg)
        self.line = line
        self.col = col

    def __str__(self):
        if self.line is not None:
            return f"line {self.line}, column {self.col}: {self.args[0]}"
        return self.args[0]


ROLES_BY_SHAPE = {
    "fork": Fork.ROLES,
    "square": SQUARE_ROLES,
    "cube": {k: v for k, v in CubeDiagram.ROLES.items() if k in CUBE_INPUTS},
    "cuboid": CUBOID_ROLES,
}


# ------------------------------------------------------------------ writing

def _object_spec(obj, name_of: dict[int, str]) -> dict:
    if isinstance(obj, Carrier):
        return {"size": obj.size}
    if isinstance(obj, SubproductAlgebra):
        left, right = name_of.get(id(obj.left)), name_of.get(id(obj.right))
        if left is not None and right is not None:
            return {"subproduct": [left, right], "elements": [list(e) for e in obj.elements]}
    name = getattr(obj, "name", "")
    if name in fixtures.ALGEBRAS and fixtures.algebra(name) == obj:
        return {"fixture": name}
    return {"algebra": algebra_to_dict(obj)}


def diagram_to_dict(backend, diagram) -> dict:
    shape = shape_of(diagram)
    roles = ROLES_BY_SHAPE[shape]
    mors = diagram.morphisms()
    objects = diagram_objects(diagram)
    if shape == "cube":
        objects = {k: objects[k] for k in ("C", "A", "D", "B", "W", "Y")}
    used = {r for name in mors if name in roles for r in roles[name]}
    objects = {k: v for k, v in objects.items() if k in used}
    name_of = {id(obj): name for name, obj in objects.items()}
    # a subproduct may only refer to objects defined before it
    out_objects: dict[str, Any] = {}
    for name, obj in objects.items():
        spec = _object_spec(obj, name_of)
        if "subproduct" in spec and any(r not in out_objects for r in spec["subproduct"]):
            spec = _object_spec(obj, {k: v for k, v in name_of.items() if v in out_objects})
        out_objects[name] = spec
    return {
        "shape": shape,
        "backend": backend.describe(),
        "objects": out_objects,
        "morphisms": {
            name: {"src": roles[name][0], "dst": roles[name][1], "table": list(m.table)}
            for name, m in mors.items()
            if name in roles
        },
    }


def render_json(value, depth: int = 0) -> str:
    """JSON with one key per line but flat lists kept on a single line."""
    pad = "  " * (depth + 1)
    if isinstance(value, dict) and value:
        items = [f"{pad}{json.dumps(k)}: {render_json(v, depth + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * depth + "}"
    if isinstance(value, list) and any(isinstance(v, (dict, list)) and v for v in value):
        if all(isinstance(v, list) and not any(isinstance(x, (dict, list)) for x in v) for v in value):
            return json.dumps(value)
        items = [pad + render_json(v, depth + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + "  " * depth + "]"
    return json.dumps(value)


def dumps(backend, diagram) -> str:
    return render_json(diagram_to_dict(backend, diagram)) + "\n"


def save(path: str | Path, backend, diagram) -> None:
    Path(path).write_text(dumps(backend, diagram), encoding="utf-8")


# ------------------------------------------------------------------ reading

def _build_object(name: str, spec: dict, built: dict[str, Any], kind: str):
    if kind == "set":
        if "size" in spec:
            return Carrier(int(spec["size"]))
        if "elements" in spec:
            return Carrier(len(spec["elements"]))
        raise DiagramFormatError(f"object {name!r} needs a size")
    if "fixture" in spec:
        return fixtures.algebra(str(spec["fixture"]))
    if "algebra" in spec:
        return algebra_from_dict(spec["algebra"])
    if "subproduct" in spec:
        left, right = spec["subproduct"]
        if left not in built or right not in built:
            raise DiagramFormatError(f"object {name!r} refers to undefined factors")
        elements = [tuple(int(v) for v in e) for e in spec["elements"]]
        L, R = built[left], built[right]
        for x, y in elements:
            if not (0 <= x < L.size and 0 <= y < R.size):
                raise DiagramFormatError(f"object {name!r}: pair {(x, y)} outside the factors")
        sub = SubproductAlgebra(L, R, elements, name)
        sub.ops  # closure check
        return sub
    raise DiagramFormatError(f"object {name!r}: expected fixture, algebra or subproduct")


def diagram_from_dict(data: dict):
    """Returns ``(backend, diagram)``."""
    try:
        shape = data["shape"]
        kind = data.get("backend", {}).get("kind", "set")
        obj_specs = data["objects"]
        mor_specs = data["morphisms"]
    except (KeyError, TypeError, AttributeError) as exc:
        raise DiagramFormatError(f"missing field {exc}") from None
    if shape not in ROLES_BY_SHAPE:
        raise DiagramFormatError(f"unknown shape {shape!r}")
    if kind not in ("set", "algebra"):
        raise DiagramFormatError(f"unknown backend {kind!r}")

    built: dict[str, Any] = {}
    try:
        for name, spec in obj_specs.items():
            built[name] = _build_object(name, spec, built, kind)
    except PermutexError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise DiagramFormatError(f"malformed object: {exc}") from None

    if kind == "set":
        backend = SetBackend()
    else:
        pool = [o for o in built.values() if isinstance(o, FiniteAlgebra) and not isinstance(o, SubproductAlgebra)]
        if not pool:
            raise DiagramFormatError("an algebra diagram needs at least one plain algebra object")
        backend = AlgebraBackend(pool, label=data.get("backend", {}).get("label", ""))

    roles = ROLES_BY_SHAPE[shape]
    mors: dict[str, Mor] = {}
    for name, spec in mor_specs.items():
        if name not in roles:
            if shape == "cube" and name in CubeDiagram.ROLES:
                continue  # derived maps are recomputed
            raise DiagramFormatError(f"{name!r} is not a role of a {shape}")
        try:
            src, dst = built[spec["src"]], built[spec["dst"]]
            table = tuple(int(v) for v in spec["table"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DiagramFormatError(f"morphism {name!r}: {exc}") from None
        if (spec["src"], spec["dst"]) != roles[name]:
            raise DiagramFormatError(
                f"morphism {name!r} must go {roles[name][0]} -> {roles[name][1]}")
        fn = FunctionArrow(backend.carrier(src), backend.carrier(dst), table)
        mors[name] = Mor(src, dst, fn)
    validate(backend, *mors.values())

    def need(*names):
        missing = [n for n in names if n not in mors]
        if missing:
            raise DiagramFormatError(f"{shape} is missing morphisms {missing}")
        return {n: mors[n] for n in names}

    if shape == "fork":
        return backend, Fork(**need("r1", "r2", "f"))
    if shape == "square":
        return backend, SquareDiagram(**need(*SQUARE_ROLES))
    if shape == "cube":
        m = need(*CUBE_INPUTS)
        front = SquareDiagram(**{k: m[k] for k in SQUARE_ROLES})
        return backend, make_cube(backend, front, m["w"], m["delta"], m["beta"])
    required = [k for k in CUBOID_ROLES if k not in ("tbar", "t", "s", "jbar", "j", "i")]
    m = need(*required)
    m.update({k: mors[k] for k in ("tbar", "t", "s", "jbar", "j", "i") if k in mors})
    return backend, CuboidDiagram(**m)


def loads(text: str):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DiagramFormatError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise DiagramFormatError("top level must be an object")
    return diagram_from_dict(data)


def load(path: str | Path):
    return loads(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------- DOT

def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(backend, diagram, highlight: set[str] | frozenset[str] = frozenset()) -> str:
    shape = shape_of(diagram)
    objects = diagram_objects(diagram)
    mors = diagram.morphisms()
    roles = type(diagram).ROLES
    lines = [f"digraph {_quote(shape)} {{", "  node [shape=plaintext];"]
    for name, obj in objects.items():
        size = backend.carrier(obj).size
        lines.append(f"  {_quote(name)} [label={_quote(f'{name} ({size})')}];")
    for name, m in mors.items():
        src, dst = roles[name]
        style = [f"label={_quote(name)}"]
        if name in highlight:
            style += ["color=red", "fontcolor=red", "penwidth=2"]
        lines.append(f"  {_quote(src)} -> {_quote(dst)} [{', '.join(style)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def is_diagram(obj) -> bool:
    return isinstance(obj, (Fork, SquareDiagram, CubeDiagram, CuboidDiagram))


__all__ = [
    "DiagramFormatError",
    "DiagramError",
    "diagram_to_dict",
    "diagram_from_dict",
    "dumps",
    "loads",
    "load",
    "save",
    "to_dot",
]
