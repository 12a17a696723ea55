"""JSON model file format.

Layout::

    {
      "constants": {"L": 1, "eps0": 0.1, "D": 2, "C0": 2, "eta0": 1, "n_max": 16},
      "surface_complexity": 6,
      "base_component": null,
      "blocks": [
        {"index": 0, "variant": "thin",
         "bottom": {"level": 0, "components": {"P": 4},
                    "boundary_tubes": {"P": {"T0": null}}, "separated": []},
         "top": {...},
         "tubes": [{"id": "T0", "core_length": 0.01, "twist": 3,
                    "left_count": 3, "right_count": 0, "kind": "crossing"}],
         "hanging_tubes": [], "amalgamation_params": [], "region_params": null,
         "links": [{"a": ["bottom", "P"], "b": ["top", "P"], "weight": 2.0}],
         "product": null, "L": 1.0}
      ],
      "hierarchy": {...}          # optional, see endmodels.hierarchy
    }

An attachment value in ``boundary_tubes`` is ``null`` (default position),
an integer ladder position, or ``"core"``.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

from .model import Block, Constants, Link, ModelEnd, SplitSurfaceSpec, Tube


class ModelFormatError(ValueError):
    pass


def tube_to_dict(t: Tube) -> dict:
    d = asdict(t)
    if d["vertical_extent"] is None:
        del d["vertical_extent"]
    return d


def tube_from_dict(d: dict) -> Tube:
    return Tube(
        id=str(d["id"]),
        core_length=float(d["core_length"]),
        twist=int(d.get("twist", 0)),
        left_count=int(d.get("left_count", 0)),
        right_count=int(d.get("right_count", 0)),
        kind=str(d.get("kind", "crossing")),
        vertical_extent=None if d.get("vertical_extent") is None else float(d["vertical_extent"]),
    )


def surface_to_dict(s: SplitSurfaceSpec) -> dict:
    return {
        "level": s.level,
        "components": dict(sorted(s.components.items())),
        "boundary_tubes": {c: dict(sorted(t.items())) for c, t in sorted(s.boundary_tubes.items())},
        "separated": [sorted(p) for p in sorted(tuple(sorted(p)) for p in s.separated)],
    }


def surface_from_dict(d: dict) -> SplitSurfaceSpec:
    return SplitSurfaceSpec(
        level=int(d["level"]),
        components={str(k): int(v) for k, v in d["components"].items()},
        boundary_tubes={str(c): {str(t): a for t, a in tubes.items()}
                        for c, tubes in d.get("boundary_tubes", {}).items()},
        separated=tuple(tuple(p) for p in d.get("separated", [])),
    )


def block_to_dict(b: Block) -> dict:
    return {
        "index": b.index,
        "variant": b.variant,
        "L": b.L,
        "bottom": surface_to_dict(b.bottom),
        "top": surface_to_dict(b.top),
        "tubes": [tube_to_dict(t) for t in b.tubes],
        "hanging_tubes": [tube_to_dict(t) for t in b.hanging_tubes],
        "amalgamation_params": [list(p) for p in b.amalgamation_params],
        "region_params": None if b.region_params is None else list(b.region_params),
        "links": [{"a": list(k.a), "b": list(k.b), "weight": k.weight} for k in b.links],
        "product": None if b.product is None else list(b.product),
    }


def block_from_dict(d: dict) -> Block:
    rp = d.get("region_params")
    prod = d.get("product")
    return Block(
        index=int(d["index"]),
        variant=str(d["variant"]),
        L=float(d.get("L", 1.0)),
        bottom=surface_from_dict(d["bottom"]),
        top=surface_from_dict(d["top"]),
        tubes=tuple(tube_from_dict(t) for t in d.get("tubes", [])),
        hanging_tubes=tuple(tube_from_dict(t) for t in d.get("hanging_tubes", [])),
        amalgamation_params=tuple(tuple(int(x) for x in p) for p in d.get("amalgamation_params", [])),
        region_params=None if rp is None else tuple(int(x) for x in rp),
        links=tuple(Link(tuple(k["a"]), tuple(k["b"]), float(k["weight"])) for k in d.get("links", [])),
        product=None if prod is None else tuple(prod),
    )


def model_to_dict(m: ModelEnd) -> dict:
    return {
        "constants": asdict(m.constants),
        "surface_complexity": m.surface_complexity,
        "base_component": m.base_component,
        "blocks": [block_to_dict(b) for b in m.blocks],
    }


def model_from_dict(d: dict) -> ModelEnd:
    if not isinstance(d, dict):
        raise ModelFormatError("model document must be a JSON object")
    try:
        consts = d.get("constants", {})
        return ModelEnd(
            blocks=tuple(block_from_dict(b) for b in d.get("blocks", [])),
            surface_complexity=int(d.get("surface_complexity", 6)),
            constants=Constants(
                L=float(consts.get("L", 1.0)),
                eps0=float(consts.get("eps0", 0.1)),
                D=float(consts.get("D", 2.0)),
                C0=float(consts.get("C0", 2.0)),
                eta0=float(consts.get("eta0", 1.0)),
                n_max=int(consts.get("n_max", 16)),
            ),
            base_component=d.get("base_component"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model document: {exc!r}") from exc


def dumps(model: ModelEnd, hierarchy=None) -> str:
    doc = model_to_dict(model)
    if hierarchy is not None:
        from .hierarchy import hierarchy_to_dict
        doc["hierarchy"] = hierarchy_to_dict(hierarchy)
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def loads(text: str):
    """Parse a model document; returns ``(model, hierarchy_or_None)``."""
    if not text.strip():
        return ModelEnd(blocks=()), None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"not valid JSON: {exc}") from exc
    model = model_from_dict(doc)
    hier = None
    if isinstance(doc, dict) and doc.get("hierarchy") is not None:
        from .hierarchy import hierarchy_from_dict
        hier = hierarchy_from_dict(doc["hierarchy"])
    return model, hier


def save(path, model: ModelEnd, hierarchy=None) -> None:
    Path(path).write_text(dumps(model, hierarchy), encoding="utf-8")


def load(path):
    return loads(Path(path).read_text(encoding="utf-8"))
