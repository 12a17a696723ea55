"""Generators for the example families of model ends.

Each family is a parameterized :class:`~endmodels.model.ModelEnd`:

``bounded``
    ``n_blocks`` thick blocks, no tubes.
``flute``
    Surface pieces alternating with necks; neck ``n`` is a tube of core
    length ``1/n`` that every upward path must cross through its core.
``ibounded``
    Thick and thin blocks alternating; thin block ``i`` holds one tube with
    twist and boundary count ``twists[i]``.
``amalg``
    Amalgamated blocks; block ``i`` carries a list ``[(m_j, n_j), ...]``.  Its
    tube has ``Σ(m_j + n_j)`` abutting Minsky blocks on each side and the
    amalgamation components are crossed by a path of length ``Σ(m_j + 1)``.
``split``
    Split blocks ``B_i`` with parameters ``(l_i, m_i, n_i)``: a crossing tube
    ``T_i`` (short side 1, long side ``n_i``), a lower hanging tube ``H_i``
    separating ``A_{i-1}`` from ``A_i`` with ``l_i + m_{i-1}`` blocks on
    each side, a unit product region through ``A_i``, and a thick detour
    around ``H_i`` as long as its side.
``thin_all``
    One block per ``j``; crossing thickly costs ``k d`` while a tube of
    boundary length ``k`` offers a logarithmic shortcut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import (
    AMALGAMATED, HANGING_LOWER, SPLIT, THICK, THIN,
    Block, Constants, Link, ModelEnd, SplitSurfaceSpec, Tube,
)

FAMILIES = ("bounded", "flute", "ibounded", "amalg", "split", "thin_all")


class FamilyError(ValueError):
    pass


@dataclass(frozen=True)
class FamilyParams:
    family: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    constants: Constants = Constants()


def build(fp: FamilyParams) -> ModelEnd:
    if fp.family not in _BUILDERS:
        raise FamilyError(f"unknown family {fp.family!r}; expected one of {', '.join(FAMILIES)}")
    model = _BUILDERS[fp.family](fp.params, fp.constants)
    return model


def build_with_hierarchy(fp: FamilyParams):
    """Build the model and its hierarchy annotation."""
    from . import hierarchy
    model = build(fp)
    if fp.family == "amalg":
        h = hierarchy.amalg_hierarchy(model)
    elif fp.family == "split":
        h = hierarchy.split_hierarchy(model)
    else:
        h = hierarchy.annotate(model)
    return model, h


def _surface(level, components, tubes=None, separated=()):
    return SplitSurfaceSpec(
        level=level,
        components=dict(components),
        boundary_tubes={c: dict(t) for c, t in (tubes or {}).items() if t},
        separated=tuple(tuple(p) for p in separated),
    )


def _chain(surfaces, specs, constants, **model_kw) -> ModelEnd:
    blocks = tuple(
        Block(index=i, bottom=surfaces[i], top=surfaces[i + 1], **spec)
        for i, spec in enumerate(specs)
    )
    return ModelEnd(blocks=blocks, constants=constants, **model_kw)


def _int_param(params, key, minimum=1):
    try:
        value = int(params[key])
    except (KeyError, TypeError, ValueError):
        raise FamilyError(f"parameter {key!r} must be an integer") from None
    if value < minimum:
        raise FamilyError(f"parameter {key!r} must be >= {minimum}")
    return value


def bounded(params, constants=Constants()) -> ModelEnd:
    n = _int_param(params, "n_blocks")
    patches = _int_param(params, "patches") if "patches" in params else 3
    comps = {f"S{p}": 3 for p in range(patches)}
    surfaces = [_surface(lvl, comps) for lvl in range(n + 1)]
    specs = [dict(variant=THICK, L=constants.L) for _ in range(n)]
    return _chain(surfaces, specs, constants, surface_complexity=2 * patches)


def flute(params, constants=Constants()) -> ModelEnd:
    necks = _int_param(params, "n_necks")
    tubes = {}
    for n in range(1, necks + 1):
        tubes[2 * n - 1] = Tube(f"N{n:04d}", core_length=1.0 / n, left_count=1)
    n_blocks = 2 * necks + 1
    surfaces = []
    for lvl in range(n_blocks + 1):
        contact = {}
        for b in (lvl - 1, lvl):
            if b in tubes:
                contact[tubes[b].id] = "core"
        surfaces.append(_surface(lvl, {"S": 4}, {"S": contact}))
    specs = []
    for b in range(n_blocks):
        if b in tubes:
            specs.append(dict(variant=THIN, tubes=(tubes[b],), product=()))
        else:
            specs.append(dict(variant=THICK, L=constants.L))
    return _chain(surfaces, specs, constants, surface_complexity=4)


def ibounded(params, constants=Constants()) -> ModelEnd:
    twists = [int(x) for x in params.get("twists", [])]
    if not twists or any(t < 1 for t in twists):
        raise FamilyError("ibounded needs a non-empty list of positive twists")
    tubes = {}
    for i, n in enumerate(twists):
        tubes[2 * i + 1] = Tube(f"T{i:03d}", core_length=1.0 / n ** 2, twist=n, left_count=n)
    n_blocks = 2 * len(twists)
    surfaces = []
    for lvl in range(n_blocks + 1):
        contact = {tubes[b].id: None for b in (lvl - 1, lvl) if b in tubes}
        surfaces.append(_surface(lvl, {"P0": 3, "P1": 3}, {"P1": contact}))
    specs = []
    for b in range(n_blocks):
        if b in tubes:
            specs.append(dict(variant=THIN, tubes=(tubes[b],)))
        else:
            specs.append(dict(variant=THICK, L=constants.L))
    return _chain(surfaces, specs, constants, surface_complexity=6)


def winding_counts(model: ModelEnd, loops=None) -> list:
    """Loop counts per block for a Winding ray: ``twist`` loops in each thin block."""
    counts = []
    for block in model.blocks:
        if block.tubes:
            counts.append(block.tubes[0].twist if loops is None else loops(block))
        else:
            counts.append(0)
    return counts


def amalg(params, constants=Constants()) -> ModelEnd:
    per_block = params.get("blocks")
    if not per_block:
        raise FamilyError("amalg needs 'blocks': a list of [[m_j, n_j], ...] per block")
    per_block = [[(int(m), int(n)) for m, n in lst] for lst in per_block]
    if any(not lst or any(m < 0 or n < 0 for m, n in lst) for lst in per_block):
        raise FamilyError("amalg block parameter lists must be non-empty with m_j, n_j >= 0")
    tubes = []
    for b, lst in enumerate(per_block):
        side = sum(m + n for m, n in lst)
        n_t = 2 * side
        tubes.append(Tube(f"T{b:03d}", core_length=1.0 / max(n_t, 1) ** 2,
                          left_count=side, right_count=side))
    surfaces = []
    for lvl in range(len(per_block) + 1):
        contact = {tubes[b].id: None for b in (lvl - 1, lvl) if 0 <= b < len(tubes)}
        surfaces.append(_surface(lvl, {"L": 4, "R": 4}, {"L": contact, "R": contact}))
    specs = []
    for b, lst in enumerate(per_block):
        eta = float(sum(m + 1 for m, _ in lst))
        specs.append(dict(
            variant=AMALGAMATED, tubes=(tubes[b],), amalgamation_params=tuple(lst),
            links=(Link(("bottom", "L"), ("top", "L"), eta), Link(("bottom", "R"), ("top", "R"), eta)),
        ))
    return _chain(surfaces, specs, constants, surface_complexity=6)


def amalg_cumulative(n_blocks, m=lambda j: 1, n=lambda j: 8 * 2 ** j) -> dict:
    """Parameters whose block ``i`` (1-based) carries ``[(m_j, n_j) for j = 1..i]``."""
    return {"blocks": [[(m(j), n(j)) for j in range(1, i + 1)] for i in range(1, n_blocks + 1)]}


def split(params, constants=Constants()) -> ModelEnd:
    triples = params.get("triples")
    if not triples:
        raise FamilyError("split needs 'triples': a list of [l_i, m_i, n_i]")
    triples = [tuple(int(x) for x in t) for t in triples]
    for i, (l, m, n) in enumerate(triples, start=1):
        if min(l, m, n) < 1:
            raise FamilyError(f"split block {i}: l_i, m_i, n_i must be >= 1")
        if n < l + m:
            raise FamilyError(f"split block {i}: n_i ≥ l_i + m_i fails ({n} < {l + m})")
    N = len(triples)
    eta0 = constants.eta0
    T, H = {}, {}
    for i, (l, m, n) in enumerate(triples, start=1):
        T[i] = Tube(f"T{i:03d}", core_length=1.0 / (n + 1) ** 2, left_count=1, right_count=n)
        # each side of H_i carries the l_i split surfaces of B_i and the
        # m_(i-1) of B_(i-1); the thick detour climbs that whole side
        side = l + (triples[i - 2][1] if i > 1 else m)
        H[i] = Tube(f"H{i:03d}", core_length=1.0 / (2 * side) ** 2,
                    left_count=side, right_count=side, kind=HANGING_LOWER, vertical_extent=eta0)
    surfaces = []
    for lvl in range(N + 1):
        up, low = f"A{lvl}+", f"A{lvl + 1}-"  # top of A_lvl, bottom of A_(lvl+1)
        comps, contact, sep = {}, {}, []
        comps[up] = 3
        contact[up] = {T[lvl].id: None} if lvl >= 1 else {}
        if lvl < N:
            h = H[lvl + 1]
            comps[low] = 3
            contact[up][h.id] = 0
            contact[low] = {h.id: h.left_count, T[lvl + 1].id: None}
            sep.append((up, low))
        surfaces.append(_surface(lvl, comps, contact, sep))
    specs = []
    for i, (l, m, n) in enumerate(triples, start=1):
        specs.append(dict(
            variant=SPLIT, tubes=(T[i],), hanging_tubes=(H[i],), region_params=(l, m, n),
            links=(
                Link(("bottom", f"A{i}-"), ("top", f"A{i}+"), 1.0),
                Link(("bottom", f"A{i - 1}+"), ("bottom", f"A{i}-"), float(H[i].left_count)),
            ),
        ))
    return _chain(surfaces, specs, constants, surface_complexity=5, base_component="A0+")


def split_geometric(n_blocks, scale=4, ratio=2.0) -> dict:
    """``l_i = m_i = ceil(scale * ratio**i)`` and ``n_i = l_i + m_i``."""
    triples = []
    for i in range(1, n_blocks + 1):
        l = math.ceil(scale * ratio ** i)
        triples.append((l, l, 2 * l))
    return {"triples": triples}


def thin_all_params(j: int, d: float = 1.0) -> tuple:
    """Derived ``(k, d)`` for piece index ``j``: ``k = j`` fundamental domains of height ``d``."""
    return j, d


def thin_all(params, constants=Constants()) -> ModelEnd:
    js = [int(x) for x in params.get("js", [])]
    if not js:
        raise FamilyError("thin_all needs a non-empty list 'js'")
    d = float(params.get("d", 1.0))
    C = float(params.get("C", 4 * constants.D))
    tubes = []
    for b, j in enumerate(js):
        k, _ = thin_all_params(j, d)
        if not k * d / 2 > 4 * math.log(k) + C:
            raise FamilyError(
                f"thin_all piece {b}: k·d/2 > 4·ln k + C fails "
                f"({k * d / 2:.6g} <= {4 * math.log(k) + C:.6g})")
        tubes.append(Tube(f"K{b:03d}", core_length=1.0 / k ** 2, left_count=k))
    surfaces = []
    for lvl in range(len(js) + 1):
        contact = {tubes[b].id: None for b in (lvl - 1, lvl) if 0 <= b < len(tubes)}
        surfaces.append(_surface(lvl, {"S": 4}, {"S": contact}))
    specs = []
    for b, j in enumerate(js):
        k, _ = thin_all_params(j, d)
        specs.append(dict(variant=THIN, tubes=(tubes[b],), product=(),
                          links=(Link(("bottom", "S"), ("top", "S"), k * d),)))
    return _chain(surfaces, specs, constants, surface_complexity=4)


_BUILDERS = {
    "bounded": bounded,
    "flute": flute,
    "ibounded": ibounded,
    "amalg": amalg,
    "split": split,
    "thin_all": thin_all,
}
