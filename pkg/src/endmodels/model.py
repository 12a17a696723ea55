"""Block and tube vocabulary for combinatorial models of degenerate ends.

A model end is an ordered list of blocks glued end to end.  Block ``i`` sits
between level surfaces ``i`` and ``i + 1``; the top surface of block ``i``
must coincide with the bottom surface of block ``i + 1``.  Nothing here
carries an actual hyperbolic metric: geometry enters only through the
metric graph built by :mod:`endmodels.graph`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

CROSSING = "crossing"
HANGING_UPPER = "hanging_upper"
HANGING_LOWER = "hanging_lower"
TUBE_KINDS = (CROSSING, HANGING_UPPER, HANGING_LOWER)

THICK = "thick"
THIN = "thin"
AMALGAMATED = "amalgamated"
SPLIT = "split"
VARIANTS = (THICK, THIN, AMALGAMATED, SPLIT)

# Attachment of a surface component to a tube ladder: an integer boundary
# position (depth 0), the string "core", or None for the default position.
Attach = Union[int, str, None]


@dataclass(frozen=True)
class Constants:
    L: float = 1.0
    eps0: float = 0.1
    D: float = 2.0
    C0: float = 2.0
    eta0: float = 1.0
    n_max: int = 16


@dataclass(frozen=True)
class Tube:
    id: str
    core_length: float
    twist: int = 0
    left_count: int = 0
    right_count: int = 0
    kind: str = CROSSING
    vertical_extent: Optional[float] = None

    @property
    def total_count(self) -> int:
        return self.left_count + self.right_count

    @property
    def depth(self) -> float:
        return math.log1p(self.total_count)

    @property
    def max_rung(self) -> int:
        return math.ceil(self.depth)

    @property
    def hanging(self) -> bool:
        return self.kind != CROSSING


@dataclass(frozen=True)
class SplitSurfaceSpec:
    """One level surface: components with complexity tags and tube contacts.

    ``boundary_tubes`` maps a component to ``{tube_id: attach}``.  Pairs in
    ``separated`` are split apart by a tube and get no horizontal edge.
    """

    level: int
    components: Mapping[str, int]
    boundary_tubes: Mapping[str, Mapping[str, Attach]] = field(default_factory=dict)
    separated: tuple = ()

    def tube_ids(self) -> set:
        return {t for tubes in self.boundary_tubes.values() for t in tubes}

    def structure(self):
        return (
            self.level,
            tuple(sorted(self.components.items())),
            tuple(sorted((c, tuple(sorted(t.items(), key=lambda kv: kv[0])))
                         for c, t in self.boundary_tubes.items() if t)),
            tuple(sorted(tuple(sorted(p)) for p in self.separated)),
        )


@dataclass(frozen=True)
class Link:
    """A user-weighted edge between two surface components of one block.

    Endpoints are ``(side, component)`` with side ``"bottom"`` or ``"top"``.
    Used for amalgamation components and other regions whose internal
    geometry the model does not control.
    """

    a: tuple
    b: tuple
    weight: float


@dataclass(frozen=True)
class Block:
    index: int
    variant: str
    bottom: SplitSurfaceSpec
    top: SplitSurfaceSpec
    L: float = 1.0
    tubes: tuple = ()
    hanging_tubes: tuple = ()
    amalgamation_params: tuple = ()
    region_params: Optional[tuple] = None
    links: tuple = ()
    # components joined bottom-to-top by a unit product edge; None = variant default
    product: Optional[tuple] = None

    def all_tubes(self) -> tuple:
        return tuple(self.tubes) + tuple(self.hanging_tubes)

    def product_components(self) -> tuple:
        if self.product is not None:
            return tuple(self.product)
        if self.variant in (THICK, THIN):
            shared = set(self.bottom.components) & set(self.top.components)
            return tuple(sorted(shared))
        return ()


@dataclass(frozen=True)
class ModelEnd:
    blocks: tuple
    surface_complexity: int = 6
    constants: Constants = Constants()
    base_component: Optional[str] = None

    def tube_table(self) -> dict:
        table = {}
        for block in self.blocks:
            for tube in block.all_tubes():
                table.setdefault(tube.id, tube)
        return table

    def tube_span(self) -> dict:
        """Map tube id -> sorted list of block indices listing it."""
        span: dict = {}
        for block in self.blocks:
            for tube in block.all_tubes():
                span.setdefault(tube.id, []).append(block.index)
        return span


@dataclass(frozen=True, order=True)
class Violation:
    block: int
    rule: str
    message: str

    def __str__(self) -> str:
        where = "model" if self.block < 0 else f"block {self.block}"
        return f"{where}: [{self.rule}] {self.message}"


def validate(model: ModelEnd) -> list:
    """Return every violated invariant of ``model``, sorted; empty means valid."""
    out: list = []

    def bad(block: int, rule: str, message: str) -> None:
        out.append(Violation(block, rule, message))

    c = model.constants
    if c.L < 1:
        bad(-1, "constants", f"L must be >= 1 (got {c.L})")
    if c.eps0 <= 0:
        bad(-1, "constants", f"eps0 must be > 0 (got {c.eps0})")
    if c.D <= 0:
        bad(-1, "constants", f"diameter bound D must be > 0 (got {c.D})")
    if c.C0 < 0:
        bad(-1, "constants", f"C0 must be >= 0 (got {c.C0})")
    if c.n_max < 1:
        bad(-1, "constants", f"n_max must be >= 1 (got {c.n_max})")

    if not model.blocks:
        bad(-1, "nonempty", "model must contain ≥1 block")
        return sorted(set(out))

    definitions: dict = {}
    for block in model.blocks:
        for tube in block.all_tubes():
            prev = definitions.setdefault(tube.id, tube)
            if prev != tube:
                bad(block.index, "tube-consistency",
                    f"tube {tube.id} defined differently in two blocks")

    for pos, block in enumerate(model.blocks):
        i = block.index
        if i != pos:
            bad(pos, "consecutive-index", f"block at position {pos} has index {i}")
        if block.variant not in VARIANTS:
            bad(i, "variant", f"unknown variant {block.variant!r}")
        if block.bottom.level != pos or block.top.level != pos + 1:
            bad(i, "surface-level",
                f"surfaces must sit at levels {pos}, {pos + 1} "
                f"(got {block.bottom.level}, {block.top.level})")
        for side in (block.bottom, block.top):
            _check_surface(side, definitions, i, bad)
        _check_tubes(block, c, bad)
        _check_links(block, bad)
        if block.product is not None:
            for comp in block.product:
                if comp not in block.bottom.components or comp not in block.top.components:
                    bad(i, "product", f"product component {comp} missing from bottom or top")

        if pos + 1 < len(model.blocks):
            nxt = model.blocks[pos + 1]
            if block.top.structure()[1:] != nxt.bottom.structure()[1:]:
                bad(i, "gluing", f"top of block {i} differs from bottom of block {nxt.index}")

    _check_placement(model, definitions, bad)
    return sorted(set(out))


def _check_surface(surface, definitions, i, bad) -> None:
    if not surface.components:
        bad(i, "surface", f"level {surface.level} surface has no components")
    for comp, xi in surface.components.items():
        if xi < 3:
            bad(i, "component-complexity", f"component {comp} has complexity {xi} < 3")
    for comp, tubes in surface.boundary_tubes.items():
        if comp not in surface.components:
            bad(i, "surface", f"boundary_tubes names unknown component {comp}")
        for tid, attach in tubes.items():
            if tid not in definitions:
                bad(i, "unknown-tube", f"tube {tid} at level {surface.level} does not exist")
                continue
            tube = definitions[tid]
            if isinstance(attach, bool) or not (
                    attach is None or attach == "core"
                    or (isinstance(attach, int) and 0 <= attach <= tube.total_count)):
                bad(i, "attach", f"bad attachment {attach!r} of {comp} to tube {tid}")
    for pair in surface.separated:
        if len(pair) != 2 or any(p not in surface.components for p in pair):
            bad(i, "surface", f"separated pair {tuple(pair)} names unknown components")


def _check_tubes(block, c, bad) -> None:
    i = block.index
    if block.variant == THICK and block.all_tubes():
        bad(i, "thick-no-tubes", "thick blocks carry no tubes")
    for tube in block.tubes:
        if tube.kind != CROSSING:
            bad(i, "tube-kind", f"tube {tube.id} in tubes list must be crossing")
    for tube in block.hanging_tubes:
        if tube.kind == CROSSING:
            bad(i, "tube-kind", f"tube {tube.id} in hanging_tubes list must be hanging")
    for tube in block.all_tubes():
        if tube.kind not in TUBE_KINDS:
            bad(i, "tube-kind", f"tube {tube.id} has unknown kind {tube.kind!r}")
        if not tube.core_length > 0:
            bad(i, "tube-core-length", f"tube {tube.id} core_length must be > 0")
        if tube.left_count < 0 or tube.right_count < 0:
            bad(i, "tube-count", f"tube {tube.id} has negative abutting count")
        if tube.kind == CROSSING and tube.total_count < 1:
            bad(i, "tube-count", f"crossing tube {tube.id} needs n_T ≥ 1")
        if tube.hanging and (tube.vertical_extent is None or tube.vertical_extent < c.eta0):
            bad(i, "hanging-extent",
                f"hanging tube {tube.id} vertical extent below eta0={c.eta0}")
    bottom, top = block.bottom.tube_ids(), block.top.tube_ids()
    for tube in block.hanging_tubes:
        if tube.kind == HANGING_UPPER and (tube.id not in top or tube.id in bottom):
            bad(i, "tube-placement", f"upper hanging tube {tube.id} must meet the top only")
        if tube.kind == HANGING_LOWER and (tube.id not in bottom or tube.id in top):
            bad(i, "tube-placement", f"lower hanging tube {tube.id} must meet the bottom only")
    if block.variant == SPLIT and block.region_params is not None:
        l, m, n = block.region_params
        if n < l + m:
            bad(i, "split-region", f"n_i ≥ l_i + m_i fails ({n} < {l + m})")
    for pair in block.amalgamation_params:
        m, n = pair
        if m < 0 or n < 0:
            bad(i, "amalgamation", f"amalgamation parameters must be >= 0 (got {pair})")


def _check_links(block, bad) -> None:
    i = block.index
    sides = {"bottom": block.bottom, "top": block.top}
    for link in block.links:
        ends = (link.a, link.b)
        if any(len(e) != 2 or e[0] not in sides or e[1] not in sides[e[0]].components
               for e in ends):
            bad(i, "link-endpoint", f"link {ends} names an unknown component")
            continue
        if not link.weight > 0:
            bad(i, "link-weight", f"link {ends} weight must be > 0")
        elif link.a[0] != link.b[0] and link.weight < 1:
            bad(i, "link-height", f"vertical link {ends} shorter than unit block height")


def _check_placement(model, definitions, bad) -> None:
    levels = {}
    for block in model.blocks:
        levels[block.bottom.level] = block.bottom.tube_ids()
        levels[block.top.level] = block.top.tube_ids()
    owners: dict = {}
    for block in model.blocks:
        for tube in block.all_tubes():
            owners.setdefault(tube.id, set()).add(block.index)
    for tid, tube in definitions.items():
        span = sorted(owners[tid])
        if tube.kind == CROSSING:
            if span != list(range(span[0], span[-1] + 1)):
                bad(span[0], "tube-placement", f"crossing tube {tid} spans non-consecutive blocks")
            if len(span) > model.constants.n_max:
                bad(span[0], "n-max",
                    f"crossing tube {tid} spans {len(span)} > n_max={model.constants.n_max} blocks")
            for lvl in range(span[0], span[-1] + 2):
                if tid not in levels.get(lvl, ()):
                    bad(span[0], "tube-placement",
                        f"crossing tube {tid} missing from level {lvl} surface")
        elif len(span) > 1:
            bad(span[0], "tube-placement", f"hanging tube {tid} listed by several blocks")
    for lvl, tids in levels.items():
        for tid in tids:
            if tid not in definitions:
                continue
            tube = definitions[tid]
            span = sorted(owners[tid])
            if tube.kind == CROSSING:
                ok = span[0] <= lvl <= span[-1] + 1
            elif tube.kind == HANGING_UPPER:
                ok = lvl == span[0] + 1
            else:
                ok = lvl == span[0]
            if not ok:
                bad(span[0], "tube-placement", f"tube {tid} appears at foreign level {lvl}")


def meridian_coefficient(tube: Tube) -> tuple:
    """Return ``(tw_T, n_T)``.

    The modelled Teichmüller parameter of the tube's boundary torus lies
    within the model constant ``C0`` of ``tw_T + i * n_T``.
    """
    if tube.kind != CROSSING:
        raise ValueError("meridian coefficient defined for crossing tubes only")
    return (float(tube.twist), float(tube.total_count))
