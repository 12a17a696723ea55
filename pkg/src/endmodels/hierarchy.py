"""Hierarchy bookkeeping: tight geodesics, hierarchy paths, slices, resolutions.

Curves are opaque string ids.  A :class:`Domain` is a subsurface given by its
complexity and boundary curves; a :class:`TightGeodesic` is a sequence of
curve simplices in a domain.  A hierarchy path is a list of pants
decompositions, each a set of curve ids.

Geodesic length is the number of edges, ``len(simplices) - 1``.  Every edge
of a geodesic supported on a complexity-4 domain is one Minsky block; the
block's vertical boundary abuts the tube of each boundary curve of the
domain, on the side recorded in ``Domain.sides``.

Hierarchies here are produced by a *sweep*: a list of phases, each fixing a
simplex of the main geodesic and a set of component domains that are
advanced one elementary move at a time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .model import ModelEnd

LEFT, RIGHT = "left", "right"
MAIN = "S"


@dataclass(frozen=True)
class Domain:
    id: str
    complexity: int
    boundary: frozenset = frozenset()
    parent: Optional[str] = None
    sides: dict = field(default_factory=dict, compare=False, hash=False)   # curve -> left/right


@dataclass(frozen=True)
class TightGeodesic:
    id: str
    domain: str
    simplices: tuple                      # tuple of frozensets of curve ids
    initial_marking: frozenset = frozenset()
    terminal_marking: frozenset = frozenset()
    slots: Optional[tuple] = None         # declared interval (first, last) of path indices

    @property
    def length(self) -> int:
        return len(self.simplices) - 1


@dataclass(frozen=True)
class Hierarchy:
    domains: dict                 # id -> Domain
    geodesics: tuple
    path: tuple                   # pants decompositions, frozensets of curves
    tube_curves: dict = field(default_factory=dict)   # tube id -> curve id

    @property
    def main(self) -> TightGeodesic:
        return next(g for g in self.geodesics if self.domains[g.domain].parent is None)

    def geodesic(self, gid: str) -> TightGeodesic:
        return next(g for g in self.geodesics if g.id == gid)


@dataclass(frozen=True)
class Slice:
    pairs: frozenset              # (geodesic id, simplex index)
    bottom: tuple


@dataclass(frozen=True)
class Resolution:
    slices: tuple


@dataclass(frozen=True, order=True)
class Issue:
    where: str
    message: str

    def __str__(self) -> str:
        return f"{self.where}: {self.message}"


# validation ----------------------------------------------------------------------

def _active(g: TightGeodesic, path, boundary) -> list:
    if g.slots is not None:
        return list(range(g.slots[0], g.slots[1] + 1))
    return [j for j, rho in enumerate(path) if boundary <= rho]


def _simplex_at(g: TightGeodesic, rho) -> Optional[int]:
    for idx, s in enumerate(g.simplices):
        if s <= rho:
            return idx
    return None


def validate_hierarchy(geodesics, path, domains=None) -> list:
    """Check the hierarchy-path conditions; returns a sorted list of :class:`Issue`.

    For each geodesic ``g_Y`` the slots ``J_Y`` with ``∂Y ⊂ ρ(j)`` must form an
    interval, and every ``ρ(j)`` with ``j ∈ J_Y`` must contain a simplex of
    ``g_Y``.  Short geodesics are also checked for tightness where disjointness
    of simplices decides it.
    """
    domains = domains or {}
    path = [frozenset(p) for p in path]
    issues = []
    for g in geodesics:
        where = f"geodesic {g.id}"
        dom = domains.get(g.domain)
        boundary = dom.boundary if dom else frozenset()
        if not g.simplices:
            issues.append(Issue(where, "no simplices"))
            continue
        if g.initial_marking and not g.simplices[0] <= g.initial_marking:
            issues.append(Issue(where, "first simplex not in initial marking"))
        if g.terminal_marking and not g.simplices[-1] <= g.terminal_marking:
            issues.append(Issue(where, "last simplex not in terminal marking"))
        if g.length <= 2:
            for a in range(len(g.simplices)):
                for b in range(a + 1, len(g.simplices)):
                    if g.simplices[a] & g.simplices[b]:
                        issues.append(Issue(where, f"simplices {a} and {b} share a curve"))
        J = _active(g, path, boundary)
        if not J:
            continue
        if J[0] < 0 or J[-1] >= len(path):
            issues.append(Issue(where, "slot interval outside the path"))
            continue
        present = [j for j in J if boundary <= path[j]]
        if present != J:
            if present and present[0] == J[0] and present[-1] == J[-1]:
                issues.append(Issue(where, "J_Y disconnected"))
            else:
                issues.append(Issue(where, f"∂Y not in ρ({[j for j in J if j not in present][0]})"))
        for j in J:
            if _simplex_at(g, path[j]) is None:
                issues.append(Issue(where, f"no simplex of g_Y in ρ({j})"))
                break
    return sorted(issues)


def check_hierarchy(h: Hierarchy) -> list:
    return validate_hierarchy(h.geodesics, h.path, h.domains)


def is_component_domain(h: Hierarchy, child: str, parent_pair) -> bool:
    """``child`` is a component domain of ``(geodesic, index)``."""
    g = h.geodesic(parent_pair[0])
    v = g.simplices[parent_pair[1]]
    Y, D = h.domains[child], h.domains[g.domain]
    return Y.parent == D.id and Y.boundary <= (D.boundary | v) and bool(Y.boundary & v)


def slices(h: Hierarchy) -> Resolution:
    """Resolution of ``h`` along its path: one slice per path index."""
    out = []
    main = h.main
    for j, rho in enumerate(h.path):
        pairs = set()
        for g in h.geodesics:
            if g.slots is not None and not g.slots[0] <= j <= g.slots[1]:
                continue
            if not h.domains[g.domain].boundary <= rho:
                continue
            inside = [k for k, simp in enumerate(g.simplices) if simp <= rho]
            if inside:
                idx = max(inside, key=lambda k: (len(g.simplices[k]), -k))
                pairs.add((g.id, idx))
        bottom = next(((gid, i) for gid, i in pairs if gid == main.id), None)
        out.append(Slice(frozenset(pairs), bottom))
    return Resolution(tuple(out))


def check_resolution(h: Hierarchy, res: Optional[Resolution] = None) -> list:
    """Slice invariants and the vertex-set law ``∪ simplices = ρ(j)``."""
    res = res or slices(h)
    issues = []
    for j, (sl, rho) in enumerate(zip(res.slices, h.path)):
        where = f"slice {j}"
        if sl.bottom is None or sl.bottom not in sl.pairs:
            issues.append(Issue(where, "no bottom pair"))
            continue
        ids = [gid for gid, _ in sl.pairs]
        if len(ids) != len(set(ids)):
            issues.append(Issue(where, "geodesic appears twice"))
        for gid, idx in sl.pairs:
            if (gid, idx) == sl.bottom:
                continue
            dom = h.geodesic(gid).domain
            if not any(is_component_domain(h, dom, p) for p in sl.pairs if p != (gid, idx)):
                issues.append(Issue(where, f"{dom} is not a component domain of the slice"))
        verts = frozenset().union(*(h.geodesic(gid).simplices[i] for gid, i in sl.pairs))
        if verts != rho:
            issues.append(Issue(where, "vertex set differs from ρ(j)"))
    return sorted(issues)


# Minsky blocks ---------------------------------------------------------------------

def minsky_block_tally(model: ModelEnd, h: Hierarchy) -> dict:
    """Tube id -> (blocks abutting its left side, blocks abutting its right side)."""
    tally = {}
    for tid in sorted(model.tube_table()):
        curve = h.tube_curves.get(tid)
        left = right = 0
        for g in h.geodesics:
            dom = h.domains[g.domain]
            if dom.complexity != 4 or curve not in dom.boundary:
                continue
            if dom.sides.get(curve) == LEFT:
                left += g.length
            elif dom.sides.get(curve) == RIGHT:
                right += g.length
        tally[tid] = (left, right)
    return tally


def tally_mismatches(model: ModelEnd, h: Hierarchy) -> list:
    table = model.tube_table()
    tally = minsky_block_tally(model, h)
    return [tid for tid in sorted(table)
            if tally[tid] != (table[tid].left_count, table[tid].right_count)]


def check_abut_bound(model: ModelEnd, h: Hierarchy, l: float, n: int) -> list:
    """Flag geodesics longer than ``n`` on domains abutting a tube with core > ``l``."""
    issues = []
    for tid, tube in sorted(model.tube_table().items()):
        if tube.core_length <= l:
            continue
        curve = h.tube_curves.get(tid)
        for g in h.geodesics:
            dom = h.domains[g.domain]
            if curve in dom.boundary and g.length > n:
                issues.append(Issue(f"tube {tid}", f"geodesic {g.id} has length {g.length} > {n}"))
    return sorted(issues)


# construction ---------------------------------------------------------------------

@dataclass
class _Phase:
    simplex: frozenset
    pieces: list          # (domain id, boundary {curve: side}, length)


def sweep(phases, complexity: int, tube_curves: dict) -> Hierarchy:
    """Assemble a hierarchy whose path advances the pieces of each phase in turn."""
    domains = {MAIN: Domain(MAIN, complexity)}
    geodesics, path = [], []
    main_simplices = []
    for phase in phases:
        if main_simplices and main_simplices[-1] == phase.simplex:
            pass
        else:
            main_simplices.append(phase.simplex)
        start = len(path)
        current = []
        for did, sides, length in phase.pieces:
            domains[did] = Domain(did, 4, frozenset(sides), MAIN, dict(sides))
            simp = tuple(frozenset({f"{did}#{k}"}) for k in range(length + 1))
            current.append([did, simp, 0])
        def snapshot():
            rho = set(phase.simplex)
            for _, simp, k in current:
                rho |= simp[k]
            path.append(frozenset(rho))
        snapshot()
        for piece in current:
            while piece[2] < len(piece[1]) - 1:
                piece[2] += 1
                snapshot()
        end = len(path) - 1
        for did, simp, _ in current:
            geodesics.append(TightGeodesic(
                id=f"g:{did}", domain=did, simplices=simp,
                initial_marking=simp[0], terminal_marking=simp[-1], slots=(start, end)))
    main = TightGeodesic(
        id=f"g:{MAIN}", domain=MAIN, simplices=tuple(main_simplices),
        initial_marking=main_simplices[0], terminal_marking=main_simplices[-1])
    return Hierarchy(domains, (main,) + tuple(geodesics), tuple(path), dict(tube_curves))


def _curve(tid: str) -> str:
    return f"c:{tid}"


def annotate(model: ModelEnd) -> Hierarchy:
    """Generic annotation: one abutting domain per tube side, sized by its count."""
    phases, curves = [], {}
    for block in model.blocks:
        for tube in block.all_tubes():
            c = _curve(tube.id)
            curves[tube.id] = c
            pieces = []
            if tube.left_count:
                pieces.append((f"Y:{tube.id}:L", {c: LEFT}, tube.left_count))
            if tube.right_count:
                pieces.append((f"Y:{tube.id}:R", {c: RIGHT}, tube.right_count))
            phases.append(_Phase(frozenset({c}), pieces))
    if not phases:
        phases.append(_Phase(frozenset({"c:base"}), []))
    return sweep(phases, model.surface_complexity, curves)


def amalg_hierarchy(model: ModelEnd) -> Hierarchy:
    """Per block, domains ``W_j`` (length ``n_j``) and ``M_j`` (length ``m_j``) on both sides of the tube."""
    phases, curves = [], {}
    for block in model.blocks:
        tube = block.tubes[0]
        c = _curve(tube.id)
        curves[tube.id] = c
        pieces = []
        for side, tag in ((LEFT, "L"), (RIGHT, "R")):
            for j, (m, n) in enumerate(block.amalgamation_params, start=1):
                pieces.append((f"W{j}:{tube.id}:{tag}", {c: side}, n))
                pieces.append((f"M{j}:{tube.id}:{tag}", {c: side}, m))
        phases.append(_Phase(frozenset({c}), pieces))
    return sweep(phases, model.surface_complexity, curves)


def split_hierarchy(model: ModelEnd) -> Hierarchy:
    """Hierarchy of the split family.

    With ``v_i`` the core curve of ``T_i`` and ``v_{i-1,i}`` that of ``H_i``,
    the sweep visits, for each block: the ``Σ_{i-1,i}`` pair bounded by
    ``v_{i-1}, v_{i-1,i}`` (``m_{i-1}`` moves), the ``Σ_{i,i-1}`` pair bounded
    by ``v_i, v_{i-1,i}`` (``l_i`` moves), then ``C_i`` (``n_i - l_i - m_i``
    moves) with the unit domain on the short side of ``T_i``.
    """
    triples = [b.region_params for b in model.blocks]
    curves = {}
    v = {i: f"v{i}" for i in range(len(triples) + 1)}
    phases = []
    for i, block in enumerate(model.blocks, start=1):
        l, m, n = triples[i - 1]
        m_prev = triples[i - 2][1] if i > 1 else m
        T, H = block.tubes[0], block.hanging_tubes[0]
        vt, vh = v[i], f"v{i - 1},{i}"
        curves[T.id], curves[H.id] = vt, vh
        prev = {v[i - 1]: RIGHT} if i > 1 else {v[0]: RIGHT}
        phases.append(_Phase(frozenset({v[i - 1], vh}), [
            (f"Sig{i - 1},{i}", {**prev, vh: LEFT}, m_prev),
            (f"Sig'{i - 1},{i}", {vh: RIGHT}, m_prev),
        ]))
        phases.append(_Phase(frozenset({vt, vh}), [
            (f"Sig{i},{i - 1}", {vt: RIGHT, vh: LEFT}, l),
            (f"Sig'{i},{i - 1}", {vh: RIGHT}, l),
        ]))
        phases.append(_Phase(frozenset({vt}), [
            (f"A{i}", {vt: LEFT}, T.left_count),
            (f"C{i}", {vt: RIGHT}, n - l - m),
        ]))
    # Σ_{i,i+1} is visited as the first phase of block i+1; the last block's
    # m_N domains close off the sweep.
    if triples:
        N = len(triples)
        m_last = triples[-1][1]
        phases.append(_Phase(frozenset({v[N], f"v{N},{N + 1}"}), [
            (f"Sig{N},{N + 1}", {v[N]: RIGHT, f"v{N},{N + 1}": LEFT}, m_last),
        ]))
    return sweep(phases, model.surface_complexity, curves)


# serialization -----------------------------------------------------------------------

def hierarchy_to_dict(h: Hierarchy) -> dict:
    return {
        "domains": [
            {"id": d.id, "complexity": d.complexity, "boundary": sorted(d.boundary),
             "parent": d.parent, "sides": dict(sorted(d.sides.items()))}
            for d in sorted(h.domains.values(), key=lambda d: d.id)
        ],
        "geodesics": [
            {"id": g.id, "domain": g.domain, "simplices": [sorted(s) for s in g.simplices],
             "initial_marking": sorted(g.initial_marking),
             "terminal_marking": sorted(g.terminal_marking),
             "slots": None if g.slots is None else list(g.slots)}
            for g in h.geodesics
        ],
        "path": [sorted(p) for p in h.path],
        "tube_curves": dict(sorted(h.tube_curves.items())),
    }


def hierarchy_from_dict(d: dict) -> Hierarchy:
    domains = {
        x["id"]: Domain(x["id"], int(x["complexity"]), frozenset(x.get("boundary", [])),
                        x.get("parent"), dict(x.get("sides", {})))
        for x in d.get("domains", [])
    }
    geodesics = tuple(
        TightGeodesic(
            id=x["id"], domain=x["domain"],
            simplices=tuple(frozenset(s) for s in x["simplices"]),
            initial_marking=frozenset(x.get("initial_marking", [])),
            terminal_marking=frozenset(x.get("terminal_marking", [])),
            slots=None if x.get("slots") is None else tuple(x["slots"]),
        )
        for x in d.get("geodesics", [])
    )
    return Hierarchy(domains, geodesics, tuple(frozenset(p) for p in d.get("path", [])),
                     dict(d.get("tube_curves", {})))
