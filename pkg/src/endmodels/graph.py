"""Weighted graph discretization of a model end.

Every level surface component becomes one node.  Each tube becomes a
ladder: rung nodes ``(depth k, position p)`` for ``k = 0..ceil(ln(1 + n_T))``
and ``p = 0..n_T``, with radial edges of weight 1 and horizontal edges of
weight ``exp(-k)`` at depth ``k``, plus one core node joined to the deepest
rung.  Crossing a boundary offset ``Δ`` through a ladder then costs
``2 ln Δ + O(1)`` while walking along depth 0 costs exactly ``Δ``.

Node ids sort lexicographically in index order::

    L000003/A1-              surface component A1- at level 3
    T/H2/004/000000017       tube H2, depth 4, position 17
    T/H2/core                core of tube H2

so breaking heap ties on the index is the same as breaking them on the id.
"""

from __future__ import annotations

import bisect
import heapq
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra as _sp_dijkstra

from .model import CROSSING, ModelEnd, validate

SURFACE = "surface"
RUNG = "rung"
CORE = "core"

# edge owners: >= 0 block index, -1 level-surface edge, -2 tube edge
SHARED = -1
TUBE_EDGE = -2


class InvalidModelError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations) or "invalid model")


class UnreachableError(RuntimeError):
    pass


@dataclass(frozen=True)
class Locus:
    kind: str
    level: Optional[int] = None
    component: Optional[str] = None
    tube: Optional[str] = None
    depth: Optional[int] = None
    position: Optional[int] = None


@dataclass(frozen=True)
class Node:
    index: int
    id: str
    locus: Locus
    inj: float


@dataclass(frozen=True)
class DiscretizationParams:
    attach_weight: float = 1.0
    core_weight: float = 1.0


@dataclass(frozen=True)
class _TubeSeg:
    start: int
    tube: str
    n: int
    K: int
    core_length: float
    lo: int  # first block listing the tube
    hi: int  # last block listing the tube

    @property
    def width(self) -> int:
        return self.n + 1

    @property
    def core(self) -> int:
        return self.start + (self.K + 1) * self.width

    @property
    def stop(self) -> int:
        return self.core + 1

    def rung(self, k: int, p: int) -> int:
        return self.start + k * self.width + p


@dataclass(frozen=True, eq=False)
class MetricGraph:
    eps0: float
    D: float
    surfaces: tuple            # (level, component) per surface node, index order
    tubes: tuple               # _TubeSeg, index order
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    owners: np.ndarray
    level_index: dict          # level -> tuple of surface node indices
    base_node: int
    n_blocks: int
    _surface_lookup: dict = field(repr=False, default_factory=dict)
    _tube_lookup: dict = field(repr=False, default_factory=dict)
    _adj: tuple = field(repr=False, default=())
    _starts: tuple = field(repr=False, default=())

    @property
    def n_nodes(self) -> int:
        return len(self.indptr) - 1

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    # node identity --------------------------------------------------------
    def _seg(self, i: int) -> _TubeSeg:
        return self.tubes[bisect.bisect_right(self._starts, i) - 1]

    def locus(self, i: int) -> Locus:
        if not 0 <= i < self.n_nodes:
            raise KeyError(f"node index {i} out of range")
        if i < len(self.surfaces):
            level, comp = self.surfaces[i]
            return Locus(SURFACE, level=level, component=comp)
        seg = self._seg(i)
        if i == seg.core:
            return Locus(CORE, level=seg.lo, tube=seg.tube)
        k, p = divmod(i - seg.start, seg.width)
        return Locus(RUNG, level=seg.lo, tube=seg.tube, depth=k, position=p)

    def node_id(self, i: int) -> str:
        loc = self.locus(i)
        if loc.kind == SURFACE:
            return f"L{loc.level:06d}/{loc.component}"
        if loc.kind == CORE:
            return f"T/{loc.tube}/core"
        return f"T/{loc.tube}/{loc.depth:03d}/{loc.position:09d}"

    def index(self, node) -> int:
        """Index of a node given as index, id string, or :class:`Node`."""
        if isinstance(node, Node):
            return node.index
        if isinstance(node, (int, np.integer)):
            if not 0 <= node < self.n_nodes:
                raise KeyError(f"node index {node} out of range")
            return int(node)
        s = str(node)
        try:
            if s.startswith("L"):
                level, comp = s[1:].split("/", 1)
                return self._surface_lookup[(int(level), comp)]
            if s.startswith("T/"):
                if s.endswith("/core"):
                    return self._tube_lookup[s[2:-5]].core
                tube, k, p = s[2:].rsplit("/", 2)
                seg = self._tube_lookup[tube]
                k, p = int(k), int(p)
                if 0 <= k <= seg.K and 0 <= p <= seg.n:
                    return seg.rung(k, p)
        except (KeyError, ValueError):
            pass
        raise KeyError(f"no node {s!r} in graph")

    def node(self, node) -> Node:
        i = self.index(node)
        return Node(i, self.node_id(i), self.locus(i), self.inj(i))

    def inj(self, i: int) -> float:
        loc = self.locus(i)
        if loc.kind == SURFACE:
            return self.eps0
        seg = self._tube_lookup[loc.tube]
        if loc.kind == CORE:
            return seg.core_length / 2
        return max(seg.core_length / 2, self.eps0 * math.exp(-loc.depth))

    def depth(self, i: int) -> int:
        """Rung depth of a node; surfaces are 0, cores sit one below the deepest rung."""
        loc = self.locus(i)
        if loc.kind == SURFACE:
            return 0
        if loc.kind == CORE:
            return self._tube_lookup[loc.tube].K + 1
        return loc.depth

    def level_of(self, i: int) -> int:
        return self.locus(i).level

    def tube(self, tube_id: str) -> _TubeSeg:
        return self._tube_lookup[tube_id]

    def neighbors(self, i: int):
        indptr, indices, weights = self._adj
        lo, hi = indptr[i], indptr[i + 1]
        return list(zip(indices[lo:hi], weights[lo:hi]))

    def edge_weight(self, a: int, b: int) -> float:
        for v, w in self.neighbors(a):
            if v == b:
                return w
        raise KeyError(f"no edge {a}-{b}")

    def edges(self):
        """Yield ``(a, b, weight)`` once per undirected edge, ``a < b``."""
        for a in range(self.n_nodes):
            for b, w in self.neighbors(a):
                if a < b:
                    yield a, b, w

    def block_nodes(self, block: int) -> np.ndarray:
        """Boolean mask of nodes inside block ``block``."""
        mask = np.zeros(self.n_nodes, dtype=bool)
        for lvl in (block, block + 1):
            mask[list(self.level_index.get(lvl, ()))] = True
        for seg in self.tubes:
            if seg.lo <= block <= seg.hi:
                mask[seg.start:seg.stop] = True
        return mask


def discretize(model: ModelEnd, params: DiscretizationParams = DiscretizationParams()) -> MetricGraph:
    violations = validate(model)
    if violations:
        raise InvalidModelError(violations)
    c = model.constants

    levels = {}
    for block in model.blocks:
        levels[block.bottom.level] = block.bottom
        levels[block.top.level] = block.top
    surfaces = sorted((lvl, comp) for lvl, s in levels.items() for comp in s.components)
    surface_lookup = {key: i for i, key in enumerate(surfaces)}

    table = model.tube_table()
    span = model.tube_span()
    segs = []
    start = len(surfaces)
    for tid in sorted(table, key=lambda t: t + "/"):
        t = table[tid]
        seg = _TubeSeg(start, tid, t.total_count, t.max_rung, t.core_length,
                       min(span[tid]), max(span[tid]))
        segs.append(seg)
        start = seg.stop
    n_nodes = start
    tube_lookup = {s.tube: s for s in segs}

    us, vs, ws, os_ = [], [], [], []
    small: dict = {}

    def add(a: int, b: int, w: float, owner: int) -> None:
        key = (min(a, b), max(a, b))
        if key not in small or w < small[key][0]:
            small[key] = (w, owner)

    for lvl, s in levels.items():
        comps = sorted(s.components)
        sep = {frozenset(p) for p in s.separated}
        for x in range(len(comps)):
            for y in range(x + 1, len(comps)):
                if frozenset((comps[x], comps[y])) not in sep:
                    add(surface_lookup[(lvl, comps[x])], surface_lookup[(lvl, comps[y])], c.D, SHARED)
        for comp, tubes in s.boundary_tubes.items():
            a = surface_lookup[(lvl, comp)]
            for tid, attach in tubes.items():
                seg = tube_lookup[tid]
                if attach == "core":
                    add(a, seg.core, params.core_weight, SHARED)
                    continue
                if attach is None:
                    attach = _default_position(table[tid], seg, lvl)
                add(a, seg.rung(0, attach), params.attach_weight, SHARED)

    for block in model.blocks:
        lo, hi = block.bottom.level, block.top.level
        for comp in block.product_components():
            add(surface_lookup[(lo, comp)], surface_lookup[(hi, comp)], 1.0, block.index)
        for link in block.links:
            la = lo if link.a[0] == "bottom" else hi
            lb = lo if link.b[0] == "bottom" else hi
            add(surface_lookup[(la, link.a[1])], surface_lookup[(lb, link.b[1])], link.weight, block.index)

    for (a, b), (w, owner) in small.items():
        us.append(np.array([a])); vs.append(np.array([b]))
        ws.append(np.array([w])); os_.append(np.array([owner]))

    for seg in segs:
        W, K = seg.width, seg.K
        grid = seg.start + np.arange((K + 1) * W).reshape(K + 1, W)
        if seg.n > 0:
            a = grid[:, :-1].ravel()
            b = grid[:, 1:].ravel()
            us.append(a); vs.append(b)
            ws.append(np.repeat(np.exp(-np.arange(K + 1, dtype=float)), seg.n))
            os_.append(np.full(a.size, TUBE_EDGE))
        if K > 0:
            a = grid[:-1, :].ravel()
            b = grid[1:, :].ravel()
            us.append(a); vs.append(b)
            ws.append(np.ones(a.size)); os_.append(np.full(a.size, TUBE_EDGE))
        us.append(grid[K]); vs.append(np.full(W, seg.core))
        ws.append(np.full(W, params.core_weight)); os_.append(np.full(W, TUBE_EDGE))

    U = np.concatenate(us) if us else np.zeros(0, dtype=np.int64)
    V = np.concatenate(vs) if vs else np.zeros(0, dtype=np.int64)
    Wt = np.concatenate(ws) if ws else np.zeros(0)
    O = np.concatenate(os_) if os_ else np.zeros(0, dtype=np.int64)
    src = np.concatenate([U, V]).astype(np.int64)
    dst = np.concatenate([V, U]).astype(np.int64)
    wt = np.concatenate([Wt, Wt]).astype(float)
    own = np.concatenate([O, O]).astype(np.int64)
    order = np.lexsort((dst, src))
    src, dst, wt, own = src[order], dst[order], wt[order], own[order]
    indptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n_nodes), out=indptr[1:])

    level_index = {}
    for i, (lvl, _) in enumerate(surfaces):
        level_index.setdefault(lvl, []).append(i)
    level_index = {k: tuple(v) for k, v in sorted(level_index.items())}
    base_comp = model.base_component or sorted(levels[0].components)[0]
    base = surface_lookup[(0, base_comp)]

    g = MetricGraph(
        eps0=c.eps0, D=c.D, surfaces=tuple(surfaces), tubes=tuple(segs),
        indptr=indptr, indices=dst, weights=wt, owners=own,
        level_index=level_index, base_node=base, n_blocks=len(model.blocks),
        _surface_lookup=surface_lookup, _tube_lookup=tube_lookup,
        _adj=(indptr.tolist(), dst.tolist(), wt.tolist()),
        _starts=tuple(s.start for s in segs),
    )
    ncomp, _ = connected_components(_csr(g), directed=False)
    if ncomp != 1:
        raise UnreachableError(f"unreachable: discretized graph has {ncomp} components")
    return g


def _default_position(tube, seg: _TubeSeg, level: int) -> int:
    if tube.kind != CROSSING:
        return 0
    first, last = seg.lo, seg.hi + 1
    return round(seg.n * (level - first) / (last - first))


def _csr(g: MetricGraph, mask: Optional[np.ndarray] = None) -> csr_matrix:
    data, idx = g.weights, g.indices
    if mask is None:
        return csr_matrix((data, idx, g.indptr), shape=(g.n_nodes, g.n_nodes))
    rows = np.repeat(np.arange(g.n_nodes), np.diff(g.indptr))
    keep = mask
    return csr_matrix((data[keep], (rows[keep], idx[keep])), shape=(g.n_nodes, g.n_nodes))


def _block_edge_mask(g: MetricGraph, block: int) -> np.ndarray:
    nodes = g.block_nodes(block)
    rows = np.repeat(np.arange(g.n_nodes), np.diff(g.indptr))
    own = g.owners
    return nodes[rows] & nodes[g.indices] & ((own < 0) | (own == block))


# shortest paths -------------------------------------------------------------

def _search(g: MetricGraph, sources, target=None, edge_ok=None, limit=math.inf):
    """Heap Dijkstra; ties settle the smaller index (= smaller id) first."""
    indptr, indices, weights = g._adj
    dist = {}
    pred = {}
    heap = []
    for s in sorted(set(sources)):
        dist[s] = 0.0
        pred[s] = None
        heap.append((0.0, s))
    heapq.heapify(heap)
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == target or d > limit:
            break
        for e in range(indptr[u], indptr[u + 1]):
            if edge_ok is not None and not edge_ok[e]:
                continue
            v = indices[e]
            if v in done:
                continue
            nd = d + weights[e]
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, pred, done


def shortest_path_indices(g: MetricGraph, a: int, b: int, edge_ok=None) -> tuple:
    """Return ``(length, [index, ...])`` of a shortest path from ``a`` to ``b``."""
    if a == b:
        return 0.0, [a]
    dist, pred, done = _search(g, [a], target=b, edge_ok=edge_ok)
    if b not in done:
        raise UnreachableError(f"unreachable: {g.node_id(b)} from {g.node_id(a)}")
    path = [b]
    while path[-1] != a:
        path.append(pred[path[-1]])
    path.reverse()
    return path_length(g, path), path


def path_length(g: MetricGraph, path) -> float:
    """Correctly rounded length of a node walk (order independent)."""
    return math.fsum(g.edge_weight(path[i], path[i + 1]) for i in range(len(path) - 1))


def shortest_distance(g: MetricGraph, a, b) -> tuple:
    """Exact shortest weighted path between two nodes.

    Returns ``(length, [node id, ...])``.  Raises :class:`UnreachableError`
    when no path exists.
    """
    ia, ib = g.index(a), g.index(b)
    length, path = shortest_path_indices(g, ia, ib)
    return length, [g.node_id(i) for i in path]


def distances_from(g: MetricGraph, sources, block: Optional[int] = None) -> np.ndarray:
    """Distance from the nearest of ``sources`` to every node (inf if unreachable).

    With ``block`` set, paths are confined to that block's subgraph.
    """
    sources = [g.index(s) for s in sources]
    mat = _csr(g, None if block is None else _block_edge_mask(g, block))
    return _sp_dijkstra(mat, directed=True, indices=sources, min_only=True)


def block_thickness(g: MetricGraph, i: int) -> float:
    """Shortest bottom-to-top distance of block ``i`` inside the block."""
    if not 0 <= i < g.n_blocks:
        raise IndexError(f"no block {i}")
    dist = distances_from(g, g.level_index[i], block=i)
    return float(min(dist[v] for v in g.level_index[i + 1]))


def injectivity_radius(g: MetricGraph, node) -> float:
    return g.inj(g.index(node))


# export ---------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.9g}"


def to_csv(g: MetricGraph) -> str:
    lines = ["node_id_a,node_id_b,weight"]
    for a, b, w in g.edges():
        lines.append(f"{g.node_id(a)},{g.node_id(b)},{_fmt(w)}")
    return "\n".join(lines) + "\n"


def to_dot(g: MetricGraph) -> str:
    lines = ["graph model {"]
    for i in range(g.n_nodes):
        lines.append(f'  "{g.node_id(i)}" [inj={_fmt(g.inj(i))}];')
    for a, b, w in g.edges():
        lines.append(f'  "{g.node_id(a)}" -- "{g.node_id(b)}" [weight={_fmt(w)}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
