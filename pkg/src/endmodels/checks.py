"""Acceptance checks shared by the test suite and the ``report`` command.

Each ``check_*`` function builds its own models, runs the measurement and
returns a :class:`CheckResult`.  Deficit profiles produced along the way are
recorded in a :class:`Collector` so the deficit laws can be asserted over
every ray that any check traced.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field

import numpy as np

from . import builders as B
from . import graph as G
from . import rays as R
from .model import THICK, Block, Constants, Link, ModelEnd, SplitSurfaceSpec, validate

# pinned tolerances
TRICHOTOMY_SECONDS = 10.0
DEFICIT_TOL = 1e-9          # slack on δ >= 0 and δ non-decreasing
AMALG_SLACK = 2.0           # multiplicative slack on thickness ≈ Σ(m_j + 1)
AMALG_DEPTH = 3             # max rung depth of minimizing rays in the amalgamated family
SPLIT_DEPTH_OFFSET = 2.0    # depth at block i >= ln(l_i) - 2
LADDER_SLACK = 3.0          # crossing <= 2 ln n_T + 3
THICKNESS_TOL = 1e-9


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        tag = f" [{self.number:2d}]" if self.number else ""
        return f"{'PASS' if self.passed else 'FAIL'}{tag} {self.name}: {self.detail}"


@dataclass
class Collector:
    profiles: list = field(default_factory=list)

    def add(self, label: str, prof: R.DeficitProfile) -> R.DeficitProfile:
        self.profiles.append((label, prof))
        return prof


def deficit_law_violations(prof: R.DeficitProfile, tol: float = DEFICIT_TOL) -> list:
    bad = []
    prev = None
    for k, s in enumerate(prof.samples):
        if s.delta < -tol:
            bad.append(f"δ<0 at sample {k}")
        if prev is not None and s.delta < prev - tol:
            bad.append(f"δ decreases at sample {k}")
        prev = s.delta
    return bad


def _graph(family: str, params: dict) -> G.MetricGraph:
    return G.discretize(B.build(B.FamilyParams(family, params)))


def _classify(g, strategy, horizon, col: Collector, label: str):
    ray = R.trace_ray(g, strategy, horizon)
    prof = col.add(label, R.deficit_profile(g, ray))
    return ray, R.classify(g, ray, profile=prof)


# family parameters used by the checks -------------------------------------------------

def trichotomy_runs():
    ib = [2 ** i for i in range(1, 11)]
    sp = [math.ceil(4 * 1.35 ** i) for i in range(1, 20)]
    return [
        ("bounded", {"n_blocks": 20}, R.Vertical("S0"), "ProperlyEmbedded"),
        ("ibounded", {"twists": ib}, R.Winding(tuple(_winding(ib))), "Dense"),
        ("split", {"triples": [[l, l, 2 * l] for l in sp]}, R.Minimizing(), "Recurrent"),
    ]


def _winding(twists):
    out = []
    for n in twists:
        out += [0, n]
    return out


def split_params_large():
    return {"triples": [[2 ** (i + 2), 2 ** (i + 2), 2 ** (i + 3)] for i in range(1, 13)]}


# criteria ----------------------------------------------------------------------------

def check_trichotomy(col: Collector) -> CheckResult:
    t0 = time.perf_counter()
    got, ok = [], True
    for family, params, strategy, expect in trichotomy_runs():
        g = _graph(family, params)
        _, cls = _classify(g, strategy, 20, col, f"trichotomy/{family}")
        got.append(f"{family}/{R.strategy_name(strategy)}={cls.horosphere}")
        ok &= cls.horosphere == expect
    elapsed = time.perf_counter() - t0
    ok &= elapsed < TRICHOTOMY_SECONDS
    return CheckResult(1, "trichotomy", ok, f"{', '.join(got)}; {elapsed:.2f}s < {TRICHOTOMY_SECONDS:g}s")


def check_bounded(col: Collector, seed: int = 0) -> CheckResult:
    g = _graph("bounded", {"n_blocks": 50})
    rng = random.Random(seed)
    comps = ["S0", "S1", "S2"]
    strategies = [R.Vertical(c) for c in comps] + [R.Minimizing()]
    while len(strategies) < 100:
        strategies.append(R.Explicit(tuple(f"L{lvl:06d}/{rng.choice(comps)}" for lvl in range(51))))
    bad = 0
    for k, s in enumerate(strategies):
        _, cls = _classify(g, s, 51, col, f"bounded/{k}")
        if not (cls.exiting and cls.thick and cls.inf_inj == g.eps0):
            bad += 1
    return CheckResult(2, "bounded geometry", bad == 0,
                       f"{len(strategies) - bad}/{len(strategies)} rays Thick with inf_inj = {g.eps0:g}")


def candidates(g: G.MetricGraph, level: int) -> list:
    """Checkpoint candidates at ``level``: surface nodes and the depth-0 rungs they touch."""
    out = set(g.level_index[level])
    for v in g.level_index[level]:
        for u, _ in g.neighbors(v):
            loc = g.locus(u)
            if loc.kind == G.RUNG and loc.depth == 0:
                out.add(int(u))
    return sorted(out)


def max_am_depth(g: G.MetricGraph, budget: float, levels: int) -> tuple:
    """Max rung depth on any segment of a checkpoint sequence whose segments cost <= budget.

    Dynamic program over reachable ``(level, checkpoint)`` states.  Returns
    ``(max depth, number of levels reached)``.
    """
    seg_cache = {}

    def seg(a, b):
        if (a, b) not in seg_cache:
            dist, path = G.shortest_path_indices(g, a, b)
            seg_cache[(a, b)] = (dist, max(g.depth(v) for v in path))
        return seg_cache[(a, b)]

    reach = set(candidates(g, 0))
    deepest, reached = 0, 1
    for lvl in range(levels - 1):
        nxt = set()
        for a in sorted(reach):
            for b in candidates(g, lvl + 1):
                d, depth = seg(a, b)
                if d <= budget:
                    nxt.add(b)
                    deepest = max(deepest, depth)
        if not nxt:
            break
        reach, reached = nxt, reached + 1
    return deepest, reached


def max_am_depth_enumerated(g: G.MetricGraph, budget: float, levels: int) -> int:
    """Literal enumeration of all checkpoint sequences (small horizons only)."""
    cand = [candidates(g, lvl) for lvl in range(levels)]
    deepest = 0
    for seq in itertools.product(*cand):
        depths = []
        for a, b in zip(seq, seq[1:]):
            d, path = G.shortest_path_indices(g, a, b)
            if d > budget:
                break
            depths.append(max(g.depth(v) for v in path))
        else:
            deepest = max([deepest] + depths)
    return deepest


def check_ibounded(col: Collector) -> CheckResult:
    twists = [2 ** i for i in range(1, 13)]
    g = _graph("ibounded", {"twists": twists})
    _, cls = _classify(g, R.Winding(tuple(_winding(twists))), g.n_blocks + 1, col, "ibounded/winding")
    a_ok = (not cls.thick) and (not cls.am) and cls.am_trend.kind == "Linear"
    c = Constants()
    L0 = 2 * c.D + 3 * c.L
    budget = L0 + 4 * c.D
    bound = math.ceil(math.log(1 + budget))
    deepest, reached = max_am_depth(g, budget, g.n_blocks + 1)
    b_ok = deepest <= bound and reached == g.n_blocks + 1
    return CheckResult(3, "i-bounded", a_ok and b_ok,
                       f"(a) Winding {cls.thickness_verdict} {cls.am_verdict}; "
                       f"(b) max depth {deepest} <= {bound} over {reached} levels with segments <= {budget:g}")


def amalg_uniform_params(D0: int, n_blocks: int = 30, n: int = 64) -> dict:
    return {"blocks": [[[D0 - 1, n]] for _ in range(n_blocks)]}


def check_amalg_uniform(col: Collector) -> CheckResult:
    c = Constants()
    C = 4 * c.D
    worst = []
    ok = True
    for D0 in (2, 4, 8):
        g = _graph("amalg", amalg_uniform_params(D0))
        thick = [G.block_thickness(g, i) for i in range(g.n_blocks)]
        ok &= max(thick) <= D0 + THICKNESS_TOL
        ray = R.trace_ray(g, R.Minimizing(), g.n_blocks + 1)
        col.add(f"amalg-uniform/{D0}", R.deficit_profile(g, ray))
        segs = [G.path_length(g, s) for s in ray.segments]
        limit = (D0 + 2 * c.L) + C
        ok &= len(segs) == 30 and all(s <= limit for s in segs)
        worst.append(f"D0={D0}: max seg {max(segs):g} <= {limit:g}")
    return CheckResult(4, "amalgamated sufficiency", ok, "; ".join(worst))


def check_amalg_counterexample(col: Collector) -> CheckResult:
    params = B.amalg_cumulative(8)
    g = _graph("amalg", params)
    thick = [G.block_thickness(g, i) for i in range(8)]
    expect = [sum(m + 1 for m, _ in lst) for lst in params["blocks"]]
    increasing = all(b > a for a, b in zip(thick, thick[1:]))
    within = all(e / AMALG_SLACK <= t <= e * AMALG_SLACK for t, e in zip(thick, expect))
    ray = R.trace_ray(g, R.Minimizing(), 9)
    prof = col.add("amalg-5.1/minimizing", R.deficit_profile(g, ray))
    depth = max(s.depth for s in prof.samples)
    am = prof.max_delta <= 4 * g.D
    ok = increasing and within and depth <= AMALG_DEPTH and am
    return CheckResult(5, "unbounded-thickness counterexample", ok,
                       f"thickness {[round(t, 3) for t in thick]} vs Σ(m_j+1) {expect}; "
                       f"minimizing depth {depth} <= {AMALG_DEPTH}, max δ {prof.max_delta:g}")


def hanging_routes(g: G.MetricGraph, model: ModelEnd) -> list:
    """Per split block ``i``: (through-tube cost, thick detour cost) from ``A_{i-1}`` to ``A_i``.

    The through cost is a Dijkstra distance inside the block with the detour
    edges removed, so the route must cross the hanging tube.
    """
    ends = []
    for i, block in enumerate(model.blocks, start=1):
        a = g.index(f"L{i - 1:06d}/A{i - 1}+")
        via = g.index(f"L{i - 1:06d}/A{i}-")
        b = g.index(f"L{i:06d}/A{i}+")
        link = next(k for k in block.links if k.a[0] == k.b[0])
        ends.append((a, via, b, link.weight))
    rows = np.repeat(np.arange(g.n_nodes), np.diff(g.indptr))
    keep = np.ones(len(g.indices), dtype=bool)
    for a, via, _, _ in ends:
        keep &= ~(((rows == a) & (g.indices == via)) | ((rows == via) & (g.indices == a)))
    mat = G._csr(g, keep)
    out = []
    for blk, (a, via, b, w) in enumerate(ends):
        thick = w + G.shortest_distance(g, via, b)[0]
        nodes = np.flatnonzero(g.block_nodes(blk))
        sub = mat[nodes][:, nodes]
        pa, pb = (int(np.searchsorted(nodes, x)) for x in (a, b))
        dist = G._sp_dijkstra(sub, directed=True, indices=pa)
        out.append((float(dist[pb]), thick))
    return out


def check_split_counterexample(col: Collector) -> CheckResult:
    params = split_params_large()
    model = B.build(B.FamilyParams("split", params))
    g = G.discretize(model)
    triples = params["triples"]
    thick = [G.block_thickness(g, i) for i in range(len(triples))]
    B_ = thick[0]
    const = all(abs(t - B_) <= THICKNESS_TOL for t in thick)
    ray = R.trace_ray(g, R.Minimizing(), len(triples) + 1)
    prof = col.add("split/minimizing", R.deficit_profile(g, ray))
    depth_ok, shortfall = True, []
    for i, (l, m, n) in enumerate(triples, start=1):
        need = math.log(l) - SPLIT_DEPTH_OFFSET
        have = prof.samples[i].depth
        if have < need:
            depth_ok = False
            shortfall.append(i)
    ineq = all(1 + math.log(2 * triples[i][0]) + 3 < triples[i + 1][1] for i in range(len(triples) - 1))
    routes_ok = all(through < detour for through, detour in hanging_routes(g, model))
    ok = const and depth_ok and ineq and routes_ok
    depths = [s.depth for s in prof.samples[1:]]
    return CheckResult(6, "bounded-thickness counterexample", ok,
                       f"thickness all = {B_:g}; depths {depths} >= ln(l_i)-2"
                       f"{' (short at ' + str(shortfall) + ')' if shortfall else ''}; "
                       f"route inequality {'holds' if ineq else 'fails'}; tube route shorter {routes_ok}")


def ladder_graph(n: int) -> G.MetricGraph:
    return _graph("ibounded", {"twists": [n]})


def ladder_costs(n: int) -> tuple:
    """(tube crossing cost, boundary route cost) between the two attachment rungs of one ladder."""
    g = ladder_graph(n)
    seg = g.tube("T000")
    a, b = seg.rung(0, 0), seg.rung(0, n)
    rows = np.repeat(np.arange(g.n_nodes), np.diff(g.indptr))
    tube = g.owners == G.TUBE_EDGE
    crossing = G.shortest_path_indices(g, a, b, edge_ok=tube)[0]
    depth0 = np.array([g.depth(v) == 0 and g.locus(v).kind == G.RUNG for v in range(g.n_nodes)])
    boundary = G.shortest_path_indices(g, a, b, edge_ok=tube & depth0[rows] & depth0[g.indices])[0]
    return crossing, boundary


def check_ladder() -> CheckResult:
    ok, parts = True, []
    for j in range(2, 11):
        n = 2 ** j
        crossing, boundary = ladder_costs(n)
        ok &= crossing <= 2 * math.log(n) + LADDER_SLACK and boundary == n
        parts.append(f"{n}:{crossing:.3f}")
    return CheckResult(7, "log-shortcut law", ok, f"crossing costs {' '.join(parts)}; boundary routes exact")


def check_flute(col: Collector, seed: int = 0) -> CheckResult:
    necks = 100
    g = _graph("flute", {"n_necks": necks})
    top = g.n_blocks + 1
    rng = random.Random(seed)
    unbounded = [R.Vertical("S"), R.Minimizing(),
                 R.Explicit(tuple(f"L{lvl:06d}/S" for lvl in range(0, top, 1)))]
    ok, worst = True, 0.0
    for k, s in enumerate(unbounded):
        _, cls = _classify(g, s, top, col, f"flute/{k}")
        ok &= cls.exiting
        for n in range(1, necks + 1):
            inj = cls.profile.samples[2 * n].inj      # segment crossing neck n
            ok &= inj <= 1 / (2 * n)
            worst = max(worst, inj * 2 * n)
    bounded_ok = True
    for k in range(5):
        lvls = [rng.randrange(0, 6) for _ in range(30)]
        ray = R.trace_ray(g, R.Explicit(tuple(f"L{lv:06d}/S" for lv in lvls)), 30)
        prof = col.add(f"flute/bounded{k}", R.deficit_profile(g, ray))
        cls = R.classify(g, ray, profile=prof)
        bounded_ok &= (not cls.exiting) and cls.horosphere is None
    return CheckResult(8, "flute dichotomy", ok and bounded_ok,
                       f"unbounded rays: max inj·2n = {worst:g} <= 1; bounded rays non-exiting {bounded_ok}")


def random_small_model(rng: random.Random, max_nodes: int = 12) -> ModelEnd:
    """Thick-block model with integer link weights and at most ``max_nodes`` surface nodes."""
    while True:
        levels = rng.randint(2, 4)
        comps = [rng.randint(1, 3) for _ in range(levels)]
        if sum(comps) <= max_nodes:
            break
    surfaces = []
    for lvl, k in enumerate(comps):
        names = [f"P{c}" for c in range(k)]
        pairs = [(a, b) for a, b in itertools.combinations(names, 2) if rng.random() < 0.4]
        surfaces.append(SplitSurfaceSpec(lvl, {nm: 3 for nm in names}, {}, tuple(pairs)))
    blocks = []
    for i in range(levels - 1):
        bot, top = surfaces[i], surfaces[i + 1]
        links = []
        for _ in range(rng.randint(1, 3)):
            a = rng.choice(sorted(bot.components))
            b = rng.choice(sorted(top.components))
            links.append(Link(("bottom", a), ("top", b), float(rng.randint(1, 9))))
        shared = sorted(set(bot.components) & set(top.components))
        product = tuple(c for c in shared if rng.random() < 0.5)
        blocks.append(Block(i, THICK, bot, top, links=tuple(links), product=product))
    return ModelEnd(tuple(blocks), surface_complexity=6)


def simple_path_oracle(g: G.MetricGraph, a: int, b: int) -> float:
    """Exhaustive simple-path enumeration with branch-and-bound."""
    best = math.inf

    def dfs(u, seen, acc):
        nonlocal best
        if acc >= best:
            return
        if u == b:
            best = acc
            return
        for v, w in g.neighbors(u):
            if v not in seen:
                seen.add(v)
                dfs(v, seen, acc + w)
                seen.discard(v)

    dfs(a, {a}, 0.0)
    return best


def check_oracle(seed: int = 0, trials: int = 200) -> CheckResult:
    rng = random.Random(seed)
    done = mismatches = 0
    while done < trials:
        model = random_small_model(rng)
        if validate(model):
            continue
        try:
            g = G.discretize(model)
        except G.UnreachableError:
            continue
        a, b = rng.randrange(g.n_nodes), rng.randrange(g.n_nodes)
        got = G.shortest_distance(g, a, b)[0]
        if got != simple_path_oracle(g, a, b):
            mismatches += 1
        done += 1
    return CheckResult(9, "oracle equivalence", mismatches == 0,
                       f"{done - mismatches}/{done} random graphs agree exactly")


def check_deficit_laws(col: Collector) -> CheckResult:
    bad = []
    for label, prof in col.profiles:
        if deficit_law_violations(prof):
            bad.append(label)
    return CheckResult(10, "deficit laws", not bad and bool(col.profiles),
                       f"{len(col.profiles) - len(bad)}/{len(col.profiles)} profiles with δ >= 0 and non-decreasing"
                       + (f"; violations in {bad[:5]}" if bad else ""))


def run_all(seed: int = 0) -> list:
    col = Collector()
    results = [
        check_trichotomy(col),
        check_bounded(col, seed),
        check_ibounded(col),
        check_amalg_uniform(col),
        check_amalg_counterexample(col),
        check_split_counterexample(col),
        check_ladder(),
        check_flute(col, seed),
        check_oracle(seed),
    ]
    results.append(check_deficit_laws(col))
    return results
