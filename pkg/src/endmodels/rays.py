"""Ray tracing, almost-minimizing deficits and the horosphere trichotomy.

A ray is a sequence of checkpoints, one per level, joined by shortest
paths (or by prescribed tube loops for winding rays).  Its deficit is
``δ(t) = t - d(γ(0), γ(t))``; the ray is ``C``-almost minimizing when
``δ ≤ C`` throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .graph import MetricGraph, distances_from, path_length, shortest_path_indices

MIN_HORIZON = 20
ZERO = 1e-9


# strategies -----------------------------------------------------------------

@dataclass(frozen=True)
class Vertical:
    component: str


@dataclass(frozen=True)
class Minimizing:
    pass


@dataclass(frozen=True)
class Winding:
    counts: tuple  # loops inserted in block ℓ, i.e. between levels ℓ and ℓ+1


@dataclass(frozen=True)
class Explicit:
    nodes: tuple


Strategy = Union[Vertical, Minimizing, Winding, Explicit]


def strategy_name(s: Strategy) -> str:
    return type(s).__name__


@dataclass(frozen=True)
class Ray:
    strategy: Strategy
    checkpoints: tuple       # node indices
    segments: tuple          # node walks; segments[k] ends at checkpoints[k+1]

    def levels(self, g: MetricGraph) -> list:
        return [g.level_of(c) for c in self.checkpoints]


class RayError(ValueError):
    pass


def trace_ray(g: MetricGraph, strategy: Strategy, horizon: int) -> Ray:
    """Checkpoints at levels ``0..horizon-1`` (Explicit rays use the given nodes)."""
    if horizon < 1:
        raise RayError("horizon must be >= 1")
    if isinstance(strategy, Explicit):
        try:
            cps = tuple(g.index(n) for n in strategy.nodes)
        except KeyError as exc:
            raise RayError(str(exc.args[0])) from None
        if not cps:
            raise RayError("explicit ray needs at least one node")
        return Ray(strategy, cps, _join(g, cps))
    levels = range(min(horizon, g.n_blocks + 1))
    if isinstance(strategy, Vertical):
        cps = []
        for lvl in levels:
            key = (lvl, strategy.component)
            if key not in g._surface_lookup:
                raise RayError(f"component {strategy.component!r} missing at level {lvl}")
            cps.append(g._surface_lookup[key])
        cps = tuple(cps)
        return Ray(strategy, cps, _join(g, cps))
    cps = _minimizers(g, levels)
    if isinstance(strategy, Minimizing):
        return Ray(strategy, cps, _join(g, cps))
    if isinstance(strategy, Winding):
        segs = []
        for k in range(len(cps) - 1):
            m = strategy.counts[k] if k < len(strategy.counts) else 0
            segs.append(_wind(g, cps[k], cps[k + 1], k, m))
        return Ray(strategy, cps, tuple(segs))
    raise RayError(f"unknown strategy {strategy!r}")


def _minimizers(g: MetricGraph, levels) -> tuple:
    dist = distances_from(g, [g.base_node])
    cps = []
    for lvl in levels:
        cand = sorted(g.level_index[lvl])
        best = min(dist[c] for c in cand)
        cps.append(next(c for c in cand if dist[c] <= best + ZERO))
    return tuple(cps)


def _join(g: MetricGraph, cps) -> tuple:
    return tuple(shortest_path_indices(g, a, b)[1] for a, b in zip(cps, cps[1:]))


def _wind(g: MetricGraph, a: int, b: int, block: int, loops: int) -> list:
    if loops <= 0:
        return shortest_path_indices(g, a, b)[1]
    segs = [s for s in g.tubes if s.lo <= block <= s.hi]
    if not segs:
        raise RayError(f"no tube to wind at level {block}")
    seg = segs[0]
    entry = seg.rung(0, 0)
    walk = list(shortest_path_indices(g, a, entry)[1])
    down = [seg.rung(k, 0) for k in range(1, seg.K + 1)]
    loop = down + [seg.core] + down[::-1] + [entry]
    for _ in range(loops):
        walk.extend(loop)
    walk.extend(shortest_path_indices(g, entry, b)[1][1:])
    return walk


# deficit profile -------------------------------------------------------------

@dataclass(frozen=True)
class Trend:
    kind: str                # "Bounded" | "Logarithmic" | "Linear"
    a: float
    b: float = 0.0

    def __str__(self) -> str:
        if self.kind == "Bounded":
            return f"Bounded({self.a:.6g})"
        return f"{self.kind}({self.a:.6g},{self.b:.6g})"


_ORDER = ("Bounded", "Logarithmic", "Linear")


def fit_trend(t, y) -> Trend:
    """Least-squares selection among ``a``, ``a + b ln(1+t)`` and ``a + b t``.

    A faster-growing model is chosen only when its residual norm is at most
    half that of every slower one; otherwise the slowest model within that
    factor wins.  Non-positive slopes count as bounded.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(y) == 0 or float(np.max(np.abs(y))) < ZERO:
        return Trend("Bounded", 0.0)
    one = np.ones_like(t)
    fits = {}
    for kind, cols in (("Bounded", [one]),
                       ("Logarithmic", [one, np.log1p(t)]),
                       ("Linear", [one, t])):
        A = np.column_stack(cols)
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        res = float(np.linalg.norm(A @ coef - y))
        fits[kind] = (res, coef)
    best = min(fits[k][0] for k in _ORDER)
    for kind in _ORDER:
        res, coef = fits[kind]
        if res <= 2 * best + ZERO:
            if kind == "Bounded" or coef[1] <= 0:
                return Trend("Bounded", float(np.max(y)))
            return Trend(kind, float(coef[0]), float(coef[1]))
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class Sample:
    t: float
    delta: float
    inj: float       # min injectivity radius over the segment ending here
    depth: int       # max rung depth over the segment ending here
    level: int


@dataclass(frozen=True)
class DeficitProfile:
    samples: tuple
    trend: Trend

    @property
    def max_delta(self) -> float:
        return max(s.delta for s in self.samples)


def deficit_profile(g: MetricGraph, ray: Ray, dist: Optional[np.ndarray] = None) -> DeficitProfile:
    c0 = ray.checkpoints[0]
    if dist is None:
        dist = distances_from(g, [c0])
    samples = [Sample(0.0, 0.0, g.inj(c0), g.depth(c0), g.level_of(c0))]
    t_parts = []
    for seg, c in zip(ray.segments, ray.checkpoints[1:]):
        t_parts.append(path_length(g, seg))
        t = math.fsum(t_parts)
        delta = t - float(dist[c])
        if abs(delta) < ZERO:
            delta = 0.0
        samples.append(Sample(t, delta, min(g.inj(v) for v in seg),
                              max(g.depth(v) for v in seg), g.level_of(c)))
    trend = fit_trend([s.t for s in samples], [s.delta for s in samples])
    return DeficitProfile(tuple(samples), trend)


# classification --------------------------------------------------------------

@dataclass(frozen=True)
class RayClassification:
    exiting: bool
    am: bool
    am_trend: Trend
    C_est: float
    thick: bool
    inf_inj: float
    depth_trend: Trend
    horosphere: Optional[str]   # None for non-exiting rays
    profile: DeficitProfile = field(repr=False, default=None)

    @property
    def am_verdict(self) -> str:
        if self.am:
            return f"AlmostMinimizing({self.C_est:.6g})"
        return f"NotAM({self.am_trend.kind})"

    @property
    def thickness_verdict(self) -> str:
        if self.thick:
            return f"Thick({self.inf_inj:.6g})"
        return f"Thin({self.depth_trend.kind})"

    def summary(self) -> str:
        am = "AM" if self.am else "NotAM"
        th = "Thick" if self.thick else "Thin"
        return f"{am}, {th}, {self.horosphere or 'NonExiting'}"


def is_exiting(levels) -> bool:
    """The last quarter of the levels stays above everything seen in the first half."""
    n = len(levels)
    if n < 4:
        return False
    return min(levels[n - n // 4:]) > max(levels[:n // 2])


def horosphere(am: bool, thick: bool) -> str:
    if not am:
        return "Dense"
    return "ProperlyEmbedded" if thick else "Recurrent"


def classify(g: MetricGraph, ray: Ray, C: Optional[float] = None, eps: Optional[float] = None,
             profile: Optional[DeficitProfile] = None) -> RayClassification:
    if len(ray.checkpoints) < MIN_HORIZON:
        raise RayError("horizon too short for trend classification")
    if C is None:
        C = default_C(g)
    if eps is None:
        eps = default_eps(g)
    prof = profile or deficit_profile(g, ray)
    samples = prof.samples
    exiting = not isinstance(ray.strategy, Explicit) or is_exiting([s.level for s in samples])
    C_est = prof.max_delta
    am = prof.trend.kind == "Bounded" and C_est <= C
    tail = samples[len(samples) // 2:]
    inf_inj = min(s.inj for s in tail)
    running, deepest = [], 0
    for s in samples:
        deepest = max(deepest, s.depth)
        running.append(deepest)
    depth_trend = fit_trend([s.t for s in tail], running[len(samples) // 2:])
    if depth_trend.kind == "Bounded":
        depth_trend = Trend("Bounded", float(max(running[len(samples) // 2:])))
    thick = inf_inj >= eps and depth_trend.kind == "Bounded"
    return RayClassification(
        exiting=exiting, am=am, am_trend=prof.trend, C_est=C_est, thick=thick,
        inf_inj=inf_inj, depth_trend=depth_trend,
        horosphere=horosphere(am, thick) if exiting else None, profile=prof,
    )


def default_C(g: MetricGraph) -> float:
    return 4 * g.D


def default_eps(g: MetricGraph) -> float:
    return g.eps0 * math.exp(-5)


def profile_csv(prof: DeficitProfile) -> str:
    lines = ["t,delta,inj,depth"]
    for s in prof.samples:
        lines.append(f"{s.t:.9g},{s.delta:.9g},{s.inj:.9g},{s.depth}")
    return "\n".join(lines) + "\n"


def report(g: MetricGraph, ray: Ray, cls: RayClassification) -> str:
    head = [
        f"strategy: {strategy_name(ray.strategy)}",
        f"checkpoints: {len(ray.checkpoints)}",
        f"exiting: {str(cls.exiting).lower()}",
        f"am_verdict: {cls.am_verdict}",
        f"deficit_trend: {cls.am_trend}",
        f"thickness_verdict: {cls.thickness_verdict}",
        f"depth_trend: {cls.depth_trend}",
        f"horosphere: {cls.horosphere or 'excluded (non-exiting)'}",
        "samples:",
    ]
    return "\n".join(head) + "\n" + profile_csv(cls.profile)
