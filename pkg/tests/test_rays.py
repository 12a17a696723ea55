import math
import random

import numpy as np
import pytest

from endmodels import builders as B
from endmodels import checks as K
from endmodels import graph as G
from endmodels import rays as R

from conftest import build, graph


def test_vertical_in_bounded_geometry():
    g = graph("bounded", n_blocks=60)
    ray = R.trace_ray(g, R.Vertical("S1"), 50)
    assert len(ray.checkpoints) == 50
    assert all(g.locus(c).kind == G.SURFACE for c in ray.checkpoints)
    assert all(g.inj(c) == 0.1 for c in ray.checkpoints)
    prof = R.deficit_profile(g, ray)
    assert all(s.delta == 0 for s in prof.samples)
    assert prof.trend == R.Trend("Bounded", 0.0)
    cls = R.classify(g, ray)
    assert (cls.exiting, cls.am, cls.C_est, cls.thick, cls.inf_inj, cls.horosphere) == \
        (True, True, 0.0, True, 0.1, "ProperlyEmbedded")


def test_winding_enters_every_thin_block():
    twists = [2 ** i for i in range(1, 6)]
    g = graph("ibounded", twists=twists)
    ray = R.trace_ray(g, R.Winding(tuple(K._winding(twists))), 10)
    for k, seg in enumerate(ray.segments):
        if k % 2 == 1:
            assert max(g.depth(v) for v in seg) >= 1


def test_winding_is_dense():
    twists = [2 ** i for i in range(1, 11)]
    g = graph("ibounded", twists=twists)
    ray = R.trace_ray(g, R.Winding(tuple(K._winding(twists))), 21)
    cls = R.classify(g, ray)
    assert cls.am_trend.kind == "Linear"
    assert cls.summary() == "NotAM, Thin, Dense"
    assert cls.am_verdict == "NotAM(Linear)"


def test_winding_without_tube_fails():
    g = graph("bounded", n_blocks=3)
    with pytest.raises(R.RayError, match="no tube to wind at level 1"):
        R.trace_ray(g, R.Winding((0, 2)), 4)


def test_split_minimizing_is_recurrent():
    run = K.trichotomy_runs()[2]
    g = graph(run[0], **run[1])
    ray = R.trace_ray(g, R.Minimizing(), 20)
    cls = R.classify(g, ray)
    assert cls.summary() == "AM, Thin, Recurrent"


def test_minimizing_deficit_small_on_every_family():
    for fam, params in [("bounded", {"n_blocks": 5}), ("flute", {"n_necks": 4}),
                        ("ibounded", {"twists": [3, 9, 27]}), ("amalg", B.amalg_cumulative(4)),
                        ("split", B.split_geometric(4)), ("thin_all", {"js": [60, 90]})]:
        g = graph(fam, **params)
        ray = R.trace_ray(g, R.Minimizing(), g.n_blocks + 1)
        prof = R.deficit_profile(g, ray)
        assert prof.max_delta <= 2 * g.D
        assert K.deficit_law_violations(prof) == []


def test_horizon_too_short():
    g = graph("bounded", n_blocks=30)
    ray = R.trace_ray(g, R.Vertical("S0"), 19)
    with pytest.raises(R.RayError, match="horizon too short for trend classification"):
        R.classify(g, ray)


def test_explicit_rejects_unknown_nodes():
    g = graph("bounded", n_blocks=3)
    with pytest.raises(R.RayError, match="no node"):
        R.trace_ray(g, R.Explicit(("L000000/S0", "L000001/Q")), 2)


def test_bounded_explicit_ray_is_not_exiting():
    g = graph("bounded", n_blocks=10)
    ids = tuple(f"L{lvl:06d}/S0" for lvl in [0, 1, 2, 3, 2, 1, 0] * 4)
    ray = R.trace_ray(g, R.Explicit(ids), len(ids))
    cls = R.classify(g, ray)
    assert not cls.exiting and cls.horosphere is None
    assert cls.summary().endswith("NonExiting")


def test_tail_swap_keeps_am_verdict():
    g = graph("bounded", n_blocks=40)
    rng = random.Random(5)
    tail = [f"L{lvl:06d}/{rng.choice(['S0', 'S1', 'S2'])}" for lvl in range(10, 41)]
    heads = [[f"L{lvl:06d}/{c}" for lvl in range(10)] for c in ("S0", "S2")]
    verdicts = set()
    for head in heads:
        ray = R.trace_ray(g, R.Explicit(tuple(head + tail)), 41)
        verdicts.add(R.classify(g, ray).am_verdict)
    assert len(verdicts) == 1


def test_verdict_table():
    assert R.horosphere(False, True) == R.horosphere(False, False) == "Dense"
    assert R.horosphere(True, False) == "Recurrent"
    assert R.horosphere(True, True) == "ProperlyEmbedded"


@pytest.mark.parametrize("y,kind", [
    (lambda t: 0 * t, "Bounded"),
    (lambda t: 3 + 0 * t, "Bounded"),
    (lambda t: 2 + 0.5 * t, "Linear"),
    (lambda t: 1 + 2 * np.log1p(t), "Logarithmic"),
    (lambda t: 5 - 0.1 * t, "Bounded"),
])
def test_fit_trend(y, kind):
    t = np.linspace(0, 200, 30)
    assert R.fit_trend(t, y(t)).kind == kind


def test_fit_trend_noise_prefers_bounded():
    rng = np.random.default_rng(0)
    t = np.linspace(0, 100, 40)
    assert R.fit_trend(t, 2 + rng.uniform(0, 0.5, size=t.size)).kind == "Bounded"


def test_checkpoint_search_matches_enumeration():
    g = graph("ibounded", twists=[2, 4, 8])
    budget = 15.0
    dp, reached = K.max_am_depth(g, budget, 5)
    assert reached == 5
    assert dp == K.max_am_depth_enumerated(g, budget, 5)


def test_checkpoint_search_finds_deep_segments():
    # a generous budget lets a single segment run through a ladder
    g = graph("thin_all", js=[60])
    dp, _ = K.max_am_depth(g, 100.0, 2)
    assert dp == K.max_am_depth_enumerated(g, 100.0, 2) >= 3


def test_profile_csv_and_report():
    g = graph("bounded", n_blocks=25)
    ray = R.trace_ray(g, R.Vertical("S0"), 21)
    cls = R.classify(g, ray)
    text = R.report(g, ray, cls)
    assert "horosphere: ProperlyEmbedded" in text
    assert "t,delta,inj,depth\n0,0,0.1,0\n1,0,0.1,0\n" in text
