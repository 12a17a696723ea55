import random
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from endmodels import builders as B
from endmodels import hierarchy as H
from endmodels.model import Tube

from conftest import build


def one_domain():
    simplices = tuple(frozenset({f"a{k}"}) for k in range(3))
    g = H.TightGeodesic("g", "S", simplices, simplices[0], simplices[-1])
    path = [s | {"f1", "f2"} for s in simplices]
    return g, path, {"S": H.Domain("S", 6)}


def test_single_geodesic_is_valid():
    g, path, doms = one_domain()
    assert H.validate_hierarchy([g], path, doms) == []


def test_short_geodesic_tightness():
    simplices = (frozenset({"a"}), frozenset({"b"}), frozenset({"a"}))
    g = H.TightGeodesic("g", "S", simplices)
    issues = H.validate_hierarchy([g], [frozenset({"a", "b"})], {"S": H.Domain("S", 6)})
    assert [i.message for i in issues] == ["simplices 0 and 2 share a curve"]


def test_marking_mismatch():
    g, path, doms = one_domain()
    bad = replace(g, initial_marking=frozenset({"zzz"}))
    assert "first simplex not in initial marking" in [i.message for i in H.validate_hierarchy([bad], path, doms)]


def test_split_recipe_is_valid(split_small):
    h = H.split_hierarchy(split_small)
    assert H.check_hierarchy(h) == []
    assert H.check_resolution(h) == []


def test_dropping_boundary_inside_interval_disconnects(split_small):
    h = H.split_hierarchy(split_small)
    g = next(x for x in h.geodesics if x.slots and x.slots[1] - x.slots[0] >= 2
             and h.domains[x.domain].boundary)
    mid = (g.slots[0] + g.slots[1]) // 2
    path = list(h.path)
    path[mid] = path[mid] - h.domains[g.domain].boundary
    issues = H.validate_hierarchy(h.geodesics, path, h.domains)
    assert any(i.where == f"geodesic {g.id}" and i.message == "J_Y disconnected" for i in issues)


def test_missing_simplex_is_reported():
    g, path, doms = one_domain()
    path = [path[0], frozenset({"f1", "f2"}), path[2]]
    msgs = [i.message for i in H.validate_hierarchy([g], path, doms)]
    assert "no simplex of g_Y in ρ(1)" in msgs


def test_slices_have_one_bottom(split_small):
    h = H.split_hierarchy(split_small)
    res = H.slices(h)
    assert len(res.slices) == len(h.path)
    for sl in res.slices:
        assert sl.bottom[0] == h.main.id
        assert sum(1 for gid, _ in sl.pairs if gid == h.main.id) == 1


def test_resolution_vertex_law_detects_extra_curve(split_small):
    h = H.split_hierarchy(split_small)
    path = list(h.path)
    path[3] = path[3] | {"stray"}
    bad = replace(h, path=tuple(path))
    assert any(i.message == "vertex set differs from ρ(j)" for i in H.check_resolution(bad))


def test_abut_bound():
    m = build("ibounded", twists=[4, 6])
    h = H.annotate(m)
    assert H.check_abut_bound(m, h, l=0.0, n=6) == []
    assert [i.where for i in H.check_abut_bound(m, h, l=0.0, n=5)] == ["tube T001"]


def test_abut_bound_split_family(split_small):
    h = H.split_hierarchy(split_small)
    eps0 = split_small.constants.eps0
    n = max(max(b.region_params) for b in split_small.blocks)
    assert H.check_abut_bound(split_small, h, l=eps0, n=n) == []


def test_abut_bound_mutation():
    m = build("ibounded", twists=[4])
    h = H.annotate(m)
    g = next(x for x in h.geodesics if x.domain != H.MAIN)
    longer = replace(g, simplices=g.simplices + tuple(frozenset({f"x{k}"}) for k in range(5)))
    h2 = replace(h, geodesics=tuple(longer if x is g else x for x in h.geodesics))
    assert H.check_abut_bound(m, h2, l=0.0, n=4) != []


def test_tally_without_abutting_geodesics():
    m = build("ibounded", twists=[3])
    h = replace(H.annotate(m), geodesics=(H.annotate(m).main,))
    assert H.minsky_block_tally(m, h) == {"T000": (0, 0)}
    assert H.tally_mismatches(m, h) == ["T000"]


def test_amalg_left_tally():
    params = B.amalg_cumulative(3)
    m, h = B.build_with_hierarchy(B.FamilyParams("amalg", params))
    for block, lst in zip(m.blocks, params["blocks"]):
        assert H.minsky_block_tally(m, h)[block.tubes[0].id][0] == sum(a + b for a, b in lst)


def test_meridian_matches_tally(split_small):
    from endmodels.model import meridian_coefficient
    h = H.split_hierarchy(split_small)
    tally = H.minsky_block_tally(split_small, h)
    for block in split_small.blocks:
        t = block.tubes[0]
        assert meridian_coefficient(t)[1] == sum(tally[t.id])


@given(st.lists(st.tuples(st.integers(1, 6), st.integers(0, 6), st.integers(0, 4)), min_size=1, max_size=4))
@settings(max_examples=40, deadline=None)
def test_random_tally_round_trip(spec):
    twists = [left + right for left, right, _ in spec]
    m = build("ibounded", twists=twists)
    blocks = list(m.blocks)
    for k, (left, right, tw) in enumerate(spec):
        thin = blocks[2 * k + 1]
        t = replace(thin.tubes[0], left_count=left, right_count=right, twist=tw)
        blocks[2 * k + 1] = replace(thin, tubes=(t,))
    m = replace(m, blocks=tuple(blocks))
    h = H.annotate(m)
    assert H.tally_mismatches(m, h) == []
    assert H.check_hierarchy(h) == []
    assert H.hierarchy_from_dict(H.hierarchy_to_dict(h)) == h
