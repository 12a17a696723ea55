import random
from dataclasses import replace

import pytest
from endmodels import builders as B
from endmodels.model import (
    HANGING_LOWER, THICK, Block, Constants, ModelEnd, SplitSurfaceSpec, Tube,
    meridian_coefficient, validate,
)

from conftest import build


def rules(model):
    return [v.rule for v in validate(model)]


def test_empty_model_is_rejected():
    v = validate(ModelEnd(()))
    assert [x.message for x in v] == ["model must contain ≥1 block"]


def test_thick_chain_is_valid():
    assert validate(build("bounded", n_blocks=5)) == []


def test_split_region_condition_message():
    model = build("split", triples=[[4, 4, 8]])
    bad = replace(model.blocks[0], region_params=(4, 4, 6))
    v = validate(replace(model, blocks=(bad,)))
    assert "n_i ≥ l_i + m_i fails (6 < 8)" in [x.message for x in v]


def test_thick_block_with_tube_rejected():
    model = build("ibounded", twists=[3])
    thin = model.blocks[1]
    bad = replace(thin, variant=THICK)
    assert "thick-no-tubes" in rules(replace(model, blocks=(model.blocks[0], bad)))


def test_nonconsecutive_indices_rejected():
    model = build("bounded", n_blocks=3)
    blocks = list(model.blocks)
    blocks[2] = replace(blocks[2], index=5)
    assert "consecutive-index" in rules(replace(model, blocks=tuple(blocks)))


def test_gluing_mismatch_rejected():
    model = build("bounded", n_blocks=2)
    top = SplitSurfaceSpec(1, {"S0": 3, "S1": 3})
    blocks = (replace(model.blocks[0], top=top), model.blocks[1])
    assert "gluing" in rules(replace(model, blocks=blocks))


def test_component_complexity_floor():
    model = build("bounded", n_blocks=1)
    low = SplitSurfaceSpec(0, {"S0": 2, "S1": 3, "S2": 3})
    assert "component-complexity" in rules(replace(model, blocks=(replace(model.blocks[0], bottom=low),)))


def test_unknown_tube_rejected():
    model = build("bounded", n_blocks=1)
    s = SplitSurfaceSpec(0, {"S0": 3, "S1": 3, "S2": 3}, {"S0": {"ghost": None}})
    assert "unknown-tube" in rules(replace(model, blocks=(replace(model.blocks[0], bottom=s),)))


def test_crossing_tube_needs_count():
    model = build("ibounded", twists=[3])
    thin = model.blocks[1]
    tube = replace(thin.tubes[0], left_count=0)
    assert "tube-count" in rules(replace(model, blocks=(model.blocks[0], replace(thin, tubes=(tube,)))))


def test_hanging_extent_floor(split_small):
    b = split_small.blocks[0]
    h = replace(b.hanging_tubes[0], vertical_extent=0.5)
    blocks = (replace(b, hanging_tubes=(h,)),) + split_small.blocks[1:]
    assert "hanging-extent" in rules(replace(split_small, blocks=blocks))


def test_crossing_span_limit():
    c = Constants(n_max=2)
    comps = {"P": 3}
    t = Tube("T", 0.01, left_count=4)
    surfaces = [SplitSurfaceSpec(i, comps, {"P": {"T": None}}) for i in range(4)]
    blocks = tuple(Block(i, "thin", surfaces[i], surfaces[i + 1], tubes=(t,)) for i in range(3))
    assert "n-max" in rules(ModelEnd(blocks, constants=c))
    assert validate(ModelEnd(blocks)) == []


@pytest.mark.parametrize("family,params", [
    ("bounded", {"n_blocks": 4}),
    ("flute", {"n_necks": 3}),
    ("ibounded", {"twists": [2, 5, 3]}),
    ("amalg", B.amalg_cumulative(3)),
    ("split", B.split_geometric(3)),
    ("thin_all", {"js": [60, 70]}),
])
def test_validate_is_order_independent(family, params):
    model = build(family, **params)
    base = validate(model)
    rng = random.Random(1)
    for _ in range(5):
        blocks = []
        for b in model.blocks:
            tubes, links = list(b.tubes), list(b.links)
            rng.shuffle(tubes)
            rng.shuffle(links)
            blocks.append(replace(b, tubes=tuple(tubes), links=tuple(links), region_params=b.region_params))
        assert validate(replace(model, blocks=tuple(blocks))) == base
    assert validate(model) == base  # idempotent, no mutation


@pytest.mark.parametrize("twist,left,right,expect", [
    (0, 1, 0, (0.0, 1.0)),
    (5, 7, 5, (5.0, 12.0)),
    (-3, 0, 9, (-3.0, 9.0)),
])
def test_meridian_coefficient(twist, left, right, expect):
    assert meridian_coefficient(Tube("T", 0.1, twist, left, right)) == expect


def test_meridian_coefficient_rejects_hanging():
    with pytest.raises(ValueError, match="meridian coefficient defined for crossing tubes only"):
        meridian_coefficient(Tube("H", 0.1, 0, 2, 2, kind=HANGING_LOWER, vertical_extent=1))


def test_tube_depth_is_log():
    t = Tube("T", 0.1, left_count=7, right_count=5)
    assert t.depth == pytest.approx(2.5649493574615367)
    assert t.max_rung == 3
