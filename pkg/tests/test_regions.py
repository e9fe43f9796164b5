import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from facexplain.alignment import CANONICAL_TEMPLATE
from facexplain.errors import DegenerateLandmarks, EmptyMask
from facexplain.regions import (
    REGION_NAMES,
    ExplainabilityTable,
    FacialRegion,
    build_table,
    quantize_region,
    rank_regions,
    region_masks,
    table_from_json,
    table_to_csv,
    table_to_json,
    template_regions,
)
from facexplain.saliency import METHOD_ORDER, SaliencyMap, SaliencyMethod
from facexplain.verification import Landmarks5

# Reference explainability-table fixture: scores per region in method order
# (single removal, greedy removal, single aggregation, greedy aggregation,
# average), with the expected mean / ratio-of-1s summary values.
TABLE_FIXTURE = {
    "left_eyebrow": ((1, 5, 1, 5, 1), 2.6, 0.6),
    "right_eyebrow": ((3, 5, 1, 4, 1), 2.8, 0.4),
    "left_eye": ((1, 5, 2, 5, 1), 2.8, 0.4),
    "right_eye": ((3, 5, 2, 5, 3), 3.6, 0.0),
    "left_cheek": ((4, 5, 5, 5, 5), 4.8, 0.0),
    "right_cheek": ((2, 5, 3, 5, 4), 3.8, 0.0),
    "chin": ((4, 5, 1, 5, 4), 3.8, 0.2),
    "lips": ((5, 5, 2, 5, 5), 4.4, 0.0),
    "nose": ((5, 5, 5, 5, 5), 5.0, 0.0),
}


def fixture_table() -> ExplainabilityTable:
    return ExplainabilityTable.from_scores(
        {name: scores for name, (scores, _, _) in TABLE_FIXTURE.items()}, pair_id="fixture"
    )


def make_map(values, method=SaliencyMethod.SINGLE_REMOVAL):
    return SaliencyMap(values, method, "p", "r", (0.0, 1.0))


def test_nine_region_names():
    assert REGION_NAMES == (
        "left_eyebrow", "right_eyebrow", "left_eye", "right_eye",
        "left_cheek", "right_cheek", "chin", "lips", "nose",
    )


def test_identity_landmarks_reproduce_template_masks():
    produced = region_masks(Landmarks5(CANONICAL_TEMPLATE))
    stored = template_regions()
    for a, b in zip(produced, stored):
        assert a.name == b.name
        assert np.array_equal(a.mask, b.mask)


def test_left_eye_centroid_near_landmark():
    regions = {r.name: r for r in region_masks(Landmarks5(CANONICAL_TEMPLATE))}
    ys, xs = np.nonzero(regions["left_eye"].mask)
    centroid = np.array([xs.mean(), ys.mean()])
    assert np.linalg.norm(centroid - CANONICAL_TEMPLATE[0]) < 8.0
    ys, xs = np.nonzero(regions["right_eye"].mask)
    centroid = np.array([xs.mean(), ys.mean()])
    assert np.linalg.norm(centroid - CANONICAL_TEMPLATE[1]) < 8.0


def test_masks_follow_translated_landmarks():
    shifted = CANONICAL_TEMPLATE + np.array([4.0, -3.0])
    moved = {r.name: r for r in region_masks(Landmarks5(shifted))}
    base = {r.name: r for r in template_regions()}
    for name in REGION_NAMES:
        ys, xs = np.nonzero(moved[name].mask)
        bys, bxs = np.nonzero(base[name].mask)
        assert xs.mean() - bxs.mean() == pytest.approx(4.0, abs=1.0)
        assert ys.mean() - bys.mean() == pytest.approx(-3.0, abs=1.0)


def test_degenerate_landmarks_rejected():
    line = np.array([[10.0 + i, 20.0 + 2 * i] for i in range(5)])
    with pytest.raises(DegenerateLandmarks):
        region_masks(Landmarks5(line))


def test_quantize_interval_arithmetic():
    region = template_regions()[0]
    for fill, expected in [(1.0, 1), (0.0, 5), (0.53, 3), (0.85, 1), (0.19, 5)]:
        values = np.full((112, 112), fill)
        assert quantize_region(make_map(values), region) == expected


def test_quantize_max_statistic():
    region = template_regions()[0]
    values = np.zeros((112, 112))
    ys, xs = np.nonzero(region.mask)
    values[ys[0], xs[0]] = 0.95  # one hot pixel inside the mask
    smap = make_map(values)
    assert quantize_region(smap, region, statistic="max") == 1
    assert quantize_region(smap, region, statistic="mean") == 5
    with pytest.raises(ValueError):
        quantize_region(smap, region, statistic="median")


def test_canonical_template_asset_in_sync():
    import json
    from importlib import resources

    from facexplain.alignment import canonical_template_json

    shipped = resources.files("facexplain").joinpath("assets/canonical_template.json").read_text()
    assert json.loads(shipped) == json.loads(canonical_template_json())


def test_quantize_ignores_outside_mask():
    region = template_regions()[0]
    values = np.zeros((112, 112))
    values[region.mask] = 0.9
    other = values.copy()
    other[~region.mask] = np.linspace(0, 1, (~region.mask).sum())
    assert quantize_region(make_map(values), region) == quantize_region(make_map(other), region)


@given(base=st.floats(0.0, 0.9), bump=st.floats(0.0, 0.1))
@settings(max_examples=40, deadline=None)
def test_quantize_monotone(base, bump):
    region = template_regions()[2]
    low = np.full((112, 112), base)
    high = np.full((112, 112), min(base + bump, 1.0))
    assert quantize_region(make_map(high), region) <= quantize_region(make_map(low), region)


def test_empty_mask_rejected():
    mask = np.zeros((112, 112), dtype=bool)
    with pytest.raises(ValueError):
        FacialRegion("nose", mask)
    region = template_regions()[0]
    hollow = FacialRegion.__new__(FacialRegion)
    object.__setattr__(hollow, "name", region.name)
    object.__setattr__(hollow, "mask", np.zeros((112, 112), dtype=bool))
    with pytest.raises(EmptyMask):
        quantize_region(make_map(np.ones((112, 112))), hollow)


def test_reference_summary_rows_exact():
    table = fixture_table()
    for name, (_, mean, ratio) in TABLE_FIXTURE.items():
        row = table.row(name)
        assert row.mean == mean
        assert row.ratio_of_1s == ratio


def test_summary_recompute_matches_stored():
    table = fixture_table()
    for row in table.rows:
        assert row.mean == sum(row.scores) / 5
        assert row.ratio_of_1s == row.scores.count(1) / 5


def test_rank_regions_reference_order():
    ranked = rank_regions(fixture_table())
    assert ranked[0] == "left_eyebrow"
    assert ranked[-1] == "nose"
    assert sorted(ranked) == sorted(REGION_NAMES)


def test_rank_regions_tie_break_by_ratio():
    # right_eyebrow and left_eye share mean 2.8 and ratio 0.4 -> enum order.
    ranked = rank_regions(fixture_table())
    assert ranked.index("right_eyebrow") < ranked.index("left_eye")


def test_rank_regions_total_tie_uses_enum_order():
    table = ExplainabilityTable.from_scores(
        {name: (2, 2, 2, 2, 2) for name in REGION_NAMES}
    )
    assert rank_regions(table) == list(REGION_NAMES)


def test_build_table_from_maps():
    regions = template_regions()
    maps = []
    rng = np.random.default_rng(0)
    for method in METHOD_ORDER:
        values = rng.uniform(0, 1, (112, 112))
        maps.append(SaliencyMap(values, method, "p", "r", (0.0, 1.0)))
    table = build_table(maps, regions)
    assert len(table.rows) == 9
    assert table.pair_id == "p::r"
    for row in table.rows:
        assert all(1 <= s <= 5 for s in row.scores)
        # cross-check one cell against a direct quantize call
    by_method = {m.method: m for m in maps}
    by_name = {r.name: r for r in regions}
    assert table.row("nose").scores[0] == quantize_region(
        by_method[SaliencyMethod.SINGLE_REMOVAL], by_name["nose"]
    )


def test_build_table_validates_inputs():
    regions = template_regions()
    values = np.zeros((112, 112))
    maps = [make_map(values, m) for m in METHOD_ORDER][:4]
    with pytest.raises(ValueError):
        build_table(maps, regions)


def test_csv_export_shape_and_values():
    text = table_to_csv(fixture_table())
    lines = text.strip().split("\n")
    assert lines[0] == "region,single_removal,greedy_removal,single_aggregation,greedy_aggregation,average,mean,ratio_of_1s"
    assert len(lines) == 10
    assert lines[1] == "left_eyebrow,1,5,1,5,1,2.6,0.6"
    assert lines[9] == "nose,5,5,5,5,5,5.0,0.0"


def test_json_roundtrip():
    table = fixture_table()
    again = table_from_json(table_to_json(table))
    assert again.rows == table.rows
    assert again.pair_id == table.pair_id
