"""Witness-set generators.

Claims:
    - cantor endpoints are exact, nested across depths, and symmetric
      under x -> 1-x at cover level
    - reciprocals and factorials match their closed forms, with the
      factorial overflow guard at count 21
    - rotated_product equals the affine image of the plain product under
      the fixed similarity, point for point
    - the first-coordinate projection of the rotated Cantor product covers
      every level-8 dyadic cell (the difference set fills the interval)
    - recipes round-trip through JSON and rebuild identical samples
"""

import json

import numpy as np
import pytest

from metricdim import (
    Metric,
    PointSet,
    SetRecipe,
    affine_image,
    bilipschitz_constants,
    build,
    cantor,
    cover_points,
    factorials,
    graph_sample,
    grid,
    product,
    project,
    reciprocals,
    rotated_product,
)
from metricdim.constructions import ROTATION_MATRIX, ROTATION_OFFSET

from conftest import oracle_cantor_endpoints


def test_cantor_small_depths():
    assert cantor("1/3", 0).points[:, 0].tolist() == [0.0, 1.0]
    assert cantor("1/3", 1).points[:, 0].tolist() == pytest.approx(
        [0, 1 / 3, 2 / 3, 1])
    assert cantor("1/3", 2).points[:, 0].tolist() == pytest.approx(
        [0, 1 / 9, 2 / 9, 1 / 3, 2 / 3, 7 / 9, 8 / 9, 1])


def test_cantor_matches_fraction_oracle():
    got = cantor("1/3", 6).points[:, 0]
    want = [float(x) for x in oracle_cantor_endpoints(6)]
    assert np.allclose(got, want, atol=0)
    assert len(got) == 2 ** 7


def test_cantor_nested_depths():
    shallow = set(cantor("1/3", 3).points[:, 0])
    deep = set(cantor("1/3", 4).points[:, 0])
    assert shallow <= deep


def test_cantor_cover_symmetry():
    ps = cantor("1/3", 8)
    for k in (2, 4, 6):
        cov = {v[0] for v in cover_points(ps, k).indices}
        mirrored = {2 ** k - 1 - v for v in cov}
        assert cov == mirrored


def test_cantor_rejects_bad_ratio():
    with pytest.raises(ValueError):
        cantor("0", 3)
    with pytest.raises(ValueError):
        cantor("7/5", 3)


def test_cantor_general_ratio():
    # middle-halves: alpha = 1/4
    ps = cantor("1/2", 1)
    assert ps.points[:, 0].tolist() == pytest.approx([0, 0.25, 0.75, 1])


def test_reciprocals_small():
    assert reciprocals(1).points[:, 0].tolist() == [0.0, 1.0]
    assert reciprocals(3).points[:, 0].tolist() == pytest.approx(
        [0, 1 / 3, 1 / 2, 1])


def test_reciprocals_gap_identities():
    k = 100
    pts = reciprocals(k).points[:, 0]
    gaps = np.diff(pts)
    assert gaps[0] == pytest.approx(1 / k)           # 0 to 1/K
    assert gaps[1] == pytest.approx(1 / (k * (k - 1)))
    assert len(pts) == k + 1


def test_factorials_small():
    assert factorials(2).points[:, 0].tolist() == pytest.approx([0, 0.5, 1])
    assert factorials(3).points[:, 0].tolist() == pytest.approx(
        [0, 1 / 6, 1 / 3, 1])
    assert len(factorials(20)) == 21


def test_factorials_overflow_guard():
    with pytest.raises(ValueError, match="20"):
        factorials(21)


def test_rotated_product_singletons():
    ps = rotated_product(PointSet([[0.0]]), PointSet([[0.0]]))
    assert ps.points.tolist() == [[0.5, 0.0]]


def test_rotated_product_corners():
    ps = rotated_product(PointSet([[0.0], [1.0]]), PointSet([[0.0], [1.0]]))
    want = {(0.5, 0.0), (0.0, 0.5), (1.0, 0.5), (0.5, 1.0)}
    assert {tuple(p) for p in ps.points} == want


def test_rotated_product_is_affine_image_of_product():
    a = cantor("1/3", 4)
    via_rotation = rotated_product(a, a)
    via_affine = affine_image(product(a, a), ROTATION_MATRIX, ROTATION_OFFSET)
    assert np.array_equal(via_rotation.points, via_affine.points)


def test_rotated_cantor_projection_fills_interval():
    # the difference set of the Cantor set has interior; at level 8 the
    # first-coordinate projection hits all 256 cells
    a = cantor("1/3", 8)
    ps = rotated_product(a, a)
    cov = cover_points(ps, 8)
    first = project(cov, (1,))
    assert {v[0] for v in first.indices} == set(range(256))


def test_product_corners():
    ps = product(PointSet([[0.0], [1.0]]), PointSet([[0.0], [1.0]]))
    assert {tuple(p) for p in ps.points} == {(0, 0), (0, 1), (1, 0), (1, 1)}


def test_affine_identity_constants():
    ps = PointSet([[0.0], [1.0]])
    img = affine_image(ps, [[1.0]], [0.0])
    assert np.array_equal(img.points, ps.points)
    lo, hi = bilipschitz_constants(ps, [[1.0]])
    assert (lo, hi) == (1.0, 1.0)


def test_rotation_bilipschitz_constants():
    a = cantor("1/3", 4)
    lo, hi = bilipschitz_constants(product(a, a), ROTATION_MATRIX)
    assert 0 < lo <= hi <= 1.0 + 1e-12


def test_graph_sample_parabola():
    xs = [0, 0.25, 0.5, 0.75, 1]
    ps = graph_sample({u: u ** 2 for u in xs})
    assert len(ps) == 5
    assert ps.n == 2
    for u, v in ps.points:
        assert v == pytest.approx(u ** 2)


def test_grid_spacing():
    ps = grid(5)
    assert ps.points[:, 0].tolist() == pytest.approx([0, 0.25, 0.5, 0.75, 1])


def test_union_recipe():
    r = SetRecipe("union", {"parts": [
        {"kind": "cantor", "ratio": "1/3", "depth": 2},
        {"kind": "reciprocals", "count": 4},
    ]})
    ps = build(r)
    assert {0.0, 1.0, 0.25, 1 / 3} <= set(ps.points[:, 0])


def test_recipe_json_roundtrip():
    r = SetRecipe("cantor", {"ratio": "1/3", "depth": 5})
    back = SetRecipe.from_json(r.to_json())
    assert back == r
    assert np.array_equal(build(back).points, cantor("1/3", 5).points)


def test_recipe_rejects_unknown_kind():
    with pytest.raises(ValueError):
        SetRecipe("mystery", {})


def test_recipe_snowflake_metric():
    r = SetRecipe("grid", {"count": 9, "snowflake_exponent": 0.5})
    ps = build(r)
    assert ps.metric == Metric(0.5)


def test_nested_recipe_build():
    r = SetRecipe.from_dict({
        "kind": "rotated_product",
        "a": {"kind": "cantor", "ratio": "1/3", "depth": 3},
        "b": {"kind": "cantor", "ratio": "1/3", "depth": 3},
    })
    ps = build(r)
    assert ps.n == 2
    assert ps.in_unit_cube()


def test_depth_metadata():
    assert cantor("1/3", 14).depth == 22
    assert reciprocals(100).depth == 13
    assert factorials(20).depth == 61
    assert grid(2 ** 14).depth == 13
