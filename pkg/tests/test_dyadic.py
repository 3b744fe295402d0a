"""Core cover and packing primitives.

Claims exercised here:
    - cover_points floors into half-open cubes, clamps the right boundary,
      and refuses points outside the unit cube by name
    - refine reproduces cover_points at the finer level and respects ancestry
    - net_number is exact in one dimension (sorted greedy) and matches an
      exhaustive oracle in two; the packing sandwich
      greedy(2r) <= exact(2r) <= greedy(r) <= exact(r) holds
    - covers and nets agree within the factor 3^n sandwich
    - fibers, projections and components match their definitions
    - N_k is nondecreasing with growth at most 2^n, and multiplies over
      cartesian products
"""

import numpy as np
import pytest

from metricdim import (
    BudgetExceeded,
    DyadicCover,
    Metric,
    PointSet,
    cantor,
    components,
    cover_points,
    fibers,
    net_number,
    product,
    project,
    refine,
    reciprocals,
    scaling_curve,
)
from metricdim.dyadic import ScalingCurve

from conftest import (
    oracle_cantor_endpoints,
    oracle_cover_1d,
    oracle_exact_net,
    random_pointset,
)


# -- cover_points ------------------------------------------------------------

def test_cover_single_midpoint():
    assert cover_points(PointSet([[0.5]]), 1).indices == {(1,)}


def test_cover_right_boundary_clamps():
    c = cover_points(PointSet([[0.0], [1.0]]), 0)
    assert c.indices == {(0,)}
    assert len(c) == 1


def test_cover_cantor_counts_match_oracle(cantor10):
    # frozen from exact Fraction enumeration over depth-10 endpoints
    assert [len(cover_points(cantor10, k)) for k in range(4)] == [1, 2, 4, 6]
    got = {v[0] for v in cover_points(cantor10, 3).indices}
    assert got == {0, 1, 2, 5, 6, 7}
    exact = oracle_cover_1d(oracle_cantor_endpoints(10), 3)
    assert got == exact


def test_cover_rejects_outside_points():
    ps = PointSet([[0.2], [1.5]])
    with pytest.raises(ValueError, match="1.5"):
        cover_points(ps, 2)


def test_cover_level_must_be_nonnegative():
    with pytest.raises(ValueError):
        cover_points(PointSet([[0.5]]), -1)


# -- refine ------------------------------------------------------------------

def test_refine_midpoint():
    ps = PointSet([[0.5]])
    assert refine(cover_points(ps, 1), ps, 3).indices == {(4,)}


def test_refine_cantor_ancestry(cantor10):
    c2 = cover_points(cantor10, 2)
    c3 = refine(c2, cantor10, 3)
    assert len(c3) == 6
    parents = {tuple(v // 2 for v in idx) for idx in c3.indices}
    assert parents <= c2.indices


def test_refine_requires_finer_level(cantor10):
    c2 = cover_points(cantor10, 2)
    with pytest.raises(ValueError):
        refine(c2, cantor10, 2)


# -- net_number --------------------------------------------------------------

def test_net_two_points():
    assert net_number(PointSet([[0.0], [1.0]]), 0.5) == 2


def test_net_equally_spaced():
    ps = PointSet([[0.0], [0.3], [0.6], [0.9]])
    assert net_number(ps, 0.3) == 4


def test_net_cantor_depth4():
    # the 8 separated points are the level-2 interval endpoints; the oracle
    # runs on exact fractions since the separations sit exactly at r
    from fractions import Fraction

    ps = cantor("1/3", 4)
    assert net_number(ps, 1 / 9) == 8
    exact_pts = [(x,) for x in oracle_cantor_endpoints(4)]
    assert oracle_exact_net(exact_pts, Fraction(1, 9)) == 8


def test_net_rejects_bad_r():
    with pytest.raises(ValueError):
        net_number(PointSet([[0.1]]), 0.0)


def test_net_budget_error_suggests_greedy(rng):
    ps = random_pointset(rng, 40, 2)
    with pytest.raises(BudgetExceeded, match="greedy"):
        net_number(ps, 0.1, mode="exact", budget=10)


@pytest.mark.parametrize("seed", range(12))
def test_net_exact_matches_oracle_2d(seed):
    rng = np.random.default_rng(seed)
    ps = PointSet(rng.random((14, 2)))
    r = float(rng.uniform(0.05, 0.5))
    assert net_number(ps, r, mode="exact") == oracle_exact_net(ps.points, r)


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("n", [1, 2])
def test_packing_sandwich(seed, n):
    rng = np.random.default_rng(100 + seed)
    ps = PointSet(rng.random((16, n)))
    r = float(rng.uniform(0.05, 0.3))
    g2, e2 = net_number(ps, 2 * r, "greedy"), net_number(ps, 2 * r, "exact")
    g1, e1 = net_number(ps, r, "greedy"), net_number(ps, r, "exact")
    assert g2 <= e2 <= g1 <= e1


def test_net_snowflake_threshold():
    # d(x,y) = |x-y|^(1/2): separation r corresponds to |x-y| >= r^2
    ps = PointSet([[0.0], [0.05], [0.3]], metric=Metric(0.5))
    assert net_number(ps, 0.4) == 2  # needs |x-y| >= 0.16
    assert net_number(ps, 0.2) == 3  # needs |x-y| >= 0.04


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("n", [1, 2])
def test_cover_net_sandwich(seed, n):
    # net_{2^-k} <= N_k <= 3^n net_{2^-k}
    rng = np.random.default_rng(300 + seed)
    ps = PointSet(rng.random((20, n)))
    for k in (1, 2, 3):
        nk = len(cover_points(ps, k))
        net = net_number(ps, 2.0 ** -k, "exact")
        assert net <= nk <= (3 ** n) * net


# -- fibers / project --------------------------------------------------------

def test_fibers_full_grid():
    cov = DyadicCover(1, 2, [(0, 0), (0, 1), (1, 0), (1, 1)])
    fam = fibers(cov, 1)
    assert fam.fibers[(0,)].indices == {(0,), (1,)}
    assert fam.fibers[(1,)].indices == {(0,), (1,)}
    assert fam.reconstruct() == cov


def test_fibers_diagonal():
    cov = DyadicCover(1, 2, [(0, 0), (1, 1)])
    fam = fibers(cov, 1)
    assert fam.fibers[(0,)].indices == {(0,)}
    assert fam.fibers[(1,)].indices == {(1,)}


def test_fibers_of_cantor_square(cantor10):
    prod = product(cantor10, cantor10)
    cov = cover_points(prod, 3)
    fam = fibers(cov, 1)
    line = cover_points(cantor10, 3).indices
    assert set(fam.fibers) == {(v,) for v in oracle_cover_1d(
        oracle_cantor_endpoints(10), 3)}
    for fib in fam.fibers.values():
        assert fib.indices == line


def test_fibers_range_check():
    cov = DyadicCover(1, 2, [(0, 0)])
    with pytest.raises(ValueError):
        fibers(cov, 2)


def test_project_identity_and_drop():
    cov = DyadicCover(1, 2, [(0, 0), (0, 1), (1, 1)])
    assert project(cov, (1, 2)) == cov
    assert project(cov, (1,)).indices == {(0,), (1,)}
    with pytest.raises(ValueError):
        project(cov, (2, 1))
    with pytest.raises(ValueError):
        project(cov, (0,))


@pytest.mark.parametrize("seed", range(5))
def test_projection_cardinality_bound(seed):
    rng = np.random.default_rng(500 + seed)
    cov = cover_points(PointSet(rng.random((30, 3))), 3)
    for sel in [(1,), (2,), (3,), (1, 2), (1, 3), (2, 3)]:
        assert len(project(cov, sel)) <= len(cov)


# -- components --------------------------------------------------------------

def test_components_full_interval():
    cov = cover_points(PointSet(np.linspace(0, 1, 64).reshape(-1, 1)), 4)
    comps = components(cov)
    assert len(comps) == 1
    assert comps[0][1] == pytest.approx(1.0)


def test_components_two_isolated_cubes():
    cov = DyadicCover(3, 1, [(0,), (5,)])
    comps = sorted(components(cov), key=lambda c: min(c[0]))
    assert len(comps) == 2
    assert all(d == pytest.approx(1 / 8) for _, d in comps)


def test_components_cantor_shrink(cantor14):
    # frozen from exact enumeration at k = 6, 9, 12
    diams = []
    for k in (6, 9, 12):
        diams.append(max(d for _, d in components(cover_points(cantor14, k))))
    assert diams[0] == pytest.approx(0.0625)
    assert diams[1] == pytest.approx(0.0078125)
    assert diams[2] == pytest.approx(0.00146484375)
    assert diams[0] <= 1 / 3
    assert diams[2] < diams[1] < diams[0]


# -- scaling curves and count laws -------------------------------------------

@pytest.mark.parametrize("seed", range(5))
def test_counts_monotone_and_bounded(seed):
    rng = np.random.default_rng(700 + seed)
    ps = PointSet(rng.random((50, 2)))
    curve = scaling_curve(ps, range(0, 6))
    counts = [c for _, c in curve.entries]
    assert all(c2 >= c1 for c1, c2 in zip(counts, counts[1:]))
    assert all(c2 <= 4 * c1 for c1, c2 in zip(counts, counts[1:]))


def test_product_count_law(cantor10):
    rec = reciprocals(10)
    prod = product(cantor10, rec)
    for k in (1, 2, 3, 4):
        na = len(cover_points(cantor10, k))
        nb = len(cover_points(rec, k))
        assert len(cover_points(prod, k)) == na * nb
        idx = {(a[0], b[0])
               for a in cover_points(cantor10, k).indices
               for b in cover_points(rec, k).indices}
        assert cover_points(prod, k).indices == idx


def test_scaling_curve_respects_depth():
    ps = PointSet([[0.0], [1.0]], depth=3)
    with pytest.raises(ValueError, match="depth"):
        scaling_curve(ps, [2, 4])


def test_scaling_curve_validation():
    with pytest.raises(ValueError):
        ScalingCurve(((2, 4), (1, 2)))
    with pytest.raises(ValueError):
        ScalingCurve(((1, 4), (2, 2)))
    with pytest.raises(ValueError):
        ScalingCurve(((1, 1), (2, 3)), n=1)  # 3 > 2 children


# -- serialization and immutability -------------------------------------------

def test_pointset_csv_roundtrip(cantor10):
    text = cantor10.to_csv()
    assert text.splitlines()[0] == "x1"
    back = PointSet.from_csv(text)
    assert np.array_equal(back.points, cantor10.points)


def test_cover_json_roundtrip(cantor10):
    cov = cover_points(cantor10, 5)
    assert DyadicCover.from_json(cov.to_json()) == cov


def test_pointset_immutable(cantor10):
    with pytest.raises(AttributeError):
        cantor10.n = 2
    with pytest.raises((ValueError, RuntimeError)):
        cantor10.points[0, 0] = 5.0


def test_pointset_dedup_and_sort():
    ps = PointSet([[0.5], [0.1], [0.5]])
    assert ps.points[:, 0].tolist() == [0.1, 0.5]
