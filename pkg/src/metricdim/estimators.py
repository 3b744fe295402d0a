"""Dimension estimators on finite dyadic approximations.

Four families of estimators:

* upper Minkowski (box-counting) slope fits, for single sets and for
  families of sets (pointwise-max scaling curve);
* Assouad scans: the direct two-scale local exponent sweep, and the
  localization-family characterization (box dimension of rescaled balls);
* the coordinate-projection dimension at a fixed fullness threshold;
* an interior / nowhere-dense classifier and a shrinking-components
  surrogate certifying topological dimension zero.

All estimators are pure functions of their inputs. Scans over centers and
scale pairs reduce by order-insensitive operations (max, least squares), so
slicing the parameter space across threads cannot change any result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Optional, Sequence

import numpy as np

from .dyadic import (
    DyadicCover,
    Metric,
    PointSet,
    ScalingCurve,
    cover_points,
    net_number,
    scaling_curve,
)

__all__ = [
    "DimEstimate",
    "AdimScanParams",
    "udim_fit",
    "udim_net",
    "family_udim",
    "adim_scan",
    "localize",
    "adim_via_localization",
    "point_fibers",
    "fiber_curves",
    "proj_dim",
    "classify_interior",
    "tdim_zero_test",
    "default_window",
    "min_positive_gap",
]


@dataclass(frozen=True)
class DimEstimate:
    """A dimension value with its method tag, scale window and slope spread."""

    value: float
    method: str
    window: tuple
    spread: float
    detail: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.value < 0 or self.spread < 0:
            raise ValueError("estimate value and spread must be nonnegative")


def default_window(levels: Sequence[int]) -> tuple[int, int]:
    """Default fitting window: drop the lowest third and highest sixth.

    The low levels are the transient regime (a handful of cubes), the top
    levels saturate against sample resolution.
    """
    ks = sorted(set(int(k) for k in levels))
    if len(ks) < 2:
        raise ValueError("need at least two levels")
    lo = len(ks) // 3
    hi = len(ks) - 1 - len(ks) // 6
    if hi <= lo:
        lo, hi = 0, len(ks) - 1
    return ks[lo], ks[hi]


def _fit_entries(entries: Sequence[tuple[int, int]]) -> tuple[float, float]:
    ks = np.array([k for k, _ in entries], dtype=np.float64)
    ys = np.log2([c for _, c in entries])
    slope = float(np.polyfit(ks, ys, 1)[0])
    pair = [
        (ys[j] - ys[i]) / (ks[j] - ks[i])
        for i in range(len(ks))
        for j in range(i + 1, len(ks))
    ]
    return slope, float(max(pair) - min(pair))


def udim_fit(curve: ScalingCurve, window: tuple[int, int],
             upper: Optional[float] = None) -> DimEstimate:
    """Least-squares slope of log2 N_k against k over the window.

    The spread field is the max minus min of pairwise two-point slopes in
    the window; it quantifies how far the finite data sits from an actual
    limsup. The value is clamped to [0, n] when the ambient dimension is
    known (or to [0, upper] when given).
    """
    k_min, k_max = window
    sub = curve.window(k_min, k_max)
    slope, spread = _fit_entries(sub.entries)
    bound = upper if upper is not None else curve.n
    value = max(0.0, slope if bound is None else min(slope, float(bound)))
    return DimEstimate(value, "udim-boxcount", (k_min, k_max), spread,
                       detail={"raw_slope": slope})


def min_positive_gap(ps: PointSet) -> float:
    """Smallest positive sup-norm distance between sample points (1-d exact;
    in higher dimensions the smallest positive coordinate gap, a lower bound)."""
    if ps.n == 1:
        d = np.diff(ps.points[:, 0])
        d = d[d > 0]
        return float(d.min()) if d.size else math.inf
    best = math.inf
    for i in range(ps.n):
        vals = np.unique(ps.points[:, i])
        d = np.diff(vals)
        d = d[d > 0]
        if d.size:
            best = min(best, float(d.min()))
    return best


def udim_net(ps: PointSet, window: tuple[int, int],
             mode: str = "auto") -> tuple[DimEstimate, ScalingCurve]:
    """Net-based box dimension: fit of log2 net_{2^-k} against k.

    net counts are taken in the declared metric, so a snowflake exponent
    beta rescales the estimate by 1/beta; the clamp bound is n/beta.
    """
    k_min, k_max = window
    if k_max <= k_min:
        raise ValueError("window must contain at least two levels")
    beta = ps.metric.snowflake_exponent
    res = min_positive_gap(ps)
    entries = []
    net_mode = ("exact" if ps.n == 1 else "greedy") if mode == "auto" else mode
    for k in range(k_min, k_max + 1):
        r = 2.0 ** -k
        if ps.metric.sup_threshold(r) < res and ps.n == 1:
            raise ValueError(
                f"net scale 2^-{k} is below the sample resolution {res:g}")
        entries.append((k, net_number(ps, r, mode=net_mode)))
    curve = ScalingCurve(tuple(entries), n=None)
    slope, spread = _fit_entries(entries)
    value = max(0.0, min(slope, ps.n / beta))
    est = DimEstimate(value, "udim-net", (k_min, k_max), spread,
                      detail={"raw_slope": slope, "snowflake_exponent": beta})
    return est, curve


def family_udim(curves: Mapping, window: tuple[int, int]) -> DimEstimate:
    """Box dimension of a family: fit the pointwise-max scaling curve.

    Every member curve must carry the window levels. The member maximum of
    individual fits is reported in the detail for comparison with the
    family value.
    """
    if not curves:
        raise ValueError("family is empty")
    k_min, k_max = window
    levels = None
    maxcounts: dict[int, int] = {}
    member_fits = []
    n = None
    for key in sorted(curves, key=repr):
        sub = curves[key].window(k_min, k_max)
        ks = tuple(k for k, _ in sub.entries)
        if levels is None:
            levels = ks
        elif ks != levels:
            raise ValueError("family curves do not share the window levels")
        for k, c in sub.entries:
            maxcounts[k] = max(maxcounts.get(k, 0), c)
        member_fits.append(_fit_entries(sub.entries)[0])
        if curves[key].n is not None:
            n = curves[key].n if n is None else max(n, curves[key].n)
    entries = tuple(sorted(maxcounts.items()))
    slope, spread = _fit_entries(entries)
    value = max(0.0, slope if n is None else min(slope, float(n)))
    return DimEstimate(value, "udim-family", (k_min, k_max), spread,
                       detail={"members": len(member_fits),
                               "member_max_fit": max(member_fits)})


@dataclass(frozen=True)
class AdimScanParams:
    """Parameters of the two-scale Assouad scan.

    centers: how many sample points to use as ball centers (an evenly
    spaced subsample of the lexicographically sorted points).
    scale_pairs: list of (r, R) with 0 < r < R; local exponents are
    log(net_r of the R-ball) / log(R/r).
    quantile: "max" for the supremum in the definition, or an upper
    quantile in (0,1) for noisy samples.
    """

    centers: int = 16
    scale_pairs: tuple[tuple[float, float], ...] = ()
    quantile: str | float = "max"
    net_mode: str = "auto"

    def __post_init__(self):
        if self.centers < 1:
            raise ValueError("need at least one center")
        for r, R in self.scale_pairs:
            if not 0 < r < R:
                raise ValueError(f"scale pair ({r}, {R}) must satisfy 0 < r < R")
        if self.quantile != "max" and not 0 < float(self.quantile) <= 1:
            raise ValueError("quantile must be 'max' or in (0, 1]")


def default_scale_pairs(ps: PointSet) -> tuple[tuple[float, float], ...]:
    """Geometric (r, R) ladder adapted to the sample resolution."""
    res = min_positive_gap(ps)
    kmax = max(2, int(math.floor(-math.log2(res))) if res > 0 else 20)
    pairs = []
    for a in (2, 4, 6, 8, 10):
        for b in (8, 10, 12):
            if a + b <= kmax:
                pairs.append((2.0 ** -(a + b), 2.0 ** -a))
    if not pairs:
        pairs = [(res, min(1.0, res * 256))]
    return tuple(pairs)


def _center_subsample(ps: PointSet, count: int) -> np.ndarray:
    m = len(ps)
    idx = np.unique(np.linspace(0, m - 1, min(count, m)).astype(int))
    return ps.points[idx]


def _ball(ps: PointSet, x: np.ndarray, radius_sup: float) -> np.ndarray:
    if ps.n == 1:
        col = ps.points[:, 0]
        lo = np.searchsorted(col, x[0] - radius_sup, side="left")
        hi = np.searchsorted(col, x[0] + radius_sup, side="right")
        return ps.points[lo:hi]
    mask = np.max(np.abs(ps.points - x), axis=1) <= radius_sup
    return ps.points[mask]


def _local_exponents(ps: PointSet, centers: np.ndarray,
                     pairs: Sequence[tuple[float, float]],
                     net_mode: str) -> list[tuple[float, float, float, float]]:
    from . import dyadic

    beta = ps.metric.snowflake_exponent
    out = []
    for x in centers:
        for r, R in pairs:
            ball_pts = _ball(ps, x, ps.metric.sup_threshold(R))
            if ball_pts.shape[0] == 0:
                continue
            thr = ps.metric.sup_threshold(r)
            if ps.n == 1:
                net = dyadic._greedy_net_1d(ball_pts[:, 0], thr)
            elif net_mode == "exact" and ball_pts.shape[0] <= dyadic.EXACT_NET_POINT_BUDGET:
                net = dyadic._exact_net_nd(ball_pts, thr)
            else:
                net = dyadic._greedy_net_nd(ball_pts, thr)
            expo = math.log2(net) / math.log2(R / r)
            out.append((tuple(float(c) for c in x), r, R, expo))
    return out


def adim_scan(ps: PointSet, params: AdimScanParams,
              threads: int = 1) -> tuple[DimEstimate, list]:
    """Direct Assouad scan: quantile of local exponents over (x, r, R).

    For each sampled center x and scale pair (r, R), the local exponent is
    log net_r(ball(x, R)) / log(R/r), computed in the declared metric. The
    reported value is the selected quantile (max by default, matching the
    supremum in the definition), clamped to [0, n/beta].

    Returns the estimate and the raw (x, r, R, exponent) table.
    """
    pairs = params.scale_pairs or default_scale_pairs(ps)
    res = min_positive_gap(ps)
    if ps.n == 1:
        bad = [p for p in pairs if p[0] < res]
        if len(bad) == len(pairs):
            raise ValueError(
                f"no admissible scale pair: every r is below the resolution {res:g}")
        pairs = [p for p in pairs if p[0] >= res]
    centers = _center_subsample(ps, params.centers)
    mode = ("exact" if ps.n == 1 else "greedy") if params.net_mode == "auto" \
        else params.net_mode

    if threads > 1 and len(centers) > 1:
        chunks = np.array_split(centers, min(threads, len(centers)))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(
                lambda ch: _local_exponents(ps, ch, pairs, mode), chunks))
        table = [row for part in parts for row in part]
    else:
        table = _local_exponents(ps, centers, pairs, mode)
    if not table:
        raise ValueError("no admissible (center, scale pair) combination")
    table.sort()
    exps = np.array([row[3] for row in table])
    if params.quantile == "max":
        raw = float(exps.max())
    else:
        raw = float(np.quantile(exps, float(params.quantile)))
    beta = ps.metric.snowflake_exponent
    value = max(0.0, min(raw, ps.n / beta))
    spread = float(exps.max() - exps.min())
    est = DimEstimate(value, "adim-scan", ("pairs", len(pairs)), spread,
                      detail={"centers": len(centers), "raw": raw})
    return est, table


def localize(ps: PointSet, x: Sequence[float], t: float) -> PointSet:
    """Rescaled ball (ps intersect B(x,t)) / t, renormalized into [0,1]^n.

    The renormalization u -> (u+1)/2 composed with the rescale is a
    similarity with ratio 1/(2t), so the localized sample carries the
    construction depth shifted by log2 of that ratio.
    """
    xa = np.asarray(x, dtype=np.float64).reshape(-1)
    if xa.shape != (ps.n,):
        raise ValueError(f"center must have {ps.n} coordinates")
    hit = np.all(ps.points == xa, axis=1)
    if not bool(hit.any()):
        raise ValueError(f"center {tuple(xa)} is not a sample point")
    if t <= 0:
        raise ValueError("localization scale t must be positive")
    sel = ps.points[np.max(np.abs(ps.points - xa), axis=1) <= t]
    u = (sel - xa) / t
    u = u[np.max(np.abs(u), axis=1) <= 1.0]
    out = (u + 1.0) / 2.0
    depth = None
    if ps.depth is not None:
        depth = int(math.floor(ps.depth - 1 - math.log2(t)))
    return PointSet(out, metric=ps.metric, depth=depth)


def adim_via_localization(
    ps: PointSet,
    centers: int,
    scales: Sequence[float],
    window: tuple[int, int],
    quantile: str | float = "max",
) -> tuple[DimEstimate, dict]:
    """Assouad via the localization family: family box dimension of
    { (ps intersect B(x,t)) / t } over sampled centers x and scales t."""
    k_min, k_max = window
    levels = list(range(k_min, k_max + 1))
    xs = _center_subsample(ps, centers)
    curves = {}
    for i, x in enumerate(xs):
        for t in scales:
            loc = localize(ps, x, t)
            if loc.depth is not None and loc.depth < k_max:
                continue
            curves[(i, t)] = scaling_curve(loc, levels)
    if not curves:
        raise ValueError("no localized member supports the requested window")
    est = family_udim(curves, (k_min, k_max))
    out = DimEstimate(est.value, "adim-localization", (k_min, k_max), est.spread,
                      detail={"members": len(curves), "quantile": quantile})
    return out, curves


def point_fibers(ps: PointSet, m: int) -> dict[tuple[float, ...], PointSet]:
    """Exact sample fibers over the first m coordinates: base point -> slice."""
    if not 0 < m < ps.n:
        raise ValueError(f"fiber split must satisfy 0 < m < {ps.n}")
    groups: dict[tuple[float, ...], list] = {}
    for row in ps.points:
        groups.setdefault(tuple(row[:m]), []).append(row[m:])
    return {
        u: PointSet(np.array(rows), metric=ps.metric, depth=ps.depth)
        for u, rows in groups.items()
    }


def fiber_curves(ps: PointSet, m: int,
                 levels: Sequence[int]) -> dict[tuple[float, ...], ScalingCurve]:
    """Scaling curves of the exact sample fibers, for family estimates."""
    return {u: scaling_curve(fib, levels)
            for u, fib in point_fibers(ps, m).items()}


def _box_occupancy(cover: DyadicCover, j: int) -> dict[tuple[int, ...], int]:
    if j > cover.level:
        raise ValueError(f"window level {j} exceeds cover level {cover.level}")
    shift = cover.level - j
    counts: dict[tuple[int, ...], int] = {}
    for v in cover.indices:
        b = tuple(c >> shift for c in v)
        counts[b] = counts.get(b, 0) + 1
    return counts


def _has_full_box(cover: DyadicCover, theta: float, j: int) -> bool:
    cells_per_box = 2 ** ((cover.level - j) * cover.n)
    occ = _box_occupancy(cover, j)
    return any(c / cells_per_box >= theta for c in occ.values())


def proj_dim(cover: DyadicCover, theta_full: float,
             j: int) -> tuple[int, tuple[int, ...]]:
    """Largest m such that some coordinate projection has a theta-full
    level-j dyadic box; returns (m, witness selection).

    theta_full = 1 demands a completely occupied box, the exact discrete
    interior; smaller thresholds tolerate sampling holes. Value n means the
    cover itself contains a full box; value 0 (empty witness) means no
    one-dimensional projection does.
    """
    if not 0 < theta_full <= 1:
        raise ValueError("fullness threshold must lie in (0, 1]")
    if j > cover.level:
        raise ValueError(f"window level {j} exceeds cover level {cover.level}")
    from .dyadic import project as _project

    for m in range(cover.n, 0, -1):
        for sel in combinations(range(1, cover.n + 1), m):
            p = _project(cover, sel)
            if _has_full_box(p, theta_full, j):
                return m, sel
    return 0, ()


def classify_interior(covers: Sequence[DyadicCover], theta_full: float,
                      j: int) -> str:
    """interior / nowhere_dense / inconclusive at finite resolution.

    interior: every available cover exhibits a theta-full level-j box.
    nowhere_dense: at every level j' <= j, no level-j' box is completely
    occupied, in every available cover.
    """
    if len(covers) < 2:
        raise ValueError("need covers at two or more levels")
    if all(_has_full_box(c, theta_full, j) for c in covers):
        return "interior"
    nowhere = all(
        not _has_full_box(c, 1.0, jp)
        for c in covers
        for jp in range(0, min(j, c.level) + 1)
    )
    if nowhere:
        return "nowhere_dense"
    return "inconclusive"


def tdim_zero_test(covers: Sequence[DyadicCover],
                   shrink_factor: float = 0.5) -> tuple[bool, list[float]]:
    """Shrinking-components surrogate for topological dimension zero.

    True iff the maximum component diameter shrinks by at least the given
    factor between consecutive covers. False only reports failure to shrink
    at the tested levels; it never certifies positive dimension.
    """
    if len(covers) < 3:
        raise ValueError("need covers at three or more levels")
    if not 0 < shrink_factor < 1:
        raise ValueError("shrink factor must lie in (0, 1)")
    from .dyadic import components as _components

    diams = [max(d for _, d in _components(c)) for c in covers]
    ok = all(d2 <= shrink_factor * d1 for d1, d2 in zip(diams, diams[1:]))
    return ok, diams
