"""Density amplification for one-dimensional samples.

The loop: test whether the quotient image Q(A^4), Q(x) = (x1-x2)/(x3-x4)
(0 when x3 = x4), is eps-dense on [0,1]. If not, the difference directions
of A^2 avoid an open double cone through the origin; projecting A^2 onto
the line perpendicular to the cone axis (then rotating to the real line) is
bi-Lipschitz with lower constant sin(half width), and the projected square
replaces A. Density on finite data means eps-density on a fixed window,
and every renormalization along the way is a similarity.

The blowups |A|^4 and |A|^2 are controlled by working on the deduplicated
difference set where exact, and by seeded uniform subsampling past the
caps, so traces are bit-reproducible for fixed seeds and caps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dyadic import Metric, PointSet, net_number
from .estimators import min_positive_gap

__all__ = [
    "ConeGap",
    "IterationRecord",
    "AmplifierTrace",
    "quotient_image",
    "eps_dense",
    "cone_gap",
    "verify_cone_gap",
    "project_pairs",
    "amplify",
]

QUOTIENT_PAIR_CAP = 4_000_000
SQUARE_PAIR_CAP = 4_000_000
ANGLE_ROUND = 12  # decimals when deduplicating directions


@dataclass(frozen=True)
class ConeGap:
    """An open double cone through the origin avoided by all difference
    vectors of the planar square of a sample.

    axis_angle and half_width are radians mod pi. The perpendicular
    projection composed with the rotation-to-line is bi-Lipschitz on the
    square with lower constant sin(half_width); the Euclidean constant
    also serves as the sup-norm constant since |.|_2 >= |.|_sup in the
    plane (the sup-norm upper constant is sqrt(2)).
    """

    axis_angle: float
    half_width: float
    lower_constant_euclid: float
    lower_constant_sup: float

    def projection_direction(self) -> tuple[float, float]:
        """Unit vector of the line perpendicular to the cone axis."""
        ang = self.axis_angle + math.pi / 2
        return (math.cos(ang), math.sin(ang))


def _differences(a: PointSet) -> np.ndarray:
    vals = a.points[:, 0]
    d = np.unique((vals[:, None] - vals[None, :]).ravel())
    return d


def quotient_image(a: PointSet, tuple_cap: int = QUOTIENT_PAIR_CAP,
                   seed: int = 0, window: float = 2.0) -> PointSet:
    """Q(A^4) = {(x1-x2)/(x3-x4)} clipped to [-window, window], with 0 for
    the degenerate denominators.

    Q factors through the difference set D of A: Q(A^4) = D/D* together
    with 0. When |D|^2 fits the tuple cap the image is exact; otherwise a
    seeded uniform sample of numerator/denominator pairs is used.
    """
    if a.n != 1:
        raise ValueError("quotient_image expects a one-dimensional sample")
    d = _differences(a)
    nz = d[d != 0.0]
    vals = [np.array([0.0])]
    if nz.size:
        if d.size * nz.size <= tuple_cap:
            q = (d[:, None] / nz[None, :]).ravel()
        else:
            rng = np.random.default_rng(seed)
            num = rng.choice(d, size=tuple_cap)
            den = rng.choice(nz, size=tuple_cap)
            q = num / den
        q = q[np.abs(q) <= window]
        vals.append(q)
    out = np.unique(np.concatenate(vals))
    return PointSet(out.reshape(-1, 1), metric=a.metric)


def eps_dense(ps: PointSet, interval: tuple[float, float], eps: float) -> bool:
    """True iff every cell of the eps-grid partition of [a,b] holds a point."""
    a, b = interval
    if not b > a:
        raise ValueError("interval must have positive length")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if ps.n != 1:
        raise ValueError("eps_dense expects a one-dimensional sample")
    vals = ps.points[:, 0]
    ncells = math.ceil((b - a) / eps)
    for i in range(ncells):
        lo = a + i * eps
        hi = min(b, lo + eps)
        j = np.searchsorted(vals, lo, side="left")
        if j >= vals.size or vals[j] > hi:
            return False
    return True


def cone_gap(a: PointSet, angular_resolution: float = 1e-9,
             pair_cap: int = SQUARE_PAIR_CAP, seed: int = 0) -> Optional[ConeGap]:
    """Largest angular gap among the difference directions of A^2.

    Difference vectors of A^2 are exactly D x D for the difference set D of
    A. Directions are taken mod pi; the cone is centered in the largest gap
    (ties broken toward the smallest center angle) and returned only when
    the gap width exceeds the angular resolution.
    """
    if a.n != 1:
        raise ValueError("cone_gap expects a one-dimensional sample")
    if len(a) < 2:
        raise ValueError("need at least two points")
    d = _differences(a)
    if d.size * d.size > pair_cap:
        rng = np.random.default_rng(seed)
        d = np.sort(rng.choice(d, size=int(math.isqrt(pair_cap)), replace=False))
    du = np.repeat(d, d.size)
    dv = np.tile(d, d.size)
    keep = (du != 0.0) | (dv != 0.0)
    ang = np.mod(np.arctan2(dv[keep], du[keep]), math.pi)
    dirs = np.unique(np.round(ang, ANGLE_ROUND))
    gaps = np.diff(np.concatenate([dirs, [dirs[0] + math.pi]]))
    width = float(gaps.max())
    if width <= angular_resolution:
        return None
    i = int(np.argmax(gaps))  # argmax takes the first maximum: least center
    center = float((dirs[i] + width / 2.0) % math.pi)
    half = width / 2.0
    c = math.sin(half)
    return ConeGap(center, half, c, c)


def verify_cone_gap(a: PointSet, gap: ConeGap,
                    pair_cap: int = SQUARE_PAIR_CAP, seed: int = 0) -> int:
    """Exhaustive bi-Lipschitz check of a cone certificate.

    Counts violations of |T(p) - T(q)| >= c |p - q|_sup over the difference
    vectors of A^2 (all of D x D when it fits the cap, else a seeded
    subsample). A sound certificate yields zero.
    """
    e = gap.projection_direction()
    d = _differences(a)
    if d.size * d.size > pair_cap:
        rng = np.random.default_rng(seed)
        d = np.unique(rng.choice(d, size=int(math.isqrt(pair_cap)), replace=False))
    du = np.repeat(d, d.size)
    dv = np.tile(d, d.size)
    keep = (du != 0.0) | (dv != 0.0)
    du, dv = du[keep], dv[keep]
    proj = np.abs(du * e[0] + dv * e[1])
    supn = np.maximum(np.abs(du), np.abs(dv))
    # strict violation margin: allow float roundoff at the cone boundary
    return int(np.sum(proj < gap.lower_constant_sup * supn * (1.0 - 1e-12)))


def project_pairs(a: PointSet, gap: ConeGap,
                  pair_cap: int = SQUARE_PAIR_CAP, seed: int = 0) -> PointSet:
    """T(A^2) renormalized into [0,1] by a similarity.

    T is the scalar projection of the plane onto the line perpendicular to
    the cone axis. Degenerate images (all values equal) collapse to {0}.
    """
    e = gap.projection_direction()
    vals = a.points[:, 0]
    if vals.size * vals.size > pair_cap:
        rng = np.random.default_rng(seed)
        x = rng.choice(vals, size=pair_cap)
        y = rng.choice(vals, size=pair_cap)
        img = x * e[0] + y * e[1]
    else:
        img = (vals[:, None] * e[0] + vals[None, :] * e[1]).ravel()
    img = np.unique(img)
    lo, hi = float(img.min()), float(img.max())
    if hi == lo:
        return PointSet(np.array([[0.0]]), metric=a.metric)
    return PointSet(((img - lo) / (hi - lo)).reshape(-1, 1), metric=a.metric)


@dataclass(frozen=True)
class IterationRecord:
    size: int
    net_exponent: float
    net_spread: float
    cone: Optional[ConeGap]
    dense: bool


@dataclass(frozen=True)
class AmplifierTrace:
    """Per-iteration record of the amplification loop.

    final_map_arity: the composed map consumes A^N; N doubles with every
    projection step and picks up the final factor 4 when density is
    reached through Q.
    """

    iterations: tuple[IterationRecord, ...]
    flag: str  # dense | inconclusive | exhausted
    final_map_arity: int
    eps: float
    seed: int


def _net_exponent(a: PointSet, k_lo: int = 1, k_hi: int = 8) -> tuple[float, float]:
    if len(a) < 2:
        return 0.0, 0.0
    res = min_positive_gap(a)
    ks, ys = [], []
    for k in range(k_lo, k_hi + 1):
        r = 2.0 ** -k
        if r < res:
            break
        ks.append(k)
        ys.append(math.log2(net_number(a, r, mode="greedy")))
    if len(ks) < 2:
        return 0.0, 0.0
    ka = np.array(ks, dtype=float)
    ya = np.array(ys)
    slope = float(np.polyfit(ka, ya, 1)[0])
    pair = [(ys[j] - ys[i]) / (ks[j] - ks[i])
            for i in range(len(ks)) for j in range(i + 1, len(ks))]
    return max(0.0, slope), float(max(pair) - min(pair))


def amplify(a: PointSet, eps: float, max_iters: int = 8,
            tuple_cap: int = QUOTIENT_PAIR_CAP,
            pair_cap: int = SQUARE_PAIR_CAP,
            angular_resolution: float = 1e-9,
            seed: int = 0) -> AmplifierTrace:
    """Iterate quotient-density tests and cone projections.

    Per round: if Q(current^4) is eps-dense on [0,1], stop dense (arity
    4 * 2^rounds); otherwise find a cone gap, replace current with the
    renormalized projection of its square, and continue. Stops
    inconclusive when no cone gap exceeds the angular resolution, or
    exhausted after max_iters rounds (arity 2^rounds).
    """
    if a.n != 1:
        raise ValueError("amplify expects a one-dimensional sample")
    current = a
    records = []
    for it in range(max_iters + 1):
        exp_est, exp_spread = _net_exponent(current)
        q = quotient_image(current, tuple_cap=tuple_cap, seed=seed)
        if eps_dense(q, (0.0, 1.0), eps):
            records.append(IterationRecord(len(current), exp_est, exp_spread,
                                           None, True))
            return AmplifierTrace(tuple(records), "dense", 4 * 2 ** it, eps, seed)
        if it == max_iters:
            records.append(IterationRecord(len(current), exp_est, exp_spread,
                                           None, False))
            return AmplifierTrace(tuple(records), "exhausted", 2 ** it, eps, seed)
        gap = cone_gap(current, angular_resolution=angular_resolution,
                       pair_cap=pair_cap, seed=seed)
        records.append(IterationRecord(len(current), exp_est, exp_spread,
                                       gap, False))
        if gap is None:
            return AmplifierTrace(tuple(records), "inconclusive", 2 ** it, eps, seed)
        current = project_pairs(current, gap, pair_cap=pair_cap, seed=seed)
    raise AssertionError("unreachable")
