"""Deterministic generators for the witness sets used throughout the suite.

Every construction is seedless and exact where the underlying numbers are
rational (middle-lambda Cantor endpoints, reciprocals, rescaled factorials),
so tests and CLI runs reproduce point-for-point. Each generator records a
construction depth: the largest cover level at which the finite sample
provably yields the same dyadic cover as the set it approximates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from .dyadic import Metric, PointSet

__all__ = [
    "cantor",
    "reciprocals",
    "factorials",
    "grid",
    "product",
    "rotated_product",
    "affine_image",
    "bilipschitz_constants",
    "graph_sample",
    "SetRecipe",
    "build",
]

# the fixed similarity renormalizing {(x-y, x+y)} into the unit square
ROTATION_MATRIX = ((0.5, -0.5), (0.5, 0.5))
ROTATION_OFFSET = (0.5, 0.0)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


def cantor(ratio, depth: int, metric: Metric | None = None) -> PointSet:
    """Endpoints of the depth-d middle-lambda Cantor construction on [0,1].

    Each surviving interval [a,b] splits into [a, a+alpha w] and [b-alpha w, b]
    with alpha = (1-lambda)/2. All 2^(d+1) endpoints of the depth-d intervals
    are returned; they all belong to the limit set and are alpha^d-dense in
    it, so covers agree with the true set up to level floor(d log2(1/alpha)).
    Pass the ratio as a string or Fraction ("1/3") for exact arithmetic.
    """
    lam = _as_fraction(ratio)
    if not 0 < lam < 1:
        raise ValueError(f"cantor ratio must lie in (0,1), got {lam}")
    if depth < 0:
        raise ValueError("cantor depth must be nonnegative")
    alpha = (1 - lam) / 2
    intervals = [(Fraction(0), Fraction(1))]
    for _ in range(depth):
        nxt = []
        for a, b in intervals:
            w = b - a
            nxt.append((a, a + alpha * w))
            nxt.append((b - alpha * w, b))
        intervals = nxt
    pts = sorted({e for ab in intervals for e in ab})
    trustworthy = math.floor(depth * math.log2(1 / float(alpha)))
    return PointSet(
        np.array([float(p) for p in pts]).reshape(-1, 1),
        metric=metric,
        depth=trustworthy,
    )


def reciprocals(count: int, metric: Metric | None = None) -> PointSet:
    """{1/k : 1 <= k <= count} together with 0."""
    if count < 1:
        raise ValueError("count must be >= 1")
    pts = np.concatenate([[0.0], 1.0 / np.arange(1, count + 1, dtype=np.float64)])
    depth = math.floor(2 * math.log2(count)) if count > 1 else None
    return PointSet(pts.reshape(-1, 1), metric=metric, depth=depth)


def factorials(count: int, metric: Metric | None = None) -> PointSet:
    """{k!/count! : 1 <= k <= count} together with 0, rescaled into [0,1].

    Rescaling by 1/count! is a similarity, so every dimension quantity of the
    raw factorial set transfers unchanged. The count is capped so the exact
    integer ratios stay inside the 2^63 range used for level arithmetic.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if count > 20:
        raise ValueError("factorials supports count <= 20 (exact integer bound)")
    top = math.factorial(count)
    pts = [0.0] + [math.factorial(k) / top for k in range(1, count + 1)]
    depth = math.floor(math.log2(top)) if count > 1 else None
    return PointSet(np.array(pts).reshape(-1, 1), metric=metric, depth=depth)


def grid(count: int, metric: Metric | None = None) -> PointSet:
    """count equally spaced points on [0,1], endpoints included."""
    if count < 2:
        raise ValueError("grid needs at least 2 points")
    pts = np.linspace(0.0, 1.0, count)
    depth = math.floor(math.log2(count - 1))
    return PointSet(pts.reshape(-1, 1), metric=metric, depth=depth)


def product(a: PointSet, b: PointSet) -> PointSet:
    """Cartesian product sample in R^(n_a + n_b)."""
    pa, pb = a.points, b.points
    left = np.repeat(pa, pb.shape[0], axis=0)
    right = np.tile(pb, (pa.shape[0], 1))
    depth = None
    if a.depth is not None and b.depth is not None:
        depth = min(a.depth, b.depth)
    elif a.depth is not None or b.depth is not None:
        depth = a.depth if a.depth is not None else b.depth
    return PointSet(np.hstack([left, right]), metric=a.metric, depth=depth)


def affine_image(a: PointSet, matrix: Sequence[Sequence[float]],
                 offset: Sequence[float], depth: Optional[int] = None) -> PointSet:
    """Image of a sample under x -> M x + c."""
    M = np.asarray(matrix, dtype=np.float64)
    c = np.asarray(offset, dtype=np.float64)
    if M.ndim != 2 or M.shape[1] != a.n:
        raise ValueError(f"matrix shape {M.shape} does not accept points in R^{a.n}")
    if c.shape != (M.shape[0],):
        raise ValueError(f"offset shape {c.shape} does not match matrix rows {M.shape[0]}")
    img = a.points @ M.T + c
    return PointSet(img, metric=a.metric, depth=depth if depth is not None else a.depth)


def bilipschitz_constants(
    a: PointSet,
    matrix: Sequence[Sequence[float]],
    pair_cap: int = 2_000_000,
    seed: int = 0,
) -> tuple[float, float]:
    """Min and max of |M(p-q)|_sup / |p-q|_sup over sample pairs.

    These are the sup-norm analogues of extreme singular values, restricted
    to the sample. All pairs are enumerated when their number fits the cap;
    otherwise a seeded uniform pair subsample is used.
    """
    M = np.asarray(matrix, dtype=np.float64)
    pts = a.points
    m = pts.shape[0]
    if m < 2:
        raise ValueError("need at least two points")
    npairs = m * (m - 1) // 2
    if npairs <= pair_cap:
        ii, jj = np.triu_indices(m, k=1)
    else:
        rng = np.random.default_rng(seed)
        ii = rng.integers(0, m, size=pair_cap)
        jj = rng.integers(0, m, size=pair_cap)
        keep = ii != jj
        ii, jj = ii[keep], jj[keep]
    d = pts[ii] - pts[jj]
    num = np.max(np.abs(d @ M.T), axis=1)
    den = np.max(np.abs(d), axis=1)
    ratios = num / den
    return float(ratios.min()), float(ratios.max())


def rotated_product(a: PointSet, b: PointSet) -> PointSet:
    """{((x-y+1)/2, (x+y)/2) : x in a, y in b}, the renormalized rotation.

    Equals the affine image of product(a, b) under the fixed similarity
    ROTATION_MATRIX, ROTATION_OFFSET, which maps the raw difference/sum pair
    set into the unit square while preserving every dimension value.
    """
    if a.n != 1 or b.n != 1:
        raise ValueError("rotated_product expects one-dimensional factors")
    prod = product(a, b)
    depth = None if prod.depth is None else max(prod.depth - 1, 0)
    return affine_image(prod, ROTATION_MATRIX, ROTATION_OFFSET, depth=depth)


def graph_sample(table: Mapping[Any, float], metric: Metric | None = None,
                 depth: Optional[int] = None) -> PointSet:
    """{(u, f(u))} for a finite grid-to-value table; u may be a scalar or tuple."""
    if not table:
        raise ValueError("graph table must be nonempty")
    rows = []
    for u, v in table.items():
        base = (float(u),) if np.isscalar(u) else tuple(float(c) for c in u)
        rows.append(base + (float(v),))
    return PointSet(np.array(rows), metric=metric, depth=depth)


@dataclass(frozen=True)
class SetRecipe:
    """Seedless description of a constructed set, JSON round-trippable."""

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)

    KINDS = frozenset({
        "cantor", "reciprocals", "factorials", "grid", "product",
        "rotated_product", "affine_image", "graph", "union",
    })

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown recipe kind {self.kind!r}")

    def to_json(self) -> str:
        return json.dumps(self._as_dict(), sort_keys=True, separators=(",", ":"))

    def _as_dict(self) -> dict:
        return {"kind": self.kind, **self.params}

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any]) -> "SetRecipe":
        obj = dict(obj)
        kind = obj.pop("kind", None)
        if kind is None:
            raise ValueError("recipe is missing the 'kind' field")
        return cls(kind, obj)

    @classmethod
    def from_json(cls, text: str) -> "SetRecipe":
        return cls.from_dict(json.loads(text))


def _metric_from(params: Mapping[str, Any]) -> Metric | None:
    exp = params.get("snowflake_exponent")
    return None if exp is None else Metric(float(exp))


def build(recipe: SetRecipe) -> PointSet:
    """Materialize a recipe into a PointSet."""
    p = recipe.params
    metric = _metric_from(p)
    if recipe.kind == "cantor":
        return cantor(p["ratio"], int(p["depth"]), metric=metric)
    if recipe.kind == "reciprocals":
        return reciprocals(int(p["count"]), metric=metric)
    if recipe.kind == "factorials":
        return factorials(int(p["count"]), metric=metric)
    if recipe.kind == "grid":
        return grid(int(p["count"]), metric=metric)
    if recipe.kind == "product":
        a = build(SetRecipe.from_dict(p["a"]))
        b = build(SetRecipe.from_dict(p["b"]))
        out = product(a, b)
    elif recipe.kind == "rotated_product":
        a = build(SetRecipe.from_dict(p["a"]))
        b = build(SetRecipe.from_dict(p["b"]))
        out = rotated_product(a, b)
    elif recipe.kind == "affine_image":
        a = build(SetRecipe.from_dict(p["a"]))
        out = affine_image(a, p["matrix"], p["offset"], depth=p.get("depth"))
    elif recipe.kind == "graph":
        table = {}
        for row in p["table"]:
            *u, v = row
            table[u[0] if len(u) == 1 else tuple(u)] = v
        out = graph_sample(table, metric=metric, depth=p.get("depth"))
    elif recipe.kind == "union":
        parts = [build(SetRecipe.from_dict(q)) for q in p["parts"]]
        if len({q.n for q in parts}) != 1:
            raise ValueError("union parts must share the ambient dimension")
        pts = np.vstack([q.points for q in parts])
        depths = [q.depth for q in parts if q.depth is not None]
        out = PointSet(pts, metric=parts[0].metric,
                       depth=min(depths) if depths else None)
    else:  # pragma: no cover
        raise ValueError(f"unhandled recipe kind {recipe.kind!r}")
    if metric is not None:
        out = out.with_metric(metric)
    return out
