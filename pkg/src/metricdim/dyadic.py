"""Dyadic lattice covers of finite point sets and packing primitives.

Everything downstream (dimension estimators, sparse decompositions, the
density amplifier) consumes the two canonical representations built here:

* ``PointSet``: a deduplicated, lexicographically sorted sample of a subset
  of R^n, with a declared metric (sup norm, optionally snowflaked) and a
  construction depth bounding the trustworthy cover resolution.
* ``DyadicCover``: the set of level-k lattice indices v such that the
  half-open cube prod_i [v_i 2^-k, (v_i+1) 2^-k) meets the sample.

Covers use half-open cubes so point-to-cube assignment is a function;
points on the right boundary of the unit cube clamp into the last cube.
This changes cube counts by at most a factor 2^n per axis, which is
irrelevant to every dimension value computed from them.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from itertools import product as iproduct
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

__all__ = [
    "BudgetExceeded",
    "Metric",
    "PointSet",
    "DyadicCube",
    "DyadicCover",
    "FiberFamily",
    "ScalingCurve",
    "cover_points",
    "refine",
    "net_number",
    "fibers",
    "project",
    "components",
    "scaling_curve",
]

EXACT_NET_POINT_BUDGET = 2500


class BudgetExceeded(RuntimeError):
    """A brute-force search exceeded its configured budget."""


@dataclass(frozen=True)
class Metric:
    """Sup-norm metric, optionally snowflaked: d(x,y) = |x-y|_sup^beta."""

    snowflake_exponent: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.snowflake_exponent <= 1.0:
            raise ValueError(
                f"snowflake exponent must lie in (0, 1], got {self.snowflake_exponent}"
            )

    def sup_threshold(self, r: float) -> float:
        """Sup-norm distance equivalent to metric distance r."""
        if self.snowflake_exponent == 1.0:
            return r
        return r ** (1.0 / self.snowflake_exponent)


class PointSet:
    """Finite sample of a subset of R^n.

    Points are deduplicated and stored in lexicographic order, which makes
    every downstream computation order-independent. ``depth`` is the largest
    cover level at which the sample is known to produce the same cover as
    the set it approximates; None means unrestricted.
    """

    __slots__ = ("points", "n", "metric", "depth")

    def __init__(
        self,
        points: Iterable[Sequence[float]] | np.ndarray,
        metric: Metric | None = None,
        depth: Optional[int] = None,
    ):
        arr = np.asarray(points, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[0] == 0:
            raise ValueError("a PointSet needs a nonempty 2-d array of points")
        if not np.all(np.isfinite(arr)):
            raise ValueError("all coordinates must be finite")
        arr = np.unique(arr, axis=0)  # dedups and sorts lexicographically
        arr.setflags(write=False)
        object.__setattr__(self, "points", arr)
        object.__setattr__(self, "n", arr.shape[1])
        object.__setattr__(self, "metric", metric if metric is not None else Metric())
        object.__setattr__(self, "depth", depth)

    def __setattr__(self, name, value):
        raise AttributeError("PointSet is immutable")

    def __len__(self) -> int:
        return self.points.shape[0]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PointSet)
            and self.n == other.n
            and self.points.shape == other.points.shape
            and bool(np.array_equal(self.points, other.points))
        )

    def __repr__(self) -> str:
        return f"PointSet(n={self.n}, size={len(self)}, depth={self.depth})"

    def in_unit_cube(self) -> bool:
        return bool(np.all(self.points >= 0.0) and np.all(self.points <= 1.0))

    def with_metric(self, metric: Metric) -> "PointSet":
        return PointSet(self.points, metric=metric, depth=self.depth)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{i}" for i in range(1, self.n + 1)])
        for row in self.points:
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, metric: Metric | None = None,
                 depth: Optional[int] = None) -> "PointSet":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or not rows[0] or not rows[0][0].startswith("x"):
            raise ValueError("PointSet CSV needs a header row x1,...,xn")
        pts = [[float(v) for v in row] for row in rows[1:] if row]
        return cls(pts, metric=metric, depth=depth)


@dataclass(frozen=True)
class DyadicCube:
    """One half-open dyadic cube [v 2^-k, (v+1) 2^-k) per coordinate."""

    level: int
    index: tuple[int, ...]

    def bounds(self) -> tuple[tuple[float, float], ...]:
        w = 2.0 ** -self.level
        return tuple((v * w, (v + 1) * w) for v in self.index)


class DyadicCover:
    """Set of level-k lattice indices occupied by a sample."""

    __slots__ = ("level", "n", "indices", "_sorted")

    def __init__(self, level: int, n: int, indices: Iterable[tuple[int, ...]]):
        if level < 0:
            raise ValueError("cover level must be nonnegative")
        idx = frozenset(tuple(int(c) for c in v) for v in indices)
        for v in idx:
            if len(v) != n:
                raise ValueError(f"index {v} does not have {n} coordinates")
        object.__setattr__(self, "level", int(level))
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "_sorted", None)

    def __setattr__(self, name, value):
        raise AttributeError("DyadicCover is immutable")

    def __len__(self) -> int:
        return len(self.indices)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DyadicCover)
            and self.level == other.level
            and self.n == other.n
            and self.indices == other.indices
        )

    def __repr__(self) -> str:
        return f"DyadicCover(level={self.level}, n={self.n}, size={len(self)})"

    def sorted_indices(self) -> list[tuple[int, ...]]:
        if self._sorted is None:
            object.__setattr__(self, "_sorted", sorted(self.indices))
        return self._sorted

    def in_unit_cube(self) -> bool:
        top = 2 ** self.level
        return all(0 <= c < top for v in self.indices for c in v)

    def cubes(self) -> list[DyadicCube]:
        return [DyadicCube(self.level, v) for v in self.sorted_indices()]

    def to_json(self) -> str:
        return json.dumps(
            {"n": self.n, "k": self.level,
             "indices": [list(v) for v in self.sorted_indices()]},
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, text: str) -> "DyadicCover":
        obj = json.loads(text)
        return cls(obj["k"], obj["n"], [tuple(v) for v in obj["indices"]])


@dataclass(frozen=True)
class FiberFamily:
    """Fibers of an n-dimensional cover over its first m coordinates.

    fibers maps each base index u in Z^m to the (n-m)-dimensional cover
    { w : (u, w) occupied }, all at the same level.
    """

    base_dim: int
    fiber_dim: int
    level: int
    fibers: Mapping[tuple[int, ...], DyadicCover]

    def reconstruct(self) -> DyadicCover:
        idx = []
        for u, fib in self.fibers.items():
            idx.extend(u + w for w in fib.indices)
        return DyadicCover(self.level, self.base_dim + self.fiber_dim, idx)


@dataclass(frozen=True)
class ScalingCurve:
    """Counts N_k over a strictly increasing sequence of levels k.

    When the ambient dimension ``n`` is known, consecutive levels must obey
    the child-count bound N_{k+1} <= 2^n N_k. Net-based curves (where counts
    can grow faster under a snowflake metric) leave ``n`` unset.
    """

    entries: tuple[tuple[int, int], ...]
    n: Optional[int] = None

    def __post_init__(self):
        ks = [k for k, _ in self.entries]
        cs = [c for _, c in self.entries]
        if len(ks) == 0:
            raise ValueError("a ScalingCurve needs at least one entry")
        if any(k2 <= k1 for k1, k2 in zip(ks, ks[1:])):
            raise ValueError("levels must be strictly increasing")
        if any(c < 1 for c in cs):
            raise ValueError("counts must be positive")
        if any(c2 < c1 for c1, c2 in zip(cs, cs[1:])):
            raise ValueError("counts must be nondecreasing in k")
        if self.n is not None:
            for (k1, c1), (k2, c2) in zip(self.entries, self.entries[1:]):
                if k2 == k1 + 1 and c2 > (2 ** self.n) * c1:
                    raise ValueError(
                        f"count jump {c1}->{c2} at level {k2} exceeds 2^{self.n} children"
                    )

    def levels(self) -> list[int]:
        return [k for k, _ in self.entries]

    def window(self, k_min: int, k_max: int) -> "ScalingCurve":
        sub = tuple((k, c) for k, c in self.entries if k_min <= k <= k_max)
        if len(sub) < 2:
            raise ValueError(f"window ({k_min},{k_max}) keeps fewer than 2 entries")
        return ScalingCurve(sub, n=self.n)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "count"])
        for k, c in self.entries:
            w.writerow([k, c])
        return buf.getvalue()


def _require_unit_cube(ps: PointSet):
    bad = np.where((ps.points < 0.0) | (ps.points > 1.0))
    if bad[0].size:
        i = int(bad[0][0])
        raise ValueError(
            f"point {tuple(ps.points[i])} lies outside the unit cube [0,1]^{ps.n}"
        )


def cover_points(ps: PointSet, k: int) -> DyadicCover:
    """Level-k dyadic cover of a sample restricted to the unit cube.

    Index of a point is floor(2^k x) per coordinate, clamped to 2^k - 1 so
    right-boundary points land in the last cube.
    """
    if k < 0:
        raise ValueError("level must be nonnegative")
    _require_unit_cube(ps)
    scaled = np.floor(ps.points * (2.0 ** k)).astype(np.int64)
    np.clip(scaled, 0, 2 ** k - 1, out=scaled)
    uniq = np.unique(scaled, axis=0)
    return DyadicCover(k, ps.n, map(tuple, uniq))


def refine(cover: DyadicCover, ps: PointSet, k2: int) -> DyadicCover:
    """Recompute the cover of ps at a strictly finer level."""
    if k2 <= cover.level:
        raise ValueError(f"refinement level {k2} must exceed cover level {cover.level}")
    return cover_points(ps, k2)


def _greedy_net_1d(sorted_vals: np.ndarray, thr: float) -> int:
    # sorted greedy is optimal in one dimension
    count = 0
    i = 0
    m = sorted_vals.shape[0]
    while i < m:
        count += 1
        i = int(np.searchsorted(sorted_vals, sorted_vals[i] + thr, side="left"))
    return count


def _greedy_net_nd(pts: np.ndarray, thr: float) -> int:
    # maximal (inclusion-wise) separated set, scanning in lexicographic order;
    # selected points are bucketed on a thr-grid so conflicts are local
    cells: dict[tuple[int, ...], list[np.ndarray]] = {}
    offsets = list(iproduct((-1, 0, 1), repeat=pts.shape[1]))
    count = 0
    inv = 1.0 / thr
    for p in pts:
        key = tuple(int(np.floor(c * inv)) for c in p)
        ok = True
        for off in offsets:
            nb = tuple(k + o for k, o in zip(key, off))
            for q in cells.get(nb, ()):
                if np.max(np.abs(p - q)) < thr:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            count += 1
            cells.setdefault(key, []).append(p)
    return count


def _exact_net_nd(pts: np.ndarray, thr: float) -> int:
    # branch and bound for the maximum separated subset: a maximum independent
    # set of the conflict graph (pairs closer than thr)
    m = pts.shape[0]
    conflict = [set() for _ in range(m)]
    for i in range(m):
        d = np.max(np.abs(pts[i + 1:] - pts[i]), axis=1)
        for j in np.nonzero(d < thr)[0]:
            conflict[i].add(i + 1 + int(j))
            conflict[i + 1 + int(j)].add(i)

    best = _greedy_net_nd(pts, thr)  # greedy seed as the initial lower bound

    def expand(cand: set[int], size: int):
        nonlocal best
        if size + len(cand) <= best:
            return
        if not cand:
            best = max(best, size)
            return
        v = max(cand, key=lambda u: (len(conflict[u] & cand), -u))
        expand(cand - {v} - conflict[v], size + 1)
        expand(cand - {v}, size)

    expand(set(range(m)), 0)
    return best


def net_number(
    ps: PointSet,
    r: float,
    mode: str = "exact",
    budget: int = EXACT_NET_POINT_BUDGET,
) -> int:
    """Packing number net_r: the size of a pairwise r-separated subset.

    Distances are taken in the declared metric (sup norm raised to the
    snowflake exponent); separation is non-strict, d(x,y) >= r. Exact mode
    returns the maximum cardinality; greedy mode returns a maximal separated
    set, which satisfies greedy(r) >= exact(2r). One-dimensional samples use
    the sorted greedy scan in both modes, which is optimal there.
    """
    if r <= 0:
        raise ValueError("separation r must be positive")
    if mode not in ("exact", "greedy"):
        raise ValueError(f"unknown net mode {mode!r}")
    thr = ps.metric.sup_threshold(r)
    if ps.n == 1:
        return _greedy_net_1d(ps.points[:, 0], thr)
    if mode == "greedy":
        return _greedy_net_nd(ps.points, thr)
    if len(ps) > budget:
        raise BudgetExceeded(
            f"exact packing on {len(ps)} points exceeds the budget of {budget}; "
            "use mode='greedy'"
        )
    return _exact_net_nd(ps.points, thr)


def fibers(cover: DyadicCover, m: int) -> FiberFamily:
    """Split an n-dimensional cover into fibers over its first m coordinates."""
    if not 0 < m < cover.n:
        raise ValueError(f"split position must satisfy 0 < m < {cover.n}, got {m}")
    groups: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
    for v in cover.sorted_indices():
        groups.setdefault(v[:m], []).append(v[m:])
    fam = {
        u: DyadicCover(cover.level, cover.n - m, ws) for u, ws in groups.items()
    }
    return FiberFamily(m, cover.n - m, cover.level, fam)


def project(cover: DyadicCover, selection: Sequence[int]) -> DyadicCover:
    """Coordinate projection of a cover; selection is 1-based and increasing."""
    sel = tuple(int(s) for s in selection)
    if len(sel) == 0:
        raise ValueError("selection must keep at least one coordinate")
    if any(s2 <= s1 for s1, s2 in zip(sel, sel[1:])):
        raise ValueError(f"selection {sel} must be strictly increasing")
    if sel[0] < 1 or sel[-1] > cover.n:
        raise ValueError(f"selection {sel} out of range 1..{cover.n}")
    idx = {tuple(v[s - 1] for s in sel) for v in cover.indices}
    return DyadicCover(cover.level, len(sel), idx)


def components(cover: DyadicCover) -> list[tuple[frozenset, float]]:
    """Connected components under king-move adjacency, with absolute diameters.

    Two cubes are adjacent iff their index difference lies in {-1,0,1}^n.
    The diameter of a component is the sup-norm extent of its cube union:
    2^-k (max coordinate index spread + 1).
    """
    cells = cover.indices
    offsets = [o for o in iproduct((-1, 0, 1), repeat=cover.n)
               if any(c != 0 for c in o)]
    seen: set[tuple[int, ...]] = set()
    out = []
    w = 2.0 ** -cover.level
    for start in cover.sorted_indices():
        if start in seen:
            continue
        comp = []
        stack = [start]
        seen.add(start)
        while stack:
            v = stack.pop()
            comp.append(v)
            for off in offsets:
                nb = tuple(c + o for c, o in zip(v, off))
                if nb in cells and nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        spread = max(
            max(v[i] for v in comp) - min(v[i] for v in comp)
            for i in range(cover.n)
        )
        out.append((frozenset(comp), (spread + 1) * w))
    return out


def scaling_curve(ps: PointSet, levels: Sequence[int]) -> ScalingCurve:
    """Box-counting curve (k, N_k) over the given levels.

    Levels beyond the sample's construction depth are refused: counts there
    would reflect the sampling, not the set.
    """
    ks = sorted(set(int(k) for k in levels))
    if ps.depth is not None and ks and ks[-1] > ps.depth:
        raise ValueError(
            f"level {ks[-1]} exceeds the sample's construction depth {ps.depth}"
        )
    entries = tuple((k, len(cover_points(ps, k))) for k in ks)
    return ScalingCurve(entries, n=ps.n)
