"""Sparse lattice decompositions and the planar four-class classifier.

A lattice set C in Z^n is delta-sparse when some coordinate can be dropped
so that every fiber over the remaining coordinates holds at most delta
points. Decomposing a cover into a fixed number of delta-sparse classes,
and tracking the least achievable delta across levels, is the combinatorial
engine behind the family dimension bounds; the four-class classifier
reproduces that decomposition structurally for planar covers of
nowhere-dense sets (interior columns and rows, jump cells of the lower
envelope, and the residue).

Every certificate producible here revalidates from scratch: classes must
partition the input and every class fiber is recounted against its bound.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .dyadic import BudgetExceeded, DyadicCover, FiberFamily

__all__ = [
    "CertificateError",
    "SparseCertificate",
    "SparsenessProfile",
    "ThmBClasses",
    "is_delta_sparse",
    "max_fiber",
    "card_bound_check",
    "sparse_decompose",
    "validate_certificate",
    "sparseness_profile",
    "theoremB_classify",
    "uniform_partition_search",
]

DECOMPOSE_NODE_BUDGET = 10_000_000


class CertificateError(ValueError):
    """A certificate failed independent revalidation."""


def _as_cells(cells) -> list[tuple[int, ...]]:
    if isinstance(cells, DyadicCover):
        return cells.sorted_indices()
    out = sorted(tuple(int(c) for c in v) for v in cells)
    if out and len({len(v) for v in out}) != 1:
        raise ValueError("lattice cells must share one dimension")
    return out


def _fiber_key(cell: tuple[int, ...], drop: int) -> tuple[int, ...]:
    return cell[: drop - 1] + cell[drop:]


def max_fiber(cells, drop: int) -> int:
    """Largest fiber cardinality when coordinate ``drop`` (1-based) is dropped."""
    cs = _as_cells(cells)
    if not cs:
        return 0
    counts: dict[tuple[int, ...], int] = {}
    for v in cs:
        key = _fiber_key(v, drop)
        counts[key] = counts.get(key, 0) + 1
    return max(counts.values())


def is_delta_sparse(cells, delta: float) -> Optional[int]:
    """Least drop coordinate witnessing delta-sparseness, or None.

    Coordinate c (1-based) witnesses when every fiber of the cells over the
    remaining n-1 coordinates has cardinality at most delta. For n = 1 the
    single fiber is the whole set, so the test is card <= delta.
    """
    cs = _as_cells(cells)
    if not cs:
        return 1
    n = len(cs[0])
    for drop in range(1, n + 1):
        if max_fiber(cs, drop) <= delta:
            return drop
    return None


def card_bound_check(cells, drop: int, delta: float) -> bool:
    """Cross-check of the counting bound card C <= delta card(pi C).

    The witness is revalidated first; a sound witness can never make this
    return False (the inequality is a theorem), so the operation exists as
    an oracle against implementation drift.
    """
    cs = _as_cells(cells)
    if max_fiber(cs, drop) > delta:
        raise CertificateError(
            f"coordinate {drop} is not a valid delta={delta} witness")
    proj = {_fiber_key(v, drop) for v in cs}
    return len(cs) <= delta * len(proj)


@dataclass(frozen=True)
class SparseCertificate:
    """Witness of a decomposition into delta-sparse classes.

    classes partition the input cells; projections[i] is the dropped
    coordinate for class i; delta[i] is the achieved max fiber cardinality.
    """

    s: int
    classes: tuple[tuple[tuple[int, ...], ...], ...]
    projections: tuple[int, ...]
    delta: tuple[int, ...]
    level: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "s": self.s,
                "classes": [[list(v) for v in cls] for cls in self.classes],
                "projections": list(self.projections),
                "delta": list(self.delta),
                "level": self.level,
            },
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, text: str) -> "SparseCertificate":
        obj = json.loads(text)
        return cls(
            int(obj["s"]),
            tuple(tuple(tuple(int(c) for c in v) for v in cl) for cl in obj["classes"]),
            tuple(int(p) for p in obj["projections"]),
            tuple(int(d) for d in obj["delta"]),
            int(obj["level"]),
        )


def validate_certificate(cells, cert: SparseCertificate) -> None:
    """Recount a certificate from scratch; raises CertificateError on any
    violation, naming the offending coordinates."""
    target = set(_as_cells(cells))
    seen: set[tuple[int, ...]] = set()
    for i, cls in enumerate(cert.classes):
        for v in cls:
            if v in seen:
                raise CertificateError(f"cell {v} appears in two classes")
            if v not in target:
                raise CertificateError(f"cell {v} is not in the covered set")
            seen.add(v)
    missing = target - seen
    if missing:
        raise CertificateError(
            f"classes do not cover the set; missing {sorted(missing)[:5]}")
    if not (len(cert.classes) == len(cert.projections) == len(cert.delta) == cert.s):
        raise CertificateError("class, projection and delta counts disagree")
    for i, cls in enumerate(cert.classes):
        if not cls:
            continue
        got = max_fiber(cls, cert.projections[i])
        if got > cert.delta[i]:
            raise CertificateError(
                f"class {i} exceeds its bound: fiber of size {got} > {cert.delta[i]} "
                f"when dropping coordinate {cert.projections[i]}")


def _peel_greedy(remaining: list[tuple[int, ...]], delta: int,
                 n: int) -> tuple[int, list[tuple[int, ...]]]:
    # the largest subset assignable to a single drop coordinate: delta cells
    # per fiber, taken in sorted order; ties broken by least coordinate
    best_drop, best = 1, []
    for drop in range(1, n + 1):
        groups: dict[tuple[int, ...], list] = {}
        for v in remaining:
            groups.setdefault(_fiber_key(v, drop), []).append(v)
        take = []
        for key in groups:
            take.extend(groups[key][:delta])
        if len(take) > len(best):
            best_drop, best = drop, take
    return best_drop, sorted(best)


def _decompose_greedy(cells: list[tuple[int, ...]], s: int,
                      delta: int, level: int) -> Optional[SparseCertificate]:
    remaining = list(cells)
    n = len(cells[0])
    classes, drops, deltas = [], [], []
    for _ in range(s):
        if not remaining:
            break
        drop, take = _peel_greedy(remaining, delta, n)
        if not take:
            return None
        classes.append(tuple(take))
        drops.append(drop)
        deltas.append(max_fiber(take, drop))
        taken = set(take)
        remaining = [v for v in remaining if v not in taken]
    if remaining:
        return None
    cert = SparseCertificate(len(classes), tuple(classes), tuple(drops),
                             tuple(deltas), level)
    validate_certificate(cells, cert)
    return cert


def _decompose_exact(cells: list[tuple[int, ...]], s: int, delta: int,
                     level: int, node_budget: int) -> Optional[SparseCertificate]:
    # complete backtracking over class assignments with symmetry breaking:
    # a cell may only open the least-indexed empty class. A class stays
    # viable while some drop coordinate keeps all its fibers within delta.
    n = len(cells[0])
    m = len(cells)
    fibers: list[list[dict[tuple[int, ...], int]]] = [
        [dict() for _ in range(n)] for _ in range(s)
    ]
    viable: list[set[int]] = [set(range(n)) for _ in range(s)]
    assignment = [-1] * m
    used = 0
    nodes = 0

    def place(i: int, cls: int) -> list[tuple[int, int, tuple[int, ...]]]:
        undo = []
        for c in range(n):
            if c not in viable[cls]:
                continue
            key = _fiber_key(cells[i], c + 1)
            cnt = fibers[cls][c].get(key, 0) + 1
            fibers[cls][c][key] = cnt
            if cnt > delta:
                viable[cls].discard(c)
                undo.append((cls, c, key))
            else:
                undo.append((cls, c, key))
        return undo

    def unplace(undo, cls):
        for cl, c, key in undo:
            cnt = fibers[cl][c][key] - 1
            if cnt == 0:
                del fibers[cl][c][key]
            else:
                fibers[cl][c][key] = cnt
            if cnt <= delta:
                viable[cl].add(c)

    def rec(i: int) -> bool:
        nonlocal used, nodes
        if i == m:
            return True
        limit = min(used + 1, s)
        for cls in range(limit):
            nodes += 1
            if nodes > node_budget:
                raise BudgetExceeded(
                    f"exact decomposition exceeded {node_budget} branch nodes")
            opened = cls == used
            undo = place(i, cls)
            if viable[cls]:
                assignment[i] = cls
                if opened:
                    used += 1
                if rec(i + 1):
                    return True
                if opened:
                    used -= 1
                assignment[i] = -1
            unplace(undo, cls)
        return False

    if not rec(0):
        return None
    groups: dict[int, list] = {}
    for i, cls in enumerate(assignment):
        groups.setdefault(cls, []).append(cells[i])
    classes, drops, deltas = [], [], []
    for cls in sorted(groups):
        members = tuple(sorted(groups[cls]))
        drop = is_delta_sparse(members, delta)
        classes.append(members)
        drops.append(drop)
        deltas.append(max_fiber(members, drop))
    cert = SparseCertificate(len(classes), tuple(classes), tuple(drops),
                             tuple(deltas), level)
    validate_certificate(cells, cert)
    return cert


def sparse_decompose(cells, s: int, delta: int, mode: str = "greedy",
                     node_budget: int = DECOMPOSE_NODE_BUDGET,
                     level: Optional[int] = None) -> Optional[SparseCertificate]:
    """Partition cells into at most s classes, each delta-sparse.

    Exact mode is a complete search: None means no such partition exists.
    Greedy mode peels the largest single-coordinate class repeatedly; its
    None is inconclusive, but any certificate it returns is revalidated, so
    unsound output is impossible.
    """
    if s < 1:
        raise ValueError("need at least one class")
    if delta < 1:
        raise ValueError("delta must be at least 1")
    cs = _as_cells(cells)
    lvl = level if level is not None else (
        cells.level if isinstance(cells, DyadicCover) else 0)
    if not cs:
        return SparseCertificate(0, (), (), (), lvl)
    if mode == "greedy":
        return _decompose_greedy(cs, s, delta, lvl)
    if mode == "exact":
        return _decompose_exact(cs, s, delta, lvl, node_budget)
    raise ValueError(f"unknown decomposition mode {mode!r}")


@dataclass(frozen=True)
class SparsenessProfile:
    """Per-level (k, classes used, eps = log2(least delta)/k)."""

    entries: tuple[tuple[int, int, float], ...]


def sparseness_profile(covers: Sequence[DyadicCover], s: int) -> SparsenessProfile:
    """Least delta per level such that the greedy s-class decomposition
    succeeds, found by binary search; reported as eps = log2(delta)/k.

    A set reads as empirically sparse when eps trends to 0 in k.
    """
    if len(covers) < 2:
        raise ValueError("need covers at two or more levels")
    entries = []
    for cov in sorted(covers, key=lambda c: c.level):
        lo, hi = 1, max(1, len(cov))
        while lo < hi:
            mid = (lo + hi) // 2
            if _decompose_greedy(cov.sorted_indices(), s, mid, cov.level) is not None:
                hi = mid
            else:
                lo = mid + 1
        k = cov.level
        eps = math.log2(lo) / k if k > 0 else 0.0
        entries.append((k, s, eps))
    return SparsenessProfile(tuple(entries))


def _runs(sorted_vals: Sequence[int]) -> list[tuple[int, int]]:
    runs = []
    start = prev = sorted_vals[0]
    for v in sorted_vals[1:]:
        if v == prev + 1:
            prev = v
            continue
        runs.append((start, prev))
        start = prev = v
    runs.append((start, prev))
    return runs


def _has_run(sorted_vals: Sequence[int], length: int) -> bool:
    return any(b - a + 1 >= length for a, b in _runs(sorted_vals))


@dataclass(frozen=True)
class ThmBClasses:
    """Four-class split of a planar cover with per-class sparseness report.

    For each class: the designated drop coordinate mirroring the proof
    structure (interior columns and the jump class bound their row fibers,
    interior rows and the residue bound their column fibers), the max fiber
    in that designated direction, and the least delta admitting any
    single-coordinate witness together with its coordinate.
    """

    level: int
    classes: tuple[tuple[tuple[int, int], ...], ...]
    designated_drop: tuple[int, int, int, int]
    designated_delta: tuple[int, int, int, int]
    least_delta: tuple[int, int, int, int]
    least_drop: tuple[int, int, int, int]

    def eps(self, i: int) -> float:
        d = self.least_delta[i]
        return math.log2(d) / self.level if d > 0 else float("-inf")


def theoremB_classify(cover: DyadicCover, j: int,
                      run_threshold: Optional[int] = None) -> ThmBClasses:
    """Discrete four-class split of a nowhere-dense planar cover.

    C1: cells in columns whose fiber contains a run of >= the interior-run
    threshold (default: a full run across the level-j window, 2^(k-j)).
    C2: likewise for rows, minus C1. C3: remaining cells (u,v) where the
    lower envelope along row v, f_v(u') = least fiber element >= v, jumps by
    more than one cell from column u to u+1 (an absent column counts as a
    jump; the right edge of the grid does not). C4: the remainder; for its
    cells the envelope of the adjacent column lands inside the same row or
    the one above, the cell-granularity form of the intermediate value
    argument. Raises if the cover certifies interior at level j.
    """
    if cover.n != 2:
        raise ValueError("the classifier applies to planar covers")
    if j > cover.level:
        raise ValueError(f"window level {j} exceeds cover level {cover.level}")
    if not cover.in_unit_cube():
        raise ValueError("the classifier expects a cover of a subset of the unit square")
    cells_per_box = 2 ** ((cover.level - j) * 2)
    occ: dict[tuple[int, int], int] = {}
    for (u, v) in cover.indices:
        b = (u >> (cover.level - j), v >> (cover.level - j))
        occ[b] = occ.get(b, 0) + 1
    if occ and max(occ.values()) >= cells_per_box:
        raise ValueError(
            "cover has a certified-interior box at the window level; "
            "the classifier only applies to nowhere-dense covers")

    k = cover.level
    run_len = run_threshold if run_threshold is not None else 2 ** (k - j)
    cols: dict[int, list[int]] = {}
    rows: dict[int, list[int]] = {}
    for (u, v) in cover.sorted_indices():
        cols.setdefault(u, []).append(v)
        rows.setdefault(v, []).append(u)
    for u in cols:
        cols[u].sort()
    for v in rows:
        rows[v].sort()

    run_cols = {u for u, f in cols.items() if _has_run(f, run_len)}
    run_rows = {v for v, f in rows.items() if _has_run(f, run_len)}

    import bisect

    def envelope(u: int, v: int) -> Optional[int]:
        fib = cols.get(u)
        if not fib:
            return None
        i = bisect.bisect_left(fib, v)
        return fib[i] if i < len(fib) else None

    c1, c2, c3, c4 = set(), set(), set(), set()
    top = 2 ** k
    for (u, v) in cover.indices:
        if u in run_cols:
            c1.add((u, v))
        elif v in run_rows:
            c2.add((u, v))
        elif u + 1 < top:
            nxt = envelope(u + 1, v)
            if nxt is None or nxt > v + 1:
                c3.add((u, v))
            else:
                c4.add((u, v))
        else:
            c4.add((u, v))

    classes = tuple(tuple(sorted(c)) for c in (c1, c2, c3, c4))
    designated = (1, 2, 1, 2)
    des_delta, least_delta, least_drop = [], [], []
    for cls, drop in zip(classes, designated):
        if not cls:
            des_delta.append(0)
            least_delta.append(0)
            least_drop.append(drop)
            continue
        des_delta.append(max_fiber(cls, drop))
        by_dir = {d: max_fiber(cls, d) for d in (1, 2)}
        best = min(by_dir.values())
        least_delta.append(best)
        least_drop.append(min(d for d, val in by_dir.items() if val == best))
    return ThmBClasses(k, classes, designated, tuple(des_delta),
                       tuple(least_delta), tuple(least_drop))


def _fiber_residue(fiber: Sequence[int], run_len: int) -> list[int]:
    # cells strictly inside a run of certified-interior length drop out;
    # a fiber with no such run is its own residue (nowhere dense at scale)
    out = []
    for a, b in _runs(fiber):
        if b - a + 1 >= run_len:
            out.extend((a, b))
        else:
            out.extend(range(a, b + 1))
    return out


def _dyadic_partitions(max_level: int, parts: int,
                       level: int = 0, index: int = 0):
    # all subdivisions of the dyadic interval (level, index) into exactly
    # `parts` dyadic intervals of level <= max_level
    if parts == 1:
        yield [(level, index)]
        return
    if level >= max_level:
        return
    for left in range(1, parts):
        for lpart in _dyadic_partitions(max_level, left, level + 1, 2 * index):
            for rpart in _dyadic_partitions(max_level, parts - left,
                                            level + 1, 2 * index + 1):
                yield lpart + rpart


def uniform_partition_search(
    family: FiberFamily,
    j_max: int,
    run_threshold: int = 4,
    max_parts: int = 8,
) -> Optional[list[tuple[int, int]]]:
    """Search for a dyadic partition of [0,1] such that every family member
    has at least one part whose interior misses that member's residue cells.

    Residues are the fiber cells outside certified-interior runs (for a
    nowhere-dense fiber, the whole fiber). Partitions are enumerated by
    ascending part count, then by part bounds; the first success is
    returned as (level, index) parts. Success is preserved under
    refinement, so when the finest partition at j_max also fails, no
    partition exists and None is definitive.
    """
    if family.fiber_dim != 1:
        raise ValueError("partition search expects one-dimensional fibers")
    k = family.level
    if j_max > k:
        raise ValueError(f"partition depth {j_max} exceeds the cover level {k}")
    residues = []
    for u in sorted(family.fibers):
        vals = [v[0] for v in family.fibers[u].sorted_indices()]
        if vals:
            residues.append(sorted(_fiber_residue(vals, run_threshold)))

    def part_serves(level: int, index: int, res: Sequence[int]) -> bool:
        # interior of [index 2^-level, (index+1) 2^-level] vs level-k cells,
        # all in units of 2^-k
        lo = index << (k - level)
        hi = (index + 1) << (k - level)
        for c in res:
            if c + 1 > lo and c < hi:
                return False
        return True

    def works(partition) -> bool:
        return all(
            any(part_serves(lv, ix, res) for lv, ix in partition)
            for res in residues
        )

    for p in range(1, max_parts + 1):
        batch = sorted(_dyadic_partitions(j_max, p),
                       key=lambda part: [(ix / (1 << lv)) for lv, ix in part])
        for partition in batch:
            if works(partition):
                return list(partition)
    finest = [(j_max, i) for i in range(2 ** j_max)]
    if works(finest):
        return finest
    return None
