"""Shared fixtures and independent brute-force oracles.

The oracle helpers here deliberately avoid the package's code paths: covers
are recomputed with exact Fraction arithmetic and packing numbers with a
plain recursive maximum-independent-set search, so a test that compares
package output against them is a genuine cross-check.
"""

from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from metricdim import PointSet, cantor


def oracle_cantor_endpoints(depth):
    """Depth-d middle-thirds endpoints as exact fractions."""
    alpha = Fraction(1, 3)
    intervals = [(Fraction(0), Fraction(1))]
    for _ in range(depth):
        intervals = [
            piece
            for a, b in intervals
            for piece in ((a, a + alpha * (b - a)), (b - alpha * (b - a), b))
        ]
    return sorted({e for ab in intervals for e in ab})


def oracle_cover_1d(fractions, k):
    """Half-open level-k cover of exact rationals, right boundary clamped."""
    out = set()
    for x in fractions:
        v = min(int(x * 2 ** k), 2 ** k - 1)
        out.add(v)
    return out


def oracle_exact_net(points, r):
    """Maximum pairwise-r-separated subset by exhaustive recursion.

    points: sequence of coordinate tuples (floats or exact Fractions);
    sup-norm distances, non-strict separation. Only usable for small m.
    """
    pts = [tuple(p) if hasattr(p, "__len__") else (p,) for p in points]
    m = len(pts)
    conflict = [set() for _ in range(m)]
    for i, j in combinations(range(m), 2):
        if max(abs(a - b) for a, b in zip(pts[i], pts[j])) < r:
            conflict[i].add(j)
            conflict[j].add(i)

    def rec(cand):
        if not cand:
            return 0
        v = max(cand, key=lambda u: (len(conflict[u] & cand), -u))
        return max(rec(cand - {v}), 1 + rec(cand - {v} - conflict[v]))

    return rec(set(range(m)))


@pytest.fixture(scope="session")
def cantor10():
    return cantor("1/3", 10)


@pytest.fixture(scope="session")
def cantor14():
    return cantor("1/3", 14)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


def random_pointset(rng, size, n, metric=None):
    pts = rng.random((size, n))
    return PointSet(pts, metric=metric)
