"""Shared fixtures: seeded point clouds and brute-force oracles."""

from __future__ import annotations

from itertools import combinations

import numpy as np
import pytest

from twometric import FiniteTwoMetricSpace, det_metric


def random_sphere_points(rng: np.random.Generator, n: int,
                         planted_equatorial: int = 0) -> list[np.ndarray]:
    """Generic unit vectors, optionally with some exactly equatorial points
    (their determinant triples vanish exactly, planting a line)."""
    pts = []
    for _ in range(planted_equatorial):
        t = rng.random() * 2.0 * np.pi
        pts.append(np.array([np.cos(t), np.sin(t), 0.0]))
    v = rng.normal(size=(n - planted_equatorial, 3))
    pts.extend(v / np.linalg.norm(v, axis=1, keepdims=True))
    return pts


def random_sphere_table(rng: np.random.Generator, n: int,
                        planted_equatorial: int = 0) -> FiniteTwoMetricSpace:
    """A valid finite space: the determinant metric tabulated on sampled
    unit vectors (subsets of the sphere keep every axiom)."""
    pts = random_sphere_points(rng, n, planted_equatorial)
    return FiniteTwoMetricSpace.from_points(pts, det_metric)


def arc_ladder_space() -> tuple[FiniteTwoMetricSpace, list[int]]:
    """A finite space whose ternary value is the smallest pairwise circle-arc
    distance: a geometric angle ladder with ratio 2/7 descending to a fixed
    target, plus two far guard points.  The shift-toward-target map contracts
    the derived pair distance by exactly 0.4."""
    q = 2.0 / 7.0
    angles = [0.2 * q ** i for i in range(5)] + [0.0, np.pi, -np.pi / 2.0]

    def arc(a: float, b: float) -> float:
        d = abs(a - b) % (2.0 * np.pi)
        return min(d, 2.0 * np.pi - d) / np.pi

    space = FiniteTwoMetricSpace(len(angles))
    for i, j, k in space.distinct_triples():
        space.table[(i, j, k)] = min(arc(angles[i], angles[j]),
                                     arc(angles[i], angles[k]),
                                     arc(angles[j], angles[k]))
    mapping = [1, 2, 3, 4, 5, 5, 0, 0]
    return space, mapping


def oracle_maximal_colinear(space: FiniteTwoMetricSpace,
                            tol: float = 1e-12) -> set[frozenset]:
    """Exhaustive subset enumeration; exact for small n."""
    points = range(space.n)
    colinear_sets = []
    for size in range(1, space.n + 1):
        for subset in combinations(points, size):
            if all(space.d(a, b, c) <= tol
                   for a, b, c in combinations(subset, 3)):
                colinear_sets.append(frozenset(subset))
    maximal = set()
    for s in colinear_sets:
        if not any(s < other for other in colinear_sets):
            maximal.add(s)
    return maximal


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
