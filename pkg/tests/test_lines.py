"""Lines: colinearity, enumeration vs brute force, tail classification."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import oracle_maximal_colinear, random_sphere_table
from twometric import (FiniteTwoMetricSpace, Thresholds, WitnessSet, classify,
                       demo_five_point_space, det_sphere_space, enumerate_lines,
                       is_colinear, lim_residual, line_through,
                       maximal_colinear_sets, sphere_witnesses,
                       transitivity_probe)

E1, E2, E3 = np.eye(3)
SPHERE = det_sphere_space()


def equatorial(t: float) -> np.ndarray:
    return np.array([np.cos(t), np.sin(t), 0.0])


# ---------------------------------------------------------------------------
# colinearity and transitivity
# ---------------------------------------------------------------------------

def test_colinear_with_repeated_point(rng):
    x, z = SPHERE.sample(rng, 2)
    assert is_colinear(SPHERE, x, x, z, 1e-12)


def test_equatorial_triples_are_exactly_colinear():
    assert is_colinear(SPHERE, E1, E2, equatorial(0.9), 1e-15)


def test_orthonormal_frame_is_not_colinear():
    assert not is_colinear(SPHERE, E1, E2, E3, 0.5)


def test_transitivity_probe_on_equatorial_points():
    W = sphere_witnesses(64, seed=1)
    probe = transitivity_probe(SPHERE, equatorial(0.1), E1, E2, equatorial(2.0),
                               W, tolerance=1e-12)
    assert probe.premises_hold and probe.holds and not probe.inconclusive


def test_transitivity_probe_on_demo_line():
    space = demo_five_point_space().as_space()
    W = WitnessSet.all_of(demo_five_point_space())
    probe = transitivity_probe(space, 0, 1, 2, 0, W, tolerance=1e-12)
    assert probe.holds and probe.premises_hold


def test_transitivity_probe_inconclusive_on_equal_middle_points():
    W = sphere_witnesses(64, seed=2)
    probe = transitivity_probe(SPHERE, E1, E2, E2, E3, W)
    assert probe.inconclusive and not probe.holds


# ---------------------------------------------------------------------------
# line_through
# ---------------------------------------------------------------------------

def test_line_through_equator_membership(rng):
    W = sphere_witnesses(128, seed=3)
    line = line_through(SPHERE, E1, E2, W, tolerance=1e-9)
    for t in np.linspace(0.0, 2 * np.pi, 17):
        assert line.contains(SPHERE, equatorial(t))
    off = SPHERE.sample(rng, 50)
    for p in off[np.abs(off[:, 2]) > 1e-3]:
        assert not line.contains(SPHERE, p)


def test_line_through_demo_pair_matches_oracle():
    space = demo_five_point_space()
    W = WitnessSet.all_of(space)
    line = line_through(space.as_space(), 0, 1, W, tolerance=1e-12)
    oracle = next(s for s in oracle_maximal_colinear(space) if {0, 1} <= s)
    assert frozenset(line.members) == oracle == {0, 1, 2}


def test_line_through_rejects_antipodal_generators():
    W = sphere_witnesses(64, seed=4)
    with pytest.raises(ValueError, match="line undefined"):
        line_through(SPHERE, E1, -E1, W)


def test_line_through_detects_transitivity_defect():
    # two vanishing triples through (0,1) whose union is not colinear
    space = FiniteTwoMetricSpace(5, {
        (0, 1, 2): 0.0, (0, 1, 3): 0.0, (0, 1, 4): 1.0,
        (0, 2, 3): 1.0, (0, 2, 4): 1.0, (0, 3, 4): 1.0,
        (1, 2, 3): 1.0, (1, 2, 4): 1.0, (1, 3, 4): 1.0, (2, 3, 4): 1.0,
    })
    with pytest.raises(RuntimeError, match="not colinear"):
        line_through(space.as_space(), 0, 1, WitnessSet.all_of(space),
                     tolerance=1e-12)


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def test_demo_space_has_exactly_eight_lines():
    lines = enumerate_lines(demo_five_point_space())
    got = {frozenset(line.members) for line in lines}
    assert got == {frozenset(s) for s in
                   [{0, 1, 2}, {0, 3}, {0, 4}, {1, 3}, {1, 4},
                    {2, 3}, {2, 4}, {3, 4}]}


def test_all_positive_space_yields_all_pairs(rng):
    space = random_sphere_table(rng, 5)
    assert all(v > 1e-6 for v in space.table.values())
    got = {frozenset(line.members) for line in enumerate_lines(space)}
    expected = {frozenset({i, j}) for i in range(5) for j in range(i + 1, 5)}
    assert got == expected


def test_degenerate_space_is_a_single_line():
    space = FiniteTwoMetricSpace(4)
    lines = enumerate_lines(space)
    assert len(lines) == 1 and frozenset(lines[0].members) == {0, 1, 2, 3}


def test_enumeration_matches_exhaustive_oracle(rng):
    for trial in range(25):
        n = int(rng.integers(3, 7))
        space = random_sphere_table(rng, n, planted_equatorial=int(rng.integers(0, n + 1)))
        got = maximal_colinear_sets(space)
        assert got == oracle_maximal_colinear(space), f"trial {trial}"


def test_separated_pairs_lie_on_exactly_one_line(rng):
    for _ in range(10):
        space = random_sphere_table(rng, 6, planted_equatorial=3)
        lines = [frozenset(line.members) for line in enumerate_lines(space)]
        for i in range(space.n):
            for j in range(i + 1, space.n):
                if space.phi(i, j) > 1e-6:
                    assert sum({i, j} <= s for s in lines) == 1


def test_lines_intersect_in_at_most_one_separated_point(rng):
    for _ in range(10):
        space = random_sphere_table(rng, 6, planted_equatorial=3)
        sets = [frozenset(line.members) for line in enumerate_lines(space)]
        for a in range(len(sets)):
            for b in range(a + 1, len(sets)):
                common = sets[a] & sets[b]
                separated = [(i, j) for i in common for j in common
                             if i < j and space.phi(i, j) > 1e-6]
                assert not separated


# ---------------------------------------------------------------------------
# tail residuals
# ---------------------------------------------------------------------------

def test_lim_residual_constant_sequence_vanishes(rng):
    seq = np.tile(E1, (30, 1))
    for y in SPHERE.sample(rng, 5):
        assert lim_residual(SPHERE, y, seq).residual == 0.0


def test_lim_residual_on_alternating_sequence():
    seq = np.array([E1, E2] * 20)
    assert lim_residual(SPHERE, E3, seq).residual == 1.0
    assert lim_residual(SPHERE, equatorial(1.1), seq).residual == 0.0


def test_lim_residual_nonincreasing_in_tail_start(rng):
    # a Cauchy sequence makes the residual small for every probe point
    seq = np.array([np.array([np.cos(0.5 ** i), np.sin(0.5 ** i), 0.0])
                    for i in range(24)])
    for y in SPHERE.sample(rng, 5):
        r = [lim_residual(SPHERE, y, seq, start).residual for start in (0, 8, 16)]
        assert r[0] >= r[1] >= r[2]
        assert r[2] <= 0.5 ** 15


def test_lim_residual_validates_start():
    with pytest.raises(ValueError):
        lim_residual(SPHERE, E1, np.tile(E1, (5, 1)), start=9)


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def test_alternating_sequence_classifies_as_equator_line():
    seq = np.array([E1, E2] * 30)
    W = sphere_witnesses(128, seed=5)
    verdict = classify(SPHERE, seq, W)
    assert verdict.tag == "LineCase"
    assert verdict.tri_cauchy_modulus == 0.0
    assert verdict.cauchy_modulus == 1.0
    normal = np.cross(verdict.line.g1, verdict.line.g2)
    assert abs(normal[2]) / np.linalg.norm(normal) >= 1.0 - 1e-12
    for t in np.linspace(0, 2 * np.pi, 9):
        assert verdict.line.contains(SPHERE, equatorial(t))


def test_passers_satisfy_derived_colinearity_bound():
    seq = np.array([E1, E2] * 30)
    W = sphere_witnesses(128, seed=6)
    verdict = classify(SPHERE, seq, W)
    assert len(verdict.passers) >= 3
    assert verdict.passer_defect <= verdict.derived_colinear_tol
    P = verdict.passers
    for a in range(min(6, len(P))):
        for b in range(a + 1, min(6, len(P))):
            for c in range(b + 1, min(6, len(P))):
                assert SPHERE.d(P[a], P[b], P[c]) <= verdict.derived_colinear_tol


def test_colinear_points_inherit_the_tail_property():
    # anything colinear with two separated passers must pass a derived
    # threshold; here the whole equator sits at residual zero
    seq = np.array([E1, E2] * 30)
    thresholds = Thresholds()
    for t in np.linspace(0.2, 2 * np.pi, 8):
        est = lim_residual(SPHERE, equatorial(t), seq, start=30)
        assert est.residual <= 3.0 * thresholds.lim


def test_accumulation_points_pass_on_three_phase_cycle():
    mid = equatorial(0.7)
    seq = np.array([E1, mid, E2] * 20)
    W = sphere_witnesses(128, seed=7)
    verdict = classify(SPHERE, seq, W)
    assert verdict.tag == "LineCase"
    assert verdict.tri_cauchy_modulus == 0.0
    for accumulation_point in (E1, mid, E2):
        assert lim_residual(SPHERE, accumulation_point, seq, 30).residual <= 1e-12


def test_convergent_sequence_classifies_as_cauchy():
    seq = np.array([np.array([np.cos(0.3 ** i), np.sin(0.3 ** i), 0.0])
                    for i in range(60)])
    W = sphere_witnesses(128, seed=8)
    verdict = classify(SPHERE, seq, W)
    assert verdict.tag == "CauchySequence"
    assert np.allclose(verdict.limit, E1, atol=1e-6)


def test_no_point_case_on_orthonormal_cycle():
    seq = np.array([E1, E2, E3] * 20)
    W = sphere_witnesses(64, seed=9)
    verdict = classify(SPHERE, seq, W)
    assert verdict.tag == "NoPoint"
    assert verdict.cauchy_modulus == 1.0
    assert verdict.tri_cauchy_modulus == 1.0
    assert not verdict.passers


def test_unique_point_when_passers_collapse():
    # every distinct triple microscopically positive: the whole space is one
    # pair-distance cluster, so the passer set counts as a single point
    space = FiniteTwoMetricSpace(4)
    for t in space.distinct_triples():
        space.table[t] = 1e-7
    seq = np.array([0, 1] * 30)
    verdict = classify(space.as_space(), seq, WitnessSet.all_of(space))
    assert verdict.tag == "UniquePoint"
    assert verdict.cauchy_modulus == pytest.approx(1e-7)


def test_finite_alternating_pair_yields_two_point_line():
    space = demo_five_point_space()
    verdict = classify(space.as_space(), np.array([3, 4] * 30),
                       WitnessSet.all_of(space))
    assert verdict.tag == "LineCase"
    assert frozenset(verdict.line.members) == {3, 4}


def test_finite_alternating_pair_inside_long_line():
    space = demo_five_point_space()
    verdict = classify(space.as_space(), np.array([0, 1] * 30),
                       WitnessSet.all_of(space))
    assert verdict.tag == "LineCase"
    assert frozenset(verdict.line.members) == {0, 1, 2}


def test_low_confidence_flag_near_thresholds():
    wobble = 3e-8
    seq = np.array([np.array([1.0, wobble * (-1.0) ** i, 0.0]) / np.sqrt(1 + wobble ** 2)
                    for i in range(60)])
    W = sphere_witnesses(64, seed=10)
    verdict = classify(SPHERE, seq, W)
    assert verdict.low_confidence
    assert verdict.notes


def test_classify_rejects_short_sequences():
    with pytest.raises(ValueError, match="below minimum"):
        classify(SPHERE, np.tile(E1, (10, 1)), sphere_witnesses(16, seed=11))


def test_classification_json_schema():
    seq = np.array([E1, E2] * 30)
    verdict = classify(SPHERE, seq, sphere_witnesses(64, seed=12))
    payload = verdict.to_json()
    assert payload["tag"] == "LineCase"
    assert {"cauchy_modulus", "tri_cauchy_modulus", "thresholds",
            "passers", "line"} <= set(payload)
    assert set(payload["line"]) == {"generators", "tolerance", "members"}
