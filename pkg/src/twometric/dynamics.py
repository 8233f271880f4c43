"""Contractive self-maps and their orbit outcomes.

A map F is d-decreasing with factor k < 1 when d(Fx, Fy, Fz) <= k*d(x,y,z);
F is applied to all three arguments.  Iterating such a map squeezes triple
values geometrically, so the orbit always becomes tri-Cauchy, and the limit
object is either a fixed point or an invariant line: the detector here runs
the orbit, classifies its tail, and then certifies whichever case the
classification suggests by direct residual checks.

Two constructions cover the standard examples: an orthogonal map composed
with a uniform scaling on a ball (factor k^2 for the area metric, fixed
point at the origin), and a vertical squeeze toward the sphere's equator
composed with a rotation (factor k/e^3 on the tube where the horizontal
norm stays >= e; the equator is invariant, and a nontrivial rotation leaves
no fixed point on it).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Callable

import numpy as np

from .core import TwoMetricSpace, WitnessSet, _d_many, eval_phi, point_json
from .lines import Classification, Line, Thresholds, classify
from .spaces import area_ball_space, det_sphere_space


@dataclass(frozen=True)
class SphereContractionParams:
    """Vertical contraction k on the equatorial tube of horizontal radius e,
    optionally composed with a rotation about the vertical axis.  The
    composite factor k/e^3 is below one exactly when k < e^3."""

    k: float
    e: float
    theta: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.k < 1.0:
            raise ValueError("vertical contraction k must lie in (0, 1)")
        if not 0.0 < self.e < 1.0:
            raise ValueError("tube parameter e must lie in (0, 1)")


@dataclass(frozen=True)
class DDecreasingMap:
    """A self-map of a restricted domain with a claimed contraction factor.

    ``certified`` marks factors backed by the constructor's bound; claimed
    factors are always re-measured on samples before being relied on.
    """

    name: str
    kind: str                       # "sphere" | "linear" | "custom"
    f: Callable[[Any], Any]
    space: TwoMetricSpace
    claimed_factor: float
    certified: bool
    domain_contains: Callable[[Any], bool]
    domain_sample: Callable[[np.random.Generator, int], Any]

    def apply_many(self, points):
        pts = np.asarray(points)
        if pts.ndim > 1:
            return np.array([self.f(p) for p in pts])
        return np.array([self.f(p) for p in pts])


def make_sphere_map(params: SphereContractionParams) -> DDecreasingMap:
    """Squeeze-toward-equator composed with a vertical-axis rotation."""
    k, e, theta = params.k, params.e, params.theta
    c, s = np.cos(theta), np.sin(theta)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

    def f(x):
        t = np.array([x[0], x[1], k * x[2]])
        return rot @ (t / np.linalg.norm(t))

    def contains(x):
        return (np.hypot(x[0], x[1]) >= e - 1e-12
                and abs(np.linalg.norm(x) - 1.0) <= 1e-9)

    def sample(rng, count):
        out = np.empty((count, 3))
        have = 0
        while have < count:
            v = rng.normal(size=(count, 3))
            v /= np.linalg.norm(v, axis=1, keepdims=True)
            good = v[np.hypot(v[:, 0], v[:, 1]) >= e]
            take = min(count - have, len(good))
            out[have:have + take] = good[:take]
            have += take
        return out

    return DDecreasingMap(
        name=f"sphere-squeeze(k={k},e={e},theta={theta})",
        kind="sphere",
        f=f,
        space=det_sphere_space(),
        claimed_factor=k / e ** 3,
        certified=k < e ** 3,
        domain_contains=contains,
        domain_sample=sample,
    )


def make_linear_map(M, k: float, radius: float = 0.5) -> DDecreasingMap:
    """Orthogonal map times a scale k < 1 on the ball; factor k^2 for the
    area metric, with the origin as the unique fixed point."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("need a square matrix")
    if np.abs(M.T @ M - np.eye(M.shape[0])).max() > 1e-12:
        raise ValueError("matrix is not orthogonal")
    if not 0.0 < k < 1.0:
        raise ValueError("scale must lie strictly in (0, 1) to be d-decreasing")
    dim = M.shape[0]
    space = area_ball_space(dim=dim, radius=radius)
    return DDecreasingMap(
        name=f"linear(k={k},dim={dim})",
        kind="linear",
        f=lambda x: k * (M @ np.asarray(x, dtype=float)),
        space=space,
        claimed_factor=k * k,
        certified=True,
        domain_contains=space.contains,
        domain_sample=space.sample,
    )


def measured_contraction_factor(map_: DDecreasingMap, samples: int = 2000,
                                seed: int = 0,
                                degenerate_tol: float = 1e-12) -> float | None:
    """Empirical sup of d(Fx,Fy,Fz)/d(x,y,z) over sampled domain triples.

    Triples with d below ``degenerate_tol`` are skipped (their ratios are
    dominated by rounding); None when every sampled triple is degenerate.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    X = np.asarray(map_.domain_sample(rng, samples))
    Y = np.asarray(map_.domain_sample(rng, samples))
    Z = np.asarray(map_.domain_sample(rng, samples))
    d0 = _d_many(map_.space, X, Y, Z)
    keep = d0 > degenerate_tol
    if not keep.any():
        return None
    d1 = _d_many(map_.space, map_.apply_many(X[keep]), map_.apply_many(Y[keep]),
                 map_.apply_many(Z[keep]))
    return float((d1 / d0[keep]).max())


# ---------------------------------------------------------------------------
# orbits
# ---------------------------------------------------------------------------

@dataclass
class OrbitTrace:
    """Iterates of a map with per-step pair distances and decay statistics."""

    points: Any
    phi_steps: np.ndarray
    claimed_factor: float
    certified: bool
    truncated: bool = False
    exit_step: int | None = None
    diagnostic: str | None = None
    decay_margin: float | None = None
    decay_samples: int = 0

    def __len__(self) -> int:
        return len(self.points)

    def to_csv(self, path, vertical_column: bool = False) -> None:
        import csv

        pts = np.asarray(self.points)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            if pts.ndim > 1:
                coords = [f"x{i + 1}" for i in range(pts.shape[1])]
            else:
                coords = ["index"]
            header = ["step"] + coords + ["phi_step"]
            if vertical_column:
                header.append("x3_abs")
            writer.writerow(header)
            for i in range(len(pts)):
                row = [i]
                row += [repr(float(c)) for c in np.atleast_1d(pts[i])]
                row.append(repr(float(self.phi_steps[i])) if i < len(self.phi_steps) else "")
                if vertical_column:
                    row.append(repr(abs(float(pts[i][2]))))
                writer.writerow(row)


def orbit(map_: DDecreasingMap, x0, steps: int, witnesses: WitnessSet | None = None,
          seed: int = 0, decay_triples: int = 2000) -> OrbitTrace:
    """Iterate x_{i+1} = F(x_i) for ``steps`` steps.

    Iterates are never projected back into the domain; if one leaves, the
    trace truncates with a diagnostic.  For certified maps, sampled index
    triples are checked against the geometric decay
    d(x_i, x_j, x_k) <= factor^min(i,j,k) and the worst margin recorded.
    """
    if map_.domain_contains is not None and not map_.domain_contains(x0):
        raise ValueError("start point outside the map's restricted domain")
    if witnesses is None:
        witnesses = WitnessSet.sampled(map_.space, 64, seed)
    pts = [x0]
    truncated = False
    exit_step = None
    diagnostic = None
    for i in range(steps):
        nxt = map_.f(pts[-1])
        if map_.domain_contains is not None and not map_.domain_contains(nxt):
            truncated = True
            exit_step = i + 1
            diagnostic = f"iterate {i + 1} left the domain; trace truncated"
            break
        pts.append(nxt)
    seq = np.asarray(pts)
    phi_steps = np.array([
        eval_phi(map_.space, seq[i], seq[i + 1], witnesses)
        for i in range(len(seq) - 1)
    ])

    decay_margin = None
    used = 0
    if map_.certified and len(seq) >= 3:
        rng = np.random.default_rng(seed + 1)
        idx = np.sort(rng.integers(0, len(seq), size=(decay_triples, 3)), axis=1)
        idx = idx[(idx[:, 0] < idx[:, 1]) & (idx[:, 1] < idx[:, 2])]
        used = len(idx)
        if used:
            vals = _d_many(map_.space, seq[idx[:, 0]], seq[idx[:, 1]], seq[idx[:, 2]])
            bound = map_.claimed_factor ** idx[:, 0]
            decay_margin = float((vals - bound).max())

    return OrbitTrace(
        points=seq,
        phi_steps=phi_steps,
        claimed_factor=map_.claimed_factor,
        certified=map_.certified,
        truncated=truncated,
        exit_step=exit_step,
        diagnostic=diagnostic,
        decay_margin=decay_margin,
        decay_samples=used,
    )


# ---------------------------------------------------------------------------
# outcome detection
# ---------------------------------------------------------------------------

@dataclass
class Outcome:
    """Verdict of the orbit detector: a certified fixed point, a certified
    invariant line, or an explicit refusal with evidence."""

    tag: str                       # FixedPoint | FixedLine | Indeterminate
    measured_factor: float | None
    classification: Classification | None = None
    point: Any = None
    residual: float | None = None
    line: Line | None = None
    invariance_defect: float | None = None
    uniqueness_ok: bool | None = None
    min_point_residual: float | None = None
    diagnostic: str | None = None

    def to_json(self) -> dict:
        out = {
            "tag": self.tag,
            "measured_factor": self.measured_factor,
            "diagnostic": self.diagnostic,
        }
        if self.point is not None:
            out["point"] = point_json(self.point)
        if self.residual is not None:
            out["residual"] = float(self.residual)
        if self.line is not None:
            out["line"] = self.line.to_json()
        if self.invariance_defect is not None:
            out["invariance_defect"] = float(self.invariance_defect)
        if self.uniqueness_ok is not None:
            out["uniqueness_ok"] = bool(self.uniqueness_ok)
        if self.min_point_residual is not None:
            out["min_point_residual"] = float(self.min_point_residual)
        if self.classification is not None:
            out["classification"] = self.classification.to_json()
        return out


def _fixed_point_outcome(map_, y, witnesses, thresholds, measured, cls):
    residual = eval_phi(map_.space, y, map_.f(y), witnesses)
    if residual <= thresholds.fixed_point:
        return Outcome("FixedPoint", measured, cls, point=y, residual=residual)
    return Outcome(
        "Indeterminate", measured, cls, point=y, residual=residual,
        diagnostic=f"candidate residual {residual:.3g} exceeds {thresholds.fixed_point:.3g}")


def detect_outcome(map_: DDecreasingMap, x0, steps: int,
                   witnesses: WitnessSet | None = None,
                   thresholds: Thresholds = Thresholds(),
                   seed: int = 0, line_samples: int = 64,
                   factor_samples: int = 500) -> Outcome:
    """Run the orbit, classify its tail, and certify the resulting case.

    A fixed point is claimed only from the residual phi(y, F(y)) -- never
    from orbit convergence alone, since the map need not be continuous for
    the pair distance.  A fixed line requires the sampled membership defect
    of mapped members to stay within tolerance, plus a uniqueness check that
    two separated image points regenerate the same line.
    """
    if witnesses is None:
        witnesses = WitnessSet.sampled(map_.space, 64, seed)
    measured = measured_contraction_factor(map_, samples=factor_samples, seed=seed)
    if measured is not None and measured >= 1.0:
        raise ValueError(f"map is not contractive on samples (measured {measured:.6g})")

    trace = orbit(map_, x0, steps, witnesses=witnesses, seed=seed)
    if trace.truncated:
        return Outcome("Indeterminate", measured, diagnostic=trace.diagnostic)
    cls = classify(map_.space, trace.points, witnesses, thresholds)

    if cls.tag == "CauchySequence":
        return _fixed_point_outcome(map_, cls.limit, witnesses, thresholds, measured, cls)
    if cls.tag == "UniquePoint":
        return _fixed_point_outcome(map_, cls.point, witnesses, thresholds, measured, cls)
    if cls.tag != "LineCase":
        return Outcome("Indeterminate", measured, cls,
                       diagnostic="no candidate limit point passed the tail residual")

    line = cls.line
    if line.members is not None:
        members = list(line.members)
    elif map_.space.line_points is not None:
        members = list(map_.space.line_points(line.g1, line.g2, line_samples))
        members = [m for m in members if line.contains(map_.space, m)]
    else:
        members = list(cls.passers)
    images = [map_.f(m) for m in members]
    M = np.asarray(members)
    G1 = (np.broadcast_to(np.asarray(line.g1, dtype=float), M.shape)
          if M.ndim > 1 else np.full(len(M), line.g1))
    G2 = (np.broadcast_to(np.asarray(line.g2, dtype=float), M.shape)
          if M.ndim > 1 else np.full(len(M), line.g2))
    invariance_defect = float(_d_many(map_.space, np.asarray(images), G1, G2).max())
    point_residuals = [eval_phi(map_.space, m, fm, witnesses)
                       for m, fm in zip(members, images)]
    min_residual = float(min(point_residuals))

    # Two separated image points must regenerate the same line.
    pair = None
    for i in range(len(images)):
        phi0 = eval_phi(map_.space, images[0], images[i], witnesses)
        if phi0 > thresholds.min_phi:
            pair = (0, i)
            break
    if pair is None:
        # The image collapses to one point, which must then be fixed.
        return _fixed_point_outcome(map_, images[0], witnesses, thresholds, measured, cls)
    a, b = images[pair[0]], images[pair[1]]
    uniqueness_ok = (float(map_.space.d(line.g1, a, b)) <= thresholds.colinear
                     and float(map_.space.d(line.g2, a, b)) <= thresholds.colinear)

    reported = replace(line, members=tuple(members))
    if invariance_defect <= thresholds.colinear and uniqueness_ok:
        return Outcome("FixedLine", measured, cls, line=reported,
                       invariance_defect=invariance_defect,
                       uniqueness_ok=uniqueness_ok,
                       min_point_residual=min_residual)
    return Outcome(
        "Indeterminate", measured, cls, line=reported,
        invariance_defect=invariance_defect, uniqueness_ok=uniqueness_ok,
        min_point_residual=min_residual,
        diagnostic="line invariance or uniqueness check failed at tolerance")
