"""Numerical contractivity certificates for planar C^2 maps.

On a patch metric satisfying the convexity sandwich, a map whose Jacobian
stays within a small budget c' of a fixed invertible matrix A, and whose
second derivative stays under the same budget, contracts the 2-metric by
C' * |det A| for a constant C' depending only on the sandwich constant and
the norm cap on A.  The certificate checks both hypotheses by sampled
central finite differences, and on success verifies the conclusion
empirically on sampled triples against the calibrated C'.

C' is calibrated once per patch configuration by maximizing the ratio over
linear maps drawn from a condition-bounded matrix family and committed as a
baseline; for strongly anisotropic near-singular A the ratio/|det A| sup is
empirically unbounded, so the certificate is only offered for matrices in
the calibration family (condition number <= the family cap).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spaces import SpherePatch


def jacobian_fd(F, x, step: float = 1e-5, radius: float | None = None) -> np.ndarray:
    """Central-difference Jacobian at x; O(step^2) error for C^3 maps.

    ``radius`` bounds the admissible domain: x needs margin >= step.
    """
    x = np.asarray(x, dtype=float)
    if radius is not None and np.linalg.norm(x) + step > radius:
        raise ValueError("insufficient margin for central differences")
    cols = []
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = step
        cols.append((np.asarray(F(x + e), dtype=float)
                     - np.asarray(F(x - e), dtype=float)) / (2.0 * step))
    return np.column_stack(cols)


def hessian_bound_fd(F, points, step: float = 1e-5,
                     radius: float | None = None) -> float:
    """Sampled sup of the Jacobian's derivative: the max over points and
    directions of the spectral norm of dJ/dx_i by central differences."""
    worst = 0.0
    for x in points:
        x = np.asarray(x, dtype=float)
        if radius is not None and np.linalg.norm(x) + 2.0 * step > radius:
            raise ValueError("insufficient margin for central differences")
        for i in range(len(x)):
            e = np.zeros_like(x)
            e[i] = step
            dJ = (jacobian_fd(F, x + e, step) - jacobian_fd(F, x - e, step)) / (2.0 * step)
            worst = max(worst, float(np.linalg.norm(dJ, 2)))
    return worst


@dataclass
class CertInput:
    """Hypotheses of a certificate run.

    ``proximity`` is the budget c' for both the Jacobian deviation and the
    second-derivative bound; the default is 0.01 * |det A| / C_A.
    ``ratio_constant`` is the calibrated C' (from the committed baseline).
    """

    map: object
    jac_target: np.ndarray
    norm_bound: float
    patch: SpherePatch
    inner_radius: float
    ratio_constant: float
    proximity: float | None = None
    convexity_constant: float | None = None

    def __post_init__(self):
        self.jac_target = np.asarray(self.jac_target, dtype=float)
        if self.jac_target.shape != (2, 2):
            raise ValueError("reference matrix must be 2x2")
        det = abs(np.linalg.det(self.jac_target))
        if det < 1e-15:
            raise ValueError("reference matrix must be invertible")
        if np.linalg.norm(self.jac_target, 2) > self.norm_bound + 1e-12:
            raise ValueError("reference matrix exceeds its declared norm cap")
        if not 0.0 < self.inner_radius < self.patch.radius:
            raise ValueError("inner radius must sit strictly inside the patch")
        if self.proximity is None:
            self.proximity = 0.01 * det / self.norm_bound


@dataclass
class CertResult:
    passes: bool
    max_jac_dev: float
    max_hessian: float
    c_prime: float
    ratio_constant: float
    det_target: float
    worst_ratio: float | None
    bound: float
    conclusion_ok: bool | None
    failures: list = field(default_factory=list)
    samples: int = 0
    ratio_samples: int = 0

    def to_json(self) -> dict:
        return {
            "pass": bool(self.passes),
            "max_jac_dev": float(self.max_jac_dev),
            "max_hessian": float(self.max_hessian),
            "c_prime": float(self.c_prime),
            "C_prime": float(self.ratio_constant),
            "det_A": float(self.det_target),
            "worst_ratio": None if self.worst_ratio is None else float(self.worst_ratio),
            "bound": float(self.bound),
            "conclusion_ok": self.conclusion_ok,
            "failures": list(self.failures),
            "samples": int(self.samples),
            "ratio_samples": int(self.ratio_samples),
        }


def certify(inp: CertInput, samples: int = 400, ratio_triples: int = 2000,
            seed: int = 0, step: float = 1e-5) -> CertResult:
    """Check the Jacobian-proximity and second-derivative hypotheses on
    sampled points; on pass, verify the contraction conclusion on sampled
    nondegenerate triples.  Failures carry the broken hypothesis and the
    witness point."""
    A = inp.jac_target
    det = abs(np.linalg.det(A))
    c_prime = float(inp.proximity)
    bound = inp.ratio_constant * det
    patch, rin = inp.patch, inp.inner_radius
    rng = np.random.default_rng(seed)

    margin = 2.5 * step
    pts = patch.sample(rng, samples, radius=max(rin - margin, rin * 0.5))
    devs = np.array([np.linalg.norm(jacobian_fd(inp.map, x, step, radius=rin) - A, 2)
                     for x in pts])
    max_dev = float(devs.max())
    hess = hessian_bound_fd(inp.map, pts, step, radius=rin)

    failures = []
    if max_dev > c_prime:
        failures.append({
            "hypothesis": "jacobian_proximity",
            "value": max_dev,
            "budget": c_prime,
            "witness": [float(c) for c in pts[int(np.argmax(devs))]],
        })
    if hess > c_prime:
        failures.append({
            "hypothesis": "hessian_bound",
            "value": float(hess),
            "budget": c_prime,
            "witness": None,
        })

    if failures:
        return CertResult(
            passes=False, max_jac_dev=max_dev, max_hessian=float(hess),
            c_prime=c_prime, ratio_constant=inp.ratio_constant,
            det_target=det, worst_ratio=None, bound=bound,
            conclusion_ok=None, failures=failures, samples=samples,
        )

    X = patch.sample(rng, ratio_triples, radius=rin)
    Y = patch.sample(rng, ratio_triples, radius=rin)
    Z = patch.sample(rng, ratio_triples, radius=rin)
    FX = np.array([inp.map(p) for p in X])
    FY = np.array([inp.map(p) for p in Y])
    FZ = np.array([inp.map(p) for p in Z])
    if (np.linalg.norm(FX, axis=1).max() > patch.radius
            or np.linalg.norm(FY, axis=1).max() > patch.radius
            or np.linalg.norm(FZ, axis=1).max() > patch.radius):
        failures.append({"hypothesis": "range_containment", "value": None,
                         "budget": patch.radius, "witness": None})
        return CertResult(
            passes=False, max_jac_dev=max_dev, max_hessian=float(hess),
            c_prime=c_prime, ratio_constant=inp.ratio_constant, det_target=det,
            worst_ratio=None, bound=bound, conclusion_ok=None,
            failures=failures, samples=samples,
        )
    d0 = patch.metric_batch(X, Y, Z)
    keep = d0 > 1e-12
    ratios = patch.metric_batch(FX[keep], FY[keep], FZ[keep]) / d0[keep]
    worst = float(ratios.max()) if keep.any() else None
    conclusion_ok = None if worst is None else bool(worst <= bound * 1.05)
    return CertResult(
        passes=True, max_jac_dev=max_dev, max_hessian=float(hess),
        c_prime=c_prime, ratio_constant=inp.ratio_constant, det_target=det,
        worst_ratio=worst, bound=bound, conclusion_ok=conclusion_ok,
        samples=samples, ratio_samples=int(keep.sum()),
    )


def calibrate_ratio_constant(patch_radius: float = 0.2, inner_radius: float = 0.1,
                             norm_bound: float = 2.0, matrices: int = 200,
                             triples: int = 500, max_condition: float = 4.0,
                             seed: int = 0) -> dict:
    """Oracle run behind the committed C' baseline: the sup of
    ratio / |det A| over linear maps from the condition-bounded family."""
    patch = SpherePatch(patch_radius)
    rng = np.random.default_rng(seed)
    best = 0.0
    kept = 0
    while kept < matrices:
        A = rng.normal(size=(2, 2))
        sv = np.linalg.svd(A, compute_uv=False)
        if sv[1] < 1e-12 or sv[0] / sv[1] > max_condition:
            continue
        A *= (rng.random() * norm_bound) / sv[0]
        if np.linalg.norm(A, 2) * inner_radius > patch_radius:
            continue
        det = abs(np.linalg.det(A))
        kept += 1
        X = patch.sample(rng, triples, radius=inner_radius)
        Y = patch.sample(rng, triples, radius=inner_radius)
        Z = patch.sample(rng, triples, radius=inner_radius)
        d0 = patch.metric_batch(X, Y, Z)
        keep = d0 > 1e-12
        d1 = patch.metric_batch(X[keep] @ A.T, Y[keep] @ A.T, Z[keep] @ A.T)
        ratio = float((d1 / d0[keep]).max())
        best = max(best, ratio / det)
    return {
        "C_prime": best,
        "patch_r": patch_radius,
        "inner_radius": inner_radius,
        "C_A": norm_bound,
        "matrices": matrices,
        "triples": triples,
        "max_condition": max_condition,
        "seed": seed,
    }
