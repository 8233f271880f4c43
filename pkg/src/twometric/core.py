"""Core abstractions for bounded ternary (2-)metric spaces.

A 2-metric assigns to every triple of points a nonnegative number in [0, 1]
that behaves like the area of the triangle they span: it vanishes exactly on
degenerate triples.  The axioms checked here, with their short names used
throughout:

  Sym   -- invariance under permutation of the three arguments
  Tetr  -- d(a,b,c) <= d(a,b,x) + d(b,c,x) + d(a,c,x)
  Z     -- d(a,b,b) = 0 (and, folded in, d >= 0 everywhere)
  N     -- for distinct a, b some witness c has d(a,b,c) > 0
  B     -- d <= 1
  Trans -- d(a,b,x) * d(c,x,y) <= d(a,x,y) + d(b,x,y)

From a bounded 2-metric one derives a pair distance
phi(x, y) = sup_z d(x, y, z), approximated here as a max over an explicit
finite witness set (exact on finite spaces when the witness set is the whole
point set).  Derived inequalities audited alongside the axioms:

  AT             -- phi(x,y) <= phi(x,z) + 2*phi(z,y)
  CostTriangle   -- phi(x,y) <= phi(x,z) + phi(z,y) + d(x,y,z)
  DphiLipschitz  -- |d(a,b,x) - d(a,b,y)| <= 2*phi(x,y)

Everything in this module is pure; all randomness flows from a single
explicit seed recorded in the produced report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

DEFAULT_TOLERANCE = 1e-9

# Axioms whose phi evaluations draw their sample tuples from the witness set
# itself: the truncated sup then satisfies the derived inequalities exactly,
# so a positive violation is a genuine defect, not truncation error.
PHI_AXIOMS = ("N", "AT", "CostTriangle", "DphiLipschitz")

AXIOM_ORDER = ("Sym", "Tetr", "Z", "N", "B", "Trans", "AT", "CostTriangle", "DphiLipschitz")


# ---------------------------------------------------------------------------
# point helpers (points are either numpy coordinate vectors or int indices)
# ---------------------------------------------------------------------------

def point_key(p) -> tuple:
    """Hash/ordering key for a point."""
    if isinstance(p, (int, np.integer)):
        return (int(p),)
    return tuple(np.asarray(p, dtype=float).tolist())


def point_json(p):
    if isinstance(p, (int, np.integer)):
        return int(p)
    if isinstance(p, (float, np.floating)):
        return float(p)
    return [float(c) for c in np.asarray(p).ravel()]


def _is_index_points(points) -> bool:
    arr = np.asarray(points)
    return arr.ndim == 1 and np.issubdtype(arr.dtype, np.integer)


def _lex_swap(X: np.ndarray, Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reorder each pair (row-wise) into lexicographic order."""
    if X.ndim == 1:  # index points
        swap = Y < X
    else:
        diff = X != Y
        any_diff = diff.any(axis=1)
        first = np.argmax(diff, axis=1)
        rows = np.arange(len(X))
        swap = any_diff & (Y[rows, first] < X[rows, first])
    Xo = np.where(swap[..., None] if X.ndim > 1 else swap, Y, X)
    Yo = np.where(swap[..., None] if X.ndim > 1 else swap, X, Y)
    return Xo, Yo


# ---------------------------------------------------------------------------
# spaces and witness sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoMetricSpace:
    """A point domain with an evaluable ternary metric.

    ``d`` is the scalar evaluator; ``d_batch`` an optional vectorized form
    over stacked (n, dim) arrays used by audits and classification, which
    must agree with ``d``.  ``sample(rng, n)`` draws n domain points.
    ``canon`` maps a point to its equivalence-class representative (used by
    quotient constructions); it must be idempotent.  ``line_points``, when
    present, samples points of the line through two given generators.
    """

    name: str
    d: Callable[[Any, Any, Any], float]
    sample: Callable[[np.random.Generator, int], Any]
    dim: int | None = None
    size: int | None = None
    d_batch: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray] | None = None
    canon: Callable[[Any], Any] | None = None
    contains: Callable[[Any], bool] | None = None
    line_points: Callable[[Any, Any, int], Any] | None = None
    symmetric_exact: bool = False


@dataclass(frozen=True)
class WitnessSet:
    """Finite stand-in for the sup index set of the derived pair distance."""

    points: Any
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.points) == 0:
            raise ValueError("witness set must be nonempty")

    def __len__(self) -> int:
        return len(self.points)

    @staticmethod
    def sampled(space: TwoMetricSpace, count: int, seed: int) -> "WitnessSet":
        if count < 1:
            raise ValueError("witness count must be >= 1")
        pts = space.sample(np.random.default_rng(seed), count)
        return WitnessSet(pts, {"kind": "sample", "count": count, "seed": seed})

    @staticmethod
    def all_of(space: "FiniteTwoMetricSpace") -> "WitnessSet":
        return WitnessSet(np.arange(space.n), {"kind": "all", "count": space.n})

    @staticmethod
    def explicit(points) -> "WitnessSet":
        return WitnessSet(points, {"kind": "explicit", "count": len(points)})

    def refined(self, space: TwoMetricSpace) -> "WitnessSet":
        """The same witnesses plus an equal number of fresh samples."""
        seed = int(self.descriptor.get("seed", 0)) + 1
        fresh = space.sample(np.random.default_rng(seed), len(self.points))
        pts = np.concatenate([np.asarray(self.points), np.asarray(fresh)])
        return WitnessSet(pts, {"kind": "refined", "count": len(pts), "seed": seed})


def eval_phi(space: TwoMetricSpace, x, y, witnesses: WitnessSet) -> float:
    """Pair distance max_w d(x, y, w) over the witness set.

    The pair is put in a canonical order first so the result is exactly
    symmetric in x and y.
    """
    if len(witnesses) == 0:
        raise ValueError("witness set must be nonempty")
    if point_key(y) < point_key(x):
        x, y = y, x
    if space.d_batch is not None and not _is_index_points(witnesses.points):
        W = np.asarray(witnesses.points, dtype=float)
        X = np.broadcast_to(np.asarray(x, dtype=float), W.shape)
        Y = np.broadcast_to(np.asarray(y, dtype=float), W.shape)
        return float(space.d_batch(X, Y, W).max())
    return max(float(space.d(x, y, w)) for w in witnesses.points)


def _d_many(space: TwoMetricSpace, X, Y, Z) -> np.ndarray:
    if space.d_batch is not None and not _is_index_points(X):
        return np.asarray(space.d_batch(np.asarray(X), np.asarray(Y), np.asarray(Z)))
    return np.array([float(space.d(x, y, z)) for x, y, z in zip(X, Y, Z)])


def _phi_many(space: TwoMetricSpace, X, Y, witnesses: WitnessSet) -> np.ndarray:
    """Vectorized pair distance for stacked pairs."""
    X = np.asarray(X)
    Y = np.asarray(Y)
    X, Y = _lex_swap(X, Y)
    W = np.asarray(witnesses.points)
    m, w = len(X), len(W)
    if space.d_batch is not None and not _is_index_points(X):
        Xr = np.repeat(X, w, axis=0)
        Yr = np.repeat(Y, w, axis=0)
        Wt = np.tile(W, (m, 1))
        return space.d_batch(Xr, Yr, Wt).reshape(m, w).max(axis=1)
    out = np.empty(m)
    for i in range(m):
        out[i] = max(float(space.d(X[i], Y[i], wp)) for wp in W)
    return out


def witness_refinement_gap(space: TwoMetricSpace, witnesses: WitnessSet,
                           pairs: int = 200, seed: int = 0) -> float:
    """Empirical sup-truncation error: max increase of phi when the witness
    set is doubled.  Zero on finite spaces audited with all points."""
    rng = np.random.default_rng(seed)
    X = np.asarray(space.sample(rng, pairs))
    Y = np.asarray(space.sample(rng, pairs))
    refined = witnesses.refined(space)
    base = _phi_many(space, X, Y, witnesses)
    better = _phi_many(space, X, Y, refined)
    return float(np.maximum(better - base, 0.0).max())


# ---------------------------------------------------------------------------
# finite table-backed spaces
# ---------------------------------------------------------------------------

class FiniteTwoMetricSpace:
    """A 2-metric on {0, ..., n-1} stored as a table over unordered triples.

    Triples with a repeated index are implicitly 0, so permutation symmetry
    and the degeneracy axiom hold by construction.  Entries live in [0, 1]
    for valid spaces, but out-of-range values are representable so the audit
    can find planted defects.
    """

    def __init__(self, n: int, entries: dict[tuple[int, int, int], float] | None = None):
        if n < 1:
            raise ValueError("need at least one point")
        self.n = int(n)
        self.table: dict[tuple[int, int, int], float] = {}
        for key, value in (entries or {}).items():
            i, j, k = sorted(int(v) for v in key)
            if not (0 <= i < n and k < n):
                raise ValueError(f"triple {key} out of range for n={n}")
            if len({i, j, k}) < 3:
                raise ValueError(f"table stores distinct triples only, got {key}")
            self.table[(i, j, k)] = float(value)

    def d(self, i, j, k) -> float:
        i, j, k = sorted((int(i), int(j), int(k)))
        if i == j or j == k:
            return 0.0
        return self.table.get((i, j, k), 0.0)

    def distinct_triples(self) -> Iterable[tuple[int, int, int]]:
        n = self.n
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    yield (i, j, k)

    def phi(self, i: int, j: int) -> float:
        """Exact pair distance (max over all points)."""
        return max((self.d(i, j, k) for k in range(self.n)), default=0.0)

    def as_space(self, name: str = "finite") -> TwoMetricSpace:
        return TwoMetricSpace(
            name=name,
            d=self.d,
            sample=lambda rng, m: rng.integers(0, self.n, size=m),
            size=self.n,
            symmetric_exact=True,
        )

    @staticmethod
    def from_points(points, metric: Callable[[Any, Any, Any], float]) -> "FiniteTwoMetricSpace":
        """Tabulate a coordinate metric on an explicit point list."""
        points = [np.asarray(p, dtype=float) for p in points]
        space = FiniteTwoMetricSpace(len(points))
        for i, j, k in space.distinct_triples():
            space.table[(i, j, k)] = float(metric(points[i], points[j], points[k]))
        return space

    # -- JSON table format: {"n": int, "entries": [{"i","j","k","d"}, ...]} --

    def to_json(self) -> dict:
        entries = [
            {"i": i, "j": j, "k": k, "d": v}
            for (i, j, k), v in sorted(self.table.items())
        ]
        return {"n": self.n, "entries": entries}

    @staticmethod
    def from_json(payload: dict) -> "FiniteTwoMetricSpace":
        entries = {
            (e["i"], e["j"], e["k"]): e["d"] for e in payload.get("entries", [])
        }
        return FiniteTwoMetricSpace(payload["n"], entries)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2)
            fh.write("\n")

    @staticmethod
    def load(path) -> "FiniteTwoMetricSpace":
        with open(path, "r", encoding="utf-8") as fh:
            return FiniteTwoMetricSpace.from_json(json.load(fh))


def demo_five_point_space() -> FiniteTwoMetricSpace:
    """Five points {a,b,c,p,q} = {0..4} with one three-point line {a,b,c}
    and d = 1 on every other distinct triple.  Has exactly eight lines."""
    space = FiniteTwoMetricSpace(5)
    for t in space.distinct_triples():
        space.table[t] = 0.0 if t == (0, 1, 2) else 1.0
    return space


# ---------------------------------------------------------------------------
# axiom audit
# ---------------------------------------------------------------------------

@dataclass
class AxiomRecord:
    axiom: str
    max_violation: float
    witness: tuple | None
    samples: int

    def to_json(self) -> dict:
        return {
            "axiom": self.axiom,
            "max_violation": float(self.max_violation),
            "witness": [point_json(p) for p in self.witness] if self.witness else [],
            "samples": int(self.samples),
        }


@dataclass
class AxiomReport:
    seed: int
    tolerance: float
    records: list[AxiomRecord]

    def record(self, axiom: str) -> AxiomRecord:
        for rec in self.records:
            if rec.axiom == axiom:
                return rec
        raise KeyError(axiom)

    def failing(self, non_fatal: Sequence[str] = ()) -> list[str]:
        return [
            r.axiom
            for r in self.records
            if r.max_violation > self.tolerance and r.axiom not in non_fatal
        ]

    def passed(self, non_fatal: Sequence[str] = ()) -> bool:
        return not self.failing(non_fatal)

    def worst(self) -> float:
        return max(r.max_violation for r in self.records)

    def to_json(self) -> dict:
        return {
            "seed": int(self.seed),
            "tolerance": float(self.tolerance),
            "axioms": [r.to_json() for r in self.records],
        }


def _record_from(axiom: str, violations: np.ndarray, tuples, samples: int) -> AxiomRecord:
    if len(violations) == 0:
        return AxiomRecord(axiom, 0.0, None, samples)
    worst = int(np.argmax(violations))
    value = float(violations[worst])
    witness = tuple(t[worst] for t in tuples) if value > 0 else None
    return AxiomRecord(axiom, max(value, 0.0), witness, samples)


def audit(space: TwoMetricSpace, *, witnesses: WitnessSet,
          triples: int = 2000, quadruples: int | None = None,
          quintuples: int | None = None, seed: int = 0,
          tolerance: float = DEFAULT_TOLERANCE) -> AxiomReport:
    """Score every axiom as the worst sampled max(0, LHS - RHS).

    Tuples for the plain axioms are drawn from the space sampler; tuples for
    the phi-based checks are drawn from the witness set so the truncated sup
    is internally consistent and those inequalities are exact.  All sampling
    is sequential from the given seed.
    """
    if triples < 1:
        raise ValueError("sample counts must be >= 1")
    quadruples = triples if quadruples is None else quadruples
    quintuples = triples if quintuples is None else quintuples
    rng = np.random.default_rng(seed)

    def draw(count):
        return np.asarray(space.sample(rng, count))

    records: list[AxiomRecord] = []

    # Sym: spread of d over argument permutations.
    T = [draw(triples) for _ in range(3)]
    d0 = _d_many(space, *T)
    if space.symmetric_exact:
        records.append(AxiomRecord("Sym", 0.0, None, 0))
    else:
        spread = np.zeros(triples)
        perms = [(0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
        for p in perms:
            dp = _d_many(space, T[p[0]], T[p[1]], T[p[2]])
            spread = np.maximum(spread, np.abs(dp - d0))
        records.append(_record_from("Sym", spread, T, triples))

    # Tetr on quadruples.
    Q = [draw(quadruples) for _ in range(4)]
    lhs = _d_many(space, Q[0], Q[1], Q[2])
    rhs = (_d_many(space, Q[0], Q[1], Q[3])
           + _d_many(space, Q[1], Q[2], Q[3])
           + _d_many(space, Q[0], Q[2], Q[3]))
    records.append(_record_from("Tetr", lhs - rhs, Q, quadruples))

    # Z: repeated-argument degeneracy, plus positivity on generic triples.
    P = [draw(triples) for _ in range(2)]
    z_viol = np.abs(_d_many(space, P[0], P[1], P[1]))
    pos_viol = -d0
    if pos_viol.max() > z_viol.max():
        records.append(_record_from("Z", pos_viol, T, triples))
    else:
        records.append(_record_from("Z", z_viol, (P[0], P[1], P[1]), triples))

    # N: distinct pairs (after canonicalization) must have positive phi.
    widx = np.random.default_rng(seed + 1).integers(0, len(witnesses), size=(triples, 2))
    Wpts = np.asarray(witnesses.points)
    NX, NY = Wpts[widx[:, 0]], Wpts[widx[:, 1]]
    canon = space.canon or (lambda p: p)
    keep = []
    for i in range(len(NX)):
        a, b = canon(NX[i]), canon(NY[i])
        if point_key(a) != point_key(b):
            keep.append(i)
    keep = np.array(keep, dtype=int)
    if len(keep):
        phis = _phi_many(space, NX[keep], NY[keep], witnesses)
        n_viol = np.where(phis <= tolerance, 1.0, 0.0)
        records.append(_record_from("N", n_viol, (NX[keep], NY[keep]), len(keep)))
    else:
        records.append(AxiomRecord("N", 0.0, None, 0))

    # B: global bound 1.
    records.append(_record_from("B", d0 - 1.0, T, triples))

    # Trans on quintuples: d(a,b,x) * d(c,x,y) <= d(a,x,y) + d(b,x,y).
    V = [draw(quintuples) for _ in range(5)]
    a, b, c, x, y = V
    lhs = _d_many(space, a, b, x) * _d_many(space, c, x, y)
    rhs = _d_many(space, a, x, y) + _d_many(space, b, x, y)
    records.append(_record_from("Trans", lhs - rhs, V, quintuples))

    # phi-based checks, sampled from the witness set.
    prng = np.random.default_rng(seed + 2)
    tidx = prng.integers(0, len(witnesses), size=(triples, 3))
    PX, PY, PZ = Wpts[tidx[:, 0]], Wpts[tidx[:, 1]], Wpts[tidx[:, 2]]
    phi_xy = _phi_many(space, PX, PY, witnesses)
    phi_xz = _phi_many(space, PX, PZ, witnesses)
    phi_zy = _phi_many(space, PZ, PY, witnesses)
    d_xyz = _d_many(space, PX, PY, PZ)
    records.append(_record_from("AT", phi_xy - phi_xz - 2.0 * phi_zy,
                                (PX, PY, PZ), triples))
    records.append(_record_from("CostTriangle", phi_xy - phi_xz - phi_zy - d_xyz,
                                (PX, PY, PZ), triples))

    qidx = prng.integers(0, len(witnesses), size=(quadruples, 4))
    DA, DB = Wpts[qidx[:, 0]], Wpts[qidx[:, 1]]
    DX, DY = Wpts[qidx[:, 2]], Wpts[qidx[:, 3]]
    lhs = np.abs(_d_many(space, DA, DB, DX) - _d_many(space, DA, DB, DY))
    rhs = 2.0 * _phi_many(space, DX, DY, witnesses)
    records.append(_record_from("DphiLipschitz", lhs - rhs, (DA, DB, DX, DY), quadruples))

    order = {name: i for i, name in enumerate(AXIOM_ORDER)}
    records.sort(key=lambda r: order[r.axiom])
    return AxiomReport(seed=seed, tolerance=tolerance, records=records)


# ---------------------------------------------------------------------------
# nondegeneracy quotient and the surjectivity bound
# ---------------------------------------------------------------------------

def quotient_by_zero_phi(space: FiniteTwoMetricSpace,
                         tol: float = 1e-12) -> FiniteTwoMetricSpace:
    """Merge points at pair distance zero; the result is strictly reflexive.

    Values are taken from class representatives, which is well defined
    because d moves by at most twice the pair distance in each argument.
    Identity when no pair has phi <= tol.
    """
    parent = list(range(space.n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(space.n):
        for j in range(i + 1, space.n):
            if space.phi(i, j) <= tol:
                parent[find(i)] = find(j)

    roots = sorted({find(i) for i in range(space.n)})
    if len(roots) == space.n:
        return space
    index = {r: c for c, r in enumerate(roots)}
    out = FiniteTwoMetricSpace(len(roots))
    for i, j, k in space.distinct_triples():
        ci, cj, ck = index[find(i)], index[find(j)], index[find(k)]
        if len({ci, cj, ck}) < 3:
            continue
        out.table[tuple(sorted((ci, cj, ck)))] = space.d(i, j, k)
    for i in range(out.n):
        for j in range(i + 1, out.n):
            if out.phi(i, j) <= tol:
                raise RuntimeError("quotient failed to become strictly reflexive")
    return out


@dataclass
class SurjectivityCheck:
    is_surjective: bool
    measured_k: float | None
    witness: tuple | None

    def to_json(self) -> dict:
        return {
            "is_surjective": bool(self.is_surjective),
            "measured_k": None if self.measured_k is None else float(self.measured_k),
            "witness": list(self.witness) if self.witness else [],
        }


def surjective_contraction_check(space: FiniteTwoMetricSpace,
                                 mapping: Sequence[int],
                                 zero_tol: float = 1e-12) -> SurjectivityCheck:
    """Worst expansion ratio of a self-map on the indices.

    measured_k is the max of d(F i, F j, F k) / d(i, j, k) over triples with
    positive d; it is infinite when a zero triple maps to a positive one
    (no finite contraction constant exists then), and absent when d vanishes
    on every triple.  For a surjective map on a space satisfying the
    nondegeneracy and boundedness axioms, measured_k >= 1.
    """
    mapping = [int(v) for v in mapping]
    if len(mapping) != space.n or any(not 0 <= v < space.n for v in mapping):
        raise ValueError("mapping must be total on the index set")
    surjective = len(set(mapping)) == space.n
    best = None
    witness = None
    for i, j, k in space.distinct_triples():
        d0 = space.d(i, j, k)
        d1 = space.d(mapping[i], mapping[j], mapping[k])
        if d0 > zero_tol:
            ratio = d1 / d0
            if best is None or ratio > best:
                best, witness = ratio, (i, j, k)
        elif d1 > zero_tol:
            return SurjectivityCheck(surjective, float("inf"), (i, j, k))
    return SurjectivityCheck(surjective, best, witness)
