"""Experiment harness.

Subcommands: audit, demo-equator, iterate, classify, certify, banach,
convexity, enumerate-lines.  Global flags: --seed, --out, --tolerance,
--json-config.  Flag values override the JSON config file; unknown config
keys are rejected.  Every JSON artifact echoes the fully resolved config and
is byte-stable for a fixed config and seed, apart from the timestamp field.

Exit codes: 0 the run's checks passed, 1 a check failed, 2 bad usage.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .baselines import certifier_baseline, convexity_baseline, within_regression
from .certify import CertInput, certify
from .core import FiniteTwoMetricSpace, WitnessSet, audit
from .dynamics import (SphereContractionParams, detect_outcome, make_linear_map,
                       make_sphere_map, orbit)
from .lines import Thresholds, classify, enumerate_lines
from .quasi import banach_direct, banach_multcost, banach_power, interval_space
from .spaces import (SpherePatch, area_ball_space, convexity_bound,
                     det_sphere_space, sphere_witnesses, unit_sphere)

GLOBAL_DEFAULTS = {"seed": 0, "out": ".", "tolerance": 1e-9, "json_config": None}


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _report(config: dict, **payload) -> dict:
    out = {"config": config, "timestamp": _now()}
    out.update(payload)
    return out


class ConfigError(Exception):
    pass


def _resolve_config(args: argparse.Namespace, defaults: dict) -> dict:
    """Merge flag values over the JSON config file over hard defaults;
    reject unknown config keys."""
    file_cfg = {}
    if args.json_config:
        with open(args.json_config, "r", encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
    known = set(defaults) | set(GLOBAL_DEFAULTS)
    unknown = set(file_cfg) - known
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    resolved = {}
    for key, hard in {**GLOBAL_DEFAULTS, **defaults}.items():
        flag = getattr(args, key, None)
        resolved[key] = flag if flag is not None else file_cfg.get(key, hard)
    resolved.pop("json_config", None)
    return resolved


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise ConfigError(f"cannot parse vector {text!r}") from exc


def _parse_matrix2(text: str) -> np.ndarray:
    """'0.25I' or 'a,b,c,d' row-major."""
    text = text.strip()
    if text.endswith("I"):
        return float(text[:-1]) * np.eye(2)
    vals = _parse_vector(text)
    if len(vals) != 4:
        raise ConfigError("matrix needs 4 comma-separated entries or 'sI'")
    return vals.reshape(2, 2)


def _space_for(name: str, cfg: dict):
    if name == "det-sphere":
        space = det_sphere_space()
        witnesses = sphere_witnesses(cfg["witnesses"], cfg["seed"])
        return space, witnesses, None
    if name == "area-ball":
        space = area_ball_space(dim=cfg.get("dim", 3))
        witnesses = WitnessSet.sampled(space, cfg["witnesses"], cfg["seed"])
        return space, witnesses, None
    if name == "finite":
        if not cfg.get("table"):
            raise ConfigError("--table is required for finite spaces")
        finite = FiniteTwoMetricSpace.load(cfg["table"])
        return finite.as_space(), WitnessSet.all_of(finite), finite
    raise ConfigError(f"unknown space {name!r}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_audit(args) -> int:
    defaults = {"space": "det-sphere", "table": None, "samples": 2000,
                "witnesses": 128, "dim": 3}
    cfg = _resolve_config(args, defaults)
    space, witnesses, finite = _space_for(cfg["space"], cfg)
    report = audit(space, witnesses=witnesses, triples=cfg["samples"],
                   seed=cfg["seed"], tolerance=cfg["tolerance"])
    non_fatal = ("N",) if cfg["space"] == "det-sphere" else ()
    payload = _report(cfg, audit=report.to_json())
    if finite is not None:
        payload["lines"] = [list(line.members) for line in enumerate_lines(finite)]
    _write_json(Path(cfg["out"]) / "audit.json", payload)
    failing = report.failing(non_fatal)
    for rec in report.records:
        status = "ok" if rec.max_violation <= cfg["tolerance"] else "VIOLATED"
        print(f"{rec.axiom:>14}: max violation {rec.max_violation:.3e}  [{status}]")
        if rec.max_violation > cfg["tolerance"] and rec.witness is not None:
            print(f"{'':>14}  witness: {[np.asarray(w).tolist() for w in rec.witness]}")
    if failing:
        print(f"audit FAILED: {failing}")
        return 1
    print("audit passed")
    return 0


def cmd_demo_equator(args) -> int:
    defaults = {"k": 0.1, "e": 0.5, "theta": float(np.pi / 7),
                "x0": "0.8,0,0.6", "steps": 200, "witnesses": 128}
    cfg = _resolve_config(args, defaults)
    params = SphereContractionParams(cfg["k"], cfg["e"], cfg["theta"])
    map_ = make_sphere_map(params)
    if not map_.certified:
        print(f"warning: k={cfg['k']} >= e^3={cfg['e'] ** 3:.6g}; "
              f"claimed factor {map_.claimed_factor:.6g} is uncertified",
              file=sys.stderr)
    x0 = unit_sphere(_parse_vector(cfg["x0"]))
    witnesses = sphere_witnesses(cfg["witnesses"], cfg["seed"])
    outcome = detect_outcome(map_, x0, cfg["steps"], witnesses=witnesses,
                             seed=cfg["seed"])
    trace = orbit(map_, x0, cfg["steps"], witnesses=witnesses, seed=cfg["seed"])
    out_dir = Path(cfg["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    trace.to_csv(out_dir / "trace.csv", vertical_column=True)
    _write_json(out_dir / "outcome.json", _report(cfg, outcome=outcome.to_json()))
    factor = ("n/a" if outcome.measured_factor is None
              else f"{outcome.measured_factor:.6g}")
    print(f"outcome: {outcome.tag} (measured factor {factor})")

    if cfg["theta"] != 0.0:
        ok = outcome.tag == "FixedLine"
        if ok:
            normal = np.cross(outcome.line.g1, outcome.line.g2)
            normal /= np.linalg.norm(normal)
            ok = abs(normal[2]) >= 1.0 - 1e-6
            ok = ok and all(abs(m[2]) <= 1e-6 for m in outcome.line.members)
        if not ok:
            print("expected the equator as a fixed line")
            return 1
    else:
        if outcome.tag != "FixedPoint":
            print("expected a fixed point for the pure squeeze")
            return 1
    return 0


def cmd_iterate(args) -> int:
    defaults = {"map": "sphere", "k": 0.1, "e": 0.5, "theta": float(np.pi / 7),
                "dim": 3, "angle": 0.0, "x0": None, "steps": 200, "witnesses": 64}
    cfg = _resolve_config(args, defaults)
    if cfg["map"] == "sphere":
        map_ = make_sphere_map(SphereContractionParams(cfg["k"], cfg["e"], cfg["theta"]))
        x0 = unit_sphere(_parse_vector(cfg["x0"])) if cfg["x0"] else np.array([0.8, 0.0, 0.6])
        vertical = True
    elif cfg["map"] == "linear":
        dim = cfg["dim"]
        M = np.eye(dim)
        if cfg["angle"]:
            c, s = np.cos(cfg["angle"]), np.sin(cfg["angle"])
            M[0, 0], M[0, 1], M[1, 0], M[1, 1] = c, -s, s, c
        map_ = make_linear_map(M, cfg["k"])
        x0 = _parse_vector(cfg["x0"]) if cfg["x0"] else np.full(dim, 0.4 / np.sqrt(dim))
        vertical = False
    else:
        raise ConfigError(f"unknown map {cfg['map']!r}")
    witnesses = WitnessSet.sampled(map_.space, cfg["witnesses"], cfg["seed"])
    trace = orbit(map_, x0, cfg["steps"], witnesses=witnesses, seed=cfg["seed"])
    out_dir = Path(cfg["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    trace.to_csv(out_dir / "trace.csv", vertical_column=vertical)
    _write_json(out_dir / "iterate.json", _report(
        cfg,
        steps=len(trace) - 1,
        truncated=trace.truncated,
        diagnostic=trace.diagnostic,
        final_phi_step=float(trace.phi_steps[-1]) if len(trace.phi_steps) else None,
        decay_margin=trace.decay_margin,
    ))
    print(f"wrote {out_dir / 'trace.csv'} ({len(trace)} points"
          f"{', truncated' if trace.truncated else ''})")
    return 0


def cmd_classify(args) -> int:
    defaults = {"space": "det-sphere", "input": None, "witnesses": 128,
                "eps_lim": 1e-6, "eps_cauchy": 1e-8, "eps_tri": 1e-8,
                "min_length": 50, "dim": 3, "table": None}
    cfg = _resolve_config(args, defaults)
    if not cfg["input"]:
        raise ConfigError("--input trace CSV is required")
    space, witnesses, _ = _space_for(cfg["space"], cfg)
    rows = []
    with open(cfg["input"], "r", encoding="utf-8") as fh:
        import csv as _csv

        reader = _csv.DictReader(fh)
        coord_cols = [c for c in reader.fieldnames if c.startswith("x") and c != "x3_abs"]
        if not coord_cols:
            raise ConfigError("trace CSV has no coordinate columns")
        for row in reader:
            rows.append([float(row[c]) for c in coord_cols])
    seq = np.asarray(rows)
    thresholds = Thresholds(lim=cfg["eps_lim"], cauchy=cfg["eps_cauchy"],
                            tri_cauchy=cfg["eps_tri"], min_length=cfg["min_length"])
    verdict = classify(space, seq, witnesses, thresholds)
    _write_json(Path(cfg["out"]) / "classification.json",
                _report(cfg, classification=verdict.to_json()))
    print(f"classification: {verdict.tag} "
          f"(cauchy {verdict.cauchy_modulus:.3e}, tri {verdict.tri_cauchy_modulus:.3e})")
    return 0


def cmd_certify(args) -> int:
    defaults = {"A": "0.25I", "r": 0.2, "inner": 0.1, "c_prime": None,
                "quad": 0.0, "samples": 400, "triples": 2000, "C_prime": None}
    cfg = _resolve_config(args, defaults)
    A = _parse_matrix2(cfg["A"])
    base = certifier_baseline()
    C_prime = cfg["C_prime"] if cfg["C_prime"] is not None else base["C_prime"]
    mu = cfg["quad"]

    def F(x):
        x = np.asarray(x, dtype=float)
        out = A @ x
        if mu:
            out = out + mu * np.array([x[0] ** 2, x[0] * x[1]])
        return out

    inp = CertInput(map=F, jac_target=A, norm_bound=base["C_A"],
                    patch=SpherePatch(cfg["r"]), inner_radius=cfg["inner"],
                    ratio_constant=C_prime, proximity=cfg["c_prime"])
    result = certify(inp, samples=cfg["samples"], ratio_triples=cfg["triples"],
                     seed=cfg["seed"])
    _write_json(Path(cfg["out"]) / "certify.json", _report(cfg, result=result.to_json()))
    if result.passes:
        print(f"certificate PASSED: worst ratio {result.worst_ratio:.6g} "
              f"<= bound {result.bound:.6g}")
        return 0 if result.conclusion_ok else 1
    print(f"certificate FAILED: {[f['hypothesis'] for f in result.failures]}")
    return 1


def cmd_banach(args) -> int:
    defaults = {"C": 2.0, "k": 0.4, "x0": 1.0, "steps": 200,
                "variant": "auto", "residual_tol": 1e-10}
    cfg = _resolve_config(args, defaults)
    variant = cfg["variant"]
    if variant == "auto":
        variant = "direct" if cfg["k"] < 1.0 / cfg["C"] else "power"
    k = cfg["k"]
    F = lambda x: k * x  # noqa: E731 - canonical interval contraction
    if variant == "multcost":
        from dataclasses import replace

        space = replace(interval_space(C=cfg["C"]),
                        psi=lambda x, y, z: 0.1 * abs(z), psi_bound=0.1)
        run = banach_multcost(space, F, cfg["x0"], k, max_steps=cfg["steps"],
                              seed=cfg["seed"])
    elif variant == "power":
        run = banach_power(interval_space(C=cfg["C"]), F, cfg["x0"], k,
                           max_steps=cfg["steps"], seed=cfg["seed"])
    elif variant == "direct":
        run = banach_direct(interval_space(C=cfg["C"]), F, cfg["x0"], k,
                            max_steps=cfg["steps"], seed=cfg["seed"])
    else:
        raise ConfigError(f"unknown variant {variant!r}")
    _write_json(Path(cfg["out"]) / "banach.json", _report(cfg, run=run.to_json()))
    print(f"{variant}: fixed point {run.fixed_point!r}, residual {run.residual:.3e}, "
          f"steps {run.steps}, tail bound {'ok' if run.tail_bound_ok else 'VIOLATED'}")
    return 0 if run.tail_bound_ok and run.residual <= cfg["residual_tol"] else 1


def cmd_convexity(args) -> int:
    defaults = {"r": 0.2, "samples": 10000}
    cfg = _resolve_config(args, defaults)
    report = convexity_bound(radius=cfg["r"], samples=cfg["samples"], seed=cfg["seed"])
    payload = report.to_json()
    base = convexity_baseline()
    if (cfg["r"] == base["r"] and cfg["samples"] == base["samples"]
            and cfg["seed"] == base["seed"]):
        payload["baseline_C"] = base["C"]
        payload["within_regression"] = within_regression(report.C, base["C"])
    _write_json(Path(cfg["out"]) / "convexity.json", _report(cfg, convexity=payload))
    print(f"sandwich constant C = {report.C:.6f} "
          f"(upper {report.upper_ratio:.6f}, lower {report.lower_ratio:.6f})")
    ok = np.isfinite(report.C) and report.C >= 1.0
    ok = ok and payload.get("within_regression", True)
    return 0 if ok else 1


def cmd_enumerate_lines(args) -> int:
    defaults = {"table": None}
    cfg = _resolve_config(args, defaults)
    if not cfg["table"]:
        raise ConfigError("--table is required")
    finite = FiniteTwoMetricSpace.load(cfg["table"])
    lines = enumerate_lines(finite)
    _write_json(Path(cfg["out"]) / "lines.json",
                _report(cfg, lines=[list(line.members) for line in lines]))
    for line in lines:
        print(f"line: {list(line.members)}")
    print(f"{len(lines)} lines on {finite.n} points")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twometric", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, flags):
        p = sub.add_parser(name)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", type=str)
        p.add_argument("--tolerance", type=float)
        p.add_argument("--json-config", dest="json_config", type=str)
        for flag, kind in flags.items():
            p.add_argument(f"--{flag.replace('_', '-')}", dest=flag, type=kind)
        p.set_defaults(fn=fn)
        return p

    add("audit", cmd_audit,
        {"space": str, "table": str, "samples": int, "witnesses": int, "dim": int})
    add("demo-equator", cmd_demo_equator,
        {"k": float, "e": float, "theta": float, "x0": str, "steps": int,
         "witnesses": int})
    add("iterate", cmd_iterate,
        {"map": str, "k": float, "e": float, "theta": float, "dim": int,
         "angle": float, "x0": str, "steps": int, "witnesses": int})
    add("classify", cmd_classify,
        {"space": str, "input": str, "witnesses": int, "eps_lim": float,
         "eps_cauchy": float, "eps_tri": float, "min_length": int, "dim": int,
         "table": str})
    add("certify", cmd_certify,
        {"A": str, "r": float, "inner": float, "c_prime": float, "quad": float,
         "samples": int, "triples": int, "C_prime": float})
    add("banach", cmd_banach,
        {"C": float, "k": float, "x0": float, "steps": int, "variant": str,
         "residual_tol": float})
    add("convexity", cmd_convexity, {"r": float, "samples": int})
    add("enumerate-lines", cmd_enumerate_lines, {"table": str})
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
