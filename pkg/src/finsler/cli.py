"""Command-line front end: ``finsler <command> --config cfg.json``.

A config is a JSON object::

    {
      "metric": {"family": ..., "dimension": ..., "params": {...}},
      "x_box": [[lo, hi, count], ...],          # or "points": [[...], ...]
      "y_sampling": {"mode": "random", "count": 8, "seed": 0},
      "tolerances": {"fieldeq": 1e-7},
      "output": {"format": "json"},            # "csv" also writes points.csv
      ...command-specific sections...
    }

Random directions come from ``numpy.random.default_rng(seed)`` (PCG64), so a
fixed seed gives byte-identical reports.  Exit status: 0 when every
configured tolerance is met, 1 on a tolerance failure, 2 on a configuration
error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import itertools
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import metadata
from pathlib import Path

import numpy as np

from . import averaging, berwald, cones, geodesics, geometry, symmetry
from .errors import ConfigError, FinslerError
from .fields import VectorField
from .metrics import MetricSpec

COMMANDS = ("curvature", "fieldeq", "classify", "killing", "static", "berwald", "average", "geodesic", "verify")

DEFAULT_TOLERANCES = {
    "ricci": None,
    "fieldeq": 1e-7,
    "killing": 1e-10,
    "lie": 1e-9,
    "frobenius": 1e-8,
    "christoffel": 1e-4,
    "ricci_paths": 5e-3,
    "ricci_h": 1e-5,
    "verify_ricci": 1e-8,
    "conservation": 1e-8,
}


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0.0.0"


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# -- config ingestion ------------------------------------------------------


class Scan:
    """Parsed config plus CLI overrides."""

    def __init__(self, cfg: dict, seed: int | None = None, step: float | None = None, threads: int = 1):
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        if "metric" not in cfg:
            raise ConfigError("config needs a 'metric' descriptor")
        self.cfg = cfg
        self.spec = MetricSpec.from_dict(cfg["metric"])
        self.tol = dict(DEFAULT_TOLERANCES)
        self.tol.update(cfg.get("tolerances", {}))
        ys = dict(cfg.get("y_sampling", {}))
        if seed is not None:
            ys["seed"] = seed
        self.y_cfg = ys
        self.step = step
        self.threads = max(1, int(threads))
        self.points = self._points()

    def _points(self) -> list:
        n = self.spec.dimension
        if "points" in self.cfg:
            pts = [np.asarray(p, float) for p in self.cfg["points"]]
        elif "x_box" in self.cfg:
            axes = []
            for entry in self.cfg["x_box"]:
                lo, hi, count = float(entry[0]), float(entry[1]), int(entry[2])
                if count < 1:
                    raise ConfigError("x_box counts must be at least 1")
                axes.append([0.5 * (lo + hi)] if count == 1 else np.linspace(lo, hi, count).tolist())
            pts = [np.array(p) for p in itertools.product(*axes)]
        else:
            raise ConfigError("config needs 'points' or 'x_box'")
        for p in pts:
            if p.shape != (n,):
                raise ConfigError(f"points must have {n} coordinates")
        return pts

    def directions(self, x, index: int, default_mode: str = "random") -> list:
        """Fibre vectors at the ``index``-th point; seeded per point for order independence."""
        mode = self.y_cfg.get("mode", default_mode)
        count = int(self.y_cfg.get("count", 4))
        n = self.spec.dimension
        if count < 1:
            raise ConfigError("y_sampling count must be at least 1")
        rng = np.random.default_rng([int(self.y_cfg.get("seed", 0)), index])
        if mode == "explicit":
            return [np.asarray(v, float) for v in self.y_cfg["vectors"]]
        if mode == "random":
            v = rng.standard_normal((count, n))
            return list(v / np.linalg.norm(v, axis=1, keepdims=True))
        if mode == "lattice":
            grid = np.linspace(-1.0, 1.0, max(count, 2))
            vs = [np.array(v) for v in itertools.product(grid, repeat=n) if np.any(v)]
            return [v / np.linalg.norm(v) for v in vs]
        if mode == "timelike":
            if not (self.spec.is_splitting or self.spec.family == "lorentzian_quadratic"):
                raise ConfigError(f"timelike sampling needs a spacetime splitting, not {self.spec.family}")
            return list(cones._sample_in_cone(self.spec, x, rng, +1, count))
        raise ConfigError(f"unknown y_sampling mode {mode!r}")

    def map(self, fn, items):
        items = list(items)
        if self.threads == 1:
            return [fn(i, it) for i, it in enumerate(items)]
        with ThreadPoolExecutor(self.threads) as pool:
            return list(pool.map(fn, range(len(items)), items))


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, dict):
        return {str(k): _jsonable(w) for k, w in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(w) for w in v]
    return v


def _guarded(fn):
    """Record numerical failures at a point instead of aborting the scan."""

    def run(i, item):
        try:
            return fn(i, item)
        except FinslerError as exc:
            x = item[0] if isinstance(item, tuple) else item
            return {"index": i, "x": np.asarray(x).tolist(), "error": f"{type(exc).__name__}: {exc}"}

    return run


def _max(entries, key):
    vals = [abs(e[key]) for e in entries if key in e and e[key] is not None]
    return max(vals) if vals else 0.0


def _within(value, tol) -> bool:
    return tol is None or value <= tol


# -- commands --------------------------------------------------------------


def cmd_curvature(sc: Scan):
    spec = sc.spec
    jobs = [(x, y) for i, x in enumerate(sc.points) for y in sc.directions(x, i)]
    full = bool(sc.cfg.get("full", False))

    def one(i, job):
        x, y = job
        rep = geometry.curvature_report(spec, x, y)
        entry = {
            "index": i,
            "x": x.tolist(),
            "y": y.tolist(),
            "L": rep.L,
            "ricci_scalar": rep.ricci_scalar,
            "dual_path_error": rep.dual_path_error,
            "max_abs_G": float(np.max(np.abs(rep.G))),
            "max_abs_Gamma": float(np.max(np.abs(rep.Gamma))),
            "max_abs_R4": float(np.max(np.abs(rep.R4))),
            "max_abs_P": float(np.max(np.abs(rep.P))),
        }
        if full:
            entry["report"] = rep.to_json()
        return entry

    points = sc.map(_guarded(one), jobs)
    summary = {k: _max(points, src) for k, src in [
        ("max_abs_ricci", "ricci_scalar"),
        ("max_dual_path_error", "dual_path_error"),
        ("max_abs_G", "max_abs_G"),
        ("max_abs_Gamma", "max_abs_Gamma"),
        ("max_abs_R4", "max_abs_R4"),
        ("max_abs_P", "max_abs_P"),
    ]}
    errors = sum("error" in p for p in points)
    summary["errors"] = errors
    ok = errors == 0 and _within(summary["max_abs_ricci"], sc.tol["ricci"])
    return summary, points, ok, {}


def cmd_fieldeq(sc: Scan):
    spec = sc.spec
    jobs = [(x, y) for i, x in enumerate(sc.points) for y in sc.directions(x, i, "timelike")]

    def one(i, job):
        x, y = job
        rep = geometry.curvature_report(spec, x, y, fieldeq=True)
        return {
            "index": i,
            "x": x.tolist(),
            "y": y.tolist(),
            "L": rep.L,
            "ricci_scalar": rep.ricci_scalar,
            "fieldeq_residual": rep.fieldeq_residual,
            "fieldeq_normalized": rep.fieldeq_normalized,
        }

    points = sc.map(_guarded(one), jobs)
    res = [abs(p["fieldeq_residual"]) for p in points if "fieldeq_residual" in p]
    summary = {
        "max_abs_residual": max(res, default=0.0),
        "mean_abs_residual": float(np.mean(res)) if res else 0.0,
        "max_abs_normalized": _max(points, "fieldeq_normalized"),
        "max_abs_ricci": _max(points, "ricci_scalar"),
        "samples": len(res),
        "errors": sum("error" in p for p in points),
    }
    ok = summary["errors"] == 0 and bool(res) and _within(summary["max_abs_residual"], sc.tol["fieldeq"])
    return summary, points, ok, {}


def cmd_classify(sc: Scan):
    spec = sc.spec
    count = int(sc.y_cfg.get("count", 1000))

    def one(i, x):
        rng = np.random.default_rng([int(sc.y_cfg.get("seed", 0)), i])
        ys = rng.standard_normal((count, spec.dimension))
        labels, L = cones.classify_batch(spec, x, ys)
        band = cones.NULL_TOL * np.sum(ys * ys, axis=1)
        timelike = np.isin(labels, [cones.CausalClass.TIMELIKE_FUTURE.value, cones.CausalClass.TIMELIKE_OTHER.value])
        bad = (timelike & (L >= -band)) | ((labels == cones.CausalClass.SPACELIKE.value) & (L <= band))
        entry = {
            "index": i,
            "x": x.tolist(),
            "counts": {c.value: int(np.sum(labels == c.value)) for c in cones.CausalClass},
            "disagreements": int(np.sum(bad)),
        }
        conv = sc.cfg.get("convexity")
        if conv:
            rep = cones.cone_convexity_probe(spec, x, int(conv.get("samples", 1000)), int(sc.y_cfg.get("seed", 0)) + i, conv.get("mode", "same"))
            entry["convexity"] = {"pairs": rep.pairs, "violations": rep.violations, "out_of_cone": rep.out_of_cone, "mode": rep.mode}
        return entry

    points = sc.map(_guarded(one), sc.points)
    summary = {
        "vectors": count * len(points),
        "disagreements": sum(p.get("disagreements", 0) for p in points),
        "convexity_violations": sum(p.get("convexity", {}).get("violations", 0) for p in points),
        "errors": sum("error" in p for p in points),
    }
    ok = summary["errors"] == 0 and summary["disagreements"] == 0 and summary["convexity_violations"] == 0
    return summary, points, ok, {}


def _vector_field(sc: Scan) -> VectorField:
    desc = sc.cfg.get("vector_field")
    if desc is None:
        raise ConfigError("this command needs a 'vector_field'")
    if isinstance(desc, dict) and "builtin" in desc:
        desc = {"dimension": sc.spec.dimension, **desc}
    field = VectorField.parse(desc)
    if field.dimension != sc.spec.dimension:
        raise ConfigError("vector field dimension does not match the metric")
    return field


def cmd_killing(sc: Scan):
    spec = sc.spec
    K = _vector_field(sc)
    jobs = [(x, y) for i, x in enumerate(sc.points) for y in sc.directions(x, i)]

    def one(i, job):
        x, y = job
        kr = symmetry.killing_residual(spec, K, x, y)
        lie = symmetry.lie_derivative_g_residual(spec, K, x, y)
        return {"index": i, "x": x.tolist(), "y": y.tolist(), "killing_residual": kr, "lie_residual": float(np.max(np.abs(lie)))}

    points = sc.map(_guarded(one), jobs)
    summary = {
        "max_killing_residual": _max(points, "killing_residual"),
        "max_lie_residual": _max(points, "lie_residual"),
        "errors": sum("error" in p for p in points),
    }
    ok = (
        summary["errors"] == 0
        and _within(summary["max_killing_residual"], sc.tol["killing"])
        and _within(summary["max_lie_residual"], sc.tol["lie"])
    )
    return summary, points, ok, {}


def cmd_static(sc: Scan):
    spec = sc.spec
    K = _vector_field(sc)

    def one(i, x):
        sample = symmetry.orthogonal_one_form(spec, K, x)
        comps = sample.wedge()
        return {
            "index": i,
            "x": x.tolist(),
            "theta": sample.theta.tolist(),
            "wedge": {"".join(map(str, k)): v for k, v in comps.items()},
            "frobenius_residual": max((abs(v) for v in comps.values()), default=0.0),
        }

    points = sc.map(_guarded(one), sc.points)
    summary = {"max_frobenius_residual": _max(points, "frobenius_residual"), "errors": sum("error" in p for p in points)}
    static = _within(summary["max_frobenius_residual"], sc.tol["frobenius"])
    summary["static"] = static
    ok = summary["errors"] == 0 and static == bool(sc.cfg.get("expect", True))
    return summary, points, ok, {}


def cmd_berwald(sc: Scan):
    spec = sc.spec
    count = int(sc.y_cfg.get("count", berwald.DEFAULT_SAMPLES))
    seed = int(sc.y_cfg.get("seed", 0))

    def one(i, x):
        rep = berwald.is_berwald(spec, x, count, seed + i)
        return {"index": i, "x": x.tolist(), **rep.to_json()}

    points = sc.map(_guarded(one), sc.points)
    good = [p for p in points if "error" not in p]
    summary = {
        "berwald": bool(good) and all(p["berwald"] for p in good),
        "max_third_deriv": _max(points, "max_third_deriv"),
        "gamma_spread": _max(points, "gamma_spread"),
        "errors": len(points) - len(good),
    }
    ok = summary["errors"] == 0 and summary["berwald"] == bool(sc.cfg.get("expect", True))
    return summary, points, ok, {}


def _average_options(sc: Scan) -> dict:
    opts = dict(sc.cfg.get("average", {}))
    if sc.step is not None:
        opts["fd_step"] = sc.step
    return {
        "fd_step": float(opts.get("fd_step", averaging.FD_STEP)),
        "nodes": opts.get("nodes"),
        "measure": opts.get("measure", averaging.DEFAULT_MEASURE),
    }


def cmd_average(sc: Scan):
    spec = sc.spec
    if spec.kind != "base":
        raise ConfigError("'average' works on positive-definite base metrics")
    opts = _average_options(sc)

    def one(i, x):
        bw = berwald.is_berwald(spec, x, 8).berwald
        ch_h = averaging.christoffel_of_h(spec, x, opts["fd_step"], opts["nodes"], opts["measure"])
        chern = berwald.berwald_symbols(spec, x)
        ric = averaging.ricci_of_h(spec, x, opts["fd_step"], opts["nodes"], measure=opts["measure"])
        return {
            "index": i,
            "x": x.tolist(),
            "berwald": bw,
            "h": ric.h.tolist(),
            "nodes": ric.nodes,
            "christoffel_h": ch_h.tolist(),
            "chern_gamma": chern.tolist(),
            "christoffel_vs_chern": float(np.max(np.abs(ch_h - chern))),
            "ricci_h": ric.ricci_h.tolist(),
            "ricci_jets": ric.ricci_jets.tolist(),
            "ricci_paths_difference": ric.difference,
            "step_halving_diff": ric.step_halving_diff,
            "max_abs_ricci_h": float(np.max(np.abs(ric.ricci_h))),
        }

    points = sc.map(_guarded(one), sc.points)
    good = [p for p in points if "error" not in p]
    bw = [p for p in good if p["berwald"]]
    summary = {
        "all_berwald": bool(good) and len(bw) == len(good),
        "max_christoffel_vs_chern": max((p["christoffel_vs_chern"] for p in bw), default=0.0),
        "max_ricci_paths_difference": max((p["ricci_paths_difference"] for p in bw), default=0.0),
        "max_abs_ricci_h": _max(good, "max_abs_ricci_h"),
        "errors": len(points) - len(good),
    }
    # the comparisons with the Chern connection are only claimed for Berwald metrics
    ok = (
        summary["errors"] == 0
        and _within(summary["max_christoffel_vs_chern"], sc.tol["christoffel"])
        and _within(summary["max_ricci_paths_difference"], sc.tol["ricci_paths"])
    )
    return summary, points, ok, {}


def cmd_geodesic(sc: Scan):
    spec = sc.spec
    g = sc.cfg.get("geodesic")
    if not g or "x" not in g or "y" not in g:
        raise ConfigError("'geodesic' needs a section with 'x' and 'y'")
    step = sc.step if sc.step is not None else float(g.get("step", 1e-3))
    s_end = float(g.get("s_end", 1.0))
    state = geodesics.GeodesicState(g["x"], g["y"])
    traj = geodesics.integrate(spec, state, s_end, step)
    drift = geodesics.conservation_check(traj)
    span = max(float(traj.s[-1] - traj.s[0]), 1e-300)
    summary = {
        "samples": len(traj),
        "s_final": float(traj.s[-1]),
        "exit": traj.exit,
        "exit_message": traj.message,
        "conservation": drift,
        "conservation_per_unit_s": drift / span if len(traj) > 1 else 0.0,
        "L0": float(traj.L[0]),
        "x_final": traj.x[-1].tolist(),
        "y_final": traj.y[-1].tolist(),
        "backend": traj.meta["backend"],
        "step": step,
    }
    ok = _within(summary["conservation_per_unit_s"], sc.tol["conservation"]) and (traj.exit is None or g.get("allow_exit", False))
    stride = max(1, len(traj) // 200)
    points = [{"s": float(traj.s[k]), "x": traj.x[k].tolist(), "y": traj.y[k].tolist(), "L": float(traj.L[k])} for k in range(0, len(traj), stride)]
    return summary, points, ok, {"trajectory.csv": traj.to_csv}


def cmd_verify(sc: Scan):
    """Berwald base, vanishing Ricci scalar, field equation, Ricci-flat average."""
    spec = sc.spec
    if spec.family not in ("standard_static_product", "f_omega_static") or spec.base is None:
        raise ConfigError("'verify' needs a standard static product")
    base = spec.base
    opts = _average_options(sc)
    seed = int(sc.y_cfg.get("seed", 0))

    def one(i, x):
        bx = x[1:]
        bw = berwald.is_berwald(base, bx, berwald.DEFAULT_SAMPLES, seed + i)
        ys = sc.directions(x, i, "timelike")
        ricci, fe = [], []
        for y in ys:
            tj = geometry.TangentJets(spec, x, y, geometry.ORDER_FIELDEQ)
            ricci.append(abs(float(tj.ricci.value)))
            fe.append(abs(tj.fieldeq))
        ric_h = averaging.ricci_of_h(base, bx, opts["fd_step"], opts["nodes"], measure=opts["measure"])
        return {
            "index": i,
            "x": x.tolist(),
            "berwald": bw.berwald,
            "max_third_deriv": bw.max_third_deriv,
            "gamma_spread": bw.gamma_spread,
            "max_abs_ricci": max(ricci),
            "max_abs_fieldeq": max(fe),
            "max_abs_ricci_h": float(np.max(np.abs(ric_h.ricci_h))),
        }

    points = sc.map(_guarded(one), sc.points)
    good = [p for p in points if "error" not in p]
    stages = {
        "berwald": {"pass": bool(good) and all(p["berwald"] for p in good)},
        "ricci_scalar": {"max": _max(good, "max_abs_ricci"), "tol": sc.tol["verify_ricci"]},
        "fieldeq": {"max": _max(good, "max_abs_fieldeq"), "tol": sc.tol["fieldeq"]},
        "ricci_h": {"max": _max(good, "max_abs_ricci_h"), "tol": sc.tol["ricci_h"]},
    }
    for k in ("ricci_scalar", "fieldeq", "ricci_h"):
        stages[k]["pass"] = bool(good) and _within(stages[k]["max"], stages[k]["tol"])
    summary = {"stages": stages, "errors": len(points) - len(good)}
    ok = summary["errors"] == 0 and all(s["pass"] for s in stages.values())
    return summary, points, ok, {}


HANDLERS = {
    "curvature": cmd_curvature,
    "fieldeq": cmd_fieldeq,
    "classify": cmd_classify,
    "killing": cmd_killing,
    "static": cmd_static,
    "berwald": cmd_berwald,
    "average": cmd_average,
    "geodesic": cmd_geodesic,
    "verify": cmd_verify,
}


def run(command: str, cfg: dict, seed: int | None = None, step: float | None = None, threads: int = 1):
    """Execute ``command``; returns ``(report, passed, side_files)``."""
    if command not in HANDLERS:
        raise ConfigError(f"unknown command {command!r}")
    sc = Scan(cfg, seed=seed, step=step, threads=threads)
    summary, points, ok, files = HANDLERS[command](sc)
    fmt = cfg.get("output", {}).get("format", "json")
    if fmt not in ("json", "csv"):
        raise ConfigError(f"unknown output format {fmt!r}")
    report = {
        "config_hash": config_hash(cfg),
        "command": command,
        "tool_version": tool_version(),
        "passed": bool(ok),
        "tolerances": sc.tol,
        "summary": summary,
        "points": points,
    }
    report = _jsonable(report)
    if fmt == "csv":
        files = {**files, "points.csv": points_csv_writer(report["points"])}
    return report, bool(ok), files


def _flat_columns(entry: dict) -> dict:
    """Scalar fields of a point entry; short numeric vectors become ``key[i]``."""
    out = {}
    for k, v in entry.items():
        if isinstance(v, (int, float, str, bool)) or v is None:
            out[k] = v
        elif isinstance(v, list) and all(isinstance(c, (int, float)) for c in v):
            for i, c in enumerate(v):
                out[f"{k}[{i}]"] = c
    return out


def points_csv_writer(points: list):
    rows = [_flat_columns(p) for p in points]
    header = list(dict.fromkeys(k for r in rows for k in r))

    def write(path):
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, header, restval="")
            w.writeheader()
            for r in rows:
                w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})

    return write


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="finsler", description="Lorentz-Finsler curvature, symmetry and averaging scans.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON scan config")
    ap.add_argument("--out", default=None, help="output directory (report.json, plus trajectory.csv or points.csv); stdout if omitted")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for point scans")
    ap.add_argument("--step", type=float, default=None, help="geodesic step, or finite-difference step for 'average'/'verify'")
    ap.add_argument("--seed", type=int, default=None, help="override y_sampling.seed")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        report, ok, files = run(args.command, cfg, args.seed, args.step, args.threads)
    except (ConfigError, OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        print(f"finsler: config error: {exc}", file=sys.stderr)
        return 2
    except FinslerError as exc:
        print(f"finsler: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    text = dumps(report)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(text, encoding="utf-8")
        for name, writer in files.items():
            writer(out / name)
    else:
        sys.stdout.write(text)
    if not ok:
        print(f"finsler: {args.command}: tolerance check failed", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
