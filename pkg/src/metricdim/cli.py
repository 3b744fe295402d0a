"""Command-line harness: every estimator behind one binary.

Each subcommand reads a JSON config (recipe or input CSV plus command
parameters), runs deterministically under the given seed, and writes a JSON
report embedding the fully resolved config next to any raw CSV tables.
Rerunning the embedded config reproduces the report byte-for-byte except
for the timestamp field.

Exit codes: 0 success, 2 inconclusive or absent result, 1 error.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from pathlib import Path

from . import amplifier as amp
from . import constructions as cons
from . import estimators as est
from . import sparse as sp
from .dyadic import (
    BudgetExceeded,
    DyadicCover,
    Metric,
    PointSet,
    cover_points,
    fibers,
    scaling_curve,
)

SCHEMA_VERSION = 1

COMMANDS = (
    "generate", "boxcount", "udim", "adim", "adim-loc", "projdim", "tdim0",
    "classify", "sparse-profile", "thmb-classify", "uniform-partition",
    "amplify", "validate-cert",
)


class ConfigError(ValueError):
    pass


def _threads() -> int:
    raw = os.environ.get("METRICDIM_THREADS", "1")
    try:
        t = int(raw)
    except ValueError:
        raise ConfigError(f"METRICDIM_THREADS must be an integer, got {raw!r}")
    if t == 0:
        return os.cpu_count() or 1
    return max(1, t)


def _need(cfg: dict, field: str, command: str):
    if field not in cfg:
        raise ConfigError(f"config for {command!r} is missing the field {field!r}")
    return cfg[field]


def _load_pointset(cfg: dict, command: str) -> PointSet:
    metric = None
    if "snowflake_exponent" in cfg:
        metric = Metric(float(cfg["snowflake_exponent"]))
    if "recipe" in cfg:
        ps = cons.build(cons.SetRecipe.from_dict(cfg["recipe"]))
        if metric is not None:
            ps = ps.with_metric(metric)
        return ps
    if "input" in cfg:
        text = Path(cfg["input"]).read_text()
        return PointSet.from_csv(text, metric=metric, depth=cfg.get("depth"))
    raise ConfigError(f"config for {command!r} needs either 'recipe' or 'input'")


def _levels(cfg: dict, command: str) -> list[int]:
    spec = _need(cfg, "levels", command)
    if isinstance(spec, dict):
        return list(range(int(spec["min"]), int(spec["max"]) + 1))
    return [int(k) for k in spec]


def _window(cfg: dict, levels: list[int]) -> tuple[int, int]:
    if "window" in cfg:
        w = cfg["window"]
        return int(w[0]), int(w[1])
    return est.default_window(levels)


def _estimate_dict(e: est.DimEstimate) -> dict:
    return {
        "value": e.value,
        "method": e.method,
        "window": list(e.window),
        "spread": e.spread,
        "detail": {k: v for k, v in sorted(e.detail.items())},
    }


def _covers_at(ps: PointSet, levels: list[int]) -> list[DyadicCover]:
    if ps.depth is not None and max(levels) > ps.depth:
        raise ConfigError(
            f"level {max(levels)} exceeds the sample construction depth {ps.depth}")
    return [cover_points(ps, k) for k in levels]


def _run_generate(cfg, seed):
    ps = _load_pointset(cfg, "generate")
    result = {"points": len(ps), "n": ps.n, "depth": ps.depth}
    return 0, result, {"csv": ps.to_csv()}


def _run_boxcount(cfg, seed):
    ps = _load_pointset(cfg, "boxcount")
    curve = scaling_curve(ps, _levels(cfg, "boxcount"))
    result = {"entries": [[k, c] for k, c in curve.entries], "n": curve.n}
    return 0, result, {"csv": curve.to_csv()}


def _run_udim(cfg, seed):
    ps = _load_pointset(cfg, "udim")
    method = cfg.get("method", "boxcount")
    levels = _levels(cfg, "udim")
    window = _window(cfg, levels)
    if method == "boxcount":
        curve = scaling_curve(ps, levels)
        e = est.udim_fit(curve, window)
    elif method == "net":
        e, curve = est.udim_net(ps, window, mode=cfg.get("net_mode", "auto"))
    else:
        raise ConfigError(f"unknown udim method {method!r}")
    return 0, _estimate_dict(e), {"csv": curve.to_csv()}


def _run_adim(cfg, seed):
    ps = _load_pointset(cfg, "adim")
    pairs = tuple((float(r), float(R)) for r, R in cfg.get("scale_pairs", ()))
    params = est.AdimScanParams(
        centers=int(cfg.get("centers", 16)),
        scale_pairs=pairs,
        quantile=cfg.get("quantile", "max"),
        net_mode=cfg.get("net_mode", "auto"),
    )
    e, table = est.adim_scan(ps, params, threads=_threads())
    rows = ["x,r,R,exponent"]
    rows += [f"{'|'.join(repr(c) for c in x)},{r!r},{R!r},{v!r}"
             for x, r, R, v in table]
    return 0, _estimate_dict(e), {"csv": "\n".join(rows) + "\n"}


def _run_adim_loc(cfg, seed):
    ps = _load_pointset(cfg, "adim-loc")
    scales = [float(t) for t in _need(cfg, "scales", "adim-loc")]
    window = tuple(int(v) for v in _need(cfg, "window", "adim-loc"))
    e, curves = est.adim_via_localization(
        ps, int(cfg.get("centers", 16)), scales, window,
        quantile=cfg.get("quantile", "max"))
    return 0, _estimate_dict(e), {}


def _run_projdim(cfg, seed):
    ps = _load_pointset(cfg, "projdim")
    k = int(_need(cfg, "level", "projdim"))
    cover = _covers_at(ps, [k])[0]
    value, witness = est.proj_dim(cover, float(cfg.get("theta", 1.0)),
                                  int(_need(cfg, "j", "projdim")))
    return 0, {"value": value, "witness": list(witness)}, {}


def _run_tdim0(cfg, seed):
    ps = _load_pointset(cfg, "tdim0")
    covers = _covers_at(ps, _levels(cfg, "tdim0"))
    ok, diams = est.tdim_zero_test(covers, float(cfg.get("shrink_factor", 0.5)))
    result = {"tdim_zero": ok, "max_diameters": diams}
    if not ok:
        result["note"] = "not shrinking at tested levels"
    return (0 if ok else 2), result, {}


def _run_classify(cfg, seed):
    ps = _load_pointset(cfg, "classify")
    covers = _covers_at(ps, _levels(cfg, "classify"))
    verdict = est.classify_interior(covers, float(cfg.get("theta", 1.0)),
                                    int(_need(cfg, "j", "classify")))
    return (2 if verdict == "inconclusive" else 0), {"verdict": verdict}, {}


def _run_sparse_profile(cfg, seed):
    ps = _load_pointset(cfg, "sparse-profile")
    covers = _covers_at(ps, _levels(cfg, "sparse-profile"))
    prof = sp.sparseness_profile(covers, int(_need(cfg, "s", "sparse-profile")))
    rows = ["k,s,eps"] + [f"{k},{s},{e!r}" for k, s, e in prof.entries]
    return 0, {"entries": [[k, s, e] for k, s, e in prof.entries]}, \
        {"csv": "\n".join(rows) + "\n"}


def _run_thmb(cfg, seed):
    ps = _load_pointset(cfg, "thmb-classify")
    k = int(_need(cfg, "level", "thmb-classify"))
    cover = _covers_at(ps, [k])[0]
    split = sp.theoremB_classify(cover, int(_need(cfg, "j", "thmb-classify")),
                                 run_threshold=cfg.get("run_threshold"))
    result = {
        "level": split.level,
        "sizes": [len(c) for c in split.classes],
        "designated_drop": list(split.designated_drop),
        "designated_delta": list(split.designated_delta),
        "least_delta": list(split.least_delta),
        "least_drop": list(split.least_drop),
        "eps": [None if d == 0 else split.eps(i)
                for i, d in enumerate(split.least_delta)],
    }
    return 0, result, {}


def _run_uniform_partition(cfg, seed):
    ps = _load_pointset(cfg, "uniform-partition")
    k = int(_need(cfg, "level", "uniform-partition"))
    cover = _covers_at(ps, [k])[0]
    fam = fibers(cover, cover.n - 1)
    parts = sp.uniform_partition_search(
        fam, int(_need(cfg, "j_max", "uniform-partition")),
        run_threshold=int(cfg.get("run_threshold", 4)),
        max_parts=int(cfg.get("max_parts", 8)))
    if parts is None:
        return 2, {"found": False}, {}
    return 0, {"found": True,
               "parts": [[lv, ix] for lv, ix in parts]}, {}


def _run_amplify(cfg, seed):
    ps = _load_pointset(cfg, "amplify")
    trace = amp.amplify(
        ps,
        eps=float(_need(cfg, "eps", "amplify")),
        max_iters=int(cfg.get("max_iters", 8)),
        tuple_cap=int(cfg.get("tuple_cap", amp.QUOTIENT_PAIR_CAP)),
        pair_cap=int(cfg.get("pair_cap", amp.SQUARE_PAIR_CAP)),
        angular_resolution=float(cfg.get("angular_resolution", 1e-9)),
        seed=seed,
    )
    iters = []
    for rec in trace.iterations:
        cone = None
        if rec.cone is not None:
            cone = {
                "axis_angle": rec.cone.axis_angle,
                "half_width": rec.cone.half_width,
                "lower_constant_euclid": rec.cone.lower_constant_euclid,
                "lower_constant_sup": rec.cone.lower_constant_sup,
            }
        iters.append({
            "size": rec.size,
            "net_exponent": rec.net_exponent,
            "net_spread": rec.net_spread,
            "cone": cone,
            "dense": rec.dense,
        })
    result = {
        "flag": trace.flag,
        "final_map_arity": trace.final_map_arity,
        "iterations": iters,
    }
    return (0 if trace.flag == "dense" else 2), result, {}


def _run_validate_cert(cfg, seed):
    cert = sp.SparseCertificate.from_json(
        Path(_need(cfg, "certificate", "validate-cert")).read_text())
    cover = DyadicCover.from_json(
        Path(_need(cfg, "cover", "validate-cert")).read_text())
    try:
        sp.validate_certificate(cover, cert)
    except sp.CertificateError as exc:
        return 1, {"valid": False, "violation": str(exc)}, {}
    return 0, {"valid": True, "s": cert.s, "delta": list(cert.delta)}, {}


_RUNNERS = {
    "generate": _run_generate,
    "boxcount": _run_boxcount,
    "udim": _run_udim,
    "adim": _run_adim,
    "adim-loc": _run_adim_loc,
    "projdim": _run_projdim,
    "tdim0": _run_tdim0,
    "classify": _run_classify,
    "sparse-profile": _run_sparse_profile,
    "thmb-classify": _run_thmb,
    "uniform-partition": _run_uniform_partition,
    "amplify": _run_amplify,
    "validate-cert": _run_validate_cert,
}


def run(command: str, cfg: dict, seed: int, out_prefix: str) -> int:
    """Execute one subcommand and write its report files."""
    resolved = dict(cfg)
    resolved["seed"] = seed
    resolved["out"] = out_prefix
    resolved["command"] = command
    code, result, extras = _RUNNERS[command](cfg, seed)
    report = {
        "schema": SCHEMA_VERSION,
        "command": command,
        "config": resolved,
        "result": result,
        "exit_code": code,
        "outputs": {"report": out_prefix + ".json"},
    }
    if "csv" in extras:
        report["outputs"]["table"] = out_prefix + ".csv"
    report["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    out_path = Path(out_prefix + ".json")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    if "csv" in extras:
        Path(out_prefix + ".csv").write_text(extras["csv"])
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="metricdim",
        description="dimension estimators on dyadic approximations")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--seed", type=int, default=None, help="64-bit seed")
        p.add_argument("--out", default=None, help="output path prefix")
    args = parser.parse_args(argv)
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    out_prefix = args.out if args.out is not None else cfg.get("out", "metricdim-run")
    try:
        return run(args.command, cfg, seed, out_prefix)
    except (ConfigError, ValueError, KeyError, BudgetExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
