"""Command line: run, validate and report experiments.

Exit codes: 0 ok, 2 configuration error, 3 numeric failure, 4 verdict violated.
"""
import argparse
import json
import logging
import os
import sys

import numpy as np

from .checkpoint import save_checkpoint
from .config import load_config
from .errors import ConfigError, MaxvelError
from .experiments import run_dyadic_assembly, run_maxvel, run_propagation_estimate
from .grid import make_grid
from .inequalities import VIOLATED, inequality_suite
from .operators import make_hamiltonian
from .propagator import group_speed, norm_drift
from .reporting import ANCHORS, jsonable, summarize_dir, write_csv, write_json
from .states import gaussian_packet

OK, CONFIG_ERROR, NUMERIC_ERROR, VERDICT_VIOLATED = 0, 2, 3, 4
OUTPUT_ROOT_ENV = "MAXVEL_OUTPUT_ROOT"

log = logging.getLogger("maxvel")


def output_dir(cfg):
    root = os.environ.get(OUTPUT_ROOT_ENV)
    return os.path.join(root, cfg.output) if root else cfg.output


def build_hamiltonian(cfg, free=False):
    g = make_grid(cfg.grid.dim, cfg.grid.n, cfg.grid.L, radial=cfg.grid.radial)
    return make_hamiltonian(g, None if free else cfg.potential)


def _series_record(kind, series, extra=None):
    rec = {"anchor": ANCHORS[kind], "partial": series.partial, "notes": list(series.notes),
           "summary": series.summary}
    rec.update(extra or {})
    return rec


def _exp_maxvel(cfg, out, free=False):
    kind = "baselines" if free else "maxvel"
    H = build_hamiltonian(cfg, free=free)
    s = run_maxvel(cfg.run, H, a_values=list(cfg.maxvel.a_values), shells=bool(cfg.maxvel.shell_times),
                   shell_times=list(cfg.maxvel.shell_times) or None)
    write_csv(os.path.join(out, f"{kind}.csv"), kind, s)
    if cfg.checkpoint and s.final is not None:
        save_checkpoint(s.final, float(s.times[-1]) if s.times.size else 0.0,
                        os.path.join(out, f"{kind}_final.phmv"))
    rec = _series_record("tail_norm", s)
    ok = bool(s.summary.get("trend_ok")) and not s.partial
    return [rec], ok, s.partial


def _exp_baselines(cfg, out):
    records, ok, partial = _exp_maxvel(cfg, out, free=True)
    line = make_grid(1, 2048, 256.0)
    Hl = make_hamiltonian(line, None)
    speed, _, _ = group_speed(Hl, gaussian_packet(line, -60.0, 2.0, 3.0), 100.0)
    H = build_hamiltonian(cfg)
    f0 = gaussian_packet(H.grid, 0.0, 0.3, 3.0)
    drift = norm_drift(H, f0, 0.4 / max(abs(b) for b in H.spectral_bounds), 10000)
    records.append({"anchor": "free-group-speed", "speed": speed, "ok": abs(speed - 1) <= 0.01})
    records.append({"anchor": "norm-conservation", "steps": 10000, "drift": drift, "ok": drift < 1e-10})
    ok = ok and abs(speed - 1) <= 0.01 and drift < 1e-10
    return records, ok, partial


def _exp_estimate(cfg, out):
    H = build_hamiltonian(cfg)
    est = cfg.estimate
    records, ok, partial = [], True, False
    for n in est.shells:
        for R in est.R_values:
            log.info("propagation estimate n=%d R=%g", n, R)
            s = run_propagation_estimate(cfg.run, H, n, est.variant, R=R, burn_in=est.burn_in)
            write_csv(os.path.join(out, f"prop_n{n}_R{R:g}.csv"), "prop-estimate", s)
            records.append(_series_record("increments", s, {"n": n, "R": R}))
            ok = ok and bool(s.summary["shrinking"]) and np.isfinite(s.summary["ratio"])
            partial = partial or s.partial
    ratios = [r["summary"]["ratio"] for r in records]
    if ratios:
        records.append({"anchor": ANCHORS["prop-estimate"], "ratio_spread": max(ratios) / min(ratios)})
    return records, ok, partial


def _exp_dyadic(cfg, out):
    H = build_hamiltonian(cfg)
    s = run_dyadic_assembly(cfg.run, H, times=list(cfg.dyadic.times) or None)
    write_csv(os.path.join(out, "dyadic.csv"), "dyadic", s)
    if cfg.checkpoint and s.final is not None:
        save_checkpoint(s.final, float(s.times[-1]), os.path.join(out, "dyadic_final.phmv"))
    rec = _series_record("dyadic", s)
    rec["Q_anchor"] = ANCHORS["Q"]
    ok = bool(s.summary["closure_ok"]) and bool(s.summary["Q_halving"])
    return [rec], ok, s.partial


def _exp_suite(cfg, out):
    reports = inequality_suite(cfg.potential, cfg.suite, log=lambda m: log.info("suite: %s", m))
    recs = [r.to_dict() for r in reports]
    write_json(os.path.join(out, "inequalities.json"), {"anchor": ANCHORS["inequality-suite"], "reports": recs})
    ok = all(r.verdict != VIOLATED for r in reports)
    return recs, ok, False


EXPERIMENTS = {
    "maxvel": _exp_maxvel,
    "baselines": _exp_baselines,
    "prop-estimate": _exp_estimate,
    "dyadic": _exp_dyadic,
    "inequality-suite": _exp_suite,
}


def execute(cfg):
    """Run the configured experiment; returns the exit status."""
    out = output_dir(cfg)
    os.makedirs(out, exist_ok=True)
    summary = {"experiment": cfg.experiment, "anchor": ANCHORS[cfg.experiment], "config": cfg.to_dict()}
    try:
        records, ok, partial = EXPERIMENTS[cfg.experiment](cfg, out)
    except MaxvelError as exc:
        summary.update({"status": "numeric_failure", "error": f"{cfg.experiment}: {exc}",
                        "error_type": type(exc).__name__, "partial": True})
        write_json(os.path.join(out, "summary.json"), summary)
        log.error("%s failed: %s", cfg.experiment, exc)
        return NUMERIC_ERROR
    summary.update({"status": "ok" if ok else "verdict_violated", "partial": partial, "records": records})
    write_json(os.path.join(out, "summary.json"), summary)
    return OK if ok else VERDICT_VIOLATED


def _cmd_run(args):
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        for p in exc.problems:
            print(f"config error: {p}", file=sys.stderr)
        return CONFIG_ERROR
    if args.output:
        cfg.output = args.output
    return execute(cfg)


def _cmd_validate(args):
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        for p in exc.problems:
            print(f"config error: {p}", file=sys.stderr)
        return CONFIG_ERROR
    print(json.dumps(jsonable(cfg.to_dict()), indent=2, sort_keys=True))
    return OK


def _cmd_report(args):
    if not os.path.isdir(args.dir):
        print(f"no such directory: {args.dir}", file=sys.stderr)
        return CONFIG_ERROR
    items = summarize_dir(args.dir)
    worst = OK
    for it in items:
        rec = it.get("record", {})
        status = rec.get("status") if isinstance(rec, dict) else None
        if status is None:
            continue
        print(f"{it['file']}: {rec.get('experiment', '?')} {status}")
        if status == "numeric_failure":
            worst = max(worst, NUMERIC_ERROR)
        elif status == "verdict_violated":
            worst = max(worst, VERDICT_VIOLATED)
    return worst


def main(argv=None):
    ap = argparse.ArgumentParser(prog="maxvel", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)
    p = sub.add_parser("run", help="run the experiment named in a config file")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="output directory (overrides the config)")
    p.set_defaults(func=_cmd_run)
    p = sub.add_parser("validate", help="parse and validate a config file")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)
    p = sub.add_parser("report", help="summarise the JSON outputs below a directory")
    p.add_argument("dir")
    p.set_defaults(func=_cmd_report)
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
