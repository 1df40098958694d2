"""Command-line front end: deterministic runs driven by one TOML config.

Every subcommand reads the same config file, runs one module, and writes a
JSON result envelope (plus a CSV where the output is tabular) into the
output directory.  Worker pools only ever parallelize independent pure
tasks and results are written in input order, so payload bytes do not
depend on the worker count.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import pickle
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import levelset, maps, ric, rotation, solver, threshold
from .config import RunConfig, load_config
from .covering import PlanePoint
from .errors import ConfigError, NumericalError, ParameterError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_NOT_FOUND = 4

# family name -> the parameter swept by the kcr onset bisection
_ACTIVATED_PARAM = {
    "standard": "k",
    "standard_shifted": "k",
    "saddle_center": "alpha",
    "circle_diffeo": "eps",
}


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------

def _pool_map(fn, items, workers: int) -> list:
    """Order-preserving map over pure tasks, threaded when workers > 1."""
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _fmt_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.16e" % float(value)


def _write_csv(path: str, header, rows) -> None:
    """Full-precision CSV; no timestamps, so reruns are byte-comparable."""
    lines = [",".join(header)]
    lines.extend(",".join(_fmt_cell(v) for v in row) for row in rows)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_envelope(cfg: RunConfig, stem: str, payload: dict,
                    wall_time: float) -> str:
    envelope = {
        "artifact_version": __version__,
        "command": cfg.command,
        "config": cfg.echo(),
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "wall_time": wall_time,
        "payload": payload,
    }
    path = os.path.join(cfg.out, stem + ".json")
    with open(path, "w") as fh:
        json.dump(envelope, fh, indent=2)
        fh.write("\n")
    return path


def _build_family(cfg: RunConfig) -> maps.TwistFamily:
    return maps.family_from_config(cfg.family_name, cfg.family_params)


def _record_json(rec: solver.OrbitRecord) -> dict:
    return {
        "kind": rec.kind,
        "s": rec.s,
        "k": rec.k,
        "n": rec.n,
        "rho_v": "%d/%d" % (rec.rho_v.numerator, rec.rho_v.denominator),
        "residual": rec.residual,
        "refined": rec.refined,
        "minimal": rec.minimal,
        "degenerate": rec.degenerate,
        "anchor": [rec.anchor.phi, rec.anchor.i],
        "points": [[p.phi, p.i] for p in rec.points],
    }


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_map_check(cfg: RunConfig) -> int:
    family = _build_family(cfg)
    t0 = time.perf_counter()
    report = maps.check_structure(family, n_grid=cfg.options["n_grid"])
    flux = maps.check_exactness(family, n_quad=cfg.options["n_quad"])
    wall = time.perf_counter() - t0

    print("family            %s" % family.key)
    print("min twist         %.6g" % report.min_twist)
    print("max |dphi'/dphi|  %.6g" % report.max_dphi)
    print("drop bound        %.6g" % report.drop_bound)
    if report.deviation_angle is None:
        print("deviation angle   (cone condition failed on the grid)")
    else:
        print("deviation angle   %.6g" % report.deviation_angle)
    print("periodicity res.  %.3e" % report.periodicity_residual)
    print("inverse res.      %.3e" % report.inverse_residual)
    print("exactness flux    %.3e%s" % (flux, "" if family.exact
                                        else "  (declared non-exact)"))
    print("structure ok      %s" % report.ok())

    payload = dict(asdict(report), exactness_flux=flux,
                   structure_ok=report.ok(), family=family.key)
    _write_envelope(cfg, "map_check", payload, wall)
    return EXIT_OK


def cmd_rotation(cfg: RunConfig) -> int:
    family = _build_family(cfg)
    opts = cfg.options
    seeds = opts["seeds"]

    def one(seed):
        phi, i = seed
        return rotation.estimate_rotation(family, PlanePoint(phi, i),
                                          horizon=opts["horizon"],
                                          window=opts["window"])

    t0 = time.perf_counter()
    estimates = _pool_map(one, seeds, cfg.workers)
    wall = time.perf_counter() - t0

    rows = [(phi, i, est.case_tag, est.horizontal, est.vertical,
             est.horizon, est.tail_spread, est.i_range)
            for (phi, i), est in zip(seeds, estimates)]
    csv_path = os.path.join(cfg.out, "rotation.csv")
    _write_csv(csv_path, ("seed_phi", "seed_i", "case", "horizontal",
                          "vertical", "horizon", "tail_spread", "i_range"),
               rows)

    cases = sorted({est.case_tag for est in estimates})
    payload = {
        "n_seeds": len(seeds),
        "cases_seen": cases,
        "n_undetermined": sum(est.case_tag == rotation.UNDETERMINED
                              for est in estimates),
        "csv": os.path.basename(csv_path),
    }
    _write_envelope(cfg, "rotation", payload, wall)
    print("rotation: %d seeds -> %s (cases: %s)"
          % (len(seeds), csv_path, ", ".join(cases)))
    return EXIT_OK


def _component_cached(cfg: RunConfig, family) -> tuple:
    """Level-set component via the on-disk cache; returns (component, hit)."""
    opts = cfg.options
    key = (family.key, opts["p"], opts["q"], opts["n_phi"], opts["n_scan"],
           "%.17g" % opts["root_tol"])
    digest = hashlib.sha256(repr(key).encode()).hexdigest()[:24]
    cache_dir = os.path.join(cfg.out, "cache")
    os.makedirs(cache_dir, exist_ok=True)
    cache_path = os.path.join(cache_dir, digest + ".bin")
    if os.path.exists(cache_path):
        with open(cache_path, "rb") as fh:
            return pickle.load(fh), True
    component = levelset.compute_levelset(
        family, opts["p"], opts["q"], n_phi=opts["n_phi"],
        n_scan=opts["n_scan"], root_tol=opts["root_tol"])
    with open(cache_path, "wb") as fh:
        pickle.dump(component, fh)
    return component, False


def cmd_levelset(cfg: RunConfig) -> int:
    family = _build_family(cfg)
    t0 = time.perf_counter()
    component, cache_hit = _component_cached(cfg, family)
    residual = levelset.verify_exchange(component, family)
    wall = time.perf_counter() - t0

    csv_path = os.path.join(cfg.out, "levelset.csv")
    rows = zip(component.phis, component.mu_minus, component.mu_plus,
               component.nu_minus, component.nu_plus)
    _write_csv(csv_path, ("phi", "mu_minus", "mu_plus", "nu_minus", "nu_plus"),
               rows)

    payload = {
        "p": component.p,
        "q": component.q,
        "n_phi": int(component.phis.size),
        "bracket": list(component.bracket),
        "root_tol": component.root_tol,
        "cardinality_jumps": len(component.cardinality_jumps),
        "exchange_residual": residual,
        "cache_hit": cache_hit,
        "csv": os.path.basename(csv_path),
    }
    _write_envelope(cfg, "levelset", payload, wall)
    print("levelset C(%d,%d): %d angles, exchange residual %.3e -> %s"
          % (component.p, component.q, component.phis.size, residual, csv_path))
    return EXIT_OK


def cmd_orbit(cfg: RunConfig, mode: str) -> int:
    family = _build_family(cfg)
    opts = cfg.options
    t0 = time.perf_counter()
    if mode == "birkhoff":
        if opts["s"] is None:
            raise ConfigError("[orbit]: birkhoff mode needs key 's'")
        records = solver.find_birkhoff(family, opts["s"], opts["n"],
                                       n_phi=opts["n_phi"])
    else:
        if opts["k"] is None or opts["k"] == 0:
            raise ConfigError("[orbit]: vertical mode needs a nonzero key 'k'")
        records = solver.find_vertical(family, opts["k"], opts["n"],
                                       s_range=opts["s_values"],
                                       n_phi=opts["n_phi"])
    wall = time.perf_counter() - t0

    payload = {"mode": mode, "n_orbits": len(records),
               "records": [_record_json(r) for r in records]}
    _write_envelope(cfg, "orbit_" + mode, payload, wall)
    for rec in records:
        print("%s (s=%d, k=%d, n=%d): anchor phi=%.12f I=%.12f residual %.3e"
              % (rec.kind, rec.s, rec.k, rec.n, rec.anchor.phi, rec.anchor.i,
                 rec.residual))
    if not records:
        print("no %s orbit found for n=%d" % (mode, opts["n"]),
              file=sys.stderr)
        return EXIT_NOT_FOUND
    return EXIT_OK


def cmd_ric(cfg: RunConfig) -> int:
    family = _build_family(cfg)
    opts = cfg.options
    budget = ric.RicBudget(rng_seed=cfg.rng_seed, n_max=opts["n_max"],
                           horizon=opts["horizon"], n_seeds=opts["n_seeds"],
                           s=opts["s"], l=opts["l"], n_phi=opts["n_phi"])
    t0 = time.perf_counter()
    verdict = ric.ric_witness(family, budget)
    wall = time.perf_counter() - t0

    if isinstance(verdict.witness, solver.OrbitRecord):
        witness = _record_json(verdict.witness)
    elif verdict.witness is not None:
        witness = dict(asdict(verdict.witness),
                       p_seed=[verdict.witness.p_seed.phi,
                               verdict.witness.p_seed.i],
                       q_seed=[verdict.witness.q_seed.phi,
                               verdict.witness.q_seed.i])
    else:
        witness = None
    payload = {
        "verdict": verdict.verdict,
        "witness_kind": verdict.witness_kind,
        "witness": witness,
        "effort": verdict.effort,
        "exactness_flux": verdict.exactness_flux,
    }
    _write_envelope(cfg, "ric", payload, wall)
    print("ric verdict: %s%s" % (verdict.verdict,
                                 "" if verdict.witness_kind is None
                                 else " (witness: %s)" % verdict.witness_kind))
    return EXIT_OK


def cmd_kcr(cfg: RunConfig) -> int:
    opts = cfg.options
    if cfg.family_name not in _ACTIVATED_PARAM:
        raise ConfigError("kcr knows no activation parameter for family %r "
                          "(choose from %s)"
                          % (cfg.family_name, sorted(_ACTIVATED_PARAM)))
    activated = _ACTIVATED_PARAM[cfg.family_name]
    fixed = dict(cfg.family_params)
    fixed.pop(activated, None)

    def family_at(lam):
        return maps.family_from_config(cfg.family_name,
                                       dict(fixed, **{activated: lam}))

    family_at(opts["lo"])  # validate the fixed parameters before bisecting

    t0 = time.perf_counter()
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            estimate = threshold.estimate_critical(
                family_at, opts["n_max"], opts["lo"], opts["hi"],
                tol=opts["tol"], n_phi=opts["n_phi"], map_fn=pool.map)
    else:
        estimate = threshold.estimate_critical(
            family_at, opts["n_max"], opts["lo"], opts["hi"],
            tol=opts["tol"], n_phi=opts["n_phi"])
    wall = time.perf_counter() - t0

    csv_path = os.path.join(cfg.out, "kcr.csv")
    rows = [(r.n, r.lambda_n, r.bracket_width, r.evaluations)
            for r in estimate.records]
    _write_csv(csv_path, ("n", "lambda_n", "bracket_width", "evaluations"),
               rows)

    payload = {
        "activated_param": activated,
        "kcr_estimate": estimate.kcr_estimate,
        "extrapolation_method": estimate.extrapolation_method,
        "monotonicity_ok": estimate.monotonicity_ok,
        "failed": list(estimate.failed),
        "csv": os.path.basename(csv_path),
    }
    _write_envelope(cfg, "kcr", payload, wall)
    for rec in estimate.records:
        print("n=%d  lambda_n=%.9f  (bracket %.2e, %d evaluations)"
              % (rec.n, rec.lambda_n, rec.bracket_width, rec.evaluations))
    print("kcr estimate %.9f (%s)%s"
          % (estimate.kcr_estimate, estimate.extrapolation_method,
             "" if not estimate.failed
             else "  [failed n: %s]" % list(estimate.failed)))
    return EXIT_OK


def cmd_scan(cfg: RunConfig) -> int:
    if cfg.family_name != "saddle_center":
        raise ConfigError("scan sweeps the (gamma, alpha) plane of the "
                          "saddle_center family; got family %r"
                          % cfg.family_name)
    opts = cfg.options
    cells = [(gi, gamma, ai, alpha)
             for gi, gamma in enumerate(opts["gammas"])
             for ai, alpha in enumerate(opts["alphas"])]

    def one(cell):
        gi, gamma, ai, alpha = cell
        family = maps.builtin_saddle_center(alpha=alpha, gamma=gamma)
        # Per-cell stream keyed by grid position: cell results are stable
        # under grid reshaping and worker-count changes alike.
        rng = np.random.default_rng([cfg.rng_seed, gi, ai])
        best = -math.inf
        for _ in range(opts["n_seeds"]):
            seed = PlanePoint(rng.random(), rng.random())
            est = rotation.estimate_rotation(family, seed,
                                             horizon=opts["horizon"],
                                             window=opts["window"])
            best = max(best, est.vertical)
        return best

    t0 = time.perf_counter()
    maxima = _pool_map(one, cells, cfg.workers)
    wall = time.perf_counter() - t0

    csv_path = os.path.join(cfg.out, "scan.csv")
    rows = [(gamma, alpha, best)
            for (gi, gamma, ai, alpha), best in zip(cells, maxima)]
    _write_csv(csv_path, ("gamma", "alpha", "rho_v_max"), rows)

    payload = {
        "n_cells": len(cells),
        "n_seeds_per_cell": opts["n_seeds"],
        "rho_v_max_overall": max(maxima),
        "csv": os.path.basename(csv_path),
    }
    _write_envelope(cfg, "scan", payload, wall)
    print("scan: %d cells -> %s (overall rho_v max %.6f)"
          % (len(cells), csv_path, max(maxima)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing / entry point
# ---------------------------------------------------------------------------

def _parse_args(argv):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="TOML run configuration (required)")
    common.add_argument("--out", metavar="DIR",
                        help="output directory (overrides [run] out)")
    common.add_argument("--workers", metavar="N", type=int,
                        help="worker count (overrides [run] workers)")
    common.add_argument("--seed", metavar="U64", type=int,
                        help="rng seed (overrides [run] rng_seed)")

    parser = argparse.ArgumentParser(
        prog="torustwist", parents=[common],
        description="Twist maps of the torus: structure checks, rotation "
                    "numbers, level sets, periodic orbits, thresholds.")
    sub = parser.add_subparsers(dest="command", required=True)
    # Repeating the common flags on each subparser (with SUPPRESS defaults
    # so they never mask the top-level values) lets them appear on either
    # side of the subcommand.
    sub_common = argparse.ArgumentParser(add_help=False,
                                         argument_default=argparse.SUPPRESS)
    for action in common._actions:
        sub_common.add_argument(*action.option_strings, metavar=action.metavar,
                                type=action.type, help=action.help)

    sub.add_parser("map-check", parents=[sub_common],
                   help="structure + exactness report for the family")
    sub.add_parser("rotation", parents=[sub_common],
                   help="rotation estimates over a seed grid (CSV)")
    sub.add_parser("levelset", parents=[sub_common],
                   help="extract a level-set component C(p,q) (CSV)")
    orbit = sub.add_parser("orbit", parents=[sub_common],
                           help="periodic orbit search")
    orbit.add_argument("mode", choices=("birkhoff", "vertical"))
    sub.add_parser("ric", parents=[sub_common],
                   help="invariant-circle nonexistence witness search")
    sub.add_parser("kcr", parents=[sub_common],
                   help="onset thresholds and critical-parameter estimate")
    sub.add_parser("scan", parents=[sub_common],
                   help="max vertical rotation number over a (gamma, alpha) grid")

    args = parser.parse_args(argv)
    if args.config is None:
        parser.error("--config is required")
    return args


def main(argv=None) -> int:
    args = _parse_args(argv)
    try:
        cfg = load_config(args.config, args.command, out=args.out,
                          workers=args.workers, rng_seed=args.seed)
        os.makedirs(cfg.out, exist_ok=True)
        if args.command == "map-check":
            return cmd_map_check(cfg)
        if args.command == "rotation":
            return cmd_rotation(cfg)
        if args.command == "levelset":
            return cmd_levelset(cfg)
        if args.command == "orbit":
            return cmd_orbit(cfg, args.mode)
        if args.command == "ric":
            return cmd_ric(cfg)
        if args.command == "kcr":
            return cmd_kcr(cfg)
        return cmd_scan(cfg)
    except (ConfigError, ParameterError) as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print("numerical failure: %s" % exc, file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
