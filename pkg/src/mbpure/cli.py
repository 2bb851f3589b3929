"""Batch experiment runner: ``mbpure run|verify|patterns``.

``run`` executes one declarative JSON config and writes CSV series plus a
JSON manifest (config hash, version, wall time, seed).  ``verify`` runs the
acceptance battery.  Exit codes: 0 ok, 1 criterion/run failure, 2 config
error.  ``MBPURE_WORKERS`` sets the process-pool size for grid sweeps.
"""

from __future__ import annotations

import argparse
import csv
import functools
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .acceptance import run_criteria
from .graphs import graph_from_name
from .localfit import deviation_curve, fit_closest_local
from .localize import localize_state
from .mbqec import (
    build_resource,
    by_fidelity_rows,
    code_by_name,
    effective_map,
    jamiolkowski_fidelity,
    region_scan,
    table_rows,
)
from .noise import GateNoiseModel
from .symscale import noisy_purify_fixed_point, prep_threshold, scaling_threshold

CONVENTION_HEADER = [
    "# fidelity convention: Uhlmann fidelity F = sum_k sqrt(lambda_k omega_k); "
    "fidelity to pure = sqrt(lambda_0)",
    "# bit order: vertex v <-> bit v-1 (little-endian packed basis indices)",
    "# channel probabilities ordered (I, X, Y, Z); first entry = retention",
]


class ConfigError(ValueError):
    pass


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _write_csv(path, columns, rows, extra_header=()):
    with open(path, "w", newline="") as fh:
        for line in CONVENTION_HEADER:
            fh.write(line + "\n")
        for line in extra_header:
            fh.write("# " + line + "\n")
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _workers() -> int:
    try:
        return max(int(os.environ.get("MBPURE_WORKERS", "1")), 1)
    except ValueError:
        return 1


def _parallel_map(fn, items):
    w = _workers()
    if w <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=w) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def _gate_model(kind: str, p: float) -> GateNoiseModel:
    makers = {"depolarizing": GateNoiseModel.depolarizing,
              "binary": GateNoiseModel.binary,
              "correlated": GateNoiseModel.correlated}
    if kind not in makers:
        raise ConfigError(f"unknown gate model {kind!r}")
    return makers[kind](p)


def _exp_deviation_curve(params, seed):
    g = graph_from_name(params["graph"])
    rows = deviation_curve(g, params["model"], params["grid"],
                           final_step=params.get("final_step", "P1"),
                           restarts=params.get("restarts", 16), seed=seed)
    cols = ("gate_param", "one_minus_F", "rel_dev", "fidelity_to_pure",
            "restarts_converged", "error")
    out = [(r.gate_param, r.one_minus_F, r.rel_dev, r.f,
            r.restarts_converged, r.error or "") for r in rows]
    return cols, out, ["deviation of the purification fixed point from the "
                       "closest per-qubit Pauli noise model"]


def _exp_localize(params, seed):
    rows = []
    for p in params["grid"]:
        s = noisy_purify_fixed_point(params["N"], p).to_diagonal()
        state, rep = localize_state(s)
        classes = tuple([0] + [1] * (params["N"] - 1))
        fit = fit_closest_local(state, symmetry=classes, seed=seed)
        rows.append((params["N"], p, rep.p, rep.Q, rep.fidelity_before,
                     rep.fidelity_after, rep.relative_reduction,
                     fit.one_minus_F))
    cols = ("N", "gate_param", "retention_p", "Q", "fidelity_before",
            "fidelity_after", "relative_reduction", "fit_one_minus_F")
    return cols, rows, ["GHZ noise localization by twirl + separable mixing"]


def _exp_decode_only(params, seed):
    code = code_by_name(params["code"])
    rows = []
    for p in params["grid"]:
        model = _gate_model(params.get("gate_model", "depolarizing"), p)
        for step in params.get("final_steps", ["P1"]):
            res = build_resource(code, "decode", ("epp", model, step))
            m = effective_map("decode-only", code, {"decode": res})
            rows.append((p, step, jamiolkowski_fidelity(m)))
    return (("gate_param", "final_step", "jam_fidelity"), rows,
            ["decode-only Jamiolkowski fidelity with purified resources"])


def _exp_region_scan(params, seed):
    code = code_by_name(params["code"])
    rows = region_scan(code, params["p_grid"], params["q_grid"],
                       gate_kind=params.get("gate_kind", "binary"),
                       channel_kind=params.get("channel_kind", "phaseflip"),
                       scenario=params.get("scenario", "encode+channel+decode"),
                       approaches=tuple(params.get(
                           "approaches", ("epp", "direct", "gate", "unencoded"))))
    return (("gate_param", "channel_param", "approach", "jam_fidelity",
             "beats_unencoded"), rows,
            ["advantage regions over (gate, channel) parameters"])


def _exp_by_fidelity(params, seed):
    rows = by_fidelity_rows(params["p_grid"], params["q_grid"])
    return (("gate_param", "resource_fidelity", "channel_param", "approach",
             "jam_fidelity"), rows,
            ["equal-resource-fidelity comparison: purified vs local vs "
             "global depolarizing resources (cluster-ring code)"])


def _scaling_one(scenario, n):
    return scaling_threshold(scenario, [n])[0]


def _exp_scaling(params, seed):
    scenario = params["scenario"]
    rows = _parallel_map(functools.partial(_scaling_one, scenario),
                         list(params["n_list"]))
    return (("scenario", "N", "threshold"), rows,
            ["gate-parameter threshold for an advantage interval to exist, "
             "per scaling scenario"])


def _exp_prep_threshold(params, seed):
    ns = list(params["n_list"])
    vals = _parallel_map(prep_threshold, ns)
    return (("N", "threshold"), list(zip(ns, vals)),
            ["critical gate parameter for distillability of the noisy "
             "CNOT-chain GHZ preparation"])


def _exp_patterns(params, seed):
    code = code_by_name(params["code"])
    rows = sorted(table_rows(code, class_index=params.get("class_index", 0)))
    return (("outcome_pattern", "correction"), rows,
            [f"no-error Bell-outcome patterns and corrections, {code.name}"])


_EXPERIMENTS = {
    "deviation-curve": _exp_deviation_curve,
    "localize": _exp_localize,
    "decode-only": _exp_decode_only,
    "region-scan": _exp_region_scan,
    "by-fidelity": _exp_by_fidelity,
    "scaling": _exp_scaling,
    "prep-threshold": _exp_prep_threshold,
    "patterns": _exp_patterns,
}


def run_config(path: str) -> int:
    try:
        with open(path) as fh:
            raw = fh.read()
        cfg = json.loads(raw)
        experiment = cfg["experiment"]
        if experiment not in _EXPERIMENTS:
            raise ConfigError(f"unknown experiment {experiment!r}")
        params = cfg.get("params", {})
        output = cfg.get("output", f"{experiment}.csv")
        seed = int(cfg.get("seed", 0))
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": "config", "message": str(exc)}),
              file=sys.stderr)
        return 2

    t0 = time.time()
    try:
        cols, rows, extra = _EXPERIMENTS[experiment](params, seed)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "message": str(exc)}),
              file=sys.stderr)
        return 2
    except Exception as exc:
        print(json.dumps({"error": "run", "message": str(exc)}),
              file=sys.stderr)
        return 1
    _write_csv(output, cols, rows, extra_header=extra)
    manifest = {
        "experiment": experiment,
        "config_sha256": hashlib.sha256(raw.encode()).hexdigest(),
        "version": __version__,
        "seed": seed,
        "wall_time_s": round(time.time() - t0, 3),
        "rows": len(rows),
        "output": output,
    }
    with open(output + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {output} ({len(rows)} rows)")
    return 0


def run_verify(suite: str) -> int:
    results = run_criteria(suite)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed "
          f"({suite} suite)")
    return 1 if failed else 0


def run_patterns(code_name: str, output) -> int:
    cols, rows, extra = _exp_patterns({"code": code_name}, 0)
    if output:
        _write_csv(output, cols, rows, extra_header=extra)
        print(f"wrote {output}")
    else:
        for pattern, corr in rows:
            print(f"{pattern} -> {corr}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mbpure",
        description="measurement-based quantum communication experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a JSON experiment config")
    p_run.add_argument("config")

    p_ver = sub.add_parser("verify", help="run the acceptance battery")
    p_ver.add_argument("--suite", choices=("fast", "full"), default="fast")

    p_pat = sub.add_parser("patterns", help="print a code's pattern table")
    p_pat.add_argument("--code", default="repetition3")
    p_pat.add_argument("--output", default=None)

    args = parser.parse_args(argv)
    if args.command == "run":
        return run_config(args.config)
    if args.command == "verify":
        return run_verify(args.suite)
    return run_patterns(args.code, args.output)


if __name__ == "__main__":
    sys.exit(main())
