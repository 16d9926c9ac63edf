"""Command-line experiment runner.

Exit codes: 0 all checks passed, 1 a property check failed, 2 usage or
configuration error. Options may also come from a JSON file given with
``--config``; keys are the long option names with underscores, and flags
given on the command line win.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from holonet import _rng
from holonet.flat_sets import BOX, CROSS, FlatnessProfile, FlatSetDescriptor, estimate_height, write_heights_csv
from holonet.gauge import NormFamilyParams
from holonet.nearest_point import (SegmentK, divergence_experiment, divergence_verdict, euclidean_contrast,
                                   write_divergence_csv, write_verdict_json)
from holonet.nets import build_net, write_net_csv
from holonet.retraction import (empirical_modulus, holder_fit, implementation_constant, write_modulus_csv,
                                write_summary_json)
from holonet.whitney import partition_at, write_partition_trace

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


def _merge(args, defaults: dict) -> dict:
    """Flags (non-None) over config-file values over defaults."""
    cfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
    out = dict(defaults)
    for key in set(defaults) | set(vars(args)):
        if key in cfg:
            out[key] = cfg[key]
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = flag
    return out


def _require_seed(opts):
    if opts.get("seed") is None:
        raise ConfigError("--seed is required for sampled experiments")
    return int(opts["seed"])


def _out_dir(opts) -> str:
    path = opts.get("out_dir") or "."
    os.makedirs(path, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise ConfigError(f"output directory {path} is not writable")
    return path


def _shapes(name):
    if name == "both":
        return [BOX, CROSS]
    if name not in (BOX, CROSS):
        raise ConfigError(f"shape must be box, cross or both, got {name!r}")
    return [name]


def _descriptor(shape, opts) -> FlatSetDescriptor:
    alpha = opts.get("alpha")
    if alpha is None:
        raise ConfigError("--alpha is required")
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
    dim = int(opts["dim"])
    if dim < 1:
        raise ConfigError("--dim must be positive")
    return FlatSetDescriptor.from_profile(shape, FlatnessProfile.holder(alpha), dim)


def _emit(obj):
    print(json.dumps(obj, sort_keys=True))


def run_retract_modulus(opts) -> int:
    seed = _require_seed(opts)
    shapes = _shapes(opts["shape"])
    Ks = [_descriptor(s, opts) for s in shapes]
    t_min, t_max, points = float(opts["t_min"]), float(opts["t_max"]), int(opts["t_points"])
    if not 0 < t_min < t_max or points < 5:
        raise ConfigError("need 0 < t_min < t_max and at least 5 t points")
    pairs = int(opts["pairs"])
    if pairs < 100:
        raise ConfigError("--pairs must be >= 100")
    out = _out_dir(opts)
    t_grid = np.geomspace(t_min, t_max, points)
    from holonet.verify import check_partition, check_retraction

    failures, summary = [], []
    for K in Ks:
        table = empirical_modulus(K, t_grid, pairs, seed)
        fit = holder_fit(table, t_min, t_max)
        c_impl = implementation_constant(table, K.profile)
        write_modulus_csv(os.path.join(out, f"modulus_{K.shape}.csv"), table)
        ok = fit.exponent >= K.profile.alpha - 0.05 and math.isfinite(c_impl)
        write_summary_json(os.path.join(out, f"holder_{K.shape}.json"), K, fit, c_impl, seed,
                           {"shape": K.shape, "r_squared": fit.r_squared, "pass": ok})
        summary.append({"shape": K.shape, "fitted_exponent": fit.exponent, "C_impl": c_impl, "pass": ok})
        if not ok:
            failures.append({"check_name": f"holder_{K.shape}", "bound": K.profile.alpha - 0.05,
                             "measured": fit.exponent})
    suites = check_retraction(seed, int(opts["suite_samples"]), Ks[0].profile.alpha, Ks[0].ambient_dim)
    suites += check_partition(seed, int(opts["suite_samples"]), Ks[0].profile.alpha, Ks[0].ambient_dim)
    failures += [r.to_record() for r in suites if not r.passed]
    report = {"summary": summary, "suites": [r.to_record() for r in suites], "failures": failures}
    with open(os.path.join(out, "retract_report.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
    _emit(report)
    return EXIT_FAIL if failures else EXIT_OK


def run_npm_demo(opts) -> int:
    seed = _require_seed(opts)
    n_max = int(opts["n_max"])
    if n_max < 2:
        raise ConfigError(f"--n-max must be >= 2 so that the index range (1, n_max] is non-empty, got {n_max}")
    try:
        params = NormFamilyParams.make(float(opts["delta"]), n_max, None,
                                       None if opts.get("mu") is None else float(opts["mu"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    eps = float(opts["eps"])
    if not eps > 0:
        raise ConfigError("--eps must be positive")
    out = _out_dir(opts)
    K = SegmentK(eps * params.delta)
    n_range = range(2, n_max + 1)
    rows = divergence_experiment(params, K, eps, n_range)
    verdict = divergence_verdict(params, eps, rows)
    contrast = euclidean_contrast(params, K, eps, n_range)
    verdict["euclidean_max_output_gap"] = max(c[2] for c in contrast)
    verdict["euclidean_nonexpansive"] = all(c[2] <= c[1] for c in contrast)
    verdict["pass"] = bool(verdict["pass"] and verdict["euclidean_nonexpansive"])
    verdict["seed"] = seed
    verdict["rows"] = len(rows)
    write_divergence_csv(os.path.join(out, "divergence.csv"), params, eps, rows)
    write_verdict_json(os.path.join(out, "divergence_verdict.json"), verdict)
    _emit(verdict)
    return EXIT_OK if verdict["pass"] else EXIT_FAIL


def run_verify_all(opts) -> int:
    from holonet.verify import CHECKS, run_checks

    seed = int(opts["seed"])
    try:
        params = NormFamilyParams.make(float(opts["delta"]), int(opts["n_max"]), None,
                                       None if opts.get("mu") is None else float(opts["mu"]))
    except ValueError as exc:
        _emit({"check_name": "NormFamilyParams", "pass": False, "error": str(exc), "seed": seed})
        return EXIT_CONFIG
    only = opts.get("only") or None
    if only:
        unknown = [n for n in only if n not in CHECKS]
        if unknown:
            raise ConfigError(f"unknown check(s) {unknown}; choose from {sorted(CHECKS)}")
    results = [r.to_record() for r in run_checks(params, seed, only)]
    report = {"checks": results, "pass": all(r["pass"] for r in results)}
    if opts.get("out"):
        with open(opts["out"], "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
    _emit(report)
    return EXIT_OK if report["pass"] else EXIT_FAIL


def run_heights(opts) -> int:
    seed = _require_seed(opts)
    out = _out_dir(opts)
    ok = True
    for shape in _shapes(opts["shape"]):
        K = _descriptor(shape, opts)
        est = [estimate_height(K, n, int(opts["budget"]), seed) for n in range(K.ambient_dim + 1)]
        write_heights_csv(os.path.join(out, f"heights_{shape}.csv"), K, est)
        ok &= all(h.lower_bound <= K.profile.r(h.n) for h in est)
    _emit({"check_name": "heights", "pass": ok, "seed": seed})
    return EXIT_OK if ok else EXIT_FAIL


def run_nets_dump(opts) -> int:
    out = _out_dir(opts)
    for shape in _shapes(opts["shape"]):
        K = _descriptor(shape, opts)
        nets = [build_net(K, k) for k in range(int(opts["levels"]) + 1)]
        write_net_csv(os.path.join(out, f"nets_{shape}.csv"), nets)
    return EXIT_OK


def run_partition_trace(opts) -> int:
    seed = _require_seed(opts)
    out = _out_dir(opts)
    from holonet.verify import off_set_samples

    for shape in _shapes(opts["shape"]):
        K = _descriptor(shape, opts)
        X, d = off_set_samples(K, int(opts["queries"]), _rng.stream(seed, "trace", shape))
        evals = [partition_at(K, x, dx) for x, dx in zip(X, d)]
        write_partition_trace(os.path.join(out, f"partition_{shape}.csv"), evals)
    return EXIT_OK


def _set_options(p, shape_default="both"):
    p.add_argument("--shape", help=f"box, cross or both (default {shape_default})")
    p.add_argument("--alpha", type=float, help="Hölder exponent of the flatness profile, in (0, 1)")
    p.add_argument("--dim", type=int, help="ambient dimension (default 6)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holonet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    retract = sub.add_parser("retract", help="retraction experiments").add_subparsers(dest="action", required=True)
    mod = retract.add_parser("modulus", help="empirical modulus of continuity and Hölder fit")
    _set_options(mod)
    mod.add_argument("--seed", type=int)
    mod.add_argument("--pairs", type=int, help="sampled pairs per t (default 2000)")
    mod.add_argument("--t-min", dest="t_min", type=float)
    mod.add_argument("--t-max", dest="t_max", type=float)
    mod.add_argument("--t-points", dest="t_points", type=int)
    mod.add_argument("--suite-samples", dest="suite_samples", type=int,
                     help="samples for the retraction and partition invariant suites (default 1000)")
    mod.add_argument("--out-dir", dest="out_dir")
    mod.add_argument("--config")
    mod.set_defaults(handler=run_retract_modulus, defaults=dict(
        shape="both", dim=6, pairs=2000, t_min=1e-4, t_max=1e-1, t_points=8, suite_samples=1000, out_dir="."))

    npm = sub.add_parser("npm", help="nearest point map experiments").add_subparsers(dest="action", required=True)
    demo = npm.add_parser("demo", help="divergence of the nearest point map onto a segment")
    demo.add_argument("--delta", type=float)
    demo.add_argument("--n-max", dest="n_max", type=int)
    demo.add_argument("--mu", type=float, help="default: the largest admissible value")
    demo.add_argument("--eps", type=float)
    demo.add_argument("--seed", type=int)
    demo.add_argument("--out-dir", dest="out_dir")
    demo.add_argument("--config")
    demo.set_defaults(handler=run_npm_demo, defaults=dict(delta=1.0 / 48.0, n_max=12, eps=1.0, out_dir="."))

    ver = sub.add_parser("verify", help="run the named property checks")
    ver.add_argument("--only", action="append", help="run only this check (repeatable)")
    ver.add_argument("--seed", type=int)
    ver.add_argument("--delta", type=float)
    ver.add_argument("--mu", type=float)
    ver.add_argument("--n-max", dest="n_max", type=int)
    ver.add_argument("--out", help="also write the JSON report here")
    ver.add_argument("--config")
    ver.set_defaults(handler=run_verify_all, defaults=dict(seed=0, delta=1.0 / 48.0, n_max=12))

    hts = sub.add_parser("heights", help="sampled lower bounds on the heights h_n")
    _set_options(hts)
    hts.add_argument("--seed", type=int)
    hts.add_argument("--budget", type=int)
    hts.add_argument("--out-dir", dest="out_dir")
    hts.add_argument("--config")
    hts.set_defaults(handler=run_heights, defaults=dict(shape="both", dim=6, budget=10000, out_dir="."))

    nets = sub.add_parser("nets", help="net levels").add_subparsers(dest="action", required=True)
    dump = nets.add_parser("dump", help="write net points of levels 0..L as CSV")
    _set_options(dump)
    dump.add_argument("--levels", type=int)
    dump.add_argument("--out-dir", dest="out_dir")
    dump.add_argument("--config")
    dump.set_defaults(handler=run_nets_dump, defaults=dict(shape="both", dim=6, levels=6, out_dir="."))

    part = sub.add_parser("partition", help="partition of unity").add_subparsers(dest="action", required=True)
    trace = part.add_parser("trace", help="write cells and weights at sampled queries")
    _set_options(trace)
    trace.add_argument("--seed", type=int)
    trace.add_argument("--queries", type=int)
    trace.add_argument("--out-dir", dest="out_dir")
    trace.add_argument("--config")
    trace.set_defaults(handler=run_partition_trace, defaults=dict(shape="both", dim=6, queries=100, out_dir="."))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = _merge(args, args.defaults)
        return args.handler(opts)
    except ConfigError as exc:
        print(f"holonet: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
