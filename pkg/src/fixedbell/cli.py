"""Command-line front end.

Exit status: 0 on success, 1 when a verification fails or a module rejects
its input, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .correlations import JointDistribution, empirical_distribution, sample, variational_distance
from .lhv import exact_min_components, fit, min_rectangle_cover, randomness_curve
from .thm1 import MAX_N, build_thm1, from_vectors, verify_thm1
from .thm2 import build_thm2, verify_thm2, with_truncation

FORMAT_VERSION = 1
OUTPUT_DIR_ENV = "FIXEDBELL_OUTPUT_DIR"
REBUILD_TOL = 1e-12
CURVE_HEADER = ["n", "k", "distance", "pass"]


def _config(command: str, **params) -> dict:
    return {"format_version": FORMAT_VERSION, "command": command, "version": __version__,
            "params": params}


def _out_path(value: str | None, default_name: str) -> Path:
    if value:
        return Path(value)
    return Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / default_name


def _write_json(path: Path, data: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(data, fh)
        fh.write("\n")


def _complex_list(v) -> dict:
    v = np.asarray(v)
    return {"real": v.real.tolist(), "imag": v.imag.tolist()}


def _from_complex(d) -> np.ndarray:
    return np.array(d["real"], dtype=float) + 1j * np.array(d["imag"], dtype=float)


def load_distribution(spec: str) -> JointDistribution:
    """Read ``path`` or ``path#KEY``.

    A file may hold a bare distribution (``{n, format, cells}``), or a bundle
    from ``build-thm1``/``build-thm2`` in which case ``KEY`` selects ``P_r``
    (default) or ``P_u``.
    """
    path, _, key = spec.partition("#")
    with open(path) as fh:
        data = json.load(fh)
    if key:
        if key not in data:
            raise ValueError(f"{path} has no entry {key!r}")
        data = data[key]
    elif "cells" not in data:
        for candidate in ("P_r", "distribution"):
            if candidate in data:
                data = data[candidate]
                break
        else:
            raise ValueError(f"{path} does not contain a distribution")
    return JointDistribution.from_dict(data)


def _dist_file(dist: JointDistribution, config: dict) -> dict:
    d = dist.to_dict()
    d["config"] = config
    return d


# subcommands ---------------------------------------------------------------


def cmd_build_thm1(args) -> int:
    con = build_thm1(args.n, max_n=args.max_n)
    report = verify_thm1(con)
    config = _config("build-thm1", n=args.n, max_n=args.max_n)
    bundle = {
        "kind": "thm1",
        "config": config,
        "n": con.n,
        "c_values": con.c_values.tolist(),
        "a": con.a,
        "b": con.b,
        "u0": _complex_list(con.u0),
        "u1": _complex_list(con.u1),
        "v0": _complex_list(con.v0),
        "v1": _complex_list(con.v1),
        "instance": con.instance.to_dict(),
        "P_r": con.P_r.to_dict(),
        "report": report.to_dict(),
    }
    out = _out_path(args.out, f"thm1_n{args.n}.json")
    _write_json(out, bundle)
    if args.figure:
        from .plotting import plot_distribution
        plot_distribution(con.P_r, args.figure, title=f"P_r, n = {args.n}", config=config)
    print(json.dumps({"out": str(out), "passed": report.passed}))
    return 0 if report.passed else 1


def cmd_build_thm2(args) -> int:
    con = build_thm2(args.n, args.epsilon, method=args.method)
    report = verify_thm2(con)
    config = _config("build-thm2", n=args.n, epsilon=args.epsilon, method=args.method)
    bundle = {
        "kind": "thm2",
        "config": config,
        "n": con.n,
        "epsilon": con.epsilon,
        "N1": con.N1,
        "N2": con.N2,
        "K": con.K,
        "Q": con.Q,
        "normalization": con.normalization,
        "eigenvalues": con.spectrum.eigenvalues.tolist(),
        "instance": con.instance.to_dict(),
        "P_u": con.P_u.to_dict(),
        "P_r": con.P_r.to_dict(),
        "report": report.to_dict(),
    }
    out = _out_path(args.out, f"thm2_n{args.n}_eps{args.epsilon:g}.json")
    _write_json(out, bundle)
    if args.pu_out:
        _write_json(Path(args.pu_out), _dist_file(con.P_u, config))
    if args.pr_out:
        _write_json(Path(args.pr_out), _dist_file(con.P_r, config))
    if args.figure:
        from .plotting import plot_spectrum
        plot_spectrum(con.spectrum.eigenvalues, con.K, con.epsilon, args.figure, config=config)
    print(json.dumps({"out": str(out), "passed": report.passed, "K": con.K, "Q": con.Q,
                      "distance": report.distance}))
    return 0 if report.passed else 1


def _verify_thm1_bundle(data) -> dict:
    con = from_vectors(data["n"], data["c_values"], *(_from_complex(data[k]) for k in ("u0", "u1", "v0", "v1")))
    report = verify_thm1(con).to_dict()
    stored = JointDistribution.from_dict(data["P_r"])
    drift = float(np.max(np.abs(stored.dense() - con.P_r.dense())))
    report["stored_P_r_drift"] = drift
    if drift > REBUILD_TOL:
        report["failures"].append(f"stored P_r differs from the rebuilt one by {drift:.3e}")
        report["passed"] = False
    return report


def _verify_thm2_bundle(data) -> dict:
    con = build_thm2(int(data["n"]), float(data["epsilon"]))
    K = int(data["K"])
    if K != con.K:
        con = with_truncation(con, K)
    report = verify_thm2(con).to_dict()
    for key, dist in (("P_u", con.P_u), ("P_r", con.P_r)):
        stored = JointDistribution.from_dict(data[key])
        drift = variational_distance(stored, dist)
        report[f"stored_{key}_drift"] = drift
        if drift > REBUILD_TOL:
            report["failures"].append(f"stored {key} differs from the rebuilt one (L1 {drift:.3e})")
    report["passed"] = not report["failures"]
    return report


def cmd_verify(args) -> int:
    with open(args.instance) as fh:
        data = json.load(fh)
    kind = data.get("kind")
    if kind == "thm1":
        report = _verify_thm1_bundle(data)
    elif kind == "thm2":
        report = _verify_thm2_bundle(data)
    else:
        raise ValueError(f"{args.instance}: unknown instance kind {kind!r}")
    print(json.dumps(report))
    return 0 if report["passed"] else 1


def cmd_sample(args) -> int:
    dist = load_distribution(args.dist)
    xs, ys = sample(dist, args.seed, args.count)
    emp = empirical_distribution((xs, ys), dist.n)
    distance = variational_distance(emp, dist)
    config = _config("sample", dist=args.dist, count=args.count, seed=args.seed)
    out = _out_path(args.out, f"samples_seed{args.seed}.json")
    _write_json(out, {"config": config, "count": args.count, "distance_to_source": distance,
                      "empirical": emp.to_dict("sparse")})
    if args.samples_out:
        path = Path(args.samples_out)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "y"])
            fmt = f"0{dist.n}b"
            w.writerows((format(int(x), fmt), format(int(y), fmt)) for x, y in zip(xs, ys))
        _write_json(path.with_suffix(".meta.json"), {"config": config, "columns": ["x", "y"]})
    print(json.dumps({"out": str(out), "distance_to_source": distance}))
    return 0


def cmd_distance(args) -> int:
    d = variational_distance(load_distribution(args.a), load_distribution(args.b))
    print(repr(d))
    if args.max is not None and d > args.max:
        return 1
    return 0


def cmd_fit(args) -> int:
    target = load_distribution(args.target)
    result = fit(target, args.k, args.seed, restarts=args.restarts, max_sweeps=args.max_sweeps)
    config = _config("fit-classical", target=args.target, k=args.k, restarts=args.restarts,
                     seed=args.seed, max_sweeps=args.max_sweeps)
    out = _out_path(args.out, f"fit_k{args.k}_seed{args.seed}.json")
    _write_json(out, {"config": config, "distance": result.distance, "restart": result.restart,
                      "components": result.model.components, "model": result.model.to_dict()})
    print(json.dumps({"out": str(out), "distance": result.distance,
                      "components": result.model.components}))
    return 0


def cmd_certify(args) -> int:
    target = load_distribution(args.target)
    config = _config("certify", target=args.target, mode=args.mode, tolerance=args.tolerance,
                     grid=args.grid)
    payload = {"config": config, "mode": args.mode, "N": target.size}
    if args.mode == "multiplicative":
        cover = min_rectangle_cover(target)
        payload["components"] = len(cover)
        payload["cover"] = cover.to_dict()
    else:
        payload["components"] = exact_min_components(target, "additive", args.tolerance, grid=args.grid)
    payload["shared_bits"] = math.log2(payload["components"])
    payload["log2_N"] = math.log2(target.size)
    if args.out:
        _write_json(Path(args.out), payload)
    print(json.dumps({k: v for k, v in payload.items() if k != "cover"}))
    return 0


def cmd_curve(args) -> int:
    rows = randomness_curve(args.n, args.epsilon, args.budgets, args.seed, restarts=args.restarts,
                            max_sweeps=args.max_sweeps)
    config = _config("curve", n=list(args.n), epsilon=args.epsilon, budgets=list(args.budgets),
                     seed=args.seed, restarts=args.restarts, max_sweeps=args.max_sweeps)
    out = _out_path(args.out, f"curve_seed{args.seed}.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_HEADER)
        w.writerows(r.as_csv_row() for r in rows)
    _write_json(out.with_suffix(".meta.json"), {"config": config, "columns": CURVE_HEADER})
    figure = args.figure or str(out.with_suffix(".png"))
    if figure != "none":
        from .plotting import plot_curve
        plot_curve(rows, args.epsilon, figure, config=config)
    print(json.dumps({"out": str(out), "rows": len(rows)}))
    return 0


# parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fixedbell", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("build-thm1", help="Bell-state construction with zero-diagonal P_r")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--out")
    s.add_argument("--max-n", type=int, default=MAX_N, help="raise the default n <= 10 cap")
    s.add_argument("--figure", help="write a heat map of P_r to this path")
    s.set_defaults(func=cmd_build_thm1)

    s = sub.add_parser("build-thm2", help="truncated-spectrum disjointness construction")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--out")
    s.add_argument("--pu-out", help="also write P_u as a standalone distribution file")
    s.add_argument("--pr-out", help="also write P_r as a standalone distribution file")
    s.add_argument("--method", choices=["auto", "jacobi", "lapack"], default="auto")
    s.add_argument("--figure", help="write the truncated spectrum plot to this path")
    s.set_defaults(func=cmd_build_thm2)

    s = sub.add_parser("verify", help="re-check a build-thm1/build-thm2 output file")
    s.add_argument("--instance", required=True)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("sample", help="draw outcome pairs from a distribution")
    s.add_argument("--dist", required=True, help="PATH or PATH#KEY")
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out")
    s.add_argument("--samples-out", help="CSV of the raw pairs (x,y as bit strings)")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("distance", help="variational (L1) distance between two distributions")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--max", type=float, help="exit 1 if the distance exceeds this")
    s.set_defaults(func=cmd_distance)

    s = sub.add_parser("fit-classical", help="fit a k-component mixture of products")
    s.add_argument("--target", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--restarts", type=int, default=32)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--max-sweeps", type=int, default=500)
    s.add_argument("--out")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("certify", help="minimum component count for small targets")
    s.add_argument("--target", required=True)
    s.add_argument("--mode", choices=["multiplicative", "additive"], default="multiplicative")
    s.add_argument("--tolerance", type=float, default=0.0)
    s.add_argument("--grid", type=int, default=16)
    s.add_argument("--out")
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("curve", help="distance to P_u versus component budget")
    s.add_argument("--n", type=int, nargs="+", required=True)
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--budgets", type=int, nargs="+", required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--restarts", type=int, default=8)
    s.add_argument("--max-sweeps", type=int, default=500)
    s.add_argument("--out", help="CSV path; the figure and .meta.json go alongside")
    s.add_argument("--figure", help="figure path, or 'none' (default: CSV path with .png)")
    s.set_defaults(func=cmd_curve)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError, KeyError) as exc:
        print(f"fixedbell {args.command}: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())
