"""Command-line harness.

Subcommands `condition`, `convergence`, `recovery`, and `weil` run the
experiment drivers and write CSV; `mesh` generates a nodal array as CSV;
`interp` factorizes a mesh and writes the interpolation-space summary (plus
optional coefficients and Lebesgue estimate) as JSON.  Identical configs
produce byte-identical outputs regardless of `--threads`.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .experiments import (build_mesh, resolve_threads, run_condition_study,
                          run_convergence_study, run_recovery_study, run_weil_study)
from .interpolation import lebesgue_constant, loi_factorize, loi_interpolate
from .mesh_gen import NodalArray, mapped_uniform, sample_iid

_EXPERIMENTS = {
    "condition": run_condition_study,
    "convergence": run_convergence_study,
    "recovery": run_recovery_study,
    "weil": run_weil_study,
}


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _mesh_from_config(cfg: dict, seed: int) -> NodalArray:
    if "csv" in cfg:
        return NodalArray.from_csv(cfg["csv"])
    sampler = cfg["sampler"]
    if sampler == "mapped_uniform":
        return mapped_uniform(int(cfg["count"]), float(cfg["map_scale"]), seed)
    if sampler == "iid":
        return sample_iid(cfg["density"], int(cfg["count"]), int(cfg["dimension"]), seed)
    return build_mesh(sampler, int(cfg["count"]), int(cfg["dimension"]), seed,
                      grid_degree=cfg.get("grid_degree"))


def _cmd_experiment(name: str, args) -> int:
    config = _load_config(args.config)
    if args.seed is not None:
        config["seed"] = args.seed
    threads = resolve_threads(args.threads, config.pop("threads", None))
    record = _EXPERIMENTS[name](config, threads=threads)
    out = args.out or f"{name}.csv"
    record.write_csv(out)
    print(f"{name}: {len(record.rows)} rows -> {out} ({record.wall_time:.1f}s)")
    return 0


def _cmd_mesh(args) -> int:
    config = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    mesh = _mesh_from_config(config, seed)
    out = args.out or "mesh.csv"
    mesh.to_csv(out)
    print(f"mesh: {mesh.count} points in {mesh.dimension}d -> {out}")
    return 0


def _cmd_interp(args) -> int:
    config = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    mesh = _mesh_from_config(config["mesh"], seed)
    density = config.get("density", "chebyshev")
    fact = loi_factorize(mesh, density, max_degree=int(config.get("max_degree", 40)))
    report = json.loads(fact.summary_json())
    if "data" in config:
        data_cfg = config["data"]
        if data_cfg.get("function") == "exp_sum":
            a = np.asarray(data_cfg["coefficients"], dtype=float)
            u = np.exp(-mesh.points @ a)
        elif "values" in data_cfg:
            u = np.asarray(data_cfg["values"], dtype=float)
        else:
            raise ValueError("data config needs either function=exp_sum or explicit values")
        surrogate = loi_interpolate(fact, u)
        report["coefficients"] = [float(c) for c in surrogate.coefficients]
    n_candidates = int(config.get("lebesgue_candidates", 0))
    if n_candidates > 0:
        cand = sample_iid(density if density != "unit" else "uniform",
                          n_candidates, mesh.dimension, seed)
        estimate = lebesgue_constant(fact, density, cand)
        report["lebesgue_estimate"] = estimate.value
    out = args.out or "interp.json"
    with open(out, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"interp: degree {report['degree']} space over {mesh.count} points -> {out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ucolloc",
        description="Polynomial surrogates on unstructured collocation meshes",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*_EXPERIMENTS, "mesh", "interp"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="output path")
        p.add_argument("--threads", type=int, help="worker threads")
    args = parser.parse_args(argv)
    try:
        if args.command in _EXPERIMENTS:
            return _cmd_experiment(args.command, args)
        if args.command == "mesh":
            return _cmd_mesh(args)
        return _cmd_interp(args)
    except Exception as exc:  # fatal: report and signal failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
