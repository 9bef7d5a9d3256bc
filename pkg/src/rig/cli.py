"""Command line entry point: ``rig <subcommand> --config FILE [options]``.

Subcommands act on the first ``(n, alpha)`` point of the config except
``experiment`` and ``adjudicate``, which run every point.
"""
import argparse
import os
import sys
import warnings
from dataclasses import replace

from . import stats
from .experiment import _law_for, _normalized, adjudicate, load_config, run_experiment
from .genbip import generate, write_edge_list
from .limits import pmf, write_pmf_csv
from .model import HypothesisWarning, ModelParams, draw_weights
from .project import degree_array, split_degree_by_weight_threshold, write_degrees_csv


def _first_graph(cfg, threads):
    cfg = _normalized(cfg)
    params = ModelParams(cfg.n[0], cfg.alpha[0], cfg.beta, cfg.c)
    weights = draw_weights(params, cfg.f, cfg.h, cfg.seed)
    return cfg, params, generate(params, weights, cfg.seed, cfg.generator, threads=threads)


def cmd_generate(cfg, out, threads):
    _, _, bip = _first_graph(cfg, threads)
    path = os.path.join(out, "bipartite_edges.txt")
    with open(path, "w") as fh:
        write_edge_list(bip, fh)
    return [path]


def cmd_degrees(cfg, out, threads):
    _, _, bip = _first_graph(cfg, threads)
    path = os.path.join(out, "degrees.csv")
    with open(path, "w") as fh:
        write_degrees_csv(split_degree_by_weight_threshold(bip), fh)
    return [path]


def cmd_limit_pmf(cfg, out, threads):
    cfg = _normalized(cfg)
    params = ModelParams(cfg.n[0], cfg.alpha[0], cfg.beta, cfg.c)
    paths = []
    for policy in cfg.policies:
        law = _law_for(params, cfg, policy)
        path = os.path.join(out, f"limit_pmf_{policy}.csv")
        with open(path, "w") as fh:
            write_pmf_csv(pmf(law, cfg.k_max, samples=cfg.limit_samples, seed=cfg.seed), fh)
        paths.append(path)
    return paths


def cmd_gof(cfg, out, threads):
    cfg, params, bip = _first_graph(cfg, threads)
    degrees = degree_array(bip)
    if cfg.vertices_per_replicate is not None:
        degrees = degrees[: cfg.vertices_per_replicate]
    emp = stats.empirical_degree_pmf(degrees)
    paths = []
    for policy in cfg.policies:
        law = _law_for(params, cfg, policy)
        lp = pmf(law, cfg.k_max, samples=cfg.limit_samples, seed=cfg.seed)
        report = stats.gof_report(emp, lp.probs, lp.tail)
        path = os.path.join(out, f"gof_{policy}.json")
        with open(path, "w") as fh:
            fh.write(stats.gof_json(report) + "\n")
        paths.append(path)
    return paths


def cmd_experiment(cfg, out, threads):
    return run_experiment(cfg, out, threads)


def cmd_adjudicate(cfg, out, threads):
    _, path = adjudicate(cfg, out, threads)
    return [path]


COMMANDS = {
    "generate": cmd_generate,
    "degrees": cmd_degrees,
    "limit-pmf": cmd_limit_pmf,
    "gof": cmd_gof,
    "experiment": cmd_experiment,
    "adjudicate": cmd_adjudicate,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="rig", description="weighted random intersection graphs")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="config file (key = value lines)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="output directory (default: output_dir from the config)")
        p.add_argument("--threads", type=int, default=1, help="worker threads; never changes output")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    cfg = load_config(args.config)
    if args.seed is not None:
        if args.seed < 0:
            raise SystemExit("--seed must be nonnegative")
        cfg = replace(cfg, seed=args.seed)
    out = args.out or cfg.output_dir
    os.makedirs(out, exist_ok=True)
    with warnings.catch_warnings():
        warnings.simplefilter("always", HypothesisWarning)
        paths = COMMANDS[args.command](cfg, out, max(1, args.threads))
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
