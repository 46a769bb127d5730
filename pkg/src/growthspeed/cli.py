"""Command line entry point.

    growthspeed <subcommand> --config c.json [--seed S] [--out DIR] [--depth N] [--guard G]
    growthspeed run --config c.json exp-tau-convergence [exp-growth-speed ...]

Exit codes: 0 success, 2 invalid config, 3 resource guard or horizon exceeded.
The output directory defaults to $GROWTHSPEED_OUT, then ./growthspeed_out.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .harness import (
    EXPERIMENTS,
    ConfigError,
    load_config,
    resolve_out,
    run,
    write_manifest,
    now_utc,
)
from .measures import HorizonError, SpecValidationError, measure_from_dict, write_dense_csv
from .singularity import WindowParams, growth_speed, growth_speed_prime, write_growth_csv
from .spectrum import (
    ScalingSample,
    UnsupportedSpecError,
    count_Nn,
    default_alpha,
    markov_count_bound,
    scaling_sample,
    tilted_measure,
    write_counts_csv,
    write_scaling_csv,
    write_spectrum_csv,
)
from .symbolic import ResourceGuardError

TOOLS = ("generate", "tau", "spectrum", "counts", "growth-speed")


def _realization(cfg):
    horizon = max(cfg.j_list) + cfg.depth
    return measure_from_dict(cfg.measure, seed=cfg.seed, horizon=horizon)


def _limit(cfg, m):
    """Closed-form tau when there is one, else tau at depth cfg.depth."""
    spec = getattr(m, "spec", None)
    if spec is not None and spec.support() is not None:
        return ScalingSample.from_oracle(spec, cfg.q_values)
    return scaling_sample(m, cfg.q_values, cfg.depth)


def cmd_generate(cfg, out):
    m = _realization(cfg)
    files = []
    for j in cfg.j_list:
        path = os.path.join(out, f"dense_j{j}.csv")
        write_dense_csv(m.shift(j), cfg.depth, path, header=f"config_sha256={cfg.hash}")
        files.append(path)
    return files


def cmd_tau(cfg, out):
    m = _realization(cfg)
    samples = [scaling_sample(m, cfg.q_values, j) for j in range(1, cfg.depth + 1)]
    path = os.path.join(out, "tau.csv")
    write_scaling_csv(samples, path, cfg.hash)
    return [path]


def _alphas(cfg, m, ts):
    return np.array([default_alpha(m, float(q), cfg.depth) for q in ts.q])


def cmd_spectrum(cfg, out):
    m = _realization(cfg)
    ts = _limit(cfg, m)
    path = os.path.join(out, "spectrum.csv")
    write_spectrum_csv(ts, _alphas(cfg, m, ts), path, cfg.hash)
    return [path]


def cmd_counts(cfg, out):
    m = _realization(cfg)
    ts = _limit(cfg, m)
    alphas = _alphas(cfg, m, ts)
    rows = []
    for j in cfg.j_list:
        mj = m.shift(j)
        for n in range(max(cfg.n_lo, 1), cfg.depth + 1):
            e = float(cfg.schedule(n))
            for q, a in zip(ts.q, alphas):
                rows.append([j, n, float(a), e, count_Nn(mj, n, float(a), e),
                             markov_count_bound(mj, n, float(q), e, float(a))])
    path = os.path.join(out, "counts.csv")
    write_counts_csv(rows, path, cfg.hash)
    return [path]


def cmd_growth_speed(cfg, out):
    m = _realization(cfg)
    ts = _limit(cfg, m)
    alphas = _alphas(cfg, m, ts)
    reports = []
    for j in cfg.j_list:
        mj = m.shift(j)
        for q, a, t in zip(ts.q, alphas, ts.tau):
            tstar = float(a * q - t)
            sampling = tilted_measure(mj, float(q), cfg.depth)
            params = WindowParams(beta=float(a), N=cfg.N, eps=cfg.schedule, n_max=cfg.depth)
            rep = growth_speed(sampling, mj, params, cfg.f, j)
            rep.gs_prime = growth_speed_prime(mj, float(a), tstar, cfg.schedule,
                                              max(cfg.n_lo, 1), cfg.depth, j).gs_prime
            reports.append(rep)
    path = os.path.join(out, "growth_speed.csv")
    write_growth_csv(reports, path, cfg.hash)
    return [path]


COMMANDS = {"generate": cmd_generate, "tau": cmd_tau, "spectrum": cmd_spectrum,
            "counts": cmd_counts, "growth-speed": cmd_growth_speed}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON config document")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--depth", type=int, help="override experiment depth / horizon n_max")
    common.add_argument("--guard", type=int, help="quadrature guard levels for Riesz measures")
    parser = argparse.ArgumentParser(prog="growthspeed", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in TOOLS + EXPERIMENTS:
        sub.add_parser(name, parents=[common])
    r = sub.add_parser("run", parents=[common], help="run one or more experiments")
    r.add_argument("experiments", nargs="+", choices=EXPERIMENTS + TOOLS)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed=args.seed, depth=args.depth, guard=args.guard,
                          out=args.out)
        names = args.experiments if args.command == "run" else [args.command]
        out = resolve_out(cfg)
        os.makedirs(out, exist_ok=True)
        started = now_utc()
        if all(n in EXPERIMENTS for n in names):
            manifest = run(cfg, names, out)
        else:
            files = {}
            for name in names:
                if name in EXPERIMENTS:
                    files.update(run(cfg, [name], out)["outputs"])
                else:
                    files[name] = COMMANDS[name](cfg, out)
            manifest = write_manifest(cfg, out, files, started)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, SpecValidationError, UnsupportedSpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ResourceGuardError, HorizonError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(os.path.join(out, "manifest.json"))
    for group in manifest["outputs"].values():
        for path in group:
            print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
