"""Command-line driver: ``propagate``, ``benchmark`` and ``compare``.

Exit codes: 0 success, 2 input validation, 3 numerical failure.
"""

import argparse
import glob
import json
import os
import sys
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .ensembles import Architecture, EnsembleSpec, InputVariance, build_network, input_gaussian
from .gaussian import Gaussian
from .moments import ActivationKind
from .network import Network
from .propagation import propagate_analytic
from .report import (
    SUMMARY_COLUMNS,
    bounds_text,
    compare_reports,
    histogram_text,
    report_text,
    run_benchmark,
    table_text,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class Command(str, Enum):
    PROPAGATE = "propagate"
    BENCHMARK = "benchmark"
    COMPARE = "compare"


@dataclass(frozen=True)
class RunConfig:
    command: Command
    network_path: str = None
    ensemble: EnsembleSpec = None
    samples: int = 2 ** 16
    replicates: int = 20
    seed: int = 0
    output_path: str = None
    format: str = "csv"
    mean: tuple = None
    cov: tuple = None
    reports: str = None
    bounds_path: str = None
    histogram_path: str = None
    metric: str = "kl_y1_to_m"

    def __post_init__(self):
        if self.command is Command.PROPAGATE and not self.network_path:
            raise ValueError("propagate requires --network")
        if self.command is Command.BENCHMARK and not (self.network_path or self.ensemble):
            raise ValueError("benchmark requires --network or the ensemble flags")
        if self.command is Command.COMPARE and not self.reports:
            raise ValueError("compare requires --reports")
        n = self.samples
        if n < 2 or n & (n - 1):
            raise ValueError(f"--samples must be a power of two, got {n}")
        if self.replicates < 2:
            raise ValueError("--replicates must be at least 2")


def build_parser():
    p = argparse.ArgumentParser(
        prog="momentflow",
        description="Propagate Gaussian moments through residual networks and benchmark the approximations.",
    )
    p.add_argument("--command", required=True, choices=[c.value for c in Command])
    p.add_argument("--network", help="network JSON file")
    p.add_argument("--architecture", choices=[a.value for a in Architecture])
    p.add_argument("--activation", choices=[k.value for k in ActivationKind])
    p.add_argument("--residual", action="store_true")
    p.add_argument("--variance", choices=[v.value for v in InputVariance], default="medium")
    p.add_argument("--samples", type=int, default=2 ** 16)
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--mean", help="input mean as a JSON list")
    p.add_argument("--cov", help="input covariance as a JSON nested list")
    p.add_argument("--reports", help="directory of benchmark CSV reports (compare)")
    p.add_argument("--metric", default="kl_y1_to_m", help="report column summarized by compare")
    p.add_argument("--bounds", help="also write per-layer error bounds to this CSV")
    p.add_argument("--histogram", help="also write a 50-bin histogram of the pooled samples (benchmark)")
    return p


def config_from_args(args):
    ensemble = None
    if args.command == "benchmark" and not args.network:
        if not (args.architecture and args.activation):
            raise ValueError("benchmark requires --architecture and --activation (or --network)")
        ensemble = EnsembleSpec(args.architecture, args.activation, args.residual, args.variance, args.seed)
    return RunConfig(
        command=Command(args.command),
        network_path=args.network,
        ensemble=ensemble,
        samples=args.samples,
        replicates=args.replicates,
        seed=args.seed,
        output_path=args.out,
        format=args.format,
        mean=None if args.mean is None else tuple(json.loads(args.mean)),
        cov=None if args.cov is None else tuple(map(tuple, json.loads(args.cov))),
        reports=args.reports,
        bounds_path=args.bounds,
        histogram_path=args.histogram,
        metric=args.metric,
    )


def _load_network(path):
    with open(path) as fh:
        doc = json.load(fh)
    return Network.from_dict(doc), doc.get("input") if isinstance(doc, dict) else None


def _input_gaussian(cfg, net, embedded, default_scale=1.0):
    """Input from --mean/--cov, else an ``input`` block in the network file, else ``N(0, scale I)``."""
    n = net.in_dim
    mean, cov = cfg.mean, cfg.cov
    if embedded is not None:
        mean = embedded.get("mean") if mean is None else mean
        cov = embedded.get("cov") if cov is None else cov
    mean = np.zeros(n) if mean is None else np.asarray(mean, dtype=float)
    cov = default_scale * np.eye(n) if cov is None else np.asarray(cov, dtype=float)
    g = Gaussian(mean, cov)
    if g.dim != n:
        raise ValueError(f"input Gaussian has dim {g.dim}, network expects {n}")
    if np.linalg.eigvalsh(g.cov)[0] < -1e-10 * max(1.0, np.abs(g.cov).max()):
        raise ValueError("input covariance is not positive semidefinite")
    return g


def _write(path, text):
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _gaussian_record(i, g):
    return {"layer": i, "mean": g.mean.tolist(), "cov": g.cov.tolist(), "variance": g.var.tolist()}


def cmd_propagate(cfg):
    net, embedded = _load_network(cfg.network_path)
    x = _input_gaussian(cfg, net, embedded)
    moments = propagate_analytic(net, x)
    if cfg.format == "json":
        text = json.dumps([_gaussian_record(i, g) for i, g in enumerate(moments)], indent=2) + "\n"
    else:
        rows = [[i, j, g.mean[j], g.cov[j, j]] for i, g in enumerate(moments) for j in range(g.dim)]
        text = table_text(("layer", "index", "mean", "variance"), rows)
    _write(cfg.output_path, text)
    if cfg.bounds_path:
        _write(cfg.bounds_path, bounds_text(net, x, moments))


def cmd_benchmark(cfg):
    if cfg.network_path:
        net, embedded = _load_network(cfg.network_path)
        x = _input_gaussian(cfg, net, embedded)
    else:
        net = build_network(cfg.ensemble)
        x = input_gaussian(cfg.ensemble)
    result = run_benchmark(net, x, cfg.samples, cfg.replicates, cfg.seed)
    _write(cfg.output_path, report_text(result, cfg.format))
    if cfg.bounds_path:
        _write(cfg.bounds_path, bounds_text(net, x))
    if cfg.histogram_path:
        _write(cfg.histogram_path, histogram_text(result.pooled_samples))


def cmd_compare(cfg):
    if os.path.isdir(cfg.reports):
        paths = sorted(glob.glob(os.path.join(cfg.reports, "*.csv")))
    else:
        paths = [cfg.reports]
    if not paths:
        raise ValueError(f"no CSV reports found in {cfg.reports}")
    rows = compare_reports(paths, cfg.metric)
    _write(cfg.output_path, table_text(SUMMARY_COLUMNS, rows, cfg.format))


_COMMANDS = {
    Command.PROPAGATE: cmd_propagate,
    Command.BENCHMARK: cmd_benchmark,
    Command.COMPARE: cmd_compare,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        _COMMANDS[cfg.command](cfg)
    # LinAlgError subclasses ValueError, so it must be caught first
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, TypeError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
