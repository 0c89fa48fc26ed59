"""Benchmark driver and report formatting shared by the CLI."""

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .diagnostics import error_recursion
from .oracle import (
    evaluate_method,
    evaluate_pseudo_true,
    histogram,
    qmc_sample_network,
)
from .propagation import (
    SigmaPointScheme,
    propagate_analytic,
    propagate_linear,
    propagate_mean_field,
    propagate_unscented,
)

METHODS = ("pseudo-true", "analytic", "mean-field", "linear", "unscented95", "unscented02")
REPORT_COLUMNS = (
    "method",
    "mean",
    "variance",
    "wasserstein",
    "wasserstein_se",
    "kl_y1_to_m",
    "kl_m_to_y1",
    "kl_se",
)
BOUND_COLUMNS = ("layer", "lipschitz", "nonnormality", "cumulative", "singular")
SUMMARY_COLUMNS = ("method", "n", "min", "q25", "median", "q75", "max")
THREADS_ENV = "MOMENTFLOW_THREADS"

_APPROXIMATIONS = {
    "analytic": lambda net, x: propagate_analytic(net, x)[-1],
    "mean-field": propagate_mean_field,
    "linear": propagate_linear,
    "unscented95": lambda net, x: propagate_unscented(net, x, SigmaPointScheme.u95()),
    "unscented02": lambda net, x: propagate_unscented(net, x, SigmaPointScheme.u02()),
}


@dataclass(frozen=True)
class ReportRow:
    method: str
    mean: float
    variance: float
    wasserstein: float
    wasserstein_se: float
    kl_y1_to_m: float
    kl_m_to_y1: float
    kl_se: float

    @classmethod
    def from_metrics(cls, method, rep):
        return cls(
            method,
            float(rep.moments.mean[0]),
            float(rep.moments.cov[0, 0]),
            rep.wasserstein_to_truth.value,
            rep.wasserstein_to_truth.se,
            rep.kl_from_pseudo_true.value,
            rep.kl_to_pseudo_true.value,
            rep.kl_from_pseudo_true.se,
        )

    @classmethod
    def failed(cls, method):
        nan = float("nan")
        inf = float("inf")
        return cls(method, nan, nan, inf, 0.0, inf, inf, 0.0)

    def values(self):
        return [getattr(self, c) for c in REPORT_COLUMNS]


@dataclass(frozen=True)
class BenchmarkResult:
    rows: tuple
    pooled_samples: np.ndarray


def max_workers():
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return min(8, os.cpu_count() or 1)
    n = int(raw)
    if n < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def _approximate(name, net, x):
    try:
        with np.errstate(all="ignore"):
            g = _APPROXIMATIONS[name](net, x)
    except (np.linalg.LinAlgError, FloatingPointError):
        return None
    if not (np.all(np.isfinite(g.mean)) and np.all(np.isfinite(g.cov))):
        return None
    return g


def run_benchmark(net, x, samples=2 ** 16, replicates=20, seed=0, workers=None):
    """All six report rows for one network and input, in the fixed method order."""
    if net.out_dim != 1:
        raise ValueError(f"benchmark needs a scalar-output network, got output dim {net.out_dim}")
    if replicates < 2:
        raise ValueError("need at least two replicates for standard errors")
    workers = workers or max_workers()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        truth = list(pool.map(lambda r: qmc_sample_network(net, x, samples, seed, r), range(replicates)))
        names = METHODS[1:]
        approx = list(pool.map(lambda name: _approximate(name, net, x), names))
    rows = [ReportRow.from_metrics("pseudo-true", evaluate_pseudo_true(truth))]
    for name, g in zip(names, approx):
        if g is None:
            rows.append(ReportRow.failed(name))
        else:
            rows.append(ReportRow.from_metrics(name, evaluate_method(g, truth)))
    pooled = np.concatenate([t.samples[:, 0] for t in truth])
    return BenchmarkResult(tuple(rows), pooled)


def metric_report(result, method):
    return result.rows[METHODS.index(method)]


def format_number(x):
    """Round-trippable text; infinities as ``inf``."""
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _cell(v):
    if isinstance(v, (str, bool, int, np.integer)):
        return v if isinstance(v, str) else str(v).lower()
    return format_number(v)


def _json_cell(v):
    if isinstance(v, (str, bool)):
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    return float(v) if np.isfinite(v) else format_number(v)


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _json_text(header, rows):
    records = [{h: _json_cell(v) for h, v in zip(header, row)} for row in rows]
    return json.dumps(records, indent=2) + "\n"


def table_text(header, rows, fmt="csv"):
    if fmt == "csv":
        return _csv_text(header, rows)
    if fmt == "json":
        return _json_text(header, rows)
    raise ValueError(f"unknown format {fmt!r}")


def report_text(result, fmt="csv"):
    return table_text(REPORT_COLUMNS, [r.values() for r in result.rows], fmt)


def bounds_rows(bounds):
    return [[i, b.lipschitz, b.nonnormality, b.cumulative, b.singular] for i, b in enumerate(bounds)]


def bounds_text(net, x, moments=None, fmt="csv"):
    bounds = error_recursion(net, x, moments)
    return table_text(BOUND_COLUMNS, bounds_rows(bounds), fmt)


def histogram_text(samples, bins=50):
    counts, edges = histogram(samples, bins)
    rows = [[edges[i], edges[i + 1], int(c)] for i, c in enumerate(counts)]
    return table_text(("left", "right", "count"), rows)


def quantile_summary(values):
    """Min, quartiles, median and max with linear interpolation, safe for ``inf`` entries."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise ValueError("no values to summarize")
    out = []
    for q in (0.0, 0.25, 0.5, 0.75, 1.0):
        pos = q * (v.size - 1)
        lo = int(np.floor(pos))
        hi = min(lo + 1, v.size - 1)
        frac = pos - lo
        if frac == 0.0 or v[lo] == v[hi]:
            out.append(float(v[lo]))
        else:
            out.append(float(v[lo] + frac * (v[hi] - v[lo])))
    return out


def read_report(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(REPORT_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        return [dict(row) for row in reader]


def compare_reports(paths, metric="kl_y1_to_m"):
    """Per-method five-number summaries of ``metric`` across benchmark reports."""
    if metric not in REPORT_COLUMNS[1:]:
        raise ValueError(f"unknown metric {metric!r}")
    grouped = {m: [] for m in METHODS}
    for path in paths:
        for row in read_report(path):
            if row["method"] not in grouped:
                raise ValueError(f"{path}: unknown method {row['method']!r}")
            grouped[row["method"]].append(float(row[metric]))
    rows = []
    for method in METHODS:
        if grouped[method]:
            rows.append([method, len(grouped[method]), *quantile_summary(grouped[method])])
    return rows

