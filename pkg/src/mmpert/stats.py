"""Summary statistics, histograms and CSV output."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import DomainError

QUANTILE_LEVELS = (0.01, 0.05, 0.25, 0.75, 0.95, 0.99)

SUMMARY_FIELDS = ["label", "mean", "median", "sd", "skewness", "excess_kurtosis",
                  "q01", "q05", "q25", "q75", "q95", "q99", "sharpe"]
PATHS_FIELDS = ["path_id", "terminal_pnl", "q_min", "q_max", "n_buy_fills", "n_sell_fills"]
TIMESERIES_FIELDS = ["path_id", "step", "t", "s", "delta_plus", "delta_minus", "q", "x"]
VERIFY_FIELDS = ["check", "computed", "reference", "tolerance", "passed"]


@dataclass(frozen=True)
class SummaryStats:
    """Moments and quantiles of a PNL sample.

    ``sd`` is the unbiased (n-1) estimate; skewness and excess kurtosis are
    standardized central moments; ``sharpe`` is mean/sd per day and is None
    when the sample is constant.
    """

    n: int
    mean: float
    median: float
    sd: float
    skewness: float
    excess_kurtosis: float
    q01: float
    q05: float
    q25: float
    q75: float
    q95: float
    q99: float
    sharpe: float | None

    def row(self, label: str) -> dict:
        row = {"label": label}
        row.update({k: v for k, v in asdict(self).items() if k != "n"})
        return row


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray


def summarize(sample: Sequence[float]) -> SummaryStats:
    x = np.asarray(sample, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise DomainError("summarize needs at least two values")
    mean = float(x.mean())
    centred = x - mean
    m2 = float(np.mean(centred**2))
    sd = float(x.std(ddof=1))
    if m2 > 0:
        zs = centred / math.sqrt(m2)  # standardise first: m2**2 can underflow
        skew = float(np.mean(zs**3))
        kurt = float(np.mean(zs**4) - 3.0)
    else:
        skew = kurt = 0.0
    qs = np.quantile(x, QUANTILE_LEVELS)
    return SummaryStats(
        n=x.size,
        mean=mean,
        median=float(np.median(x)),
        sd=sd,
        skewness=skew,
        excess_kurtosis=kurt,
        q01=float(qs[0]), q05=float(qs[1]), q25=float(qs[2]),
        q75=float(qs[3]), q95=float(qs[4]), q99=float(qs[5]),
        sharpe=mean / sd if sd > 0 else None,
    )


def histogram(values: Sequence[float], n_bins: int) -> Histogram:
    """Uniform bins over [min, max], last bin closed on the right.

    A constant sample gets a unit-width range centred on its value.
    """
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise DomainError("histogram of an empty sample")
    if n_bins < 1:
        raise DomainError("n_bins must be >= 1")
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    counts, edges = np.histogram(x, bins=n_bins, range=(lo, hi))
    return Histogram(edges, counts)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(value)


def write_csv(records: Iterable[Mapping], path, fieldnames: Sequence[str] | None = None) -> Path:
    """Write dict records with a header row; floats keep 17 significant digits."""
    records = list(records)
    if fieldnames is None:
        if not records:
            raise DomainError("fieldnames are required for an empty record list")
        fieldnames = list(records[0].keys())
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(fieldnames)
            for rec in records:
                writer.writerow([_fmt(rec.get(name)) for name in fieldnames])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def timeseries_records(ts: Mapping, path_id: int = 0) -> list[dict]:
    """Flatten a recorded path; multi-asset rows carry an ``asset`` column."""
    s = np.asarray(ts["s"])
    rows = []
    if s.ndim == 1:
        for n in range(len(ts["t"])):
            rows.append({
                "path_id": path_id, "step": n, "t": ts["t"][n], "s": s[n],
                "delta_plus": ts["delta_plus"][n], "delta_minus": ts["delta_minus"][n],
                "q": int(ts["q"][n]), "x": ts["x"][n],
            })
        return rows
    for n in range(len(ts["t"])):
        for a in range(s.shape[1]):
            rows.append({
                "path_id": path_id, "step": n, "asset": a, "t": ts["t"][n], "s": s[n, a],
                "delta_plus": ts["delta_plus"][n, a], "delta_minus": ts["delta_minus"][n, a],
                "q": int(ts["q"][n, a]), "x": ts["x"][n],
            })
    return rows
