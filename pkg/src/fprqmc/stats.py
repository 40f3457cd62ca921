"""Error metrics against references, time-space averaging, slope fits, CSV I/O."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

EXACT_RMSE = 1e-12  # below this (scaled units) a series counts as identically zero


def rmse_field(runs: np.ndarray, reference: np.ndarray):
    """Pointwise bias, variance, RMSE over repetitions.

    ``runs`` has the repetition axis first; ``reference`` matches the
    remaining shape.  Variance is the population form (divide by the
    repetition count).  NaN entries (e.g. momentarily empty cells) are
    excluded per point.

    Returns ``(bias, variance, rmse)``.
    """
    runs = np.asarray(runs, dtype=np.float64)
    if runs.shape[0] < 1:
        raise ValueError("need at least one repetition")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN slices
        mean = np.nanmean(runs, axis=0)
        var = np.nanmean((runs - mean) ** 2, axis=0)
    bias = np.abs(mean - np.asarray(reference, dtype=np.float64))
    rmse = np.sqrt(bias * bias + var)
    return bias, var, rmse


def averaged_rmse(rmse: np.ndarray) -> float:
    """Arithmetic mean of the RMSE field over all time steps and cells."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return float(np.nanmean(rmse))


def fit_slope(n_values, errors) -> float:
    """Least-squares slope of log2(error) against log2(N)."""
    n_values = np.asarray(n_values, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    if len(n_values) < 3:
        raise ValueError("need at least three points for a slope")
    ok = errors > 0.0
    if not ok.all():
        warnings.warn("excluding nonpositive errors from the slope fit", stacklevel=2)
    if ok.sum() < 3:
        raise ValueError("fewer than three positive errors to fit")
    x = np.log2(n_values[ok])
    y = np.log2(errors[ok])
    design = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(coef[0])


@dataclass
class ConvergenceRecord:
    """Averaged-RMSE-versus-N series for one (strategy, quantity) pair."""

    strategy: str
    quantity: str
    n_values: tuple
    rmse: tuple
    slope: float | None
    exact: bool
    fit_window: tuple  # (n_min, n_max) used for the fit

    @property
    def points(self):
        return list(zip(self.n_values, self.rmse))


def build_record(strategy: str, quantity: str, n_values, rmse,
                 window: str = "full") -> ConvergenceRecord:
    """Fit a convergence record; ``window="asymptotic"`` keeps the upper half.

    Series that are identically zero to within EXACT_RMSE get the exact
    marker instead of a fitted slope.
    """
    n_values = tuple(int(n) for n in n_values)
    rmse = tuple(float(e) for e in rmse)
    if max(rmse) < EXACT_RMSE:
        return ConvergenceRecord(strategy, quantity, n_values, rmse, None, True,
                                 (n_values[0], n_values[-1]))
    if len(n_values) < 3:  # too short to fit; keep the points, skip the slope
        return ConvergenceRecord(strategy, quantity, n_values, rmse, None, False,
                                 (n_values[0], n_values[-1]))
    if window == "asymptotic":
        lo = len(n_values) // 2
        if len(n_values) - lo < 3:
            lo = len(n_values) - 3
        ns, es = n_values[lo:], rmse[lo:]
    else:
        ns, es = n_values, rmse
    return ConvergenceRecord(strategy, quantity, n_values, rmse,
                             fit_slope(ns, es), False, (ns[0], ns[-1]))


# ---------------------------------------------------------------------------
# CSV formats (deterministic bytes: shortest-roundtrip floats, no timestamps)
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    return repr(float(x))


def _meta_line(meta: dict) -> str:
    return "# " + json.dumps(meta, sort_keys=True, separators=(",", ":"))


def write_convergence_csv(path, records, meta: dict) -> None:
    """Rows of (strategy, quantity, N, averaged RMSE) with a config header."""
    with open(path, "w") as f:
        f.write(_meta_line(meta) + "\n")
        f.write("strategy,quantity,n,rmse\n")
        for r in records:
            for n, e in zip(r.n_values, r.rmse):
                f.write(f"{r.strategy},{r.quantity},{n},{_fmt(e)}\n")


def read_convergence_csv(path):
    """Returns ``(meta, rows)`` with rows of (strategy, quantity, n, rmse)."""
    meta = {}
    rows = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                meta = json.loads(line[1:].strip())
                continue
            if line.startswith("strategy,"):
                continue
            s, q, n, e = line.split(",")
            rows.append((s, q, int(n), float(e)))
    return meta, rows


def records_from_rows(rows, window: str = "full"):
    """Rebuild convergence records (and refit slopes) from CSV rows."""
    series: dict[tuple, list] = {}
    for s, q, n, e in rows:
        series.setdefault((s, q), []).append((n, e))
    records = []
    for (s, q), pts in series.items():
        pts.sort()
        ns = [p[0] for p in pts]
        es = [p[1] for p in pts]
        records.append(build_record(s, q, ns, es, window=window))
    return records


def write_slopes_csv(path, records, meta: dict) -> None:
    with open(path, "w") as f:
        f.write(_meta_line(meta) + "\n")
        f.write("strategy,quantity,slope,exact,fit_n_min,fit_n_max\n")
        for r in records:
            slope = "" if r.slope is None else _fmt(r.slope)
            f.write(f"{r.strategy},{r.quantity},{slope},{int(r.exact)},"
                    f"{r.fit_window[0]},{r.fit_window[1]}\n")


def write_trajectories_csv(path, runs: np.ndarray, quantities, meta: dict) -> None:
    """Long-format dump: step, cell, quantity, repetition, value."""
    n_reps, n_steps, n_cells, _ = runs.shape
    with open(path, "w") as f:
        f.write(_meta_line(meta) + "\n")
        f.write("step,cell,quantity,repetition,value\n")
        for t in range(n_steps):
            for j in range(n_cells):
                for qi, q in enumerate(quantities):
                    for r in range(n_reps):
                        f.write(f"{t + 1},{j},{q},{r},{_fmt(runs[r, t, j, qi])}\n")


def slope_table(records, quantities) -> str:
    """Fixed-width strategy-by-quantity slope matrix for the benchmark tables."""
    strategies = []
    for r in records:
        if r.strategy not in strategies:
            strategies.append(r.strategy)
    by_key = {(r.strategy, r.quantity): r for r in records}
    width = max(len(s) for s in strategies) + 2
    lines = ["".join([" " * width] + [f"{q:>10}" for q in quantities])]
    for s in strategies:
        cells = []
        for q in quantities:
            r = by_key.get((s, q))
            if r is None or (r.slope is None and not r.exact):
                cells.append(f"{'-':>10}")
            elif r.exact:
                cells.append(f"{'0':>10}")
            else:
                cells.append(f"{r.slope:>10.2f}")
        lines.append(f"{s:<{width}}" + "".join(cells))
    return "\n".join(lines)
