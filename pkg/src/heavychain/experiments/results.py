"""Sweep results: per-trial records, per-cell summaries, CSV/JSON/SVG output."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def summarize(values):
    """Median, 5/95 % quantiles, mean and standard error of the finite values."""
    x = np.asarray(values, dtype=float)
    x = x[np.isfinite(x)]
    if x.size == 0:
        nan = float("nan")
        return {"median": nan, "q05": nan, "q95": nan, "mean": nan, "stderr": nan, "count": 0}
    q05, med, q95 = np.quantile(x, [0.05, 0.5, 0.95])
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return {"median": float(med), "q05": float(q05), "q95": float(q95), "mean": float(x.mean()),
            "stderr": se, "count": int(x.size)}


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else repr(f)
    return v


@dataclass
class SweepResult:
    """Records of one sweep.

    ``records`` holds one dict per (cell, trial): the cell parameters in
    ``param_names`` order, then ``trial``, then the statistics in
    ``stat_names`` order.  ``cells`` holds one summary dict per cell.
    ``checks`` maps a named acceptance band to whether it holds.
    """

    experiment: str
    param_names: list
    stat_names: list
    records: list = field(default_factory=list)
    cells: list = field(default_factory=list)
    fitted: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    headline: str = ""

    @property
    def columns(self):
        return list(self.param_names) + ["trial"] + list(self.stat_names)

    def add(self, params, trial, stats):
        rec = {k: params[k] for k in self.param_names}
        rec["trial"] = trial
        for k in self.stat_names:
            rec[k] = stats.get(k, float("nan"))
        self.records.append(rec)

    def column(self, name, **where):
        return np.array([r[name] for r in self.records if all(r[k] == v for k, v in where.items())], dtype=float)

    @property
    def passed(self):
        return all(self.checks.values())

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.records:
            w.writerow([_fmt(r[c]) for c in self.columns])
        return buf.getvalue()

    def to_dict(self, with_records=False):
        out = {"experiment": self.experiment, "columns": self.columns, "cells": self.cells,
               "fitted": self.fitted, "checks": self.checks, "meta": self.meta, "headline": self.headline}
        if with_records:
            out["records"] = self.records
        return _jsonable(out)

    def to_json(self, with_records=False):
        return json.dumps(self.to_dict(with_records), indent=2, sort_keys=True)

    def output_paths(self, out_dir, fmt="csv", plot=False):
        out_dir = Path(out_dir)
        paths = {"summary": out_dir / f"{self.experiment}_summary.json"}
        paths["records"] = out_dir / f"{self.experiment}.{fmt}"
        if plot:
            paths["plot"] = out_dir / f"{self.experiment}.svg"
        return paths

    def write(self, out_dir, fmt="csv", plot=False, force=False):
        """Write records, summary and (optionally) an SVG plot; refuses to overwrite unless ``force``."""
        paths = self.output_paths(out_dir, fmt, plot)
        if not force:
            existing = [str(p) for p in paths.values() if p.exists()]
            if existing:
                raise FileExistsError(f"refusing to overwrite {existing}; pass --force")
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        body = self.to_csv() if fmt == "csv" else self.to_json(with_records=True)
        paths["records"].write_text(body)
        paths["summary"].write_text(self.to_json())
        if plot:
            plot_svg(self, paths["plot"])
        return paths


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _band(v):
    """``(q05, median, q95)`` of a cell statistic; scalars get a zero-width band."""
    if isinstance(v, dict):
        return v.get("q05", math.nan), v.get("median", math.nan), v.get("q95", math.nan)
    try:
        x = float(v)
    except (TypeError, ValueError):
        x = math.nan
    return x, x, x


def plot_svg(result, path):
    """Median of the first statistic against the first cell parameter, with envelopes if present."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.5))
    xname = result.param_names[0] if result.param_names else "cell"
    stat = result.stat_names[0]
    xs = [c.get(xname, i) for i, c in enumerate(result.cells)]
    band = np.array([_band(c.get(stat)) for c in result.cells], dtype=float).reshape(-1, 3)
    lo, med, hi = band.T
    ax.errorbar(xs, med, yerr=np.vstack([med - lo, hi - med]), fmt="o", label=stat)
    for name in sorted({k for c in result.cells for k in c.get("envelopes", {})}):
        ax.plot(xs, [c.get("envelopes", {}).get(name, float("nan")) for c in result.cells], "--", label=name)
    ax.set_xlabel(xname)
    ax.set_ylabel(stat)
    ax.legend(fontsize=7)
    fig.tight_layout()
    with matplotlib.rc_context({"svg.hashsalt": "heavychain"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
