"""Render oscsim harness CSVs into figures.

Three figure kinds:

  overlay       -- curves vs t from one or two trajectory CSVs (pipeline vs
                   oracle overlays)
  loglog-sweep  -- measured error vs a swept parameter on log-log axes with
                   the least-squares slope annotated (and returned)
  bound-compare -- measured error against its analytic bound on a semilog axis

Images are artifacts, never inputs; the numeric slope is returned so callers
can check it against an independent fit.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("overlay", "loglog-sweep", "bound-compare")


class PlotError(Exception):
    pass


class MissingColumn(PlotError):
    pass


class EmptyData(PlotError):
    pass


@dataclass
class PlotSpec:
    inputs: list
    kind: str
    output: str
    x: str = None               # default: "t" for overlay, "value" for sweeps
    y: list = None              # default: every numeric non-x column
    xlabel: str = None
    ylabel: str = None
    title: str = None

    @staticmethod
    def from_dict(cfg):
        if not isinstance(cfg, dict):
            raise PlotError("plot spec must be a JSON object")
        inputs = cfg.get("inputs") or cfg.get("input")
        if inputs is None:
            raise PlotError("plot spec needs 'input' or 'inputs'")
        if isinstance(inputs, str):
            inputs = [inputs]
        kind = cfg.get("kind")
        if kind not in KINDS:
            raise PlotError(f"kind must be one of {KINDS}, got {kind!r}")
        output = cfg.get("output")
        if not output:
            raise PlotError("plot spec needs an 'output' image path")
        return PlotSpec(
            inputs=list(inputs),
            kind=kind,
            output=output,
            x=cfg.get("x"),
            y=cfg.get("y"),
            xlabel=cfg.get("xlabel"),
            ylabel=cfg.get("ylabel"),
            title=cfg.get("title"),
        )

    @staticmethod
    def load(path):
        with open(path) as fh:
            return PlotSpec.from_dict(json.load(fh))


@dataclass
class RenderResult:
    output: str
    slope: float = None
    columns: list = field(default_factory=list)


def read_csv_columns(path):
    """Parse a harness CSV into {name: float array}; non-numeric cells
    (e.g. the pass column) become NaN."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyData(f"{path} has no header row")
        rows = [row for row in reader if row]
    if not rows:
        raise EmptyData(f"{path} has a header but no data rows")
    cols = {name: np.empty(len(rows)) for name in header}
    for i, row in enumerate(rows):
        for name, cell in zip(header, row):
            try:
                cols[name][i] = float(cell)
            except ValueError:
                cols[name][i] = math.nan
    return cols


def _pick(cols, name, path):
    if name not in cols:
        raise MissingColumn(f"column {name!r} not found in {path}")
    return cols[name]


def _numeric_columns(cols, skip):
    return [
        name for name, vals in cols.items()
        if name not in skip and not np.all(np.isnan(vals))
    ]


def fit_loglog_slope(x, y):
    """Least-squares slope of log(y) against log(x); ignores nonpositive rows."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
    if keep.sum() < 2:
        raise EmptyData("need at least two positive samples for a log-log fit")
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def _render_overlay(spec):
    xcol = spec.x or "t"
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    used = []
    styles = ["-", "--", ":", "-."]
    for idx, path in enumerate(spec.inputs):
        cols = read_csv_columns(path)
        x = _pick(cols, xcol, path)
        names = spec.y or _numeric_columns(cols, skip={xcol})
        if not names:
            raise MissingColumn(f"no plottable columns in {path}")
        for name in names:
            ax.plot(
                x, _pick(cols, name, path), styles[idx % len(styles)],
                lw=1.4, label=f"{name}" if len(spec.inputs) == 1 else f"{name} [{idx}]",
            )
            used.append(name)
    ax.set_xlabel(spec.xlabel or xcol)
    ax.set_ylabel(spec.ylabel or "value")
    ax.legend(loc="best", fontsize=8)
    return fig, None, used


def _render_loglog(spec):
    path = spec.inputs[0]
    cols = read_csv_columns(path)
    xcol = spec.x or "value"
    ycol = (spec.y or ["measured_error"])[0]
    x = _pick(cols, xcol, path)
    y = _pick(cols, ycol, path)
    slope = fit_loglog_slope(x, y)
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.loglog(x, y, "o-", lw=1.4, label=ycol)
    used = [xcol, ycol]
    if "bound" in cols and not np.all(np.isnan(cols["bound"])):
        keep = np.isfinite(cols["bound"])
        ax.loglog(x[keep], cols["bound"][keep], "s--", lw=1.1, label="bound")
        used.append("bound")
    ax.annotate(
        f"slope = {slope:.3f}",
        xy=(0.05, 0.08), xycoords="axes fraction", fontsize=10,
    )
    ax.set_xlabel(spec.xlabel or xcol)
    ax.set_ylabel(spec.ylabel or ycol)
    ax.legend(loc="best", fontsize=8)
    return fig, slope, used


def _render_bound_compare(spec):
    path = spec.inputs[0]
    cols = read_csv_columns(path)
    xcol = spec.x or "value"
    x = _pick(cols, xcol, path)
    measured = _pick(cols, "measured_error", path)
    bound = _pick(cols, "bound", path)
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.semilogy(x, measured, "o-", lw=1.4, label="measured")
    keep = np.isfinite(bound)
    ax.semilogy(x[keep], bound[keep], "s--", lw=1.1, label="bound")
    ax.set_xlabel(spec.xlabel or xcol)
    ax.set_ylabel(spec.ylabel or "error")
    ax.legend(loc="best", fontsize=8)
    return fig, None, [xcol, "measured_error", "bound"]


def render(spec):
    """Render a PlotSpec to its output image; returns RenderResult with the
    annotated slope for log-log sweeps."""
    if isinstance(spec, dict):
        spec = PlotSpec.from_dict(spec)
    if spec.kind == "overlay":
        fig, slope, used = _render_overlay(spec)
    elif spec.kind == "loglog-sweep":
        fig, slope, used = _render_loglog(spec)
    else:
        fig, slope, used = _render_bound_compare(spec)
    if spec.title:
        fig.axes[0].set_title(spec.title)
    fig.tight_layout()
    fig.savefig(spec.output, dpi=150)
    plt.close(fig)
    return RenderResult(output=spec.output, slope=slope, columns=used)
