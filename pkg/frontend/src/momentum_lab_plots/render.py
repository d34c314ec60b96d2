"""Render sweep tables into the benchmark figure style.

Reads the solver sweep CSV (fixed column set), groups rows into one series
per (solver variant, omega), aggregates seeds by mean with a min-max band,
and writes both the figure and a sidecar JSON listing every plotted point,
so figures can be audited without reading pixels.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

SWEEP_COLUMNS = ["dataset", "solver", "omega", "m", "k", "beta", "iterations",
                 "rows_sampled", "final_residual", "converged", "seed", "wall_ms"]

Y_AXES = {"iterations": "iterations", "rows": "rows_sampled"}


@dataclass
class FigureSpec:
    """What to plot: which CSVs, which y metric, where to write."""

    inputs: list[str]
    y_axis: str = "iterations"
    output: str = "figure.png"
    log_x: bool = True
    log_y: bool = True
    title: str = ""

    def __post_init__(self):
        if self.y_axis not in Y_AXES:
            raise ValueError(f"y_axis must be one of {sorted(Y_AXES)}")
        if not self.inputs:
            raise ValueError("need at least one input CSV")


@dataclass
class SeriesPoint:
    m: int
    mean: float
    min: float
    max: float
    seeds: int
    converged: bool


@dataclass
class Series:
    label: str
    solver: str
    omega: float
    points: list[SeriesPoint] = field(default_factory=list)


def read_sweep_rows(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in SWEEP_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"{path}: missing required columns {missing}")
        rows = []
        for raw in reader:
            rows.append({
                "dataset": raw["dataset"],
                "solver": raw["solver"],
                "omega": float(raw["omega"]),
                "m": int(raw["m"]),
                "iterations": float(raw["iterations"]),
                "rows_sampled": float(raw["rows_sampled"]),
                "converged": raw["converged"].strip().lower() == "true",
                "seed": int(raw["seed"]),
            })
    return rows


def aggregate(rows: list[dict], y_axis: str) -> list[Series]:
    """One series per (solver, omega); seeds aggregated by mean and min-max."""
    metric = Y_AXES[y_axis]
    datasets = sorted({r["dataset"] for r in rows})
    if len(datasets) > 1:
        warnings.warn(f"mixing datasets in one figure: {datasets}")
    groups: dict[tuple, dict[int, list[dict]]] = {}
    for r in rows:
        groups.setdefault((r["solver"], r["omega"]), {}).setdefault(r["m"], []).append(r)
    series = []
    for (solver, omega) in sorted(groups):
        cells = groups[(solver, omega)]
        label = solver if solver in ("cd", "cd-nag", "cd-hbm", "cd-nag-adaptive") \
            else f"{solver} (omega={omega:g})"
        s = Series(label=label, solver=solver, omega=omega)
        for m in sorted(cells):
            vals = [c[metric] for c in cells[m]]
            s.points.append(SeriesPoint(
                m=m,
                mean=sum(vals) / len(vals),
                min=min(vals),
                max=max(vals),
                seeds=len(vals),
                converged=all(c["converged"] for c in cells[m]),
            ))
        if s.points:
            series.append(s)
        else:
            warnings.warn(f"series {label} has no rows; skipped")
    return series


def sidecar_payload(spec: FigureSpec, series: list[Series]) -> dict:
    return {
        "y_axis": spec.y_axis,
        "inputs": list(spec.inputs),
        "log_x": spec.log_x,
        "log_y": spec.log_y,
        "series": [
            {
                "label": s.label,
                "solver": s.solver,
                "omega": s.omega,
                "points": [vars(p) for p in s.points],
            }
            for s in series
        ],
    }


def render(spec: FigureSpec) -> dict:
    """Write the figure and its sidecar JSON; returns the sidecar payload."""
    rows = []
    for path in spec.inputs:
        rows.extend(read_sweep_rows(path))
    if not rows:
        raise ValueError("no rows to plot")
    series = aggregate(rows, spec.y_axis)

    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for s in series:
        xs = [p.m for p in s.points]
        means = [p.mean for p in s.points]
        lo = [p.min for p in s.points]
        hi = [p.max for p in s.points]
        line, = ax.plot(xs, means, marker="o", label=s.label)
        ax.fill_between(xs, lo, hi, alpha=0.15, color=line.get_color())
        open_x = [p.m for p in s.points if not p.converged]
        open_y = [p.mean for p in s.points if not p.converged]
        if open_x:
            ax.plot(open_x, open_y, linestyle="none", marker="o",
                    markerfacecolor="white", color=line.get_color())
    if spec.log_x:
        ax.set_xscale("log", base=2)
    if spec.log_y:
        ax.set_yscale("log")
    ax.set_xlabel("mini-batch size m")
    ax.set_ylabel("iterations to tolerance" if spec.y_axis == "iterations"
                  else "total rows sampled")
    if spec.title:
        ax.set_title(spec.title)
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(spec.output, dpi=150)
    plt.close(fig)

    payload = sidecar_payload(spec, series)
    with open(_sidecar_path(spec.output), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return payload


def _sidecar_path(output: str) -> str:
    stem = output.rsplit(".", 1)[0] if "." in output else output
    return stem + ".points.json"
