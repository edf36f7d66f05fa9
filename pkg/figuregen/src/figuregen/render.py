"""Key-rate comparison figures from sweep CSV files.

Consumes only the documented CSV contract (columns Q, mask, p_accept,
entropy_bound, leak_ec, rate_raw, rate_clamped, baseline_rate) and never
recomputes a rate: masked curves plot rate_clamped as-is, and the no-CAD
baseline curve plots the baseline_rate column floored at zero under the
legend label "None".
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

BASELINE = "baseline"
REQUIRED_COLUMNS = ("Q", "mask", "rate_clamped", "baseline_rate")


class PlotError(Exception):
    """Bad plot spec or CSV, with file (and line, where known) context."""


@dataclass(frozen=True)
class PlotSpec:
    csv_path: str
    title: str
    curves: tuple[str, ...]
    out_path: str
    logy: bool = False


def load_plot_spec(spec_path: Union[str, Path], csv_path: str, out_path: str) -> PlotSpec:
    """Plot description JSON: {"title": ..., "curves": [...], "logy": bool}."""
    try:
        data = json.loads(Path(spec_path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise PlotError(f"{spec_path}: cannot read: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise PlotError(f"{spec_path}:{exc.lineno}: {exc.msg}") from exc
    for key in ("title", "curves"):
        if key not in data:
            raise PlotError(f"{spec_path}: missing key {key!r}")
    curves = tuple(str(c) for c in data["curves"])
    if not curves:
        raise PlotError(f"{spec_path}: curve list is empty")
    return PlotSpec(
        csv_path=str(csv_path),
        title=str(data["title"]),
        curves=curves,
        out_path=str(out_path),
        logy=bool(data.get("logy", False)),
    )


def read_sweep_csv(path: Union[str, Path]):
    """Series per mask plus the deduplicated baseline series.

    Returns (curves, baseline) with curves[mask] = (qs, clamped rates) and
    baseline = (qs, max(0, baseline_rate)).
    """
    curves: dict[str, tuple[list[float], list[float]]] = {}
    base_q: list[float] = []
    base_r: list[float] = []
    seen_q: set[float] = set()
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            missing = [c for c in REQUIRED_COLUMNS if c not in header]
            if missing:
                raise PlotError(f"{path}:1: missing columns {missing}")
            for row in reader:
                line = reader.line_num
                try:
                    q = float(row["Q"])
                    clamped = float(row["rate_clamped"])
                    baseline = float(row["baseline_rate"])
                except (TypeError, ValueError) as exc:
                    raise PlotError(f"{path}:{line}: bad numeric value ({exc})") from exc
                mask = row["mask"]
                curves.setdefault(mask, ([], []))
                curves[mask][0].append(q)
                curves[mask][1].append(clamped)
                if q not in seen_q:
                    seen_q.add(q)
                    base_q.append(q)
                    base_r.append(max(0.0, baseline))
    except OSError as exc:
        raise PlotError(f"{path}: cannot read: {exc}") from exc
    if not curves:
        raise PlotError(f"{path}: no data rows")
    return curves, (base_q, base_r)


def render(plot: PlotSpec):
    """Draw the selected curves and write the image; returns the figure."""
    curves, baseline = read_sweep_csv(plot.csv_path)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for curve in plot.curves:
        if curve == BASELINE:
            ax.plot(baseline[0], baseline[1], linestyle="--", label="None")
            continue
        if curve not in curves:
            available = ", ".join(sorted(curves))
            raise PlotError(f"{plot.csv_path}: mask {curve!r} not in CSV (has: {available})")
        qs, rates = curves[curve]
        ax.plot(qs, rates, label=curve)
    ax.set_xlabel("Q")
    ax.set_ylabel("key rate (bits per GHZ state)")
    ax.set_title(plot.title)
    if plot.logy:
        ax.set_yscale("log")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    try:
        fig.savefig(plot.out_path)
    except OSError as exc:
        raise PlotError(f"{plot.out_path}: cannot write: {exc}") from exc
    return fig
