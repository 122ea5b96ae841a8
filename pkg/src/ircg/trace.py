"""Run traces: the single record format every solver writes.

A trace is a header (solver id, instance id, seed, config echo) plus one row
per recorded iteration with the columns

    t, elapsed_s, f_x, g_x, f_z, g_z, sigma_t, alpha_t, S_t

Averaged-iterate and schedule columns are empty where a solver has no such
quantity.  Files are UTF-8 CSV with ``# key=value`` header lines; floats are
rendered with 17 significant digits so write -> read -> write is bitwise
stable.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InsufficientData, ParseError

COLUMNS = ("t", "elapsed_s", "f_x", "g_x", "f_z", "g_z", "sigma_t", "alpha_t", "S_t")

# Derived columns: value minus an optimal value taken from the trace header.
_GAP_COLUMNS = {"f_x_gap": ("f_x", "f_opt"), "g_x_gap": ("g_x", "g_opt"),
                "f_z_gap": ("f_z", "f_opt"), "g_z_gap": ("g_z", "g_opt")}


@dataclass
class RunTrace:
    header: dict
    rows: list  # list of tuples aligned with COLUMNS; None marks an empty cell

    def column(self, name: str) -> np.ndarray:
        """Column as a float array with NaN for empty cells; gap columns
        (``g_x_gap`` etc.) subtract the optimal value echoed in the header."""
        if name in _GAP_COLUMNS:
            base, ref_key = _GAP_COLUMNS[name]
            if ref_key not in self.header:
                raise KeyError(f"header lacks {ref_key!r} needed for {name!r}")
            return self.column(base) - float(self.header[ref_key])
        idx = COLUMNS.index(name)
        return np.array(
            [math.nan if r[idx] is None else float(r[idx]) for r in self.rows]
        )

    @property
    def solver(self) -> str:
        return self.header.get("solver", "?")

    @property
    def instance(self) -> str:
        return self.header.get("instance", "?")


def _render(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_trace(trace: RunTrace, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for key in sorted(trace.header):
            fh.write(f"# {key}={trace.header[key]}\n")
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        for row in trace.rows:
            writer.writerow([_render(v) for v in row])


def read_trace(path) -> RunTrace:
    path = Path(path)
    header, rows = {}, []
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    body_start = 0
    for i, line in enumerate(lines):
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            header[key.strip()] = value
        else:
            body_start = i
            break
    else:
        raise ParseError(f"{path}: no column header found")
    if lines[body_start].split(",") != list(COLUMNS):
        raise ParseError(f"{path}: unexpected column header {lines[body_start]!r}")
    prev_t = -1
    for lineno, line in enumerate(lines[body_start + 1 :], start=body_start + 2):
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != len(COLUMNS):
            raise ParseError(f"{path} line {lineno}: expected {len(COLUMNS)} cells")
        try:
            t = int(cells[0])
            parsed = [t] + [None if c == "" else float(c) for c in cells[1:]]
        except ValueError as exc:
            raise ParseError(f"{path} line {lineno}: {exc}") from exc
        if t <= prev_t:
            raise ParseError(f"{path} line {lineno}: t not strictly increasing")
        prev_t = t
        rows.append(tuple(parsed))
    return RunTrace(header, rows)


# ---------------------------------------------------------------------------
# Rate fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateFit:
    """Log-log least-squares fit of a trace column against iteration count."""

    column: str
    t_min: int
    t_max: int
    slope: float
    intercept: float
    slope_stderr: float
    points_used: int
    dropped_nonpositive: int


def rate_fit(trace: RunTrace, column: str, t_min: int, t_max: int,
             offset: float = 0.0) -> RateFit:
    """Fit ``log(value - offset) ~ slope * log(t) + intercept`` on the window.

    Rows with missing or nonpositive shifted values are dropped (and
    counted); fewer than 10 usable points raises :class:`InsufficientData`.
    """
    if t_min >= t_max:
        raise ValueError("need t_min < t_max")
    t = trace.column("t")
    v = trace.column(column) - offset
    in_window = (t >= t_min) & (t <= t_max) & (t > 0)
    usable = in_window & np.isfinite(v) & (v > 0)
    dropped = int(in_window.sum() - usable.sum())
    if usable.sum() < 10:
        raise InsufficientData(
            f"only {int(usable.sum())} usable points for {column!r} in [{t_min}, {t_max}]"
        )
    x = np.log(t[usable])
    y = np.log(v[usable])
    n = x.size
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    resid = y - (intercept + slope * x)
    var = float(resid @ resid) / max(n - 2, 1)
    stderr = math.sqrt(var / sxx)
    return RateFit(column, t_min, t_max, slope, intercept, stderr, n, dropped)


# ---------------------------------------------------------------------------
# Cross-solver summary
# ---------------------------------------------------------------------------

def compare(traces: Sequence[RunTrace]) -> list:
    """Per-(instance, solver) summary rows.

    The inner-gap reference is the ``g_opt`` echoed in a trace header when
    present; otherwise the best inner value seen by any solver on the same
    instance stands in (and the rows say so).
    """
    if not traces:
        raise ValueError("need at least one trace")
    rows = []
    by_instance: dict = {}
    for tr in traces:
        by_instance.setdefault(tr.instance, []).append(tr)
    for instance in sorted(by_instance):
        group = by_instance[instance]
        refs = [float(tr.header["g_opt"]) for tr in group if "g_opt" in tr.header]
        if refs:
            g_ref, ref_kind = min(refs), "g_opt"
        else:
            g_ref = min(float(np.nanmin(tr.column("g_x"))) for tr in group)
            ref_kind = "best-seen"
        for tr in group:
            g = tr.column("g_x")
            f = tr.column("f_x")
            t = tr.column("t")
            elapsed = tr.column("elapsed_s")
            best = int(np.nanargmin(g))
            rows.append(
                {
                    "instance": instance,
                    "solver": tr.solver,
                    "iterations": int(t[-1]),
                    "best_inner_gap": float(g[best] - g_ref),
                    "outer_at_best_inner": float(f[best]),
                    "wall_time_s": float(np.nanmax(elapsed)),
                    "gap_reference": ref_kind,
                }
            )
    return rows


def format_compare_table(rows: Sequence[dict]) -> str:
    cols = ["instance", "solver", "iterations", "best_inner_gap",
            "outer_at_best_inner", "wall_time_s", "gap_reference"]
    rendered = [[_format_cell(r[c]) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in rendered)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    for row in rendered:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)


def _format_cell(v) -> str:
    if isinstance(v, float):
        return format(v, ".6g")
    return str(v)


def write_compare_csv(rows: Sequence[dict], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = ["instance", "solver", "iterations", "best_inner_gap",
            "outer_at_best_inner", "wall_time_s", "gap_reference"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for r in rows:
            writer.writerow([_format_cell(r[c]) for c in cols])


# ---------------------------------------------------------------------------
# Plot emission
# ---------------------------------------------------------------------------

def emit_plot(traces: Sequence[RunTrace], columns: Sequence[str], out_path) -> Path:
    """Write an SVG of the requested columns against iteration count.

    Gap columns are drawn on a log y-axis with nonpositive points dropped;
    every series also gets a two-column ``.dat`` sidecar next to the figure
    noting how many points were dropped.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    log_y = any(col in _GAP_COLUMNS for col in columns)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    plotted = 0
    for tr in traces:
        for col in columns:
            t = tr.column("t")
            v = tr.column(col)
            keep = np.isfinite(v) & (t > 0)
            dropped = 0
            if col in _GAP_COLUMNS:
                positive = v > 0
                dropped = int((keep & ~positive).sum())
                keep &= positive
            label = f"{tr.solver}:{col}"
            sidecar = out_path.with_name(
                f"{out_path.stem}__{_slug(tr.solver)}__{_slug(col)}.dat"
            )
            with open(sidecar, "w", encoding="utf-8") as fh:
                fh.write(f"# series={label}\n")
                if dropped:
                    fh.write(f"# dropped_nonpositive={dropped}\n")
                for ti, vi in zip(t[keep], v[keep]):
                    fh.write(f"{_render(int(ti))} {_render(vi)}\n")
            if keep.sum() == 0:
                raise InsufficientData(f"series {label!r} is empty after filtering")
            ax.plot(t[keep], v[keep], label=label, linewidth=1.0)
            plotted += 1
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel("iteration")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, format=out_path.suffix.lstrip(".") or "svg")
    plt.close(fig)
    return out_path


def _slug(s: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_" else "-" for ch in s)
