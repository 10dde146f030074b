"""Build line figures out of sweep metrics CSVs.

Rows are pooled per (group, x) point into one line per group, with a
standard-error bar wherever more than one seed backs the point. The
input is never written to, and nothing is written out until the whole
CSV has parsed and pooled, so a bad input cannot leave a half-drawn
image behind. Rendering the same CSV twice produces the same bytes.
"""

import csv
import math
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

ERROR_BAR_MODES = ("stderr", "none")

# every input is a metrics CSV, so the y axis and the replication
# column are fixed rather than configurable
Y_COLUMN = "hit_prob"
SEED_COLUMN = "seed"

_FIGSIZE = (6.4, 4.0)
_DPI = 150


@dataclass
class FigureSpec:
    """One figure: which CSV, which column walks the x axis, which
    columns split rows into lines, and where the image lands."""

    csv_path: str
    x_column: str
    group_by: tuple
    out_path: str
    error_bars: str = "stderr"

    def __post_init__(self):
        self.group_by = tuple(self.group_by)
        if not self.group_by:
            raise ValueError("group_by must name at least one column")
        if self.error_bars not in ERROR_BAR_MODES:
            raise ValueError(
                f"unknown error-bar mode {self.error_bars!r}; expected one of {ERROR_BAR_MODES}"
            )
        if not str(self.out_path).endswith(".png"):
            raise ValueError("out_path must end in .png; the vector copy lands next to it")


def read_rows(csv_path) -> List[dict]:
    """All data rows as dicts, or a clear error when the file is not a
    usable table."""
    with open(csv_path, newline="") as fh:
        try:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise ValueError(f"{csv_path}: empty file, expected a CSV header")
            rows = []
            for i, row in enumerate(reader, start=2):
                if None in row:
                    raise ValueError(f"{csv_path}: line {i} has more fields than the header")
                if any(v is None for v in row.values()):
                    raise ValueError(f"{csv_path}: line {i} has fewer fields than the header")
                rows.append(row)
        except csv.Error as exc:
            raise ValueError(f"{csv_path}: malformed CSV: {exc}") from None
    if not rows:
        raise ValueError(f"{csv_path}: no data rows")
    return rows


def _order_key(key):
    # numeric-aware so K=50 sorts before K=500 despite the strings
    out = []
    for v in key:
        try:
            out.append((0, float(v), ""))
        except ValueError:
            out.append((1, 0.0, v))
    return out


def pooled_series(rows, spec: FigureSpec) -> List[Tuple[str, list, list, list]]:
    """One series per group, points sorted by x.

    Returns (label, xs, means, errs) tuples in a stable group order;
    an err is None where only a single row backs the point.
    """
    header = rows[0].keys()
    for name in (spec.x_column, *spec.group_by, Y_COLUMN, SEED_COLUMN):
        if name not in header:
            raise ValueError(f"column {name!r} not in CSV header")

    buckets = {}
    for i, row in enumerate(rows, start=2):
        key = tuple(row[c] for c in spec.group_by)
        try:
            x = float(row[spec.x_column])
            y = float(row[Y_COLUMN])
        except ValueError:
            raise ValueError(
                f"line {i}: non-numeric {spec.x_column!r} or {Y_COLUMN!r} value"
            ) from None
        buckets.setdefault(key, {}).setdefault(x, []).append(y)

    series = []
    for key in sorted(buckets, key=_order_key):
        xs = sorted(buckets[key])
        means, errs = [], []
        for x in xs:
            ys = buckets[key][x]
            means.append(statistics.fmean(ys))
            errs.append(
                statistics.stdev(ys) / math.sqrt(len(ys)) if len(ys) > 1 else None
            )
        label = ", ".join(f"{c}={v}" for c, v in zip(spec.group_by, key))
        series.append((label, xs, means, errs))
    return series


def plot(spec: FigureSpec) -> str:
    """Render the figure and return the raster path.

    Writes a PNG at out_path and a PDF beside it, with the metadata that
    would vary between runs stripped so reruns are byte-identical.
    """
    series = pooled_series(read_rows(spec.csv_path), spec)

    fig, ax = plt.subplots(figsize=_FIGSIZE)
    try:
        for label, xs, means, errs in series:
            if spec.error_bars == "stderr" and any(e is not None for e in errs):
                ax.errorbar(
                    xs,
                    means,
                    yerr=[e if e is not None else 0.0 for e in errs],
                    marker="o",
                    capsize=3,
                    label=label,
                )
            else:
                ax.plot(xs, means, marker="o", label=label)
        ax.set_xlabel(spec.x_column)
        ax.set_ylabel("hit probability")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
        png = Path(spec.out_path)
        fig.savefig(png, dpi=_DPI, metadata={"Software": None})
        fig.savefig(png.with_suffix(".pdf"), metadata={"CreationDate": None})
    finally:
        plt.close(fig)
    return str(png)


# ready-made specs for the three sweep presets shipped with the
# simulator: policy comparison over coverage, cache fraction per volume
# mix, and request-shape comparison over coverage
FIGURES = {
    "policy-coverage": lambda csv_path, out_path: FigureSpec(
        str(csv_path), "nbs_target", ("policy", "K"), str(out_path)
    ),
    "volume-cache-fraction": lambda csv_path, out_path: FigureSpec(
        str(csv_path), "rho", ("policy", "volume_mean"), str(out_path)
    ),
    "shape-coverage": lambda csv_path, out_path: FigureSpec(
        str(csv_path), "nbs_target", ("shape_mix",), str(out_path)
    ),
}
