"""Line figures with seed-pooled error bars from sweep metrics CSVs."""

from .plotting import (
    ERROR_BAR_MODES,
    FIGURES,
    FigureSpec,
    plot,
    pooled_series,
    read_rows,
)

__version__ = "0.1.0"

__all__ = [
    "ERROR_BAR_MODES",
    "FIGURES",
    "FigureSpec",
    "plot",
    "pooled_series",
    "read_rows",
]
