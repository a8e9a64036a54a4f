"""Synthetic cross patterns and the runtime scaling benchmark."""

from __future__ import annotations

import csv
import gc
import io
import math
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import BinaryImage

CSV_HEADER = ("method", "layout", "n", "mean_ms", "runs")

# Crosses are 5x5 pluses placed every 4 pixels, so neighboring crosses share
# their touching arm tip and the whole pattern is one connected figure.
CROSS_PITCH = 4


def cross_count(n: int, layout: str) -> int:
    """Number of crosses actually generated for a requested count."""
    if layout == "row":
        return n
    if layout == "square":
        return math.ceil(math.sqrt(n)) ** 2
    raise ValueError(f"unknown layout {layout!r}")


def generate_cross_pattern(n: int, layout: str = "row") -> BinaryImage:
    """Chain of ``n`` connected 5x5 crosses, one ambiguity per cross center.

    ``row`` lays the crosses out left to right. ``square`` uses a
    ceil(sqrt(n)) x ceil(sqrt(n)) grid linked horizontally and vertically, so
    the count is rounded up to a full grid.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if layout == "row":
        cols, rows = n, 1
    elif layout == "square":
        cols = rows = math.ceil(math.sqrt(n))
    else:
        raise ValueError(f"unknown layout {layout!r}")
    arr = np.zeros((CROSS_PITCH * rows + 1, CROSS_PITCH * cols + 1), dtype=np.uint8)
    for r in range(rows):
        arr[2 + CROSS_PITCH * r, :] = 1
    for c in range(cols):
        arr[:, 2 + CROSS_PITCH * c] = 1
    return BinaryImage(arr)


def embed(image: BinaryImage, width: int, height: int, x0: int = 0, y0: int = 0) -> BinaryImage:
    """Place ``image`` on a blank canvas of the given size."""
    if x0 + image.width > width or y0 + image.height > height:
        raise ValueError("image does not fit on the canvas")
    arr = np.zeros((height, width), dtype=np.uint8)
    arr[y0 : y0 + image.height, x0 : x0 + image.width] = image.pixels
    return BinaryImage(arr)


@dataclass(frozen=True)
class BenchmarkSeries:
    method: str
    pattern: str
    sizes: tuple[int, ...]
    mean_runtimes: tuple[float, ...]  # milliseconds
    runs: int

    def rows(self) -> list[tuple]:
        return [
            (self.method, self.pattern, n, f"{t:.6f}", self.runs)
            for n, t in zip(self.sizes, self.mean_runtimes)
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(self.rows())
        return buf.getvalue()

    def linear_fit(self) -> tuple[float, float, float]:
        """Least-squares slope, intercept and R^2 of runtime against size."""
        return linear_fit(self.sizes, self.mean_runtimes)


def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def time_call(fn: Callable[[BinaryImage], object], image: BinaryImage, runs: int) -> float:
    """Mean wall-clock milliseconds of ``fn(image)`` over ``runs`` calls."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    clock = time.perf_counter
    # Same policy as timeit: collector pauses would otherwise scale with heap size.
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        start = clock()
        for _ in range(runs):
            fn(image)
        elapsed = clock() - start
    finally:
        if gc_was_enabled:
            gc.enable()
    return elapsed * 1000.0 / runs


def run_benchmark(
    method: str,
    layout: str,
    sizes: Iterable[int],
    runs: int,
    tracer: Callable[[BinaryImage], object] | None = None,
) -> BenchmarkSeries:
    """Time one method over cross patterns of increasing size.

    Images are generated before timing starts; sizes are the actual cross
    (ambiguity) counts.
    """
    if tracer is None:
        from .baselines import METHODS

        tracer = METHODS[method]
    sizes = list(sizes)
    if not sizes:
        raise ValueError("sizes must be non-empty")
    images = [(cross_count(n, layout), generate_cross_pattern(n, layout)) for n in sizes]
    actual = [k for k, _ in images]
    if any(b <= a for a, b in zip(actual, actual[1:])):
        raise ValueError(f"sizes must be strictly increasing, got {actual}")
    means = [time_call(tracer, img, runs) for _, img in images]
    return BenchmarkSeries(method, layout, tuple(actual), tuple(means), runs)
