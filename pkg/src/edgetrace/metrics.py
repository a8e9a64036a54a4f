"""Segment statistics used to compare tracing methods."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .baselines import SegmentSet, label_components
from .core import BinaryImage
from .tracer import TraceResult

HISTOGRAM_BINS = ("0", "1", "2", "3", ">3")

CSV_HEADER = (
    "method",
    "set_pixels",
    "segments",
    "components",
    "segment_pixels",
    "avg_pixels_per_segment",
    "segments_per_component",
    "segment_pixel_ratio",
    *(f"assigned_{b}" for b in ("0", "1", "2", "3", "gt3")),
)


@dataclass(frozen=True)
class MetricsReport:
    method: str
    set_pixels: int
    segments: int
    components: int
    segment_pixels: int
    avg_pixels_per_segment: float
    segments_per_component: float
    segment_pixel_ratio: float
    # Fractions of set pixels lying in 0, 1, 2, 3 and more than 3 segments.
    assignment_histogram: tuple[float, float, float, float, float]

    def csv_row(self) -> list[str]:
        return [
            self.method,
            str(self.set_pixels),
            str(self.segments),
            str(self.components),
            str(self.segment_pixels),
            f"{self.avg_pixels_per_segment:.6f}",
            f"{self.segments_per_component:.6f}",
            f"{self.segment_pixel_ratio:.6f}",
            *(f"{v:.6f}" for v in self.assignment_histogram),
        ]


def compute_metrics(image: BinaryImage, segments: SegmentSet | TraceResult) -> MetricsReport:
    """Segment size, decomposition, redundancy and pixel assignment statistics.

    Segment pixels are counted with multiplicity, so a pixel visited twice
    by one boundary walk counts twice. For the assignment histogram each set
    pixel counts the distinct segments containing it. Ambiguity points of a
    trace result that no edge reaches land in bin 0.
    """
    if isinstance(segments, TraceResult):
        if segments.image.shape != image.shape:
            raise ValueError("trace result does not belong to this image")
        method = "ours"
        segs = [e.points for e in segments.edges]
    else:
        method = segments.method
        segs = list(segments.segments)

    h, w = image.shape
    pix = image.pixels
    hits = np.zeros((h, w), dtype=np.int64)
    total = 0
    for seg in segs:
        total += len(seg)
        if not seg:
            continue
        arr = np.asarray(seg, dtype=np.int64)
        if arr[:, 0].min() < 0 or arr[:, 0].max() >= w or arr[:, 1].min() < 0 or arr[:, 1].max() >= h:
            raise ValueError("segment point outside the image")
        if not pix[arr[:, 1], arr[:, 0]].all():
            raise ValueError("segment contains pixels that are not set in the image")
        flat = np.unique(arr[:, 1] * w + arr[:, 0])
        hits.ravel()[flat] += 1

    n_set = int(pix.sum(dtype=np.int64))
    _, n_comp = label_components(image)
    n_seg = len(segs)
    if n_set:
        counts = hits[pix.astype(bool)]
        hist = tuple(
            float(v) / n_set
            for v in (
                np.count_nonzero(counts == 0),
                np.count_nonzero(counts == 1),
                np.count_nonzero(counts == 2),
                np.count_nonzero(counts == 3),
                np.count_nonzero(counts > 3),
            )
        )
    else:
        hist = (0.0, 0.0, 0.0, 0.0, 0.0)
    return MetricsReport(
        method=method,
        set_pixels=n_set,
        segments=n_seg,
        components=int(n_comp),
        segment_pixels=total,
        avg_pixels_per_segment=total / n_seg if n_seg else 0.0,
        segments_per_component=n_seg / n_comp if n_comp else 0.0,
        segment_pixel_ratio=total / n_set if n_set else 0.0,
        assignment_histogram=hist,  # type: ignore[arg-type]
    )


def metrics_csv(reports: list[MetricsReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in reports:
        writer.writerow(r.csv_row())
    return buf.getvalue()
