"""Reference methods: connected components, Moore-neighbor tracing, border following.

All three return a :class:`SegmentSet` so they can be scored by the same
metrics as the ambiguity tracer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import ndimage

from .core import BinaryImage, Point
from .tracer import trace_all

_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class SegmentSet:
    method: str
    segments: tuple[tuple[Point, ...], ...]
    hierarchy: tuple[int | None, ...] | None = None

    def __len__(self) -> int:
        return len(self.segments)


def label_components(image: BinaryImage) -> tuple[np.ndarray, int]:
    """8-connected labels numbered by first pixel in scan order (0 = background)."""
    return ndimage.label(image.pixels, structure=_EIGHT)


def ccl(image: BinaryImage) -> SegmentSet:
    """One segment per 8-connected component, pixels in scan order."""
    labels, n = label_components(image)
    ys, xs = np.nonzero(labels)
    lab = labels[ys, xs]
    order = np.argsort(lab, kind="stable")
    bounds = np.searchsorted(lab[order], np.arange(1, n + 2))
    xs_o, ys_o = xs[order].tolist(), ys[order].tolist()
    segs = tuple(
        tuple(map(Point, xs_o[bounds[i] : bounds[i + 1]], ys_o[bounds[i] : bounds[i + 1]]))
        for i in range(n)
    )
    return SegmentSet("ccl", segs)


# Clockwise (y down) starting west: W, NW, N, NE, E, SE, S, SW.
_MOORE = ((-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1))
_MOORE_INDEX = {d: i for i, d in enumerate(_MOORE)}


def _moore_boundary(img: np.ndarray, start: tuple[int, int]) -> list[Point]:
    """Outer boundary of the component containing ``start`` (its first scan pixel).

    ``img`` is zero padded by one pixel; ``start`` is in padded coordinates.
    The walk begins with the west neighbor as backtrack and stops, Jacob
    style, once it leaves the start pixel with the same move and backtrack as
    the very first step. Plain "re-enter from the west" never fires on open
    1-px lines, whose start is re-entered from the east.
    """
    sx, sy = start
    p, back = start, (sx - 1, sy)
    out = [Point(sx - 1, sy - 1)]
    first_step = None
    # Safety cap; each pixel can be entered from at most 8 backtracks.
    for _ in range(8 * int(img.sum()) + 8):
        k = _MOORE_INDEX[(back[0] - p[0], back[1] - p[1])]
        step = None
        for i in range(1, 9):
            dx, dy = _MOORE[(k + i) % 8]
            c = (p[0] + dx, p[1] + dy)
            if img[c[1], c[0]]:
                pdx, pdy = _MOORE[(k + i - 1) % 8]
                step = c, (p[0] + pdx, p[1] + pdy)
                break
        if step is None:
            break
        if first_step is None:
            first_step = step
        elif p == start and step == first_step:
            out.pop()
            break
        p, back = step
        out.append(Point(p[0] - 1, p[1] - 1))
    return out


def moore_trace(image: BinaryImage) -> SegmentSet:
    """Moore-neighbor tracing around the outer boundary of each component."""
    labels, _ = label_components(image)
    # Any set 8-neighbor belongs to the same component, so the walk can run on
    # the plain padded image.
    padded = np.pad(image.pixels, 1)
    ys, xs = np.nonzero(labels)
    # First occurrence of each label in scan order is its start pixel.
    _, first = np.unique(labels[ys, xs], return_index=True)
    segs = tuple(
        tuple(_moore_boundary(padded, (int(xs[i]) + 1, int(ys[i]) + 1))) for i in first.tolist()
    )
    return SegmentSet("mnt", segs)


# Clockwise (row down) starting east, as (drow, dcol).
_RING = ((0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1))
_RING_INDEX = {d: i for i, d in enumerate(_RING)}


def border_following(image: BinaryImage) -> SegmentSet:
    """Topological border following with outer/hole hierarchy.

    Foreground is 8-connected and background 4-connected. Segment ``k`` is the
    ``k``-th border found in raster order; ``hierarchy[k]`` is the index of the
    enclosing border, or None for borders directly inside the frame.
    """
    h, w = image.shape
    f = np.pad(image.pixels.astype(np.int32), 1)
    f_list = f.tolist()
    # Border 1 is the frame, a hole border.
    is_hole = {1: True}
    parent: dict[int, int] = {1: 0}
    borders: dict[int, list[Point]] = {}
    nbd = 1
    for i in range(1, h + 1):
        row = f_list[i]
        lnbd = 1
        for j in range(1, w + 1):
            v = row[j]
            if v == 0:
                continue
            if v == 1 and row[j - 1] == 0:
                nbd += 1
                start_from = (i, j - 1)
                hole = False
            elif v >= 1 and row[j + 1] == 0:
                nbd += 1
                start_from = (i, j + 1)
                hole = True
                if v > 1:
                    lnbd = v
            else:
                if row[j] != 1:
                    lnbd = abs(row[j])
                continue
            prev_hole = is_hole[lnbd]
            if hole:
                par = lnbd if not prev_hole else parent[lnbd]
            else:
                par = parent[lnbd] if not prev_hole else lnbd
            is_hole[nbd] = hole
            parent[nbd] = par
            borders[nbd] = _follow(f_list, i, j, start_from, nbd)
            if row[j] != 1:
                lnbd = abs(row[j])
    order = sorted(borders)
    index = {b: k for k, b in enumerate(order)}
    segs = tuple(tuple(borders[b]) for b in order)
    hierarchy = tuple(index.get(parent[b]) for b in order)
    return SegmentSet("fcm", segs, hierarchy)


def _follow(f: list[list[int]], i: int, j: int, start_from: tuple[int, int], nbd: int) -> list[Point]:
    k0 = _RING_INDEX[(start_from[0] - i, start_from[1] - j)]
    found = None
    for s in range(8):
        di, dj = _RING[(k0 + s) % 8]
        if f[i + di][j + dj] != 0:
            found = (i + di, j + dj)
            break
    if found is None:
        f[i][j] = -nbd
        return [Point(j - 1, i - 1)]
    i1, j1 = found
    i2, j2 = i1, j1
    i3, j3 = i, j
    out = []
    while True:
        out.append(Point(j3 - 1, i3 - 1))
        k = _RING_INDEX[(i2 - i3, j2 - j3)]
        east_zero_examined = False
        i4 = j4 = None
        for s in range(1, 9):
            di, dj = _RING[(k - s) % 8]
            ni, nj = i3 + di, j3 + dj
            if f[ni][nj] != 0:
                i4, j4 = ni, nj
                break
            if (di, dj) == (0, 1):
                east_zero_examined = True
        if east_zero_examined:
            f[i3][j3] = -nbd
        elif f[i3][j3] == 1:
            f[i3][j3] = nbd
        if (i4, j4) == (i, j) and (i3, j3) == (i1, j1):
            return out
        i2, j2 = i3, j3
        i3, j3 = i4, j4


def trace_segments(image: BinaryImage) -> SegmentSet:
    """The ambiguity tracer's edges as a segment set."""
    return SegmentSet("ours", tuple(e.points for e in trace_all(image).edges))


# Raw callables for timing; each returns its method's native output.
METHODS: dict[str, Callable[[BinaryImage], object]] = {
    "ours": trace_all,
    "ccl": ccl,
    "mnt": moore_trace,
    "fcm": border_following,
}

SEGMENTERS: dict[str, Callable[[BinaryImage], SegmentSet]] = {
    "ours": trace_segments,
    "ccl": ccl,
    "mnt": moore_trace,
    "fcm": border_following,
}
