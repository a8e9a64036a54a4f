"""Pixel-grid primitives and the 8-neighborhood ambiguity criterion.

Neighbors of a center pixel ``(x, y)`` are numbered clockwise from the
top-left corner::

    p0 p1 p2
    p7  c p3
    p6 p5 p4

Odd indices are orthogonal neighbors, even indices diagonal ones. Image
coordinates have their origin at the top-left with ``y`` pointing down.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class Point(NamedTuple):
    x: int
    y: int


NEIGHBOR_OFFSETS: tuple[tuple[int, int], ...] = (
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
)

# Bit masks of the four 2x2 blocks containing the center: (p7,p0,p1),
# (p1,p2,p3), (p3,p4,p5), (p5,p6,p7).
FOUR_CLUSTER_GROUPS: tuple[int, ...] = (
    (1 << 7) | (1 << 0) | (1 << 1),
    (1 << 1) | (1 << 2) | (1 << 3),
    (1 << 3) | (1 << 4) | (1 << 5),
    (1 << 5) | (1 << 6) | (1 << 7),
)


class BinaryImage:
    """A width x height grid of 0/1 pixels.

    Reads outside the grid return 0. The pixel array is stored read-only so
    instances can be shared freely.
    """

    __slots__ = ("_pixels",)

    def __init__(self, pixels: np.ndarray | Sequence[Sequence[int]]):
        arr = np.asarray(pixels)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D pixel grid, got shape {arr.shape}")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValueError("pixel values must be exactly 0 or 1")
        arr = np.array(arr, dtype=np.uint8, order="C")
        arr.flags.writeable = False
        self._pixels = arr

    @classmethod
    def blank(cls, width: int, height: int) -> BinaryImage:
        return cls(np.zeros((height, width), dtype=np.uint8))

    @classmethod
    def from_points(cls, width: int, height: int, points: Iterable[tuple[int, int]]) -> BinaryImage:
        arr = np.zeros((height, width), dtype=np.uint8)
        for x, y in points:
            arr[y, x] = 1
        return cls(arr)

    @classmethod
    def from_ascii(cls, text: str, on: str = "#") -> BinaryImage:
        """Build an image from rows of text; ``on`` characters become 1.

        Leading/trailing blank lines are dropped and rows are right-padded to
        the longest row.
        """
        rows = [r for r in text.strip("\n").splitlines()]
        width = max((len(r) for r in rows), default=0)
        arr = np.zeros((len(rows), width), dtype=np.uint8)
        for y, row in enumerate(rows):
            for x, ch in enumerate(row):
                if ch == on:
                    arr[y, x] = 1
        return cls(arr)

    @property
    def pixels(self) -> np.ndarray:
        return self._pixels

    @property
    def width(self) -> int:
        return self._pixels.shape[1]

    @property
    def height(self) -> int:
        return self._pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self._pixels.shape

    def contains(self, p: tuple[int, int]) -> bool:
        return 0 <= p[0] < self.width and 0 <= p[1] < self.height

    def __getitem__(self, p: tuple[int, int]) -> int:
        x, y = p
        if 0 <= x < self.width and 0 <= y < self.height:
            return int(self._pixels[y, x])
        return 0

    def count(self) -> int:
        return int(self._pixels.sum(dtype=np.int64))

    def set_points(self) -> list[Point]:
        """All set pixels in row-major order."""
        ys, xs = np.nonzero(self._pixels)
        return list(map(Point, xs.tolist(), ys.tolist()))

    def with_pixels(self, points: Iterable[tuple[int, int]], value: int) -> BinaryImage:
        arr = self._pixels.copy()
        for x, y in points:
            arr[y, x] = value
        return BinaryImage(arr)

    def to_ascii(self, on: str = "#", off: str = ".") -> str:
        return "\n".join("".join(on if v else off for v in row) for row in self._pixels.tolist())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryImage):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._pixels, other._pixels))

    def __hash__(self) -> int:
        return hash((self.shape, self._pixels.tobytes()))

    def __repr__(self) -> str:
        return f"BinaryImage({self.width}x{self.height}, set={self.count()})"


def _direct_indices(mask: int) -> tuple[int, ...]:
    out = []
    for i in range(8):
        if not (mask >> i) & 1:
            continue
        if i % 2 == 1:
            out.append(i)
        elif not (mask >> ((i - 1) % 8)) & 1 and not (mask >> ((i + 1) % 8)) & 1:
            out.append(i)
    return tuple(out)


def _has_four_cluster(mask: int) -> bool:
    return any(mask & g == g for g in FOUR_CLUSTER_GROUPS)


# Lookup tables over all 256 occupancy masks.
DIRECT_NEIGHBORS: tuple[tuple[int, ...], ...] = tuple(_direct_indices(m) for m in range(256))
FOUR_CLUSTER: tuple[bool, ...] = tuple(_has_four_cluster(m) for m in range(256))
AMBIGUOUS_MASK: np.ndarray = np.array(
    [len(DIRECT_NEIGHBORS[m]) > 2 or FOUR_CLUSTER[m] for m in range(256)], dtype=bool
)


def _check_bounds(image: BinaryImage, p: tuple[int, int]) -> None:
    if not image.contains(p):
        raise IndexError(f"point {tuple(p)} outside {image.width}x{image.height} image")


def neighbor_occupancy(image: BinaryImage, p: tuple[int, int]) -> int:
    """8-bit mask whose bit ``i`` is set iff neighbor ``p_i`` is a set pixel."""
    _check_bounds(image, p)
    x, y = p
    mask = 0
    for i, (dx, dy) in enumerate(NEIGHBOR_OFFSETS):
        if image[x + dx, y + dy]:
            mask |= 1 << i
    return mask


def get_direct_neighbors(image: BinaryImage, p: tuple[int, int]) -> list[Point]:
    """Set orthogonal neighbors plus set diagonals with no set adjacent orthogonal.

    Returned in ascending neighbor index order.
    """
    mask = neighbor_occupancy(image, p)
    x, y = p
    return [
        Point(x + NEIGHBOR_OFFSETS[i][0], y + NEIGHBOR_OFFSETS[i][1])
        for i in DIRECT_NEIGHBORS[mask]
    ]


def contains_four_cluster(image: BinaryImage, p: tuple[int, int]) -> bool:
    return FOUR_CLUSTER[neighbor_occupancy(image, p)]


def is_ambiguity_point(image: BinaryImage, p: tuple[int, int]) -> bool:
    """True if ``p`` has more than two direct neighbors or sits in a 2x2 block."""
    return bool(AMBIGUOUS_MASK[neighbor_occupancy(image, p)])


def occupancy_masks(image: BinaryImage) -> np.ndarray:
    """Occupancy masks of every pixel at once, as a ``(height, width)`` uint8 array."""
    h, w = image.shape
    padded = np.pad(image.pixels, 1)
    masks = np.zeros((h, w), dtype=np.uint8)
    for i, (dx, dy) in enumerate(NEIGHBOR_OFFSETS):
        masks |= padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w] << i
    return masks


def ambiguity_point_mask(image: BinaryImage) -> np.ndarray:
    """Boolean grid marking every set pixel that satisfies the ambiguity criterion."""
    return AMBIGUOUS_MASK[occupancy_masks(image)] & image.pixels.astype(bool)


@lru_cache(maxsize=64)
def flat_direct_offsets(row_stride: int) -> tuple[tuple[int, ...], ...]:
    """Per-mask direct neighbor offsets in a flattened grid with the given row stride."""
    offs = tuple(dy * row_stride + dx for dx, dy in NEIGHBOR_OFFSETS)
    return tuple(tuple(offs[i] for i in DIRECT_NEIGHBORS[m]) for m in range(256))


def is_8_adjacent(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return a != b and abs(a[0] - b[0]) <= 1 and abs(a[1] - b[1]) <= 1
