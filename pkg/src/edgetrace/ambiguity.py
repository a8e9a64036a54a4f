"""First pass: find ambiguity points and grow them into coherent clusters."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import AMBIGUOUS_MASK, NEIGHBOR_OFFSETS, BinaryImage, Point, flat_direct_offsets


@dataclass(frozen=True)
class Ambiguity:
    id: int
    points: tuple[Point, ...]

    def __len__(self) -> int:
        return len(self.points)


class AmbiguityRegistry:
    """Ambiguity records plus a per-pixel grid of ambiguity ids (-1 = none).

    Every member pixel resolves to the full shared cluster record, so the whole
    point list is reachable from any of its pixels.
    """

    __slots__ = ("ambiguities", "_ids")

    def __init__(self, shape: tuple[int, int], ambiguities: Sequence[Ambiguity] = ()):
        self.ambiguities: tuple[Ambiguity, ...] = tuple(ambiguities)
        for i, amb in enumerate(self.ambiguities):
            if amb.id != i:
                raise ValueError("ambiguity ids must be dense and in list order")
        ids = np.full(shape, -1, dtype=np.int32)
        if self.ambiguities:
            xs = np.fromiter((p[0] for a in self.ambiguities for p in a.points), dtype=np.int64)
            ys = np.fromiter((p[1] for a in self.ambiguities for p in a.points), dtype=np.int64)
            owners = np.repeat(
                np.arange(len(self.ambiguities), dtype=np.int32),
                [len(a.points) for a in self.ambiguities],
            )
            flat = ys * shape[1] + xs
            if len(np.unique(flat)) != len(flat):
                raise ValueError("a pixel belongs to two ambiguities or repeats within one")
            ids[ys, xs] = owners
        ids.flags.writeable = False
        self._ids = ids

    @classmethod
    def _from_grid(cls, ambiguities: Sequence[Ambiguity], ids: np.ndarray) -> AmbiguityRegistry:
        """Trusted constructor for callers that already built a consistent id grid."""
        obj = cls.__new__(cls)
        obj.ambiguities = tuple(ambiguities)
        ids.flags.writeable = False
        obj._ids = ids
        return obj

    @classmethod
    def from_clusters(cls, shape: tuple[int, int], clusters: Iterable[Sequence[tuple[int, int]]]) -> AmbiguityRegistry:
        ambs = [Ambiguity(i, tuple(Point(*p) for p in pts)) for i, pts in enumerate(clusters)]
        return cls(shape, ambs)

    @property
    def shape(self) -> tuple[int, int]:
        return self._ids.shape

    @property
    def id_grid(self) -> np.ndarray:
        return self._ids

    def id_at(self, p: tuple[int, int]) -> int | None:
        x, y = p
        h, w = self._ids.shape
        if not (0 <= x < w and 0 <= y < h):
            return None
        i = int(self._ids[y, x])
        return None if i < 0 else i

    def __contains__(self, p: tuple[int, int]) -> bool:
        return self.id_at(p) is not None

    def __len__(self) -> int:
        return len(self.ambiguities)

    def __iter__(self):
        return iter(self.ambiguities)

    def __getitem__(self, i: int) -> Ambiguity:
        return self.ambiguities[i]

    def point_count(self) -> int:
        return sum(len(a) for a in self.ambiguities)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AmbiguityRegistry):
            return NotImplemented
        return self.shape == other.shape and self.ambiguities == other.ambiguities

    def __repr__(self) -> str:
        return f"AmbiguityRegistry({len(self.ambiguities)} ambiguities, {self.point_count()} points)"


def ambiguity_at(registry: AmbiguityRegistry, p: tuple[int, int]) -> Ambiguity | None:
    i = registry.id_at(p)
    return None if i is None else registry.ambiguities[i]


def _grow_clusters(
    candidates: list[int], mask_of: dict[int, int], offsets: tuple[tuple[int, ...], ...]
) -> tuple[list[list[int]], dict[int, int]]:
    """Region-grow clusters over flat padded indices.

    ``candidates`` are the ambiguity points in scan order; growth follows
    direct neighbors that are candidates themselves.
    """
    cand = set(candidates)
    owner: dict[int, int] = {}
    clusters: list[list[int]] = []
    for start in candidates:
        if start in owner:
            continue
        cid = len(clusters)
        cluster = [start]
        owner[start] = cid
        c = 0
        while c < len(cluster):
            q = cluster[c]
            for off in offsets[mask_of[q]]:
                n = q + off
                if n in cand and n not in owner:
                    owner[n] = cid
                    cluster.append(n)
            c += 1
        clusters.append(cluster)
    return clusters, owner


def _scan(image: BinaryImage):
    """Shared setup for both passes: flat indices of set pixels and their masks."""
    stride = image.width + 2
    padded = np.pad(image.pixels, 1).ravel()
    # Only set pixels need a mask; sparse edge maps make this much cheaper
    # than computing masks for the whole grid.
    idx = np.flatnonzero(padded)
    mvals = np.zeros(idx.size, dtype=np.uint8)
    for i, (dx, dy) in enumerate(NEIGHBOR_OFFSETS):
        mvals |= padded[idx + (dy * stride + dx)] << i
    flats = idx.tolist()
    mask_of = dict(zip(flats, mvals.tolist()))
    amb = AMBIGUOUS_MASK[mvals]
    candidates = [f for f, a in zip(flats, amb.tolist()) if a]
    return stride, flats, mask_of, candidates


def _to_point(f: int, stride: int) -> Point:
    return Point(f % stride - 1, f // stride - 1)


def preprocess_ambiguities(image: BinaryImage) -> AmbiguityRegistry:
    """Identify every ambiguity point and group them into coherent ambiguities.

    Pixels are scanned row-major; ids follow discovery order and members keep
    their growth order.
    """
    stride, _, mask_of, candidates = _scan(image)
    clusters, _ = _grow_clusters(candidates, mask_of, flat_direct_offsets(stride))
    return AmbiguityRegistry.from_clusters(
        image.shape, ([_to_point(f, stride) for f in c] for c in clusters)
    )
