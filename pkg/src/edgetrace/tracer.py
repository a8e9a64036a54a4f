"""Second pass: trace edge pixels into ordered edges attached to ambiguities.

Tracing follows direct neighbors only, so every step takes the shortest path.
An edge that reaches an ambiguity takes exactly one of its pixels (the
connection pixel) as its first or last point and stops there. The walk is
iterative, so edge length is bounded by memory rather than recursion depth.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import chain, repeat
from typing import Iterable, Iterator, Sequence, TypeVar

import numpy as np

from .ambiguity import Ambiguity, AmbiguityRegistry, _grow_clusters, _scan, _to_point
from .core import BinaryImage, Point, flat_direct_offsets

T = TypeVar("T")

_new_tuple = tuple.__new__


@dataclass(frozen=True)
class Edge:
    id: int
    points: tuple[Point, ...]

    def __len__(self) -> int:
        return len(self.points)

    @property
    def first(self) -> Point:
        return self.points[0]

    @property
    def last(self) -> Point:
        return self.points[-1]

    @property
    def is_closed(self) -> bool:
        return len(self.points) > 1 and self.points[0] == self.points[-1]


class EdgeIdMap:
    """Per-pixel lists of the ids of all edges running through each pixel.

    Cells holding a single id live in a dense int grid; cells shared by
    several edges (ambiguity connection pixels) live in a small dict.
    """

    __slots__ = ("_single", "_multi")

    def __init__(self, single: np.ndarray, multi: dict[Point, tuple[int, ...]]):
        single.flags.writeable = False
        self._single = single
        self._multi = multi

    @classmethod
    def from_edges(cls, shape: tuple[int, int], edges: Iterable[Edge]) -> EdgeIdMap:
        cells: dict[Point, list[int]] = {}
        for e in edges:
            for p in e.points:
                ids = cells.setdefault(p, [])
                if not ids or ids[-1] != e.id:
                    ids.append(e.id)
        single = np.full(shape, -1, dtype=np.int32)
        multi = {}
        for p, ids in cells.items():
            if len(ids) == 1:
                single[p.y, p.x] = ids[0]
            else:
                multi[p] = tuple(ids)
        return cls(single, multi)

    @property
    def shape(self) -> tuple[int, int]:
        return self._single.shape

    def ids_at(self, p: tuple[int, int]) -> tuple[int, ...]:
        p = Point(*p)
        ids = self._multi.get(p)
        if ids is not None:
            return ids
        h, w = self._single.shape
        if not (0 <= p.x < w and 0 <= p.y < h):
            return ()
        i = int(self._single[p.y, p.x])
        return () if i < 0 else (i,)

    __getitem__ = ids_at

    def cells(self) -> Iterator[tuple[Point, tuple[int, ...]]]:
        """Non-empty cells in row-major order."""
        ys, xs = np.nonzero(self._single >= 0)
        out = {Point(x, y): (int(self._single[y, x]),) for x, y in zip(xs.tolist(), ys.tolist())}
        out.update(self._multi)
        for p in sorted(out, key=lambda q: (q.y, q.x)):
            yield p, out[p]

    def cell_sizes(self) -> np.ndarray:
        sizes = (self._single >= 0).astype(np.int32)
        for p, ids in self._multi.items():
            sizes[p.y, p.x] = len(ids)
        return sizes

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EdgeIdMap):
            return NotImplemented
        return list(self.cells()) == list(other.cells())

    def __repr__(self) -> str:
        return f"EdgeIdMap({self.shape[1]}x{self.shape[0]}, shared={len(self._multi)})"


@dataclass(frozen=True, eq=True)
class TraceResult:
    """Edges, ambiguities and the edge-id map of one image.

    ``image`` is the binary image the structures describe; postprocessing
    steps return results whose image reflects removed or drawn pixels.
    """

    image: BinaryImage
    edges: tuple[Edge, ...]
    ambiguities: AmbiguityRegistry
    edge_ids: EdgeIdMap

    def ambiguity_at(self, p: tuple[int, int]):
        i = self.ambiguities.id_at(p)
        return None if i is None else self.ambiguities[i]

    def terminal_ambiguities(self, e: int) -> tuple[int | None, int | None]:
        """Ambiguity ids touched by the first and last point of edge ``e``."""
        edge = self.edges[e]
        return self.ambiguities.id_at(edge.first), self.ambiguities.id_at(edge.last)

    def edges_at_ambiguity(self, a: int) -> list[int]:
        """Ids of edges whose first or last point lies in ambiguity ``a``."""
        ids: set[int] = set()
        for p in self.ambiguities[a].points:
            for e in self.edge_ids.ids_at(p):
                edge = self.edges[e]
                if p == edge.first or p == edge.last:
                    ids.add(e)
        return sorted(ids)

    @classmethod
    def build(
        cls,
        image: BinaryImage,
        edges: Iterable[Sequence[tuple[int, int]]],
        ambiguities: AmbiguityRegistry,
    ) -> TraceResult:
        """Assemble a result from point lists; ids follow list order."""
        es = tuple(Edge(i, tuple(Point(*p) for p in pts)) for i, pts in enumerate(edges))
        return cls(image, es, ambiguities, EdgeIdMap.from_edges(image.shape, es))


def merge_points(first: Sequence[T], second: Sequence[T]) -> list[T]:
    """Join two point sequences that overlap in one terminal point.

    The overlap appears once at the seam. Cases are tried in this order: both
    start at the same point, both end at the same point, ``first`` starts where
    ``second`` ends, ``first`` ends where ``second`` starts.
    """
    if not first or not second:
        raise ValueError("cannot merge an empty edge")
    if first[0] == second[0]:
        return list(first[::-1]) + list(second[1:])
    if first[-1] == second[-1]:
        return list(first) + list(second[-2::-1])
    if first[0] == second[-1]:
        return list(second) + list(first[1:])
    if first[-1] == second[0]:
        return list(first) + list(second[1:])
    raise ValueError(
        f"edges share no terminal point: {first[0]}..{first[-1]} vs {second[0]}..{second[-1]}"
    )


class EdgeStore:
    """Mutable edge list with the per-pixel id map kept in sync.

    Retired ids leave a hole until :meth:`to_result` compacts the list.
    """

    def __init__(self, edges: Iterable[Sequence[tuple[int, int]]] = ()):
        self.edges: list[list[Point] | None] = []
        self.cells: dict[Point, list[int]] = {}
        for pts in edges:
            self.add(pts)

    @classmethod
    def from_result(cls, result: TraceResult) -> EdgeStore:
        return cls(e.points for e in result.edges)

    def _index(self, eid: int, points: Iterable[Point]) -> None:
        for p in points:
            ids = self.cells.setdefault(p, [])
            if eid not in ids:
                ids.append(eid)

    def _unindex(self, eid: int, points: Iterable[Point]) -> None:
        for p in points:
            ids = self.cells.get(p)
            if ids and eid in ids:
                ids.remove(eid)
                if not ids:
                    del self.cells[p]

    def add(self, points: Sequence[tuple[int, int]]) -> int:
        pts = [Point(*p) for p in points]
        eid = len(self.edges)
        self.edges.append(pts)
        self._index(eid, pts)
        return eid

    def get(self, eid: int) -> list[Point]:
        pts = self.edges[eid]
        if pts is None:
            raise KeyError(f"edge {eid} has been retired")
        return pts

    def live_ids(self) -> list[int]:
        return [i for i, e in enumerate(self.edges) if e is not None]

    def replace(self, eid: int, points: Sequence[tuple[int, int]]) -> None:
        self._unindex(eid, self.get(eid))
        pts = [Point(*p) for p in points]
        self.edges[eid] = pts
        self._index(eid, pts)

    def remove(self, eid: int) -> None:
        self._unindex(eid, self.get(eid))
        self.edges[eid] = None

    def ids_at(self, p: tuple[int, int]) -> list[int]:
        return list(self.cells.get(Point(*p), ()))

    def merge(self, a: int, b: int) -> int:
        """Merge edges ``a`` and ``b``; the result keeps the smaller id."""
        if a == b:
            raise ValueError("cannot merge an edge with itself")
        merged = merge_points(self.get(a), self.get(b))
        keep, retire = min(a, b), max(a, b)
        self.remove(retire)
        self.replace(keep, merged)
        return keep

    def to_result(self, image: BinaryImage, ambiguities: AmbiguityRegistry) -> TraceResult:
        return TraceResult.build(image, (e for e in self.edges if e is not None), ambiguities)


def merge_edges(store: EdgeStore, a: int, b: int) -> int:
    return store.merge(a, b)


class _Tracer:
    """Tracing state over flat indices of a 1-pixel zero-padded grid."""

    def __init__(self, image: BinaryImage):
        self.image = image
        self.stride, self.flats, self.mask_of, candidates = _scan(image)
        self.offsets = flat_direct_offsets(self.stride)
        self.clusters, self.amb = _grow_clusters(candidates, self.mask_of, self.offsets)
        self.owner: dict[int, int] = {}
        self.shared: dict[int, list[int]] = {}
        self.edges: list[list[int]] = []

    def walk(self, p: int, edge: list[int], eid: int) -> None:
        """Append ``p`` and keep following the single unvisited neighbor."""
        amb, owner, offsets, mask_of = self.amb, self.owner, self.offsets, self.mask_of
        while True:
            edge.append(p)
            if p in amb:
                ids = self.shared.setdefault(p, [])
                if not ids or ids[-1] != eid:
                    ids.append(eid)
                return
            owner[p] = eid
            nxt = -1
            for off in offsets[mask_of[p]]:
                n = p + off
                if n in amb or n not in owner:
                    if nxt >= 0:
                        # A non-ambiguity pixel has at most two direct neighbors and
                        # one of them is where the walk came from.
                        raise AssertionError(f"walk forked at flat index {p}")
                    nxt = n
            if nxt < 0:
                return
            p = nxt

    def trace_edge(self, start: int) -> None:
        """Trace the edge through an untraced, non-ambiguity ``start`` pixel."""
        eid = len(self.edges)
        self.owner[start] = eid
        unvisited = [
            start + off
            for off in self.offsets[self.mask_of[start]]
            if start + off in self.amb or start + off not in self.owner
        ]
        if len(unvisited) == 2:
            part_one = [start]
            self.walk(unvisited[0], part_one, eid)
            second = unvisited[1]
            if second not in self.amb and second in self.owner:
                # Closed loop: part one already came round to the second neighbor.
                self.edges.append(part_one)
                return
            part_two = [start]
            # Part two is recorded under the surviving id directly; this is the
            # id map state the merge of (eid, eid + 1) would leave behind.
            self.walk(second, part_two, eid)
            self.edges.append(merge_points(part_one, part_two))
        elif len(unvisited) == 1:
            edge = [start]
            self.walk(unvisited[0], edge, eid)
            self.edges.append(edge)
        else:
            self.edges.append([start])

    def run(self) -> TraceResult:
        amb, owner = self.amb, self.owner
        for f in self.flats:
            if f not in amb and f not in owner:
                self.trace_edge(f)
        return self._finish()

    def _finish(self) -> TraceResult:
        stride = self.stride
        shape = self.image.shape
        amb_points = self._points(self.clusters)
        amb_grid = np.full(shape, -1, dtype=np.int32)
        self._scatter(amb_grid, chain.from_iterable(self.clusters),
                      np.repeat(np.arange(len(self.clusters), dtype=np.int32), [len(c) for c in self.clusters]))
        registry = AmbiguityRegistry._from_grid(
            [Ambiguity(i, pts) for i, pts in enumerate(amb_points)], amb_grid
        )
        edges = tuple(Edge(i, pts) for i, pts in enumerate(self._points(self.edges)))
        single = np.full(shape, -1, dtype=np.int32)
        self._scatter(single, self.owner.keys(), np.fromiter(self.owner.values(), np.int32, len(self.owner)))
        lone = [(f, ids[0]) for f, ids in self.shared.items() if len(ids) == 1]
        self._scatter(single, (f for f, _ in lone), np.array([i for _, i in lone], dtype=np.int32))
        multi = {_to_point(f, stride): tuple(ids) for f, ids in self.shared.items() if len(ids) > 1}
        return TraceResult(self.image, edges, registry, EdgeIdMap(single, multi))

    def _scatter(self, grid: np.ndarray, flats: Iterable[int], values: np.ndarray) -> None:
        """Write ``values`` at padded flat indices into an unpadded grid."""
        if not len(values):
            return
        flat = np.fromiter(flats, dtype=np.int64, count=len(values))
        ys, xs = np.divmod(flat - self.stride - 1, self.stride)
        grid[ys, xs] = values

    def _points(self, groups: list[list[int]]) -> list[tuple[Point, ...]]:
        """Convert groups of flat indices to Point tuples in one pass."""
        total = sum(map(len, groups))
        flat = np.fromiter(chain.from_iterable(groups), dtype=np.int64, count=total)
        ys, xs = np.divmod(flat - self.stride - 1, self.stride)
        # tuple.__new__ skips the Python-level NamedTuple constructor.
        pts = list(map(_new_tuple, repeat(Point), zip(xs.tolist(), ys.tolist())))
        out = []
        i = 0
        for g in groups:
            j = i + len(g)
            out.append(tuple(pts[i:j]))
            i = j
        return out


def trace_all(image: BinaryImage) -> TraceResult:
    """Decompose a binary edge image into ordered edges and ambiguities."""
    return _Tracer(image).run()
