"""Modular postprocessing on trace results.

Every operation takes a :class:`TraceResult` and returns a new one. Removal
steps clear the removed pixels in the returned image so the result can be
re-traced consistently; connection steps draw their bridge pixels into it.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ambiguity import Ambiguity, AmbiguityRegistry
from .core import Point
from .tracer import Edge, EdgeStore, TraceResult, trace_all

logger = logging.getLogger(__name__)


class EdgeClass(enum.Enum):
    FREE = "free"
    DANGLING = "dangling"
    BRIDGED = "bridged"


def classify_edge(result: TraceResult, e: int) -> EdgeClass:
    start, end = result.terminal_ambiguities(e)
    touching = (start is not None) + (end is not None)
    return (EdgeClass.FREE, EdgeClass.DANGLING, EdgeClass.BRIDGED)[touching]


def _matches(
    result: TraceResult,
    e: int,
    edge_class: EdgeClass | None,
    shorter_than: int | None,
    longer_than: int | None,
) -> bool:
    n = len(result.edges[e])
    if shorter_than is not None and not n < shorter_than:
        return False
    if longer_than is not None and not n > longer_than:
        return False
    return edge_class is None or classify_edge(result, e) is edge_class


def remove_edges_where(
    result: TraceResult,
    edge_class: EdgeClass | None = None,
    shorter_than: int | None = None,
    longer_than: int | None = None,
) -> TraceResult:
    """Drop edges of a class and/or length range (lengths in pixels, strict bounds).

    Ambiguity points are kept. Pixels that belonged only to removed edges are
    cleared in the returned image.
    """
    doomed = [
        e for e in range(len(result.edges)) if _matches(result, e, edge_class, shorter_than, longer_than)
    ]
    if not doomed:
        return result
    gone = set(doomed)
    kept = [e.points for e in result.edges if e.id not in gone]
    keep_px = {p for pts in kept for p in pts}
    clear = {
        p
        for e in doomed
        for p in result.edges[e].points
        if p not in keep_px and p not in result.ambiguities
    }
    image = result.image.with_pixels(clear, 0)
    return TraceResult.build(image, kept, result.ambiguities)


def iterate_removal(
    result: TraceResult,
    edge_class: EdgeClass | None = None,
    shorter_than: int | None = None,
    longer_than: int | None = None,
    rounds: int | None = 1,
) -> TraceResult:
    """Alternate removal and re-tracing; ``rounds=None`` runs until nothing changes."""
    if rounds is not None and rounds < 1:
        raise ValueError("rounds must be >= 1 or None")
    done = 0
    while rounds is None or done < rounds:
        pruned = remove_edges_where(result, edge_class, shorter_than, longer_than)
        if pruned is result:
            break
        result = trace_all(pruned.image)
        done += 1
    logger.debug("removal converged after %d effective rounds", done)
    return result


def remove_dangling_iterative(
    result: TraceResult, max_len: int | None = None, rounds: int | None = None
) -> TraceResult:
    """Repeatedly remove dangling edges shorter than ``max_len`` and re-trace.

    Removing a twig can dissolve its junction and expose a new dangling edge,
    hence the repetition.
    """
    return iterate_removal(result, EdgeClass.DANGLING, shorter_than=max_len, rounds=rounds)


def connector_length(result: TraceResult, e: int) -> int:
    """Pixels of edge ``e`` outside its terminal ambiguity connection pixels."""
    edge = result.edges[e]
    amb = result.ambiguities
    return len(edge) - (edge.first in amb) - (len(edge) > 1 and edge.last in amb)


def merge_nearby_ambiguities(result: TraceResult, max_connector_len: int = 3) -> TraceResult:
    """Fuse ambiguities joined by short edges into one combined ambiguity.

    An edge qualifies when its two ends lie in different ambiguities and it
    has at most ``max_connector_len`` pixels between the connection pixels.
    Its pixels join the combined ambiguity; merging is transitive.
    """
    n = len(result.ambiguities)
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    connectors = []
    for e in range(len(result.edges)):
        start, end = result.terminal_ambiguities(e)
        if start is None or end is None or start == end:
            continue
        if connector_length(result, e) <= max_connector_len:
            connectors.append(e)
            ra, rb = find(start), find(end)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    if not connectors:
        return result

    groups: dict[int, list[Point]] = {}
    for a in range(n):
        groups.setdefault(find(a), []).extend(result.ambiguities[a].points)
    for e in connectors:
        root = find(result.ambiguities.id_at(result.edges[e].first))
        members = groups[root]
        members.extend(p for p in result.edges[e].points if p not in result.ambiguities)
    merged = [
        Ambiguity(i, tuple(dict.fromkeys(groups[root])))
        for i, root in enumerate(sorted(groups))
    ]
    registry = AmbiguityRegistry(result.image.shape, merged)
    drop = set(connectors)
    kept = [e.points for e in result.edges if e.id not in drop]
    return TraceResult.build(result.image, kept, registry)


def reverse_edge(edge: Edge) -> Edge:
    return Edge(edge.id, edge.points[::-1])


def reverse_edges(result: TraceResult, ids: Sequence[int]) -> TraceResult:
    flip = set(ids)
    edges = [e.points[::-1] if e.id in flip else e.points for e in result.edges]
    return TraceResult.build(result.image, edges, result.ambiguities)


def bresenham_line(a: tuple[int, int], b: tuple[int, int]) -> list[Point]:
    """Integer line raster from ``a`` to ``b``, both ends included."""
    x0, y0 = a
    x1, y1 = b
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    out = [Point(x0, y0)]
    while (x0, y0) != (x1, y1):
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy
        out.append(Point(x0, y0))
    return out


START, END = "start", "end"


def endpoint_angle(points: Sequence[tuple[int, int]], which_end: str = END, n: int = 5) -> float:
    """Direction in which an edge runs into its start or end point, in radians.

    Fits a total-least-squares line to the last ``n`` points before the
    terminal (terminal included) and orients it toward the terminal. Angles
    use image coordinates (y down) and lie in (-pi, pi].
    """
    if len(points) < 2:
        raise ValueError("need at least two points")
    if n < 2:
        raise ValueError("fit length must be >= 2")
    if which_end not in (START, END):
        raise ValueError(f"which_end must be {START!r} or {END!r}")
    pts = list(points) if which_end == END else list(points)[::-1]
    window = np.asarray(pts[-min(n, len(pts)) :], dtype=float)
    centered = window - window.mean(axis=0)
    if not np.any(centered):
        raise ValueError("fit points are all coincident")
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    direction = vt[0]
    toward = window[-1] - window[0]
    if abs(float(direction @ toward)) < 1e-12:
        toward = window[-1] - window[-2]
    if float(direction @ toward) < 0:
        direction = -direction
    angle = math.atan2(direction[1], direction[0])
    return math.pi if angle <= -math.pi else angle


@dataclass(frozen=True)
class ConnectionCostParams:
    """Weights for pairing edge terminals at an ambiguity.

    cost = angle_weight * (pi - angular difference of approach directions)
         + distance_weight * distance between connection pixels

    Only pairs with cost below ``cost_threshold`` are joined. The defaults
    accept a straight continuation across a gap of up to 4 px.
    """

    fit_length: int = 5
    angle_weight: float = 1.0
    distance_weight: float = 0.25
    cost_threshold: float = math.pi / 2

    def __post_init__(self):
        if self.fit_length < 2:
            raise ValueError("fit_length must be >= 2")
        if self.angle_weight < 0 or self.distance_weight < 0:
            raise ValueError("weights must be non-negative")
        if self.angle_weight == 0 and self.distance_weight == 0:
            raise ValueError("at least one weight must be positive")
        if self.cost_threshold <= 0:
            raise ValueError("cost_threshold must be positive")


Terminal = tuple[int, str]


def terminals_at(result: TraceResult, a: int) -> list[Terminal]:
    """Edge ends lying in ambiguity ``a``, ordered by edge id, start before end."""
    out = []
    for e in result.edges_at_ambiguity(a):
        edge = result.edges[e]
        if len(edge) < 2:
            continue
        if result.ambiguities.id_at(edge.first) == a:
            out.append((e, START))
        if result.ambiguities.id_at(edge.last) == a:
            out.append((e, END))
    return out


def pair_cost(
    result: TraceResult, t1: Terminal, t2: Terminal, params: ConnectionCostParams
) -> float:
    e1, e2 = result.edges[t1[0]], result.edges[t2[0]]
    a1 = endpoint_angle(e1.points, t1[1], params.fit_length)
    a2 = endpoint_angle(e2.points, t2[1], params.fit_length)
    diff = abs((a1 - a2 + math.pi) % (2 * math.pi) - math.pi)
    c1 = e1.first if t1[1] == START else e1.last
    c2 = e2.first if t2[1] == START else e2.last
    dist = math.hypot(c1.x - c2.x, c1.y - c2.y)
    return params.angle_weight * (math.pi - diff) + params.distance_weight * dist


def rank_pairs(
    result: TraceResult, a: int, params: ConnectionCostParams
) -> list[tuple[float, Terminal, Terminal]]:
    terms = terminals_at(result, a)
    pairs = [
        (pair_cost(result, t1, t2, params), t1, t2)
        for i, t1 in enumerate(terms)
        for t2 in terms[i + 1 :]
    ]
    # Ties: smaller edge id first, then start before end.
    order = {START: 0, END: 1}
    pairs.sort(key=lambda c: (c[0], c[1][0], order[c[1][1]], c[2][0], order[c[2][1]]))
    return pairs


def _opposite(which: str) -> str:
    return END if which == START else START


def connect_edges_at_ambiguity(
    result: TraceResult, a: int, params: ConnectionCostParams | None = None
) -> TraceResult:
    """Greedily join the edge ends at ambiguity ``a`` by good continuation.

    Pairs are ranked once by cost and accepted cheapest first while below the
    threshold, each end being used at most once. Joined ends are bridged with a
    straight raster line; joining two ends of one edge closes it.
    """
    params = params or ConnectionCostParams()
    accepted = []
    used: set[Terminal] = set()
    for cost, t1, t2 in rank_pairs(result, a, params):
        if cost >= params.cost_threshold:
            break
        if t1 in used or t2 in used:
            continue
        used.update((t1, t2))
        accepted.append((t1, t2))
    if not accepted:
        return result

    store = EdgeStore.from_result(result)
    # Original terminal -> (current edge id, end) as merges reshape edges.
    loc: dict[Terminal, Terminal] = {t: t for pair in accepted for t in pair}
    drawn: set[Point] = set()
    for t1, t2 in accepted:
        (e1, w1), (e2, w2) = loc[t1], loc[t2]
        p1, p2 = store.get(e1), store.get(e2)
        c1 = p1[0] if w1 == START else p1[-1]
        c2 = p2[0] if w2 == START else p2[-1]
        line = bresenham_line(c1, c2)
        drawn.update(line)
        head = p1[::-1] if w1 == START else list(p1)
        if e1 == e2:
            store.replace(e1, head + line[1:])
            continue
        tail = list(p2) if w2 == START else p2[::-1]
        keep, retire = min(e1, e2), max(e1, e2)
        store.remove(retire)
        store.replace(keep, head + line[1:] + tail[1:])
        moved = {(e1, _opposite(w1)): (keep, START), (e2, _opposite(w2)): (keep, END)}
        for t, cur in loc.items():
            if cur in moved:
                loc[t] = moved[cur]
    image = result.image
    missing = [p for p in drawn if not image[p]]
    if missing:
        image = image.with_pixels(missing, 1)
    return store.to_result(image, result.ambiguities)


def connect_all(result: TraceResult, params: ConnectionCostParams | None = None) -> TraceResult:
    """Run :func:`connect_edges_at_ambiguity` on every ambiguity in id order."""
    for a in range(len(result.ambiguities)):
        result = connect_edges_at_ambiguity(result, a, params)
    return result


def retrace(result: TraceResult) -> TraceResult:
    return trace_all(result.image)


def classify_all(result: TraceResult) -> dict[EdgeClass, list[int]]:
    out: dict[EdgeClass, list[int]] = {c: [] for c in EdgeClass}
    for e in range(len(result.edges)):
        out[classify_edge(result, e)].append(e)
    return out

