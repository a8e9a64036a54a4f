import numpy as np
import pytest

from edgetrace import BinaryImage, EdgeStore, Point, merge_points, trace_all
from edgetrace.core import is_8_adjacent

import reference as ref
from conftest import corpus_images, fixture_image, random_images


def pts(*xy):
    return [Point(x, y) for x, y in xy]


def edge_lists(result):
    return [list(e.points) for e in result.edges]


# -- invariant helpers --------------------------------------------------------


def coverage_ok(result) -> bool:
    covered = {p for e in result.edges for p in e.points}
    covered |= {p for a in result.ambiguities for p in a.points}
    return covered == set(result.image.set_points())


def double_trace_violations(result) -> list:
    bad = []
    amb = result.ambiguities
    for e in result.edges:
        body = e.points[:-1] if e.is_closed and e.first in amb else e.points
        if len(set(body)) != len(body):
            bad.append(("repeat", e.id))
    for p, ids in result.edge_ids.cells():
        if p not in amb and len(ids) > 1:
            bad.append(("shared", p))
    return bad


def order_violations(result) -> list:
    img = result.image
    bad = []
    for e in result.edges:
        for a, b in zip(e.points, e.points[1:]):
            if not is_8_adjacent(a, b):
                bad.append(("gap", e.id, a, b))
            elif a.x != b.x and a.y != b.y and (img[(b.x, a.y)] or img[(a.x, b.y)]):
                bad.append(("diagonal", e.id, a, b))
    return bad


def all_images():
    yield from corpus_images().items()
    for i, (d, im) in enumerate(random_images(60, size=48)):
        yield f"random{i}@{d}", im


# -- examples -----------------------------------------------------------------


def test_three_pixel_segment():
    r = trace_all(BinaryImage.from_ascii("###"))
    assert edge_lists(r) == [pts((0, 0), (1, 0), (2, 0))]
    assert len(r.ambiguities) == 0


def test_t_junction_edges_share_the_junction():
    r = trace_all(fixture_image("t_junction"))
    assert len(r.edges) == 3 and len(r.ambiguities) == 1
    j = Point(3, 0)
    for e in r.edges:
        assert j in (e.first, e.last)
    assert r.edge_ids[j] == (0, 1, 2)


def test_blank_and_full_images():
    r = trace_all(BinaryImage.blank(6, 4))
    assert r.edges == () and len(r.ambiguities) == 0
    r = trace_all(BinaryImage(np.ones((5, 7), dtype=np.uint8)))
    assert r.edges == ()
    assert [len(a.points) for a in r.ambiguities] == [35]


def test_ring_is_one_edge_in_hand_traced_order():
    r = trace_all(fixture_image("ring"))
    assert edge_lists(r) == [
        pts((1, 0), (2, 0), (3, 0), (4, 1), (4, 2), (3, 3), (2, 3), (1, 3), (0, 2), (0, 1))
    ]
    e = r.edges[0]
    assert is_8_adjacent(e.first, e.last)


def test_start_in_middle_merges_both_directions():
    # Scan hits (2,0) first; it has unvisited neighbors on both sides.
    r = trace_all(BinaryImage.from_ascii("..###\n.#...\n#...."))
    assert edge_lists(r) == [pts((4, 0), (3, 0), (2, 0), (1, 1), (0, 2))]


def test_connection_pixel_terminates_arm():
    r = trace_all(fixture_image("x_junction"))
    centre = Point(3, 3)
    assert len(r.edges) == 4
    for e in r.edges:
        assert e.last == centre or e.first == centre
        assert centre not in e.points[1:-1]


def test_isolated_pixel_is_a_one_point_edge():
    r = trace_all(fixture_image("single"))
    assert edge_lists(r) == [pts((0, 0))]


def test_circle_chord_golden_values():
    r = trace_all(fixture_image("circle_chord"))
    assert [a.points for a in r.ambiguities] == [(Point(6, 2),), (Point(6, 8),)]
    assert edge_lists(r) == [
        pts((6, 0), (6, 1), (6, 2)),
        pts((6, 2), (5, 2), (4, 2), (3, 3), (2, 4), (2, 5), (2, 6), (3, 7), (4, 8), (5, 8), (6, 8)),
        pts((6, 8), (7, 8), (8, 8), (9, 7), (10, 6), (10, 5), (10, 4), (9, 3), (8, 2), (7, 2), (6, 2)),
        pts(*[(6, y) for y in range(2, 9)]),
        pts((6, 8), (6, 9), (6, 10)),
    ]


def test_loop_on_one_junction_keeps_seam_at_both_ends():
    r = trace_all(fixture_image("lollipop"))
    j = r.ambiguities[0].points[0]
    loops = [e for e in r.edges if e.is_closed]
    assert len(loops) == 1 and loops[0].first == j
    # The seam pixel is listed once per edge in the id map.
    assert sorted(r.edge_ids[j]) == [0, 1]


def test_edges_at_ambiguity_and_terminals():
    r = trace_all(fixture_image("circle_chord"))
    assert r.edges_at_ambiguity(0) == [0, 1, 2, 3]
    assert r.terminal_ambiguities(3) == (0, 1)
    assert r.terminal_ambiguities(0) == (None, 0)


# -- merging ------------------------------------------------------------------


@pytest.mark.parametrize(
    "first, second, expected",
    [
        (["p", "a1", "a2"], ["p", "b1", "b2"], ["a2", "a1", "p", "b1", "b2"]),
        (["a1", "p"], ["b1", "p"], ["a1", "p", "b1"]),
        (["p", "a1"], ["b1", "p"], ["b1", "p", "a1"]),
        (["a1", "p"], ["p", "b1"], ["a1", "p", "b1"]),
    ],
    ids=["start-start", "end-end", "first-start-second-end", "first-end-second-start"],
)
def test_merge_four_cases(first, second, expected):
    assert merge_points(first, second) == expected


def test_merge_without_shared_terminal_raises():
    with pytest.raises(ValueError):
        merge_points(["a", "b"], ["c", "d"])


def test_store_merge_keeps_smaller_id_and_rewrites_map():
    store = EdgeStore([[(0, 0), (1, 0)], [(5, 5)], [(2, 0), (1, 0)]])
    assert store.merge(2, 0) == 0
    # Edge 2 is the first operand: end/end case.
    assert store.get(0) == pts((2, 0), (1, 0), (0, 0))
    assert store.ids_at((2, 0)) == [0]
    assert store.live_ids() == [0, 1]
    with pytest.raises(KeyError):
        store.get(2)
    result = store.to_result(BinaryImage.blank(6, 6).with_pixels([(0, 0), (1, 0), (2, 0), (5, 5)], 1),
                             trace_all(BinaryImage.blank(6, 6)).ambiguities)
    assert [e.id for e in result.edges] == [0, 1]


# -- reference equivalence and invariants ---------------------------------------


def test_matches_recursive_reference():
    for name, im in all_images():
        r = trace_all(im)
        edges, clusters = ref.trace_recursive(im.pixels.tolist())
        assert edge_lists(r) == [[Point(*p) for p in e] for e in edges], name
        assert [list(a.points) for a in r.ambiguities] == [[Point(*p) for p in c] for c in clusters], name


def test_literal_recursion_without_guard_duplicates_ring_seam():
    edges, _ = ref.trace_recursive(fixture_image("ring").pixels.tolist(), loop_guard=False)
    assert len(edges) == 1
    assert edges[0][0] == edges[0][-1] and len(edges[0]) == 11


def test_invariants_on_corpus_and_random_images():
    for name, im in all_images():
        r = trace_all(im)
        assert coverage_ok(r), name
        assert double_trace_violations(r) == [], name
        assert order_violations(r) == [], name
        amb = r.ambiguities
        for e in r.edges:
            assert all(p not in amb for p in e.points[1:-1]), name
        # Id map cells list exactly the edges containing each pixel.
        expected = {}
        for e in r.edges:
            for p in dict.fromkeys(e.points):
                expected.setdefault(p, []).append(e.id)
        assert {p: list(ids) for p, ids in r.edge_ids.cells()} == expected, name
        assert [e.id for e in r.edges] == list(range(len(r.edges)))


def test_tracing_is_deterministic():
    for _, im in random_images(3, size=40, seed=9):
        assert trace_all(im) == trace_all(im)


def test_million_pixel_edge_does_not_recurse():
    n = 1_000_000
    r = trace_all(BinaryImage(np.ones((1, n), dtype=np.uint8)))
    assert len(r.edges) == 1
    e = r.edges[0]
    assert len(e) == n and e.first == Point(0, 0) and e.last == Point(n - 1, 0)
