import numpy as np
import pytest

from edgetrace import AmbiguityRegistry, BinaryImage, Point, ambiguity_at, preprocess_ambiguities

import reference as ref
from conftest import corpus_images, fixture_image, random_images


def test_x_junction_is_one_single_pixel_ambiguity():
    reg = preprocess_ambiguities(fixture_image("x_junction"))
    assert len(reg) == 1
    assert reg[0].points == (Point(3, 3),)


def test_isolated_block_registers_all_four_pixels():
    reg = preprocess_ambiguities(fixture_image("block2"))
    assert len(reg) == 1
    assert sorted(reg[0].points) == sorted(Point(x, y) for x in (1, 2) for y in (1, 2))
    amb = ambiguity_at(reg, (2, 2))
    assert amb is not None and len(amb.points) == 4


def test_blank_image_has_no_ambiguities():
    assert len(preprocess_ambiguities(BinaryImage.blank(4, 4))) == 0


def test_two_separate_junctions_stay_distinct():
    im = BinaryImage.from_ascii(
        """
.#..........#.
###........###
.#..........#.
"""
    )
    reg = preprocess_ambiguities(im)
    assert [a.points for a in reg] == [(Point(1, 1),), (Point(12, 1),)]


def test_lookup_of_edge_and_background_pixels():
    im = fixture_image("t_junction")
    reg = preprocess_ambiguities(im)
    assert ambiguity_at(reg, (0, 0)) is None
    assert ambiguity_at(reg, (0, 3)) is None
    assert ambiguity_at(reg, (3, 0)).id == 0


def test_matches_literal_cluster_growth():
    images = list(corpus_images().values()) + [im for _, im in random_images(30, size=24)]
    for im in images:
        reg = preprocess_ambiguities(im)
        expected = ref.ambiguities(im.pixels.tolist())
        assert [list(map(tuple, a.points)) for a in reg] == expected


def test_completeness_and_partition_on_random_images():
    for _, im in random_images(12, size=32):
        reg = preprocess_ambiguities(im)
        rows = im.pixels.tolist()
        seen = set()
        for a in reg:
            for p in a.points:
                assert p not in seen
                seen.add(p)
                assert reg.id_at(p) == a.id
        for x, y in im.set_points():
            assert ((x, y) in seen) == ref.is_ambiguity(rows, x, y)


def test_growth_closure():
    for _, im in random_images(9, size=32, seed=77):
        reg = preprocess_ambiguities(im)
        rows = im.pixels.tolist()
        for a in reg:
            for p in a.points:
                for n in ref.direct_neighbors(rows, *p):
                    if ref.is_ambiguity(rows, *n):
                        assert reg.id_at(n) == a.id


def test_registry_rejects_overlapping_clusters():
    with pytest.raises(ValueError):
        AmbiguityRegistry.from_clusters((3, 3), [[(0, 0), (1, 0)], [(1, 0)]])


def test_registry_is_deterministic():
    im = fixture_image("blob_with_arms")
    assert preprocess_ambiguities(im) == preprocess_ambiguities(im)


def test_id_grid_matches_membership():
    im = fixture_image("comb")
    reg = preprocess_ambiguities(im)
    grid = reg.id_grid
    assert grid.shape == im.shape
    for a in reg:
        for p in a.points:
            assert grid[p.y, p.x] == a.id
    assert np.count_nonzero(grid >= 0) == reg.point_count()
