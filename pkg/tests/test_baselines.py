import numpy as np
import pytest

from edgetrace import BinaryImage, Point
from edgetrace.baselines import border_following, ccl, label_components, moore_trace

from conftest import corpus_images, fixture_image, random_images


def test_ccl_examples():
    assert len(ccl(fixture_image("circle_chord"))) == 1
    assert len(ccl(BinaryImage.from_ascii("#.#"))) == 2
    assert len(ccl(fixture_image("diagonal"))) == 1


def test_ccl_partitions_set_pixels_in_scan_order():
    for _, im in random_images(6, size=32):
        segs = ccl(im).segments
        flat = [p for s in segs for p in s]
        assert sorted(flat) == sorted(im.set_points())
        assert len(flat) == len(set(flat))
        for s in segs:
            assert list(s) == sorted(s, key=lambda p: (p.y, p.x))
        # Components are numbered by their first pixel in scan order.
        firsts = [(s[0].y, s[0].x) for s in segs]
        assert firsts == sorted(firsts)


def test_moore_open_segment_walks_out_and_back():
    seg = moore_trace(BinaryImage.from_ascii("#####")).segments
    assert seg == (tuple(Point(x, 0) for x in (0, 1, 2, 3, 4, 3, 2, 1)),)


def test_moore_single_pixel_and_ring():
    assert moore_trace(BinaryImage.from_ascii("#")).segments == ((Point(0, 0),),)
    ring = fixture_image("ring")
    (seg,) = moore_trace(ring).segments
    assert len(seg) == len(set(seg)) == ring.count()


def test_moore_one_segment_per_component():
    for _, im in random_images(9, size=32):
        _, n = label_components(im)
        segs = moore_trace(im).segments
        assert len(segs) == n
        labels, _ = label_components(im)
        for s in segs:
            assert len({labels[p.y, p.x] for p in s}) == 1


def test_moore_misses_interior_pixels():
    (seg,) = moore_trace(fixture_image("block3")).segments
    assert Point(1, 1) not in seg


def test_border_following_filled_block():
    s = border_following(fixture_image("block3"))
    assert len(s) == 1 and len(s.segments[0]) == 8
    assert Point(1, 1) not in s.segments[0]
    assert s.hierarchy == (None,)


def test_border_following_ring_has_outer_and_hole():
    s = border_following(fixture_image("ring"))
    assert len(s) == 2
    assert s.hierarchy == (None, 0)


def test_border_following_single_pixel():
    s = border_following(BinaryImage.from_ascii("#"))
    assert s.segments == ((Point(0, 0),),)


def test_border_pixels_lie_on_the_boundary():
    for _, im in random_images(6, size=32, seed=4):
        pix = np.pad(im.pixels, 1)
        for seg in border_following(im).segments:
            for p in seg:
                x, y = p.x + 1, p.y + 1
                assert pix[y, x]
                # Some 4-neighbor is background.
                assert min(pix[y - 1, x], pix[y + 1, x], pix[y, x - 1], pix[y, x + 1]) == 0


def _cv_borders(im):
    cv2 = pytest.importorskip("cv2")
    padded = np.pad(im.pixels, 1).copy()
    contours, hier = cv2.findContours(padded, cv2.RETR_TREE, cv2.CHAIN_APPROX_NONE)
    segs = [tuple((int(x) - 1, int(y) - 1) for x, y in c[:, 0, :]) for c in contours]
    parents = [None if hier is None or hier[0][i][3] < 0 else int(hier[0][i][3]) for i in range(len(segs))]
    return segs, parents


def _keyed(segs, parents):
    return sorted((segs[i], None if parents[i] is None else segs[parents[i]]) for i in range(len(segs)))


def test_border_following_matches_opencv():
    images = list(corpus_images().values()) + [im for _, im in random_images(60, size=24)]
    for im in images:
        ours = border_following(im)
        segs = [tuple(map(tuple, s)) for s in ours.segments]
        assert _keyed(segs, list(ours.hierarchy)) == _keyed(*_cv_borders(im))


def test_baselines_are_deterministic():
    im = fixture_image("nested_rings")
    for fn in (ccl, moore_trace, border_following):
        assert fn(im) == fn(im)
