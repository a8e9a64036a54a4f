import json

import numpy as np
import pytest

from edgetrace import BinaryImage, trace_all
from edgetrace.baselines import border_following
from edgetrace.io import (
    ImageInputError,
    RenderStyle,
    TraceDocument,
    UnsupportedFormatError,
    document_from_result,
    export_trace_document,
    format_pbm,
    load_binary_image,
    parse_netpbm,
    read_ppm,
    read_trace_document,
    render_overlay,
    render_segments,
    render_to_file,
    result_from_document,
    segments_document,
)
from edgetrace.postprocess import connect_all, merge_nearby_ambiguities
from edgetrace.bench import generate_cross_pattern

from conftest import corpus_images, fixture_image, random_images


def test_plain_pbm_with_comments():
    im = parse_netpbm(b"P1\n# a comment\n3 2\n1 0 1\n0 0 1\n")
    assert im.count() == 3
    assert im.shape == (2, 3)


def test_plain_pbm_without_separators():
    assert parse_netpbm(b"P1 3 1 101").pixels.tolist() == [[1, 0, 1]]


def test_binary_pbm_round_trip():
    for im in corpus_images().values():
        assert parse_netpbm(format_pbm(im)) == im
        assert parse_netpbm(format_pbm(im, plain=True)) == im


def test_pgm_threshold_is_inclusive():
    data = b"P5\n3 1\n255\n" + bytes([127, 128, 255])
    assert parse_netpbm(data).pixels.tolist() == [[0, 1, 1]]
    assert parse_netpbm(data, threshold=200).pixels.tolist() == [[0, 0, 1]]


def test_plain_pgm_all_zero_is_blank():
    im = parse_netpbm(b"P2\n2 2\n255\n0 0\n0 0\n")
    assert im.count() == 0 and im.shape == (2, 2)


def test_pgm_rescales_other_maxvals():
    # 8 of 15 is above half, 7 of 15 is below.
    assert parse_netpbm(b"P2 2 1 15 7 8").pixels.tolist() == [[0, 1]]
    wide = b"P5\n2 1\n65535\n" + np.array([32767, 32896], dtype=">u2").tobytes()
    assert parse_netpbm(wide).pixels.tolist() == [[0, 1]]


@pytest.mark.parametrize(
    "data",
    [b"P5\n2 2\n255\n\x00", b"P1\n2 2\n1 0", b"P2\n1 1\n255\n300", b"P4\nx 1\n", b"P5\n1 1\n"],
)
def test_corrupt_files_raise_input_error(tmp_path, data):
    path = tmp_path / "bad.pgm"
    path.write_bytes(data)
    with pytest.raises(ImageInputError) as exc:
        load_binary_image(path)
    assert not isinstance(exc.value, UnsupportedFormatError)
    assert str(path) in str(exc.value)


def test_missing_file_is_an_input_error(tmp_path):
    with pytest.raises(ImageInputError):
        load_binary_image(tmp_path / "nope.pbm")


def test_unsupported_formats_raise_distinct_error(tmp_path):
    ppm = tmp_path / "c.ppm"
    ppm.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
    with pytest.raises(UnsupportedFormatError):
        load_binary_image(ppm)
    junk = tmp_path / "junk.bin"
    junk.write_bytes(b"\x00\x01\x02 not an image")
    with pytest.raises(UnsupportedFormatError):
        load_binary_image(junk)


def test_png_through_pillow(tmp_path):
    Image = pytest.importorskip("PIL.Image")
    arr = np.zeros((3, 4), dtype=np.uint8)
    arr[1, 2] = 128
    arr[2, 3] = 127
    Image.fromarray(arr).save(tmp_path / "a.png")
    assert load_binary_image(tmp_path / "a.png").set_points() == [(2, 1)]


def test_t_junction_document():
    doc = document_from_result(trace_all(fixture_image("t_junction")), "t.pbm")
    assert len(doc.edges) == 3
    for e in doc.edges:
        assert 0 in (e.start_ambiguity, e.end_ambiguity)
    assert doc.ambiguities[0].connected_edges == (0, 1, 2)
    assert doc.image.set_pixels == 10 and doc.image.source == "t.pbm"


def test_blank_document_has_empty_arrays():
    d = json.loads(document_from_result(trace_all(BinaryImage.blank(3, 2))).to_json())
    assert d["edges"] == [] and d["ambiguities"] == []
    assert d["version"] == 1


def test_document_round_trip(tmp_path):
    for name, im in corpus_images().items():
        r = trace_all(im)
        doc = document_from_result(r, name)
        assert TraceDocument.from_json(doc.to_json()) == doc
        assert result_from_document(doc) == r
        path = tmp_path / f"{name}.json"
        export_trace_document(r, path, name)
        assert read_trace_document(path) == doc


def test_round_trip_after_postprocessing():
    for _, im in random_images(6, size=32):
        r = connect_all(merge_nearby_ambiguities(trace_all(im), 3))
        assert result_from_document(document_from_result(r)) == r


def test_document_key_order_is_fixed():
    text = document_from_result(trace_all(fixture_image("t_junction"))).to_json()
    d = json.loads(text)
    assert list(d) == ["version", "image", "edges", "ambiguities"]
    assert list(d["edges"][0]) == ["id", "start_ambiguity", "end_ambiguity", "points"]


def test_document_rejects_other_versions():
    with pytest.raises(ValueError):
        TraceDocument.from_dict({"version": 2, "image": {}})


def test_segments_document_has_hierarchy():
    im = fixture_image("ring")
    d = json.loads(segments_document(border_following(im), im, "ring.pbm"))
    assert [s["parent"] for s in d["segments"]] == [None, 0]
    assert d["method"] == "fcm"


def test_overlay_colors():
    r = trace_all(fixture_image("t_junction"))
    style = RenderStyle()
    rgb = render_overlay(r, style)
    assert rgb.shape == (4, 7, 3)
    colors = {tuple(rgb[p.y, p.x]) for e in r.edges for p in e.points[:-1] + e.points[1:] if p not in r.ambiguities}
    assert len(colors) == 3
    assert tuple(rgb[0, 3]) == style.ambiguity_color
    assert (rgb.reshape(-1, 3) == style.ambiguity_color).all(axis=1).sum() == 1
    assert not rgb[3, 0].any()


def test_blank_render_is_black_and_scale_multiplies():
    r = trace_all(BinaryImage.blank(5, 3))
    assert not render_overlay(r).any()
    big = render_overlay(trace_all(generate_cross_pattern(2)), RenderStyle(scale=4))
    assert big.shape == (20, 36, 3)
    with pytest.raises(ValueError):
        RenderStyle(scale=0)


def test_seed_only_changes_palette():
    r = trace_all(fixture_image("x_junction"))
    a = render_overlay(r, RenderStyle(seed=1))
    b = render_overlay(r, RenderStyle(seed=2))
    assert ((a > 0).any(axis=2) == (b > 0).any(axis=2)).all()
    assert (render_overlay(r, RenderStyle(seed=1)) == a).all()


def test_ppm_file_round_trip(tmp_path):
    r = trace_all(fixture_image("circle_chord"))
    render_to_file(r, tmp_path / "o.ppm", RenderStyle(scale=2))
    assert (read_ppm(tmp_path / "o.ppm") == render_overlay(r, RenderStyle(scale=2))).all()


def test_segment_render_highlights_shared_pixels():
    im = fixture_image("ring")
    rgb = render_segments(border_following(im), im)
    # Outer and hole borders of a 1-px ring are the same pixels.
    assert (rgb[im.pixels.astype(bool)] == 255).all()
