"""Image loading, trace documents and overlay rendering."""

from __future__ import annotations

import colorsys
import json
import os
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .ambiguity import AmbiguityRegistry
from .baselines import SegmentSet
from .core import BinaryImage, Point
from .tracer import TraceResult

DOCUMENT_VERSION = 1


class ImageInputError(Exception):
    """An input image could not be read or decoded."""

    def __init__(self, path: str | os.PathLike, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = str(path)
        self.reason = reason


class UnsupportedFormatError(ImageInputError):
    pass


# ---------------------------------------------------------------------------
# netpbm


def _tokens(data: bytes, count: int, pos: int) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace separated header tokens, skipping comments."""
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ValueError("truncated header")
        out.append(data[start:pos])
    return out, pos


def parse_netpbm(data: bytes, threshold: int = 128) -> BinaryImage:
    """Decode P1/P2/P4/P5 data. PBM set bits and gray levels >= threshold become 1."""
    magic = data[:2]
    if magic not in (b"P1", b"P2", b"P4", b"P5"):
        raise ValueError(f"unsupported netpbm magic {magic!r}")
    bitmap = magic in (b"P1", b"P4")
    header, pos = _tokens(data, 2 if bitmap else 3, 2)
    try:
        width, height = int(header[0]), int(header[1])
        maxval = 1 if bitmap else int(header[2])
    except ValueError as exc:
        raise ValueError(f"bad header value: {exc}") from None
    if width < 0 or height < 0 or not 0 < maxval < 65536:
        raise ValueError("bad header dimensions or maxval")
    count = width * height

    if magic in (b"P1", b"P2"):
        body = data[pos:]
        if magic == b"P1":
            # Plain PBM digits need not be separated.
            digits = bytes(c for c in body if c in b"01")
            if len(digits) < count:
                raise ValueError(f"expected {count} pixels, found {len(digits)}")
            values = np.frombuffer(digits[:count], dtype=np.uint8) - ord("0")
        else:
            fields = body.split()
            if len(fields) < count:
                raise ValueError(f"expected {count} pixels, found {len(fields)}")
            values = np.array([int(v) for v in fields[:count]], dtype=np.int64)
    else:
        # Exactly one whitespace byte separates the header from raster data.
        pos += 1
        if magic == b"P4":
            row_bytes = (width + 7) // 8
            need = row_bytes * height
            raw = np.frombuffer(data[pos : pos + need], dtype=np.uint8)
            if raw.size < need:
                raise ValueError(f"expected {need} raster bytes, found {raw.size}")
            bits = np.unpackbits(raw.reshape(height, row_bytes), axis=1)[:, :width]
            values = bits.reshape(-1)
        else:
            wide = maxval > 255
            need = count * (2 if wide else 1)
            buf = data[pos : pos + need]
            if len(buf) < need:
                raise ValueError(f"expected {need} raster bytes, found {len(buf)}")
            values = np.frombuffer(buf, dtype=">u2" if wide else np.uint8).astype(np.int64)

    values = np.asarray(values).reshape(height, width)
    if bitmap:
        return BinaryImage((values != 0).astype(np.uint8))
    if values.max(initial=0) > maxval:
        raise ValueError("pixel value exceeds maxval")
    # Compare on the 0-255 scale without rounding: v/maxval >= t/255.
    return BinaryImage((values * 255 >= threshold * maxval).astype(np.uint8))


def load_binary_image(path: str | os.PathLike, threshold: int = 128) -> BinaryImage:
    """Load a PBM/PGM file (or any raster Pillow reads) as a binary image."""
    if not 0 <= threshold <= 255:
        raise ValueError("threshold must be within 0..255")
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ImageInputError(path, exc.strerror or str(exc)) from exc
    if data[:1] == b"P" and data[1:2] in b"123456":
        if data[1:2] in b"36":
            raise UnsupportedFormatError(path, "color netpbm (PPM) input is not supported")
        try:
            return parse_netpbm(data, threshold)
        except ValueError as exc:
            raise ImageInputError(path, f"corrupt netpbm data: {exc}") from exc
    return _load_with_pillow(path, threshold)


def _load_with_pillow(path: str | os.PathLike, threshold: int) -> BinaryImage:
    try:
        from PIL import Image, UnidentifiedImageError
    except ImportError:  # pragma: no cover
        raise UnsupportedFormatError(path, "only PBM/PGM are supported without Pillow") from None
    try:
        with Image.open(path) as im:
            gray = np.asarray(im.convert("L"))
    except UnidentifiedImageError:
        raise UnsupportedFormatError(path, "unrecognized image format") from None
    except (OSError, ValueError) as exc:
        raise ImageInputError(path, f"cannot decode image: {exc}") from exc
    return BinaryImage((gray >= threshold).astype(np.uint8))


def format_pbm(image: BinaryImage, plain: bool = False) -> bytes:
    h, w = image.shape
    if plain:
        rows = ["".join("1" if v else "0" for v in row) for row in image.pixels.tolist()]
        return f"P1\n{w} {h}\n".encode() + "\n".join(rows).encode() + b"\n"
    packed = np.packbits(image.pixels, axis=1) if w else np.zeros((h, 0), np.uint8)
    return f"P4\n{w} {h}\n".encode() + packed.tobytes()


def save_pbm(image: BinaryImage, path: str | os.PathLike, plain: bool = False) -> None:
    Path(path).write_bytes(format_pbm(image, plain))


# ---------------------------------------------------------------------------
# trace documents


@dataclass(frozen=True)
class ImageMeta:
    width: int
    height: int
    source: str | None
    set_pixels: int


@dataclass(frozen=True)
class DocEdge:
    id: int
    points: tuple[tuple[int, int], ...]
    start_ambiguity: int | None
    end_ambiguity: int | None


@dataclass(frozen=True)
class DocAmbiguity:
    id: int
    points: tuple[tuple[int, int], ...]
    connected_edges: tuple[int, ...]


@dataclass(frozen=True)
class TraceDocument:
    image: ImageMeta
    edges: tuple[DocEdge, ...] = ()
    ambiguities: tuple[DocAmbiguity, ...] = ()
    version: int = field(default=DOCUMENT_VERSION)

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": self.version,
            "image": {
                "width": self.image.width,
                "height": self.image.height,
                "source": self.image.source,
                "set_pixels": self.image.set_pixels,
            },
            "edges": [
                {
                    "id": e.id,
                    "start_ambiguity": e.start_ambiguity,
                    "end_ambiguity": e.end_ambiguity,
                    "points": [list(p) for p in e.points],
                }
                for e in self.edges
            ],
            "ambiguities": [
                {
                    "id": a.id,
                    "connected_edges": list(a.connected_edges),
                    "points": [list(p) for p in a.points],
                }
                for a in self.ambiguities
            ],
        }

    def to_json(self) -> str:
        return dumps_records(self.to_dict(), ("edges", "ambiguities"))

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> TraceDocument:
        version = d.get("version")
        if version != DOCUMENT_VERSION:
            raise ValueError(f"unsupported trace document version {version!r}")
        im = d["image"]
        meta = ImageMeta(int(im["width"]), int(im["height"]), im.get("source"), int(im["set_pixels"]))
        edges = tuple(
            DocEdge(
                int(e["id"]),
                tuple((int(x), int(y)) for x, y in e["points"]),
                e.get("start_ambiguity"),
                e.get("end_ambiguity"),
            )
            for e in d.get("edges", [])
        )
        ambs = tuple(
            DocAmbiguity(
                int(a["id"]),
                tuple((int(x), int(y)) for x, y in a["points"]),
                tuple(int(i) for i in a.get("connected_edges", [])),
            )
            for a in d.get("ambiguities", [])
        )
        return cls(meta, edges, ambs, version)

    @classmethod
    def from_json(cls, text: str) -> TraceDocument:
        return cls.from_dict(json.loads(text))


def dumps_records(obj: dict[str, Any], record_keys: tuple[str, ...]) -> str:
    """JSON with one line per record in the listed array fields.

    Keeps large point lists readable without putting every number on its
    own line. Output is deterministic for equal input.
    """
    lines = ["{"]
    items = list(obj.items())
    for i, (k, v) in enumerate(items):
        sep = "," if i < len(items) - 1 else ""
        key = json.dumps(k)
        if k in record_keys and isinstance(v, list) and v:
            lines.append(f"  {key}: [")
            for j, rec in enumerate(v):
                comma = "," if j < len(v) - 1 else ""
                lines.append("    " + json.dumps(rec, separators=(",", ":")) + comma)
            lines.append("  ]" + sep)
        else:
            lines.append(f"  {key}: {json.dumps(v, separators=(', ', ': '))}{sep}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def document_from_result(result: TraceResult, source: str | None = None) -> TraceDocument:
    amb = result.ambiguities
    edges = tuple(
        DocEdge(
            e.id,
            tuple((p.x, p.y) for p in e.points),
            amb.id_at(e.first) if e.points else None,
            amb.id_at(e.last) if e.points else None,
        )
        for e in result.edges
    )
    connected: dict[int, set[int]] = {a.id: set() for a in amb}
    for e in edges:
        for a in (e.start_ambiguity, e.end_ambiguity):
            if a is not None:
                connected[a].add(e.id)
    ambs = tuple(
        DocAmbiguity(a.id, tuple((p.x, p.y) for p in a.points), tuple(sorted(connected[a.id])))
        for a in amb
    )
    meta = ImageMeta(result.image.width, result.image.height, source, result.image.count())
    return TraceDocument(meta, edges, ambs)


def result_from_document(doc: TraceDocument) -> TraceResult:
    """Rebuild a trace result; the image is the union of all recorded points."""
    shape = (doc.image.height, doc.image.width)
    pts = [p for e in doc.edges for p in e.points] + [p for a in doc.ambiguities for p in a.points]
    image = BinaryImage.from_points(doc.image.width, doc.image.height, pts)
    if image.count() != doc.image.set_pixels:
        raise ValueError(
            f"document covers {image.count()} pixels but declares {doc.image.set_pixels}"
        )
    registry = AmbiguityRegistry.from_clusters(shape, (a.points for a in doc.ambiguities))
    ordered = sorted(doc.edges, key=lambda e: e.id)
    if [e.id for e in ordered] != list(range(len(ordered))):
        raise ValueError("edge ids must be dense 0..n-1")
    return TraceResult.build(image, (e.points for e in ordered), registry)


def export_trace_document(result: TraceResult, path: str | os.PathLike, source: str | None = None) -> TraceDocument:
    doc = document_from_result(result, source)
    Path(path).write_text(doc.to_json(), encoding="utf-8")
    return doc


def read_trace_document(path: str | os.PathLike) -> TraceDocument:
    return TraceDocument.from_json(Path(path).read_text(encoding="utf-8"))


def segments_document(segments: SegmentSet, image: BinaryImage, source: str | None = None) -> str:
    hier = segments.hierarchy
    obj = {
        "version": DOCUMENT_VERSION,
        "method": segments.method,
        "image": {
            "width": image.width,
            "height": image.height,
            "source": source,
            "set_pixels": image.count(),
        },
        "segments": [
            {
                "id": i,
                "parent": None if hier is None else hier[i],
                "points": [[p[0], p[1]] for p in seg],
            }
            for i, seg in enumerate(segments.segments)
        ],
    }
    return dumps_records(obj, ("segments",))


# ---------------------------------------------------------------------------
# rendering

GOLDEN_RATIO = (5**0.5 - 1) / 2


@dataclass(frozen=True)
class RenderStyle:
    scale: int = 1
    ambiguity_color: tuple[int, int, int] = (255, 255, 255)
    seed: int | None = None

    def __post_init__(self):
        if self.scale < 1:
            raise ValueError("scale must be >= 1")

    def edge_color(self, i: int) -> tuple[int, int, int]:
        offset = 0.0 if self.seed is None else random.Random(self.seed).random()
        hue = (offset + i * GOLDEN_RATIO) % 1.0
        r, g, b = colorsys.hsv_to_rgb(hue, 0.85, 1.0)
        return round(r * 255), round(g * 255), round(b * 255)


def _paint(
    shape: tuple[int, int],
    groups: list[tuple[tuple[int, int], ...]],
    highlight: list[tuple[int, int]],
    style: RenderStyle,
) -> np.ndarray:
    h, w = shape
    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    hits = np.zeros((h, w), dtype=np.int32)
    for i, pts in enumerate(groups):
        if not pts:
            continue
        arr = np.unique(np.asarray(pts, dtype=np.int64), axis=0)
        rgb[arr[:, 1], arr[:, 0]] = style.edge_color(i)
        hits[arr[:, 1], arr[:, 0]] += 1
    rgb[hits > 1] = style.ambiguity_color
    for x, y in highlight:
        rgb[y, x] = style.ambiguity_color
    if style.scale > 1:
        rgb = rgb.repeat(style.scale, axis=0).repeat(style.scale, axis=1)
    return rgb


def render_overlay(result: TraceResult, style: RenderStyle | None = None) -> np.ndarray:
    """RGB raster: one hue per edge, ambiguity and shared pixels highlighted."""
    style = style or RenderStyle()
    amb = [p for a in result.ambiguities for p in a.points]
    return _paint(result.image.shape, [e.points for e in result.edges], amb, style)


def render_segments(segments: SegmentSet, image: BinaryImage, style: RenderStyle | None = None) -> np.ndarray:
    style = style or RenderStyle()
    return _paint(image.shape, list(segments.segments), [], style)


def write_raster(rgb: np.ndarray, path: str | os.PathLike) -> None:
    """Write a PPM (P6); ``.png`` paths go through Pillow."""
    path = Path(path)
    if path.suffix.lower() == ".png":
        from PIL import Image

        Image.fromarray(rgb, "RGB").save(path)
        return
    h, w = rgb.shape[:2]
    path.write_bytes(f"P6\n{w} {h}\n255\n".encode() + np.ascontiguousarray(rgb).tobytes())


def read_ppm(path: str | os.PathLike) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:2] != b"P6":
        raise ValueError("not a binary PPM")
    (w, h, maxval), pos = _tokens(data, 3, 2)
    if int(maxval) != 255:
        raise ValueError("only 8-bit PPM is supported")
    w, h = int(w), int(h)
    raster = np.frombuffer(data[pos + 1 : pos + 1 + w * h * 3], dtype=np.uint8)
    return raster.reshape(int(h), int(w), 3)


def render_to_file(result: TraceResult, path: str | os.PathLike, style: RenderStyle | None = None) -> None:
    write_raster(render_overlay(result, style), path)


def points_of(result: TraceResult) -> set[Point]:
    return {p for e in result.edges for p in e.points} | {p for a in result.ambiguities for p in a.points}
