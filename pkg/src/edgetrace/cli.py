"""Command line interface: ``edgetrace <command> ...``.

Exit codes: 0 success, 1 input error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io as eio
from .baselines import SEGMENTERS
from .bench import run_benchmark
from .metrics import compute_metrics, metrics_csv
from .patterns import PATTERNS
from .pipeline import PipelineError, parse_pipeline, run_pipeline
from .tracer import TraceResult, trace_all

log = logging.getLogger("edgetrace")

EXIT_OK, EXIT_INPUT, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _threshold(text: str) -> int:
    v = int(text)
    if not 0 <= v <= 255:
        raise argparse.ArgumentTypeError("threshold must be within 0..255")
    return v


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    # Global flags are accepted before or after the subcommand.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threshold", type=_threshold, default=argparse.SUPPRESS,
                        help="gray level at or above which a pixel is set (default 128)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="palette seed for renders")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help="only report errors")

    parser = argparse.ArgumentParser(prog="edgetrace", parents=[common], description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace", parents=[common], help="trace a binary edge image")
    p.add_argument("input")
    p.add_argument("--out", help="write the trace (or segment) document as JSON")
    p.add_argument("--render", help="write a color overlay (.ppm, or .png with Pillow)")
    p.add_argument("--scale", type=_positive, default=1)
    p.add_argument("--method", choices=sorted(SEGMENTERS), default="ours")

    p = sub.add_parser("post", parents=[common], help="run a post-processing pipeline")
    p.add_argument("input", help="trace document (.json) or image")
    p.add_argument("--ops", required=True, help="e.g. 'remove:dangling,<30,x2; merge-amb:3; connect'")
    p.add_argument("--out")
    p.add_argument("--render")
    p.add_argument("--scale", type=_positive, default=1)

    p = sub.add_parser("metrics", parents=[common], help="segment statistics for one or all methods")
    p.add_argument("input")
    p.add_argument("--method", choices=[*sorted(SEGMENTERS), "all"], default="all")
    p.add_argument("--csv", help="write CSV here instead of stdout")

    p = sub.add_parser("bench", parents=[common], help="runtime scaling on cross patterns")
    p.add_argument("--method", choices=sorted(SEGMENTERS), default="ours")
    p.add_argument("--layout", choices=("row", "square"), default="row")
    p.add_argument("--sizes", type=_int_list, default=[25, 50, 100, 200])
    p.add_argument("--runs", type=_positive, default=1000)
    p.add_argument("--csv", help="write CSV here instead of stdout")

    p = sub.add_parser("generate", parents=[common], help="write a synthetic test figure")
    p.add_argument("--pattern", choices=sorted(PATTERNS), required=True)
    p.add_argument("--n", type=_positive, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--plain", action="store_true", help="write plain (ASCII) PBM")
    return parser


def _load_result(path: str, threshold: int) -> tuple[TraceResult, str | None]:
    """Trace result and its original image path from a document or an image."""
    if path.lower().endswith(".json"):
        try:
            doc = eio.read_trace_document(path)
            return eio.result_from_document(doc), doc.image.source
        except OSError as exc:
            raise eio.ImageInputError(path, exc.strerror or str(exc)) from exc
        except (ValueError, KeyError, TypeError) as exc:
            raise eio.ImageInputError(path, f"invalid trace document: {exc}") from exc
    return trace_all(eio.load_binary_image(path, threshold)), path


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _emit_result(result: TraceResult, args, source: str | None) -> None:
    if args.out:
        eio.export_trace_document(result, args.out, source)
        log.info("wrote %s", args.out)
    if args.render:
        style = eio.RenderStyle(scale=args.scale, seed=getattr(args, "seed", None))
        eio.render_to_file(result, args.render, style)
        log.info("wrote %s", args.render)


def cmd_trace(args) -> int:
    image = eio.load_binary_image(args.input, args.threshold)
    if args.method == "ours":
        result = trace_all(image)
        log.info("%d edges, %d ambiguities", len(result.edges), len(result.ambiguities))
        _emit_result(result, args, args.input)
        return EXIT_OK
    segs = SEGMENTERS[args.method](image)
    log.info("%d segments", len(segs))
    if args.out:
        Path(args.out).write_text(eio.segments_document(segs, image, args.input), encoding="utf-8")
    if args.render:
        style = eio.RenderStyle(scale=args.scale, seed=getattr(args, "seed", None))
        eio.write_raster(eio.render_segments(segs, image, style), args.render)
    return EXIT_OK


def cmd_post(args) -> int:
    try:
        steps = parse_pipeline(args.ops)
    except PipelineError as exc:
        raise UsageError(str(exc)) from None
    result, source = _load_result(args.input, args.threshold)
    result = run_pipeline(result, steps)
    log.info("%d edges, %d ambiguities", len(result.edges), len(result.ambiguities))
    _emit_result(result, args, source)
    return EXIT_OK


def cmd_metrics(args) -> int:
    if args.input.lower().endswith(".json"):
        result, _ = _load_result(args.input, args.threshold)
        if args.method not in ("ours", "all"):
            raise UsageError("a trace document only supports --method ours")
        reports = [compute_metrics(result.image, result)]
    else:
        image = eio.load_binary_image(args.input, args.threshold)
        methods = sorted(SEGMENTERS) if args.method == "all" else [args.method]
        reports = [
            compute_metrics(image, trace_all(image) if m == "ours" else SEGMENTERS[m](image))
            for m in methods
        ]
    _write_text(args.csv, metrics_csv(reports))
    return EXIT_OK


def cmd_bench(args) -> int:
    if not args.sizes or any(n < 1 for n in args.sizes):
        raise UsageError("--sizes needs positive integers")
    try:
        series = run_benchmark(args.method, args.layout, args.sizes, args.runs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    slope, intercept, r2 = series.linear_fit() if len(series.sizes) > 1 else (0.0, 0.0, 1.0)
    log.info("fit: %.6f ms per ambiguity + %.6f ms, R^2 = %.4f", slope, intercept, r2)
    _write_text(args.csv, series.to_csv())
    return EXIT_OK


def cmd_generate(args) -> int:
    try:
        image = PATTERNS[args.pattern](args.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    eio.save_pbm(image, args.out, plain=args.plain)
    log.info("wrote %s (%dx%d, %d set pixels)", args.out, image.width, image.height, image.count())
    return EXIT_OK


COMMANDS = {
    "trace": cmd_trace,
    "post": cmd_post,
    "metrics": cmd_metrics,
    "bench": cmd_bench,
    "generate": cmd_generate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.threshold = getattr(args, "threshold", 128)
    args.quiet = getattr(args, "quiet", False)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO, format="%(message)s", force=True)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        log.error("usage error: %s", exc)
        return EXIT_USAGE
    except eio.ImageInputError as exc:
        log.error("input error: %s", exc)
        return EXIT_INPUT
    except json.JSONDecodeError as exc:  # pragma: no cover
        log.error("input error: %s", exc)
        return EXIT_INPUT
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
