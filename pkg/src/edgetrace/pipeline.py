"""Flat post-processing pipelines written as ``step:arg,arg; step:arg``.

Steps:

- ``remove:[class],[<N],[>N],[xK|x*]`` drops edges by class (free, dangling,
  bridged) and strict length bounds. Without ``x`` the edges are removed once
  and nothing is re-traced; ``xK`` alternates removal and re-tracing K times
  and ``x*`` until nothing changes.
- ``merge-amb:N`` fuses ambiguities joined by connectors of at most N px.
- ``connect:aw=..,dw=..,th=..,n=..`` joins edges across every ambiguity.
- ``retrace`` traces the current image again.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .postprocess import (
    ConnectionCostParams,
    EdgeClass,
    connect_all,
    iterate_removal,
    merge_nearby_ambiguities,
    remove_edges_where,
    retrace,
)
from .tracer import TraceResult


class PipelineError(ValueError):
    pass


@dataclass(frozen=True)
class Step:
    name: str
    options: dict[str, Any] = field(default_factory=dict)


_CONNECT_KEYS = {"aw": "angle_weight", "dw": "distance_weight", "th": "cost_threshold", "n": "fit_length"}


def _parse_remove(args: list[str]) -> dict[str, Any]:
    opts: dict[str, Any] = {"edge_class": None, "shorter_than": None, "longer_than": None, "rounds": 0}
    for a in args:
        try:
            if a.startswith("<"):
                opts["shorter_than"] = int(a[1:])
            elif a.startswith(">"):
                opts["longer_than"] = int(a[1:])
            elif a == "x*":
                opts["rounds"] = None
            elif a.startswith("x"):
                opts["rounds"] = int(a[1:])
                if opts["rounds"] < 1:
                    raise PipelineError(f"remove: repeat count must be >= 1 in {a!r}")
            elif a in ("any", "all"):
                opts["edge_class"] = None
            else:
                opts["edge_class"] = EdgeClass(a)
        except ValueError as exc:
            if isinstance(exc, PipelineError):
                raise
            raise PipelineError(f"remove: bad argument {a!r}") from None
    return opts


def parse_pipeline(spec: str) -> list[Step]:
    steps = []
    for chunk in spec.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        name, _, rest = chunk.partition(":")
        name = name.strip()
        args = [a.strip() for a in rest.split(",") if a.strip()]
        if name == "remove":
            steps.append(Step(name, _parse_remove(args)))
        elif name == "merge-amb":
            if len(args) > 1:
                raise PipelineError("merge-amb takes one length")
            try:
                steps.append(Step(name, {"max_connector_len": int(args[0]) if args else 3}))
            except ValueError:
                raise PipelineError(f"merge-amb: bad length {args[0]!r}") from None
        elif name == "connect":
            params = {}
            for a in args:
                key, eq, value = a.partition("=")
                if not eq or key not in _CONNECT_KEYS:
                    raise PipelineError(f"connect: bad argument {a!r}")
                try:
                    params[_CONNECT_KEYS[key]] = int(value) if key == "n" else float(value)
                except ValueError:
                    raise PipelineError(f"connect: bad value in {a!r}") from None
            try:
                steps.append(Step(name, {"params": ConnectionCostParams(**params)}))
            except ValueError as exc:
                raise PipelineError(f"connect: {exc}") from None
        elif name == "retrace":
            if args:
                raise PipelineError("retrace takes no arguments")
            steps.append(Step(name))
        else:
            raise PipelineError(f"unknown pipeline step {name!r}")
    return steps


def apply_step(result: TraceResult, step: Step) -> TraceResult:
    o = step.options
    if step.name == "remove":
        if o["rounds"] == 0:
            return remove_edges_where(result, o["edge_class"], o["shorter_than"], o["longer_than"])
        return iterate_removal(result, o["edge_class"], o["shorter_than"], o["longer_than"], o["rounds"])
    if step.name == "merge-amb":
        return merge_nearby_ambiguities(result, o["max_connector_len"])
    if step.name == "connect":
        return connect_all(result, o["params"])
    if step.name == "retrace":
        return retrace(result)
    raise PipelineError(f"unknown pipeline step {step.name!r}")


def run_pipeline(result: TraceResult, spec: str | list[Step]) -> TraceResult:
    steps = parse_pipeline(spec) if isinstance(spec, str) else spec
    for step in steps:
        result = apply_step(result, step)
    return result
