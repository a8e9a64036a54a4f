"""Edge tracing with explicit ambiguity modeling for binary edge images."""

from .ambiguity import Ambiguity, AmbiguityRegistry, ambiguity_at, preprocess_ambiguities
from .core import (
    BinaryImage,
    Point,
    contains_four_cluster,
    get_direct_neighbors,
    is_ambiguity_point,
    neighbor_occupancy,
)
from .tracer import Edge, EdgeIdMap, EdgeStore, TraceResult, merge_edges, merge_points, trace_all

__all__ = [
    "Ambiguity",
    "AmbiguityRegistry",
    "BinaryImage",
    "Edge",
    "EdgeIdMap",
    "EdgeStore",
    "Point",
    "TraceResult",
    "ambiguity_at",
    "contains_four_cluster",
    "get_direct_neighbors",
    "is_ambiguity_point",
    "merge_edges",
    "merge_points",
    "neighbor_occupancy",
    "preprocess_ambiguities",
    "trace_all",
]

__version__ = "0.1.0"
