"""Small synthetic figures for tests, demos and the CLI ``generate`` command."""

from __future__ import annotations

import numpy as np

from .bench import generate_cross_pattern
from .core import BinaryImage


def ring(size: int = 6) -> BinaryImage:
    """Closed 1-px loop: a ``size`` x ``size`` square outline with cut corners."""
    if size < 4:
        raise ValueError("ring size must be >= 4")
    arr = np.zeros((size, size), dtype=np.uint8)
    arr[0, 1:-1] = arr[-1, 1:-1] = 1
    arr[1:-1, 0] = arr[1:-1, -1] = 1
    return BinaryImage(arr)


def t_junction(arm: int = 3) -> BinaryImage:
    """Horizontal bar of ``2*arm+1`` px with a stem of ``arm`` px below its center."""
    if arm < 1:
        raise ValueError("arm must be >= 1")
    arr = np.zeros((arm + 1, 2 * arm + 1), dtype=np.uint8)
    arr[0, :] = 1
    arr[:, arm] = 1
    return BinaryImage(arr)


def x_junction(arm: int = 3) -> BinaryImage:
    """Plus sign with four arms of ``arm`` px around one center pixel."""
    if arm < 1:
        raise ValueError("arm must be >= 1")
    side = 2 * arm + 1
    arr = np.zeros((side, side), dtype=np.uint8)
    arr[arm, :] = 1
    arr[:, arm] = 1
    return BinaryImage(arr)


PATTERNS = {
    "cross-row": lambda n: generate_cross_pattern(n, "row"),
    "cross-square": lambda n: generate_cross_pattern(n, "square"),
    "ring": ring,
    "t-junction": t_junction,
    "x-junction": x_junction,
}
