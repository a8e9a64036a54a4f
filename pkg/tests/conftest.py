from __future__ import annotations

import numpy as np
import pytest

from edgetrace import BinaryImage
from edgetrace.bench import generate_cross_pattern

CIRCLE_CHORD = """
......#......
......#......
....#####....
...#..#..#...
..#...#...#..
..#...#...#..
..#...#...#..
...#..#..#...
....#####....
......#......
......#......
"""

# Hand-built corpus covering open and closed edges, junctions, clusters and
# nested figures.
CORPUS = {
    "single": "#",
    "line3": "###",
    "diagonal": """
#....
.#...
..#..
...#.
""",
    "staircase": """
##...
.##..
..##.
""",
    "ring": """
.###.
#...#
#...#
.###.
""",
    "t_junction": """
#######
...#...
...#...
...#...
""",
    "y_junction": """
#...#
.#.#.
..#..
..#..
..#..
""",
    "x_junction": """
...#...
...#...
...#...
#######
...#...
...#...
...#...
""",
    "block2": """
.....
.##..
.##..
.....
""",
    "block3": """
###
###
###
""",
    "blob_with_arms": """
#.......#
.#.....#.
..#####..
..#####..
..#####..
.#.....#.
#.......#
""",
    "nested_rings": """
.#########.
#.........#
#..#####..#
#..#...#..#
#..#...#..#
#..#####..#
#.........#
.#########.
""",
    "lollipop": """
....###
...#...#
####...#
...#...#
....###.
""",
    "two_x": """
.#..........#.
###........###
.#..........#.
""",
    "hollow_plus": """
..#..
..#..
#####
..#..
..#..
""",
    "circle_chord": CIRCLE_CHORD,
    "comb": """
#########
#.#.#.#.#
#.#.#.#.#
""",
    "thick_l": """
##....
##....
######
######
""",
    "spiral": """
#######
#.....#
#.###.#
#.#.#.#
#.#...#
#.#####
""",
}


def fixture_image(name: str) -> BinaryImage:
    return BinaryImage.from_ascii(CORPUS[name].strip("\n"))


def corpus_images() -> dict[str, BinaryImage]:
    out = {name: fixture_image(name) for name in CORPUS}
    out["cross_row_3"] = generate_cross_pattern(3, "row")
    out["cross_square_4"] = generate_cross_pattern(4, "square")
    out["blank"] = BinaryImage.blank(5, 4)
    out["full"] = BinaryImage(np.ones((4, 5), dtype=np.uint8))
    return out


def random_images(count: int, size: int = 64, densities=(0.05, 0.2, 0.5), seed: int = 1234):
    rng = np.random.default_rng(seed)
    for i in range(count):
        d = densities[i % len(densities)]
        yield d, BinaryImage((rng.random((size, size)) < d).astype(np.uint8))


@pytest.fixture
def corpus():
    return corpus_images()
