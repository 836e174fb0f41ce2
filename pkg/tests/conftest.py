"""Shared fixtures and generators for the test suite."""

from __future__ import annotations

import math

import numpy as np
import pytest

from stitlab.geometry import ConvexPolygon


@pytest.fixture
def unit_square() -> ConvexPolygon:
    return ConvexPolygon(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))


@pytest.fixture
def right_triangle() -> ConvexPolygon:
    return ConvexPolygon(((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)))


def random_convex_polygon(rng: np.random.Generator, max_vertices: int = 8) -> ConvexPolygon:
    """Random convex polygon: jittered angles on a random ellipse, random center."""
    n = int(rng.integers(3, max_vertices + 1))
    angles = np.sort(rng.uniform(0.0, 2.0 * math.pi, size=n))
    if np.min(np.diff(angles, append=angles[0] + 2 * math.pi)) < 0.15:
        return random_convex_polygon(rng, max_vertices)
    a, b = rng.uniform(0.4, 2.5, size=2)
    cx, cy = rng.uniform(-2.0, 2.0, size=2)
    verts = tuple((cx + a * math.cos(t), cy + b * math.sin(t)) for t in angles)
    return ConvexPolygon(verts)


def vertical_line_at(x: float):
    """Line {x = const}: direction pi/2, offset -x (normal (-1, 0))."""
    from stitlab.geometry import Line

    return Line(math.pi / 2.0, -x)


def horizontal_line_at(y: float):
    from stitlab.geometry import Line

    return Line(0.0, y)
