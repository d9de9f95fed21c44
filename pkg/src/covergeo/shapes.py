"""Rasterized test shapes.

Every shape is produced by sampling an analytic inclusion predicate at cell
centers on a grid that leaves at least a two-cell empty rim.  Shapes are
centered on a cell center (the grid has an odd number of cells per axis), so
a round shape of radius ``k*h`` is the digital ball of radius ``k`` around
the middle cell.  This convention keeps digitizations symmetric under the
symmetries of the square lattice and plays best with the morphology
operators: sampled at cell centers, the extreme cells of a round shape sit
exactly at attainable lattice distances instead of just beyond them.
"""

from __future__ import annotations

import math

import numpy as np

from .grid import GridSet

__all__ = [
    "rasterize",
    "disk",
    "two_disks",
    "dumbbell",
    "box",
    "disk_minus_box",
    "disk_minus_disk",
    "disk_minus_cross",
    "ball3",
]


def rasterize(predicate, half_extent: float, h: float, pad_cells: int = 2) -> GridSet:
    """Sample ``predicate(x, y)`` (vectorized) at cell centers.

    The grid covers ``[-half_extent, half_extent]^2`` plus ``pad_cells`` of
    empty rim; the shape center (0, 0) is the center of the middle cell.
    """
    half_cells = int(math.ceil(half_extent / h)) + pad_cells
    n = 2 * half_cells + 1
    idx = (np.arange(n) - half_cells) * h
    yy, xx = np.meshgrid(idx, idx, indexing="ij")
    mask = predicate(xx, yy)
    origin = (-(half_cells + 0.5) * h, -(half_cells + 0.5) * h)
    return GridSet(mask, h, origin)


def disk(radius: float, h: float = 1.0, pad_cells: int = 2) -> GridSet:
    return rasterize(lambda x, y: x * x + y * y <= radius * radius, radius, h, pad_cells)


def two_disks(radius: float, separation: float, h: float = 1.0, pad_cells: int = 2) -> GridSet:
    """Union of two disks with centers ``separation`` apart on the x axis."""
    half = separation / 2

    def pred(x, y):
        return ((x - half) ** 2 + y**2 <= radius**2) | ((x + half) ** 2 + y**2 <= radius**2)

    return rasterize(pred, radius + half, h, pad_cells)


def dumbbell(
    radius: float,
    neck_halfwidth: float,
    center_distance: float,
    h: float = 1.0,
    pad_cells: int = 2,
) -> GridSet:
    """Two bulbs joined by a thin rectangular neck along the x axis."""
    half = center_distance / 2

    def pred(x, y):
        bulbs = ((x - half) ** 2 + y**2 <= radius**2) | ((x + half) ** 2 + y**2 <= radius**2)
        neck = (np.abs(x) <= half) & (np.abs(y) <= neck_halfwidth)
        return bulbs | neck

    return rasterize(pred, radius + half, h, pad_cells)


def box(side: float, h: float = 1.0, pad_cells: int = 2) -> GridSet:
    half = side / 2
    return rasterize(
        lambda x, y: (np.abs(x) <= half) & (np.abs(y) <= half), half, h, pad_cells
    )


def disk_minus_box(
    radius: float, hole_w: float, hole_h: float | None = None, h: float = 1.0, pad_cells: int = 2
) -> GridSet:
    """Disk with a centered axis-aligned rectangular hole."""
    if hole_h is None:
        hole_h = hole_w

    def pred(x, y):
        inside = x * x + y * y <= radius * radius
        hole = (np.abs(x) <= hole_w / 2) & (np.abs(y) <= hole_h / 2)
        return inside & ~hole

    return rasterize(pred, radius, h, pad_cells)


def disk_minus_disk(radius: float, hole_radius: float, h: float = 1.0, pad_cells: int = 2) -> GridSet:
    def pred(x, y):
        r2 = x * x + y * y
        return (r2 <= radius * radius) & (r2 > hole_radius * hole_radius)

    return rasterize(pred, radius, h, pad_cells)


def disk_minus_cross(
    radius: float, arm: float, thickness: float, h: float = 1.0, pad_cells: int = 2
) -> GridSet:
    """Disk minus a centered plus-shaped hole.

    The reentrant corners of the cross hole break opening stability of the
    set at radii beyond the arm thickness, unlike a convex hole.
    """

    def pred(x, y):
        inside = x * x + y * y <= radius * radius
        barh = (np.abs(x) <= arm) & (np.abs(y) <= thickness / 2)
        barv = (np.abs(y) <= arm) & (np.abs(x) <= thickness / 2)
        return inside & ~(barh | barv)

    return rasterize(pred, radius, h, pad_cells)


def ball3(radius: float, h: float = 1.0, pad_cells: int = 2) -> GridSet:
    """Solid 3d ball, centered on a cell center."""
    half_cells = int(math.ceil(radius / h)) + pad_cells
    n = 2 * half_cells + 1
    idx = (np.arange(n) - half_cells) * h
    zz, yy, xx = np.meshgrid(idx, idx, idx, indexing="ij")
    mask = xx * xx + yy * yy + zz * zz <= radius * radius
    origin = (-(half_cells + 0.5) * h,) * 3
    return GridSet(mask, h, origin)
