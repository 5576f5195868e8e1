"""Reduction of an image's RGB histogram to a small weighted point set.

The 256-valued color cube is carved into axis-aligned subcubes (side 32 by
default, 512 subcubes). Every color maps to its subcube; each non-empty
subcube collapses to a single point at the subcube center, weighted by the
total pixel count that fell into it. The clustering then runs on at most 512
weighted points instead of one point per distinct color.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netpbm import ImageRGB

__all__ = ["WeightedCell", "build_histogram", "cell_of_color", "partition_cells", "cells_from_image"]

DEFAULT_CELL_SIDE = 32


@dataclass(frozen=True)
class WeightedCell:
    """One non-empty color subcube: grid index, geometric center, pixel weight."""

    cell_index: tuple[int, int, int]
    center: tuple[float, float, float]
    weight: int


def _check_side(side: int) -> None:
    if side < 1 or 256 % side != 0:
        raise ValueError(f"cell side must divide 256, got {side}")


def build_histogram(image: ImageRGB) -> dict[tuple[int, int, int], int]:
    """Count pixels per exact (r, g, b) color."""
    flat = image.pixels.reshape(-1, 3)
    colors, counts = np.unique(flat, axis=0, return_counts=True)
    return {(int(r), int(g), int(b)): int(n) for (r, g, b), n in zip(colors, counts)}


def cell_of_color(color: tuple[int, int, int], side: int = DEFAULT_CELL_SIDE) -> tuple[int, int, int]:
    """Subcube grid index of a color: componentwise floor division by the side."""
    _check_side(side)
    r, g, b = color
    for v in (r, g, b):
        if not 0 <= v <= 255:
            raise ValueError(f"channel value {v} outside [0, 255]")
    return (r // side, g // side, b // side)


def partition_cells(
    histogram: dict[tuple[int, int, int], int], side: int = DEFAULT_CELL_SIDE
) -> list[WeightedCell]:
    """Agglomerate a color histogram into weighted subcube centers.

    Returns one cell per non-empty subcube, sorted by grid index in
    lexicographic order. The ordering is the genotype position assignment:
    cell k of the returned list owns bit group k downstream, so it must be
    deterministic.
    """
    _check_side(side)
    if not histogram:
        raise ValueError("histogram is empty")
    totals: dict[tuple[int, int, int], int] = {}
    for color, count in histogram.items():
        if count < 1:
            raise ValueError(f"non-positive count {count} for color {color}")
        idx = cell_of_color(color, side)
        totals[idx] = totals.get(idx, 0) + count
    half = (side - 1) / 2.0
    return [
        WeightedCell(
            cell_index=idx,
            center=(side * idx[0] + half, side * idx[1] + half, side * idx[2] + half),
            weight=totals[idx],
        )
        for idx in sorted(totals)
    ]


def cells_from_image(image: ImageRGB, side: int = DEFAULT_CELL_SIDE) -> list[WeightedCell]:
    """Histogram + partition in one step."""
    return partition_cells(build_histogram(image), side)
