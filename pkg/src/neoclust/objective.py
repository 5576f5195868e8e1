"""Chromosome decoding and the weighted k-means objective.

A chromosome is a flat bit vector with 3 bits per weighted cell, most
significant bit first; the 3-bit code modulo the cluster count gives the
cell's cluster label, so every genotype is feasible without repair. The
objective is the weighted within-cluster sum of squared distances (inertia):
each cell contributes weight * ||center - cluster_centroid||^2, with cluster
centroids the weight-weighted means of their members. GA fitness is
1e9 / inertia, capped through a small epsilon so a zero-inertia clustering
cannot produce an infinite selection weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .prepartition import WeightedCell

__all__ = [
    "FITNESS_SCALE",
    "FITNESS_EPS",
    "ProblemInstance",
    "decode",
    "batch_decode",
    "centroids",
    "inertia",
    "batch_inertia",
    "fitness",
]

FITNESS_SCALE = 1.0e9
FITNESS_EPS = 1.0e-9

_BIT_VALUES = np.array([4, 2, 1], dtype=np.uint8)  # MSB-first 3-bit group


@dataclass
class ProblemInstance:
    """The clustering problem the GA optimizes: weighted points and a cluster count.

    ``points`` has shape (n_cells, dims) and ``weights`` shape (n_cells,).
    Cluster count is capped at 8, the ceiling of the 3-bit genotype code.
    """

    points: np.ndarray
    weights: np.ndarray
    c: int
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.points.ndim != 2 or self.points.shape[0] < 1:
            raise ValueError("points must be a non-empty (n, dims) array")
        if self.weights.shape != (self.points.shape[0],):
            raise ValueError("weights must be one value per point")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be positive")
        if not 1 <= self.c <= 8:
            raise ValueError(f"cluster count must be in [1, 8], got {self.c}")

    @classmethod
    def from_cells(cls, cells: list[WeightedCell], c: int) -> "ProblemInstance":
        if not cells:
            raise ValueError("cell list is empty")
        points = np.array([cell.center for cell in cells], dtype=np.float64)
        weights = np.array([cell.weight for cell in cells], dtype=np.float64)
        return cls(points=points, weights=weights, c=c)

    @property
    def n_cells(self) -> int:
        return self.points.shape[0]

    @property
    def dims(self) -> int:
        return self.points.shape[1]

    @property
    def n_bits(self) -> int:
        return 3 * self.n_cells

    # Scratch arrays reused by the batch evaluator; keyed by population size.
    def _tiled(self, rows: int):
        key = ("tiled", rows)
        if key not in self._cache:
            weighted_coords = self.weights[:, None] * self.points  # (n, dims)
            self._cache[key] = (
                np.tile(self.weights, rows),
                [np.tile(weighted_coords[:, d], rows) for d in range(self.dims)],
            )
        return self._cache[key]

    @property
    def _total_weighted_sqnorm(self) -> float:
        key = "total_sqnorm"
        if key not in self._cache:
            self._cache[key] = float(np.sum(self.weights * np.sum(self.points**2, axis=1)))
        return self._cache[key]


def _check_bits(bits: np.ndarray, inst: ProblemInstance) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape[-1] != inst.n_bits:
        raise ValueError(
            f"chromosome length {bits.shape[-1]} does not match instance "
            f"({inst.n_bits} bits for {inst.n_cells} cells)"
        )
    return bits


def decode(bits: np.ndarray, inst: ProblemInstance) -> np.ndarray:
    """Cluster label per cell: 3-bit MSB-first code modulo the cluster count."""
    bits = _check_bits(bits, inst)
    codes = bits.reshape(inst.n_cells, 3) @ _BIT_VALUES
    return (codes % inst.c).astype(np.int64)


def batch_decode(bits: np.ndarray, inst: ProblemInstance) -> np.ndarray:
    """Decode a (rows, n_bits) matrix of chromosomes into (rows, n_cells) labels."""
    bits = _check_bits(np.atleast_2d(bits), inst)
    rows = bits.shape[0]
    codes = bits.reshape(rows, inst.n_cells, 3) @ _BIT_VALUES
    return (codes % inst.c).astype(np.int64)


def centroids(labels: np.ndarray, inst: ProblemInstance) -> np.ndarray:
    """Weighted mean of each cluster's cells, shape (c, dims); NaN rows mark empty clusters."""
    labels = np.asarray(labels)
    weight_sums = np.bincount(labels, weights=inst.weights, minlength=inst.c)
    coord_sums = np.stack(
        [
            np.bincount(labels, weights=inst.weights * inst.points[:, d], minlength=inst.c)
            for d in range(inst.dims)
        ],
        axis=1,
    )
    out = np.full((inst.c, inst.dims), np.nan)
    occupied = weight_sums > 0
    out[occupied] = coord_sums[occupied] / weight_sums[occupied, None]
    return out


def inertia(labels: np.ndarray, inst: ProblemInstance) -> float:
    """Weighted within-cluster sum of squared distances for one assignment.

    Empty clusters contribute nothing. With unit weights this is the plain
    k-means objective.
    """
    labels = np.asarray(labels)
    centers = centroids(labels, inst)
    diff = inst.points - centers[labels]
    return float(np.sum(inst.weights * np.sum(diff**2, axis=1)))


def batch_inertia(labels: np.ndarray, inst: ProblemInstance) -> np.ndarray:
    """Inertia of each row of a (rows, n_cells) label matrix.

    Uses the identity
        sum_j w_j ||x_j - C(j)||^2 = sum_j w_j ||x_j||^2 - sum_i ||S_i||^2 / W_i
    where S_i and W_i are each cluster's weighted coordinate sum and total
    weight; valid because centroids are the weighted cluster means.
    """
    labels = np.atleast_2d(np.asarray(labels))
    rows, n = labels.shape
    if n != inst.n_cells:
        raise ValueError(f"label matrix has {n} cells, instance has {inst.n_cells}")
    c = inst.c
    flat = (labels + c * np.arange(rows, dtype=np.int64)[:, None]).ravel()
    w_tiled, wx_tiled = inst._tiled(rows)
    weight_sums = np.bincount(flat, weights=w_tiled, minlength=rows * c)
    sq_sums = np.zeros(rows * c)
    for wx in wx_tiled:
        coord = np.bincount(flat, weights=wx, minlength=rows * c)
        sq_sums += coord**2
    explained = np.divide(
        sq_sums, weight_sums, out=np.zeros_like(sq_sums), where=weight_sums > 0
    )
    values = inst._total_weighted_sqnorm - explained.reshape(rows, c).sum(axis=1)
    # Cancellation can leave a perfect clustering a hair below zero.
    return np.maximum(values, 0.0)


def fitness(inertia_value):
    """GA fitness 1e9 / max(inertia, 1e-9); accepts scalars or arrays."""
    value = np.maximum(np.asarray(inertia_value, dtype=np.float64), FITNESS_EPS)
    result = FITNESS_SCALE / value
    return float(result) if np.isscalar(inertia_value) or result.ndim == 0 else result
