"""Independent ground-truth engines for validating the weighted objective.

``reference_inertia`` re-implements the weighted within-cluster sum of
squares in plain Python, deliberately sharing no code with the numpy
evaluation path, so the two can check each other. ``exhaustive_min_inertia``
enumerates every assignment of a small instance. ``lloyd_kmeans`` is a
classical weighted Lloyd iteration used as a comparator only; it is never a
GA component.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .objective import ProblemInstance

__all__ = ["OracleResult", "reference_inertia", "exhaustive_min_inertia", "lloyd_kmeans", "lloyd_once"]

ENUMERATION_LIMIT = 10_000_000


@dataclass(frozen=True)
class OracleResult:
    optimal_inertia: float
    optimal_assignment: tuple[int, ...]
    assignments_evaluated: int


def reference_inertia(assignment, points, weights) -> float:
    """Weighted within-cluster sum of squares, computed with plain Python loops.

    Independent of the numpy objective path by construction.
    """
    n = len(assignment)
    clusters: dict[int, list[int]] = {}
    for j in range(n):
        clusters.setdefault(int(assignment[j]), []).append(j)
    total = 0.0
    dims = len(points[0])
    for members in clusters.values():
        weight_sum = sum(float(weights[j]) for j in members)
        center = [
            sum(float(weights[j]) * float(points[j][d]) for j in members) / weight_sum
            for d in range(dims)
        ]
        for j in members:
            dist_sq = sum((float(points[j][d]) - center[d]) ** 2 for d in range(dims))
            total += float(weights[j]) * dist_sq
    return total


def exhaustive_min_inertia(inst: ProblemInstance) -> OracleResult:
    """Minimum inertia over all c^n assignments; ties go to the lexicographically
    smallest assignment. Refuses instances beyond the enumeration guard."""
    n, c = inst.n_cells, inst.c
    if c**n > ENUMERATION_LIMIT:
        raise ValueError(
            f"instance too large for exhaustive search: {c}^{n} assignments exceed "
            f"the {ENUMERATION_LIMIT} guard"
        )
    points = [tuple(row) for row in inst.points.tolist()]
    weights = inst.weights.tolist()
    best_value = None
    best_assignment = None
    count = 0
    for assignment in itertools.product(range(c), repeat=n):
        count += 1
        value = reference_inertia(assignment, points, weights)
        if best_value is None or value < best_value:
            best_value = value
            best_assignment = assignment
    return OracleResult(
        optimal_inertia=best_value,
        optimal_assignment=best_assignment,
        assignments_evaluated=count,
    )


def lloyd_once(inst: ProblemInstance, rng: np.random.Generator) -> tuple[float, list[float]]:
    """One weighted Lloyd run from random point seeds.

    Returns the final inertia and the per-iteration inertia history (checked
    non-increasing by tests). Clusters that lose all members are dropped.
    """
    points, weights = inst.points, inst.weights
    n = inst.n_cells
    k = min(inst.c, n)
    centers = points[rng.choice(n, size=k, replace=False)].copy()
    previous = None
    history: list[float] = []
    for _ in range(1000):  # tie cycles are theoretical; cap keeps the comparator total
        dist_sq = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = dist_sq.argmin(axis=1)
        used = np.unique(labels)
        centers = np.stack(
            [
                (weights[labels == i, None] * points[labels == i]).sum(axis=0)
                / weights[labels == i].sum()
                for i in used
            ]
        )
        relabel = np.searchsorted(used, labels)
        value = float(
            np.sum(weights * ((points - centers[relabel]) ** 2).sum(axis=1))
        )
        history.append(value)
        if previous is not None and np.array_equal(relabel, previous):
            break
        previous = relabel
    return history[-1], history


def lloyd_kmeans(inst: ProblemInstance, rng: np.random.Generator, restarts: int = 10) -> float:
    """Best inertia over several weighted Lloyd restarts."""
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    return min(lloyd_once(inst, rng)[0] for _ in range(restarts))
