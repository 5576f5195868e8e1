"""Capture of early-generation elites and their re-injection into late generations.

During an early capture window the best chromosome of each generation is
copied into an archive. During a late injection window, archived genotypes
overwrite randomly chosen population slots, restoring genetic material from
the exploratory phase of the run after the population has converged. An
optional companion mode additionally drops a fresh uniform-random chromosome
into a second slot with every injection, diversity on top of diversity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import objective
from .objective import ProblemInstance

__all__ = ["NeotenyConfig", "ArchiveEntry", "NeotenyArchive", "capture", "injection_count", "inject"]


@dataclass(frozen=True)
class NeotenyConfig:
    """Windows and intensity of the capture/re-injection mechanism.

    ``rate`` is the average number of injections per generation inside the
    injection window; fractional rates are realized by a Bernoulli extra,
    so the expectation is exact. ``with_random`` pairs every injected
    archive genotype with a fresh random chromosome in a second slot.
    """

    enabled: bool = True
    capture_window: tuple[int, int] = (1, 100)
    inject_window: tuple[int, int] = (1000, 3000)
    rate: float = 1.0
    with_random: bool = False

    def __post_init__(self):
        a1, a2 = self.capture_window
        b1, b2 = self.inject_window
        if not (0 <= a1 <= a2):
            raise ValueError(f"capture window {self.capture_window} is not a valid interval")
        if not (b1 <= b2):
            raise ValueError(f"inject window {self.inject_window} is not a valid interval")
        if self.enabled and not a2 < b1:
            raise ValueError(
                f"capture window {self.capture_window} must end before "
                f"inject window {self.inject_window} starts"
            )
        if self.rate < 0:
            raise ValueError(f"rate must be >= 0, got {self.rate}")


@dataclass(frozen=True)
class ArchiveEntry:
    generation: int
    bits: np.ndarray
    fitness: float


@dataclass
class NeotenyArchive:
    """Best-of-generation genotypes collected during the capture window."""

    capture_window: tuple[int, int]
    entries: list[ArchiveEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)


def capture(archive: NeotenyArchive, g: int, population) -> NeotenyArchive:
    """Append a copy of the generation's best individual; no-op outside the window.

    Ties on fitness break toward the lowest population index.
    """
    a1, a2 = archive.capture_window
    if not a1 <= g <= a2:
        return archive
    best = int(np.argmax(population.fitness))
    archive.entries.append(
        ArchiveEntry(
            generation=g,
            bits=population.bits[best].copy(),
            fitness=float(population.fitness[best]),
        )
    )
    return archive


def injection_count(rate: float, rng: np.random.Generator) -> int:
    """Number of injection events this generation: floor(rate) plus a
    Bernoulli(frac(rate)) extra, so the mean equals ``rate`` exactly.

    Consumes one uniform draw only when the fractional part is non-zero.
    """
    if rate < 0:
        raise ValueError(f"rate must be >= 0, got {rate}")
    base = math.floor(rate)
    frac = rate - base
    if frac > 0 and rng.random() < frac:
        return base + 1
    return base


def inject(population, archive: NeotenyArchive, config: NeotenyConfig, g: int,
           inst: ProblemInstance, rng: np.random.Generator):
    """Overwrite random population slots with random archive entries.

    Per event the draw order is: target slot, archive index, then (companion
    mode only) a second distinct slot and one uniform per bit of the fresh
    random chromosome. Slots may collide across events; the later overwrite
    wins. Overwritten slots are re-evaluated. Population size is unchanged.
    No-op outside the injection window.
    """
    b1, b2 = config.inject_window
    if not (config.enabled and b1 <= g <= b2):
        return population
    if not archive.entries:
        raise ValueError(f"injection window reached at generation {g} with an empty archive")
    pop_size, n_bits = population.bits.shape
    touched = []
    for _ in range(injection_count(config.rate, rng)):
        slot = int(rng.integers(0, pop_size))
        pick = int(rng.integers(0, len(archive.entries)))
        population.bits[slot] = archive.entries[pick].bits
        touched.append(slot)
        if config.with_random:
            other = int(rng.integers(0, pop_size - 1))
            if other >= slot:
                other += 1
            population.bits[other] = rng.random(n_bits) < 0.5
            touched.append(other)
    if touched:
        rows = sorted(set(touched))
        labels = objective.batch_decode(population.bits[rows], inst)
        population.fitness[rows] = objective.fitness(objective.batch_inertia(labels, inst))
    return population
