"""Generational GA: windowing-scaled roulette selection, one-point crossover,
per-bit mutation under a generation-indexed rate schedule, full population
replacement, and optional neoteny capture/injection hooks.

Reproducibility contract: all randomness comes from one numpy PCG64 stream
seeded from the run configuration, and the draw order is fixed:

1. initialization: one uniform per bit, individual-major, bit-minor
   (a single (P, n_bits) draw);
2. per generation g: P selection uniforms; then per parent pair a crossover
   coin and, only when crossing, one cut draw; then one uniform per offspring
   bit (a single (P, n_bits) draw); then the injection draws, if any.

Two runs with equal seed and configuration therefore produce bit-identical
traces. Cross-platform bit identity of numpy streams is not promised.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import objective
from .neoteny import NeotenyArchive, NeotenyConfig, capture, inject
from .objective import ProblemInstance
from .schedules import HyperbolicDecay, MutationSchedule

__all__ = [
    "GaConfig",
    "Population",
    "RunTrace",
    "init_population",
    "scale_windowing",
    "roulette_select",
    "roulette_select_many",
    "one_point_crossover",
    "mutate",
    "step_generation",
    "run_ga",
]


@dataclass
class GaConfig:
    """Knobs of a single GA run. Population size must be even (pairwise mating)."""

    schedule: MutationSchedule
    pop_size: int = 100
    generations: int = 3000
    crossover_prob: float = 0.8
    seed: int = 0
    window_epsilon: float = 1.0e-6

    def __post_init__(self):
        if self.pop_size < 2 or self.pop_size % 2 != 0:
            raise ValueError(f"population size must be even and >= 2, got {self.pop_size}")
        if self.generations < 0:
            raise ValueError(f"generation budget must be >= 0, got {self.generations}")
        if not 0.0 <= self.crossover_prob <= 1.0:
            raise ValueError(f"crossover probability must be in [0, 1], got {self.crossover_prob}")
        if self.window_epsilon <= 0:
            raise ValueError(f"window epsilon must be positive, got {self.window_epsilon}")


@dataclass
class Population:
    """Chromosome matrix (pop_size, n_bits) with parallel fitness values."""

    bits: np.ndarray
    fitness: np.ndarray

    def __post_init__(self):
        if self.bits.ndim != 2 or self.fitness.shape != (self.bits.shape[0],):
            raise ValueError("bits must be (pop_size, n_bits) with one fitness per row")


@dataclass
class RunTrace:
    """Per-generation statistics plus the best individual ever observed.

    Arrays cover generations 0..generations inclusive. ``best_*`` fields
    describe the running-max individual over all recorded (post-injection)
    population states.
    """

    generation: np.ndarray
    best: np.ndarray
    avg: np.ndarray
    std: np.ndarray
    mutation_rate: np.ndarray
    best_bits: np.ndarray = field(repr=False)
    best_fitness: float = 0.0
    best_inertia: float = 0.0
    best_generation: int = 0
    best_labels: np.ndarray | None = field(default=None, repr=False)


def _evaluate(bits: np.ndarray, inst: ProblemInstance) -> np.ndarray:
    labels = objective.batch_decode(bits, inst)
    return objective.fitness(objective.batch_inertia(labels, inst))


def init_population(inst: ProblemInstance, cfg: GaConfig, rng: np.random.Generator) -> Population:
    """Uniform random population, evaluated. One uniform draw per bit."""
    bits = (rng.random((cfg.pop_size, inst.n_bits)) < 0.5).astype(np.uint8)
    return Population(bits=bits, fitness=_evaluate(bits, inst))


def scale_windowing(fitnesses: np.ndarray, epsilon: float = 1.0e-6) -> np.ndarray:
    """Selection weights: fitness minus the current population minimum, plus epsilon.

    Rebasing keeps selection pressure relative within the generation; epsilon
    keeps every weight positive even when all fitnesses tie.
    """
    fitnesses = np.asarray(fitnesses, dtype=np.float64)
    if fitnesses.size == 0:
        raise ValueError("empty fitness list")
    return fitnesses - fitnesses.min() + epsilon


def roulette_select_many(weights: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k independent roulette draws; consumes exactly k uniforms."""
    weights = np.asarray(weights, dtype=np.float64)
    total = weights.sum()
    if not total > 0:
        raise ValueError(f"total selection weight must be positive, got {total}")
    cumulative = np.cumsum(weights)
    picks = np.searchsorted(cumulative, rng.random(k) * total, side="right")
    return np.minimum(picks, weights.size - 1)


def roulette_select(weights: np.ndarray, rng: np.random.Generator) -> int:
    """One roulette draw: index i with probability weight_i / sum(weights)."""
    return int(roulette_select_many(weights, 1, rng)[0])


def one_point_crossover(
    a: np.ndarray, b: np.ndarray, crossover_prob: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Swap tails after a uniform cut point in [1, L-1], with the given probability.

    Always consumes the probability coin; consumes the cut draw only when
    crossing. Without a cross, returns copies of the parents.
    """
    if a.shape != b.shape:
        raise ValueError(f"parent lengths differ: {a.shape} vs {b.shape}")
    length = a.shape[0]
    if length < 2:
        raise ValueError(f"chromosome length must be >= 2, got {length}")
    if rng.random() >= crossover_prob:
        return a.copy(), b.copy()
    cut = int(rng.integers(1, length))
    return (
        np.concatenate([a[:cut], b[cut:]]),
        np.concatenate([b[:cut], a[cut:]]),
    )


def mutate(bits: np.ndarray, p_m: float, rng: np.random.Generator) -> np.ndarray:
    """Flip each bit independently with probability p_m; one uniform per bit, in index order."""
    if not 0.0 <= p_m <= 1.0:
        raise ValueError(f"mutation rate must be in [0, 1], got {p_m}")
    flips = rng.random(bits.shape) < p_m
    return np.bitwise_xor(bits, flips.astype(np.uint8))


def step_generation(
    population: Population,
    g: int,
    cfg: GaConfig,
    inst: ProblemInstance,
    rng: np.random.Generator,
    neoteny_cfg: NeotenyConfig | None = None,
    archive: NeotenyArchive | None = None,
) -> Population:
    """Produce generation g+1 from generation g.

    P/2 parent pairs are drawn (with replacement) by windowing-scaled
    roulette; each pair is crossed with probability crossover_prob and both
    children mutated at the schedule's rate for generation g. Offspring
    replace the parents wholesale (no survivor elitism). When neoteny is
    active, the new generation's best is captured and archive injection may
    then overwrite slots.
    """
    pop_size, n_bits = population.bits.shape
    weights = scale_windowing(population.fitness, cfg.window_epsilon)
    parents = roulette_select_many(weights, pop_size, rng)

    child_bits = np.empty_like(population.bits)
    for pair in range(pop_size // 2):
        left, right = parents[2 * pair], parents[2 * pair + 1]
        child_bits[2 * pair], child_bits[2 * pair + 1] = one_point_crossover(
            population.bits[left], population.bits[right], cfg.crossover_prob, rng
        )

    p_m = cfg.schedule.rate(g)
    flips = rng.random((pop_size, n_bits)) < p_m
    np.bitwise_xor(child_bits, flips.astype(np.uint8), out=child_bits)

    new_population = Population(bits=child_bits, fitness=_evaluate(child_bits, inst))
    if archive is not None and neoteny_cfg is not None and neoteny_cfg.enabled:
        capture(archive, g + 1, new_population)
        new_population = inject(new_population, archive, neoteny_cfg, g + 1, inst, rng)
    return new_population


def _validate_run(cfg: GaConfig, neoteny_cfg: NeotenyConfig | None) -> None:
    if isinstance(cfg.schedule, HyperbolicDecay) and cfg.generations > cfg.schedule.horizon - 1:
        raise ValueError(
            f"schedule horizon {cfg.schedule.horizon} does not cover "
            f"{cfg.generations} generations (needs horizon >= generations + 1)"
        )
    if neoteny_cfg is not None and neoteny_cfg.enabled and neoteny_cfg.rate > 0:
        a1, _ = neoteny_cfg.capture_window
        b1, _ = neoteny_cfg.inject_window
        if b1 <= cfg.generations and a1 > cfg.generations:
            raise ValueError(
                f"injection window opens at generation {b1} but capture starts at "
                f"{a1}, after the final generation {cfg.generations}: archive would be empty"
            )


def run_ga(
    cfg: GaConfig,
    inst: ProblemInstance,
    neoteny_cfg: NeotenyConfig | None = None,
    gen_time_limit: float | None = None,
) -> RunTrace:
    """Run the full generational loop and collect the convergence trace.

    Row g of the trace describes the population state at generation g (after
    any injection) together with the schedule's rate at g. With neoteny
    disabled the RNG draw schedule is identical to a plain run, so results
    are bit-identical to passing no neoteny config at all.

    ``gen_time_limit`` aborts the run if a single generation exceeds the
    given wall-clock seconds; it guards against complexity regressions in
    long batch sweeps.
    """
    _validate_run(cfg, neoteny_cfg)
    rng = np.random.default_rng(cfg.seed)
    active = neoteny_cfg is not None and neoteny_cfg.enabled
    archive = NeotenyArchive(neoteny_cfg.capture_window) if active else None

    rows = cfg.generations + 1
    best = np.empty(rows)
    avg = np.empty(rows)
    std = np.empty(rows)
    rates = np.empty(rows)

    population = init_population(inst, cfg, rng)
    if archive is not None:
        capture(archive, 0, population)

    best_fitness = -np.inf
    best_bits = population.bits[0]
    best_generation = 0

    def record(g: int, pop: Population) -> None:
        nonlocal best_fitness, best_bits, best_generation
        best[g] = pop.fitness.max()
        avg[g] = pop.fitness.mean()
        std[g] = pop.fitness.std()
        rates[g] = cfg.schedule.rate(g)
        leader = int(np.argmax(pop.fitness))
        if pop.fitness[leader] > best_fitness:
            best_fitness = float(pop.fitness[leader])
            best_bits = pop.bits[leader].copy()
            best_generation = g

    record(0, population)
    for g in range(cfg.generations):
        started = time.perf_counter()
        population = step_generation(population, g, cfg, inst, rng, neoteny_cfg, archive)
        record(g + 1, population)
        elapsed = time.perf_counter() - started
        if gen_time_limit is not None and elapsed > gen_time_limit:
            raise RuntimeError(
                f"generation {g + 1} took {elapsed:.3f}s, over the {gen_time_limit:.3f}s "
                "per-generation guard; aborting run"
            )

    best_labels = objective.decode(best_bits, inst)
    return RunTrace(
        generation=np.arange(rows),
        best=best,
        avg=avg,
        std=std,
        mutation_rate=rates,
        best_bits=best_bits,
        best_fitness=best_fitness,
        best_inertia=objective.inertia(best_labels, inst),
        best_generation=best_generation,
        best_labels=best_labels,
    )
