"""Experiment harness: single runs, strategy-by-seed batch sweeps, synthetic
test images, and segmentation artifacts.

Per seed a run writes a convergence trace CSV (``g,best,avg,stddev,pm``), an
initial-population statistics line, a key=value summary, the best
segmentation as a label PGM, and one binary mask PGM per cluster. A batch
sweep writes one summary CSV with strategy rows, seed columns, row/column
averages, and a final row flagging the best strategy per seed. All outputs
except wall-clock fields are byte-deterministic for a given spec.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .ga import GaConfig, RunTrace, init_population, run_ga
from .neoteny import NeotenyConfig
from .netpbm import ImageRGB, LabelImage, read_ppm, write_cluster_mask, write_label_pgm
from .objective import ProblemInstance
from .prepartition import DEFAULT_CELL_SIDE, WeightedCell, cells_from_image
from .schedules import parse_schedule

__all__ = [
    "SyntheticSpec",
    "ExperimentSpec",
    "SummaryTable",
    "make_synthetic_image",
    "segment_image",
    "trace_csv",
    "init_stats_line",
    "cells_csv",
    "run_experiment",
    "run_batch",
    "parse_strategy",
]

# Per-generation wall budget; a generation exceeding 100x this aborts the run.
GENERATION_TIME_BUDGET = 0.1
GUARD_FACTOR = 100

# Base colors sit on subcube boundaries (multiples of 64) so channel noise
# spreads each region's pixels over many cells.
BASE_PALETTE = (
    (64, 64, 64),
    (192, 64, 64),
    (64, 192, 64),
    (64, 64, 192),
    (192, 192, 64),
    (64, 192, 192),
    (192, 64, 192),
    (192, 192, 192),
)


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of a generated test image: ``k,width,height,noise,seed``."""

    k_colors: int
    width: int
    height: int
    noise_stddev: float
    seed: int

    @classmethod
    def parse(cls, text: str) -> "SyntheticSpec":
        parts = text.split(",")
        if len(parts) != 5:
            raise ValueError(f"synthetic spec must be k,width,height,noise,seed, got {text!r}")
        k, w, h = int(parts[0]), int(parts[1]), int(parts[2])
        return cls(k, w, h, float(parts[3]), int(parts[4]))


@dataclass
class ExperimentSpec:
    """Everything a run (or batch cell) needs: input image, GA knobs, outputs."""

    seeds: list[int]
    out_dir: Path
    image_path: Path | None = None
    synthetic: SyntheticSpec | None = None
    schedule: str = "ld"
    generations: int = 3000
    pop_size: int = 100
    crossover_prob: float = 0.8
    clusters: int = 6
    neoteny: NeotenyConfig | None = None
    cell_side: int = DEFAULT_CELL_SIDE
    dump_cells: bool = False
    gen_time_limit: float | None = GENERATION_TIME_BUDGET * GUARD_FACTOR

    def __post_init__(self):
        self.out_dir = Path(self.out_dir)
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if (self.image_path is None) == (self.synthetic is None):
            raise ValueError("exactly one of image_path or synthetic must be given")


def make_synthetic_image(
    k_colors: int, width: int, height: int, noise_stddev: float, seed: int
) -> ImageRGB:
    """Vertical stripes of k base colors with per-channel Gaussian noise.

    Deterministic per seed. With zero noise the image holds exactly
    ``k_colors`` distinct colors.
    """
    if not 2 <= k_colors <= len(BASE_PALETTE):
        raise ValueError(f"k_colors must be in [2, {len(BASE_PALETTE)}], got {k_colors}")
    if noise_stddev < 0:
        raise ValueError(f"noise stddev must be >= 0, got {noise_stddev}")
    rng = np.random.default_rng(seed)
    palette = np.array(BASE_PALETTE[:k_colors], dtype=np.float64)
    stripe = (np.arange(width) * k_colors) // width
    base = np.broadcast_to(palette[stripe][None, :, :], (height, width, 3))
    if noise_stddev > 0:
        base = base + rng.normal(0.0, noise_stddev, size=(height, width, 3))
    pixels = np.clip(np.rint(base), 0, 255).astype(np.uint8)
    return ImageRGB(width, height, pixels)


def segment_image(
    image: ImageRGB,
    assignment: np.ndarray,
    cells: list[WeightedCell],
    clusters: int,
    side: int = DEFAULT_CELL_SIDE,
) -> LabelImage:
    """Label every pixel with its color cell's cluster.

    Pixels of one exact color always share a label; pixels whose colors fall
    in the same subcube share a label regardless of the assignment, which is
    the granularity limit of the pre-partition.
    """
    grid = 256 // side
    lookup = np.full((grid, grid, grid), -1, dtype=np.int64)
    for position, cell in enumerate(cells):
        lookup[cell.cell_index] = assignment[position]
    cell_coords = image.pixels.astype(np.int64) // side
    labels = lookup[cell_coords[..., 0], cell_coords[..., 1], cell_coords[..., 2]]
    if (labels < 0).any():
        raise RuntimeError("pixel color falls in a cell missing from the instance")
    return LabelImage(image.width, image.height, labels, clusters)


def trace_csv(trace: RunTrace) -> str:
    """Convergence trace as CSV, values at 9 significant digits."""
    lines = ["g,best,avg,stddev,pm"]
    for g in range(trace.generation.size):
        lines.append(
            f"{trace.generation[g]},{trace.best[g]:.9g},{trace.avg[g]:.9g},"
            f"{trace.std[g]:.9g},{trace.mutation_rate[g]:.9g}"
        )
    return "\n".join(lines) + "\n"


def init_stats_line(seed: int, fitness: np.ndarray) -> str:
    """Initial-population fitness statistics, one line per seed."""
    return (
        f"R={seed}  best={fitness.max():.9g} worst={fitness.min():.9g} "
        f"avg={fitness.mean():.9g} std={fitness.std():.9g} sum={fitness.sum():.9g}"
    )


def cells_csv(cells: list[WeightedCell]) -> str:
    lines = ["cell_i,cell_j,cell_k,center_r,center_g,center_b,weight"]
    for cell in cells:
        i, j, k = cell.cell_index
        r, g, b = cell.center
        lines.append(f"{i},{j},{k},{r:.9g},{g:.9g},{b:.9g},{cell.weight}")
    return "\n".join(lines) + "\n"


def _load_image(spec: ExperimentSpec) -> ImageRGB:
    if spec.image_path is not None:
        return read_ppm(Path(spec.image_path).read_bytes())
    s = spec.synthetic
    return make_synthetic_image(s.k_colors, s.width, s.height, s.noise_stddev, s.seed)


def _build_problem(spec: ExperimentSpec) -> tuple[ImageRGB, list[WeightedCell], ProblemInstance]:
    image = _load_image(spec)
    cells = cells_from_image(image, spec.cell_side)
    inst = ProblemInstance.from_cells(cells, spec.clusters)
    return image, cells, inst


def _ga_config(spec: ExperimentSpec, schedule_spec: str, seed: int, n_bits: int) -> GaConfig:
    # Horizon generations+1 keeps the hyperbolic family defined on every
    # trace row, 0..generations inclusive.
    schedule = parse_schedule(schedule_spec, n_bits=n_bits, horizon=spec.generations + 1)
    return GaConfig(
        schedule=schedule,
        pop_size=spec.pop_size,
        generations=spec.generations,
        crossover_prob=spec.crossover_prob,
        seed=seed,
    )


def run_experiment(spec: ExperimentSpec) -> list[dict]:
    """Run every seed of the spec and write the per-seed artifact set.

    Returns one result dict per seed with the final (best-ever) fitness, the
    matching inertia, the generation it was found, and the wall time.
    """
    image, cells, inst = _build_problem(spec)
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    if spec.dump_cells:
        (spec.out_dir / "cells.csv").write_text(cells_csv(cells))

    results = []
    for seed in spec.seeds:
        cfg = _ga_config(spec, spec.schedule, seed, inst.n_bits)
        started = time.perf_counter()
        trace = run_ga(cfg, inst, spec.neoteny, spec.gen_time_limit)
        wall = time.perf_counter() - started

        seed_dir = spec.out_dir / f"seed_{seed}"
        seed_dir.mkdir(parents=True, exist_ok=True)
        (seed_dir / "trace.csv").write_text(trace_csv(trace))

        initial = init_population(inst, cfg, np.random.default_rng(seed))
        (seed_dir / "init_stats.txt").write_text(init_stats_line(seed, initial.fitness) + "\n")

        label_image = segment_image(image, trace.best_labels, cells, inst.c, spec.cell_side)
        (seed_dir / "labels.pgm").write_bytes(write_label_pgm(label_image))
        for cluster in range(inst.c):
            (seed_dir / f"mask_{cluster}.pgm").write_bytes(
                write_cluster_mask(label_image, cluster)
            )

        summary = {
            "seed": seed,
            "schedule": spec.schedule,
            "generations": spec.generations,
            "n_cells": inst.n_cells,
            "n_bits": inst.n_bits,
            "final_fitness": trace.best_fitness,
            "final_inertia": trace.best_inertia,
            "best_generation": trace.best_generation,
            "wall_time_s": wall,
        }
        (seed_dir / "summary.txt").write_text(
            "".join(
                f"{key}={value:.9g}\n" if isinstance(value, float) else f"{key}={value}\n"
                for key, value in summary.items()
            )
        )
        results.append(summary)
    return results


def parse_strategy(
    label: str, base_neoteny: NeotenyConfig
) -> tuple[str, NeotenyConfig | None]:
    """Split a strategy label into a schedule spec and a neoteny setting.

    Grammar: ``SCHEDULE[/N[+R]]``. The schedule part follows the schedule
    grammar (``c``, ``ld``, ``qd:0.15:100``, ``back:0.5``, ...); ``/N`` turns
    injection on with the base windows and rate, ``/N+R`` additionally pairs
    every injection with a fresh random individual.
    """
    parts = label.strip().split("/")
    schedule_spec = parts[0].strip().lower()
    if len(parts) == 1:
        return schedule_spec, None
    if len(parts) != 2:
        raise ValueError(f"invalid strategy {label!r}: expected SCHEDULE[/N[+R]]")
    modifier = parts[1].strip().lower()
    if modifier == "n":
        return schedule_spec, replace(base_neoteny, enabled=True, with_random=False)
    if modifier == "n+r":
        return schedule_spec, replace(base_neoteny, enabled=True, with_random=True)
    raise ValueError(f"invalid strategy {label!r}: unknown modifier {parts[1]!r}")


@dataclass
class SummaryTable:
    """Strategy-by-seed grid of final fitness values with marginal averages."""

    strategies: list[str]
    seeds: list[int]
    values: np.ndarray  # (n_strategies, n_seeds); NaN marks a failed cell
    errors: dict[tuple[str, int], str]

    def strategy_means(self) -> np.ndarray:
        return np.nanmean(self.values, axis=1)

    def seed_means(self) -> np.ndarray:
        return np.nanmean(self.values, axis=0)

    def best_per_seed(self) -> list[str]:
        out = []
        for col in range(len(self.seeds)):
            column = self.values[:, col]
            if np.all(np.isnan(column)):
                out.append("")
            else:
                out.append(self.strategies[int(np.nanargmax(column))])
        return out

    def to_csv(self) -> str:
        header = "strategy," + ",".join(f"R={seed}" for seed in self.seeds) + ",average"
        lines = [header]
        row_means = self.strategy_means()
        for row, strategy in enumerate(self.strategies):
            cells = ",".join(_cell_text(v) for v in self.values[row])
            lines.append(f"{strategy},{cells},{_cell_text(row_means[row])}")
        col_means = ",".join(_cell_text(v) for v in self.seed_means())
        lines.append(f"average,{col_means},{_cell_text(np.nanmean(self.values))}")
        lines.append("best," + ",".join(self.best_per_seed()) + ",")
        return "\n".join(lines) + "\n"


def _cell_text(value: float) -> str:
    return "error" if np.isnan(value) else f"{value:.9g}"


def _batch_cell(args) -> tuple[int, float | None, str | None]:
    index, spec, inst, schedule_spec, neoteny_cfg, seed = args
    try:
        cfg = _ga_config(spec, schedule_spec, seed, inst.n_bits)
        trace = run_ga(cfg, inst, neoteny_cfg, spec.gen_time_limit)
        return index, trace.best_fitness, None
    except Exception as exc:  # per-cell failures must not kill the sweep
        return index, None, f"{type(exc).__name__}: {exc}"


def run_batch(
    spec: ExperimentSpec, strategies: list[str], n_jobs: int = 1
) -> SummaryTable:
    """Run a strategy-by-seed grid and write ``summary.csv`` to the out dir.

    Cells are independent (per-cell RNG streams), so results do not depend
    on execution order or worker count. A failing cell is recorded as an
    error and the sweep continues.
    """
    if not strategies:
        raise ValueError("at least one strategy is required")
    _, _, inst = _build_problem(spec)
    base_neoteny = spec.neoteny if spec.neoteny is not None else NeotenyConfig()

    tasks = []
    for row, label in enumerate(strategies):
        schedule_spec, neoteny_cfg = parse_strategy(label, base_neoteny)
        for col, seed in enumerate(spec.seeds):
            index = row * len(spec.seeds) + col
            tasks.append((index, spec, inst, schedule_spec, neoteny_cfg, seed))

    values = np.full((len(strategies), len(spec.seeds)), np.nan)
    errors: dict[tuple[str, int], str] = {}
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            outcomes = list(pool.map(_batch_cell, tasks))
    else:
        outcomes = [_batch_cell(task) for task in tasks]
    for index, value, error in outcomes:
        row, col = divmod(index, len(spec.seeds))
        if error is None:
            values[row, col] = value
        else:
            errors[(strategies[row], spec.seeds[col])] = error

    table = SummaryTable(strategies=list(strategies), seeds=list(spec.seeds), values=values, errors=errors)
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    (spec.out_dir / "summary.csv").write_text(table.to_csv())
    return table
