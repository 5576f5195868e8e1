"""Command-line front end.

Subcommands:

* ``run``    -- single-spec runs (one per seed) with full artifact output.
* ``batch``  -- strategy-by-seed sweep producing a summary table CSV.
* ``oracle`` -- exhaustive ground truth (and optional Lloyd comparator) for
  hand-built instances, used to make test fixtures.
* ``synth``  -- write a synthetic test image as a PPM.

Any input or configuration error exits with status 2.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import harness, oracle
from .neoteny import NeotenyConfig
from .netpbm import write_ppm
from .objective import ProblemInstance
from .prepartition import build_histogram, cells_from_image


def _window(text: str) -> tuple[int, int]:
    try:
        first, last = text.split(":")
        return int(first), int(last)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A:B, got {text!r}") from None


def _point(text: str) -> tuple[tuple[float, ...], float]:
    try:
        coords_text, weight_text = text.split(":")
        coords = tuple(float(v) for v in coords_text.split(","))
        if len(coords) != 3:
            raise ValueError
        return coords, float(weight_text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y,z:w, got {text!r}") from None


def _add_input_flags(sub: argparse.ArgumentParser) -> None:
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument("--image", type=Path, help="input PPM (P3 or P6, maxval 255)")
    group.add_argument(
        "--synthetic",
        type=harness.SyntheticSpec.parse,
        metavar="K,W,H,NOISE,SEED",
        help="generate the input image instead of reading one",
    )


def _add_ga_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, action="append", help="RNG seed (repeatable)")
    sub.add_argument("--generations", type=int, default=3000)
    sub.add_argument("--pc", type=float, default=0.8, help="crossover probability")
    sub.add_argument("--pm", default="ld", help="mutation schedule spec (c, ld, qd, back:p0, ...)")
    sub.add_argument("--clusters", type=int, default=6)
    sub.add_argument("--pop", type=int, default=100, help="population size")
    sub.add_argument("--cell-side", type=int, default=32, help="pre-partition cube side")
    sub.add_argument("--neoteny", action="store_true", help="enable archive injection")
    sub.add_argument("--neoteny-rate", type=float, default=1.0)
    sub.add_argument("--capture", type=_window, default=(1, 100), metavar="A:B")
    sub.add_argument("--inject", type=_window, default=(1000, 3000), metavar="A:B")
    sub.add_argument("--with-random", action="store_true",
                     help="pair each injection with a fresh random individual")
    sub.add_argument("--out", type=Path, required=True, help="output directory")


def _neoteny_from_args(args: argparse.Namespace) -> NeotenyConfig:
    return NeotenyConfig(
        enabled=True,
        capture_window=args.capture,
        inject_window=args.inject,
        rate=args.neoteny_rate,
        with_random=args.with_random,
    )


def _spec_from_args(args: argparse.Namespace, neoteny: NeotenyConfig | None) -> harness.ExperimentSpec:
    return harness.ExperimentSpec(
        seeds=args.seed or [0],
        out_dir=args.out,
        image_path=args.image,
        synthetic=args.synthetic,
        schedule=args.pm,
        generations=args.generations,
        pop_size=args.pop,
        crossover_prob=args.pc,
        clusters=args.clusters,
        neoteny=neoteny,
        cell_side=args.cell_side,
        dump_cells=getattr(args, "dump_cells", False),
    )


def _cmd_run(args: argparse.Namespace) -> int:
    neoteny = _neoteny_from_args(args) if args.neoteny else None
    spec = _spec_from_args(args, neoteny)
    for result in harness.run_experiment(spec):
        print(
            f"seed={result['seed']} final_fitness={result['final_fitness']:.9g} "
            f"best_generation={result['best_generation']} wall_time_s={result['wall_time_s']:.3f}"
        )
    return 0


def _cmd_batch(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args, _neoteny_from_args(args))
    table = harness.run_batch(spec, args.strategy, n_jobs=args.jobs)
    sys.stdout.write(table.to_csv())
    for key, message in sorted(table.errors.items()):
        print(f"cell {key} failed: {message}", file=sys.stderr)
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    points = np.array([coords for coords, _ in args.point])
    weights = np.array([weight for _, weight in args.point])
    inst = ProblemInstance(points=points, weights=weights, c=args.clusters)
    result = oracle.exhaustive_min_inertia(inst)
    assignment = ",".join(str(v) for v in result.optimal_assignment)
    print(f"n_cells={inst.n_cells} clusters={inst.c}")
    print(f"optimal_inertia={result.optimal_inertia:.9g}")
    print(f"optimal_assignment={assignment}")
    print(f"assignments_evaluated={result.assignments_evaluated}")
    if args.lloyd_restarts > 0:
        value = oracle.lloyd_kmeans(inst, np.random.default_rng(args.seed), args.lloyd_restarts)
        print(f"lloyd_inertia={value:.9g}")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    s = args.synthetic
    image = harness.make_synthetic_image(s.k_colors, s.width, s.height, s.noise_stddev, s.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / "synthetic.ppm"
    path.write_bytes(write_ppm(image, binary=not args.ascii))
    histogram = build_histogram(image)
    cells = cells_from_image(image, args.cell_side)
    print(f"wrote {path} ({image.width}x{image.height}, {len(histogram)} colors, "
          f"{len(cells)} occupied cells)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neoclust",
        description="Genetic color clustering with dynamic mutation rates and neoteny injection",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    run = subs.add_parser("run", help="run the GA for each seed and write artifacts")
    _add_input_flags(run)
    _add_ga_flags(run)
    run.add_argument("--dump-cells", action="store_true", help="also write cells.csv")
    run.set_defaults(func=_cmd_run)

    batch = subs.add_parser("batch", help="strategy-by-seed sweep with a summary CSV")
    _add_input_flags(batch)
    _add_ga_flags(batch)
    batch.add_argument(
        "--strategy",
        action="append",
        required=True,
        help="strategy label, e.g. C, LD, QD/N, LD/N+R, back:0.5 (repeatable)",
    )
    batch.add_argument("--jobs", type=int, default=1, help="concurrent batch cells")
    batch.set_defaults(func=_cmd_batch)

    orc = subs.add_parser("oracle", help="exhaustive optimum of a hand-built instance")
    orc.add_argument("--point", type=_point, action="append", required=True, metavar="X,Y,Z:W")
    orc.add_argument("--clusters", type=int, default=2)
    orc.add_argument("--lloyd-restarts", type=int, default=0)
    orc.add_argument("--seed", type=int, default=0, help="seed for the Lloyd comparator")
    orc.set_defaults(func=_cmd_oracle)

    synth = subs.add_parser("synth", help="write a synthetic test image")
    synth.add_argument(
        "--synthetic",
        type=harness.SyntheticSpec.parse,
        metavar="K,W,H,NOISE,SEED",
        required=True,
    )
    synth.add_argument("--out", type=Path, required=True)
    synth.add_argument("--ascii", action="store_true", help="write P3 instead of P6")
    synth.add_argument("--cell-side", type=int, default=32)
    synth.set_defaults(func=_cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
