"""Generation-indexed mutation-rate schedules.

Four families:

* ``Constant``       -- fixed per-bit flip rate.
* ``LinearDecay``    -- p0 at g=0, p0/g up to a cutoff generation, flat after.
* ``QuadraticDecay`` -- p0 at g=0, p0/g^2 up to the cutoff, flat after.
* ``HyperbolicDecay``-- 1 / (1/p0 + g * (n_bits - 1/p0) / (T - 1)): starts at
  p0 and reaches exactly 1/n_bits at the final generation T-1, the classical
  time-dependent rate-control curve for bit-string GAs.

All schedules are non-increasing in g and emit rates in (0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "MutationSchedule",
    "Constant",
    "LinearDecay",
    "QuadraticDecay",
    "HyperbolicDecay",
    "mutation_rate",
    "parse_schedule",
]

DEFAULT_P0 = 0.15
DEFAULT_CUTOFF = 100


def _check_p0(p0: float) -> None:
    if not 0.0 < p0 <= 1.0:
        raise ValueError(f"initial rate must be in (0, 1], got {p0}")


def _check_generation(g: int) -> None:
    if g < 0:
        raise ValueError(f"generation index must be >= 0, got {g}")


@dataclass(frozen=True)
class Constant:
    p0: float = DEFAULT_P0

    def __post_init__(self):
        _check_p0(self.p0)

    def rate(self, g: int) -> float:
        _check_generation(g)
        return self.p0


@dataclass(frozen=True)
class LinearDecay:
    p0: float = DEFAULT_P0
    g_cut: int = DEFAULT_CUTOFF

    def __post_init__(self):
        _check_p0(self.p0)
        if self.g_cut < 1:
            raise ValueError(f"cutoff generation must be >= 1, got {self.g_cut}")

    def rate(self, g: int) -> float:
        _check_generation(g)
        if g == 0:
            return self.p0
        return self.p0 / min(g, self.g_cut)


@dataclass(frozen=True)
class QuadraticDecay:
    p0: float = DEFAULT_P0
    g_cut: int = DEFAULT_CUTOFF

    def __post_init__(self):
        _check_p0(self.p0)
        if self.g_cut < 1:
            raise ValueError(f"cutoff generation must be >= 1, got {self.g_cut}")

    def rate(self, g: int) -> float:
        _check_generation(g)
        if g == 0:
            return self.p0
        return self.p0 / min(g, self.g_cut) ** 2


@dataclass(frozen=True)
class HyperbolicDecay:
    """Decays from p0 at g=0 to exactly 1/n_bits at g = horizon - 1."""

    p0: float
    n_bits: int
    horizon: int

    def __post_init__(self):
        _check_p0(self.p0)
        if self.n_bits < 2:
            raise ValueError(f"n_bits must be >= 2, got {self.n_bits}")
        if self.horizon < 2:
            raise ValueError(f"horizon must be >= 2, got {self.horizon}")
        if self.p0 < 1.0 / self.n_bits:
            raise ValueError(
                f"initial rate {self.p0} below terminal rate 1/{self.n_bits}; "
                "the schedule would increase"
            )

    def rate(self, g: int) -> float:
        _check_generation(g)
        if g > self.horizon - 1:
            raise ValueError(f"generation {g} beyond schedule horizon {self.horizon - 1}")
        return 1.0 / (1.0 / self.p0 + g * (self.n_bits - 1.0 / self.p0) / (self.horizon - 1))


MutationSchedule = Constant | LinearDecay | QuadraticDecay | HyperbolicDecay


def mutation_rate(schedule: MutationSchedule, g: int) -> float:
    """Per-bit flip probability at generation ``g``."""
    return schedule.rate(g)


def parse_schedule(spec: str, n_bits: int, horizon: int) -> MutationSchedule:
    """Build a schedule from its textual form.

    Grammar: ``c[:p0]``, ``ld[:p0[:g_cut]]``, ``qd[:p0[:g_cut]]``,
    ``back:p0`` (alias ``hyp:p0``). The hyperbolic family takes chromosome
    length and generation horizon from the run configuration, not the spec
    string.
    """
    parts = spec.strip().lower().split(":")
    name, args = parts[0], parts[1:]
    try:
        if name == "c":
            if len(args) > 1:
                raise ValueError("constant schedule takes at most one parameter")
            return Constant(float(args[0])) if args else Constant()
        if name in ("ld", "qd"):
            if len(args) > 2:
                raise ValueError(f"{name} schedule takes at most two parameters")
            cls = LinearDecay if name == "ld" else QuadraticDecay
            p0 = float(args[0]) if len(args) >= 1 else DEFAULT_P0
            g_cut = int(args[1]) if len(args) == 2 else DEFAULT_CUTOFF
            return cls(p0, g_cut)
        if name in ("back", "hyp"):
            if len(args) != 1:
                raise ValueError("hyperbolic schedule takes exactly one parameter (p0)")
            return HyperbolicDecay(float(args[0]), n_bits=n_bits, horizon=horizon)
    except ValueError as exc:
        raise ValueError(f"invalid schedule spec {spec!r}: {exc}") from None
    raise ValueError(f"invalid schedule spec {spec!r}: unknown family {name!r}")
