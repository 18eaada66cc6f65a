"""Problem definitions shared by the analytic, PDE and Monte Carlo solvers.

A problem is an interval with a boundary behavior at each end, a constant
diffusion coefficient (optionally with constant drift), a killing rate field
inside the interval, and an initial condition.  All quantities are
dimensionless; users must supply consistent units (D in length^2/time,
uniform/piecewise rates in 1/time, point-spot strengths in length/time).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

MASS_TOLERANCE = 1e-9


class BoundaryKind(Enum):
    ABSORBING = "absorbing"
    REFLECTING = "reflecting"
    INJECTION = "injection"


@dataclass(frozen=True)
class BoundaryBehavior:
    kind: BoundaryKind
    phi: float = 0.0  # inward probability flux, 1/time; only for INJECTION

    @staticmethod
    def absorbing() -> "BoundaryBehavior":
        return BoundaryBehavior(BoundaryKind.ABSORBING)

    @staticmethod
    def reflecting() -> "BoundaryBehavior":
        return BoundaryBehavior(BoundaryKind.REFLECTING)

    @staticmethod
    def injection(phi: float) -> "BoundaryBehavior":
        return BoundaryBehavior(BoundaryKind.INJECTION, phi)


@dataclass(frozen=True)
class Domain1D:
    length: float
    left: BoundaryBehavior
    right: BoundaryBehavior


@dataclass(frozen=True)
class DiffusionModel:
    domain: Domain1D
    diffusion: float
    drift: float = 0.0


class KillingKind(Enum):
    ZERO = "zero"
    UNIFORM = "uniform"
    DIRAC = "dirac"
    PIECEWISE = "piecewise"


@dataclass(frozen=True)
class KillingMeasure:
    kind: KillingKind
    v0: float = 0.0
    # (position, strength) pairs; strength has units length/time
    spots: Tuple[Tuple[float, float], ...] = ()
    breakpoints: Tuple[float, ...] = ()
    rates: Tuple[float, ...] = ()

    @staticmethod
    def zero() -> "KillingMeasure":
        return KillingMeasure(KillingKind.ZERO)

    @staticmethod
    def uniform(v0: float) -> "KillingMeasure":
        return KillingMeasure(KillingKind.UNIFORM, v0=v0)

    @staticmethod
    def dirac(spots: Sequence[Tuple[float, float]]) -> "KillingMeasure":
        return KillingMeasure(KillingKind.DIRAC, spots=tuple((float(x), float(k)) for x, k in spots))

    @staticmethod
    def piecewise(breakpoints: Sequence[float], rates: Sequence[float]) -> "KillingMeasure":
        return KillingMeasure(
            KillingKind.PIECEWISE,
            breakpoints=tuple(float(b) for b in breakpoints),
            rates=tuple(float(r) for r in rates),
        )

    @property
    def is_zero(self) -> bool:
        return self.kind is KillingKind.ZERO

    def smooth_rate(self, x: np.ndarray) -> np.ndarray:
        """Rate field at positions x, excluding Dirac spots (those carry no
        pointwise rate; handle them through `spots`)."""
        x = np.asarray(x, dtype=float)
        if self.kind is KillingKind.UNIFORM:
            return np.full_like(x, self.v0)
        if self.kind is KillingKind.PIECEWISE:
            idx = np.searchsorted(np.asarray(self.breakpoints), x, side="right")
            return np.asarray(self.rates, dtype=float)[idx]
        return np.zeros_like(x)


class InitialKind(Enum):
    POINT = "point"
    GRID = "grid"


@dataclass(frozen=True)
class InitialCondition:
    kind: InitialKind
    y: float = 0.0
    grid_values: Tuple[float, ...] = ()

    @staticmethod
    def point(y: float) -> "InitialCondition":
        return InitialCondition(InitialKind.POINT, y=y)

    @staticmethod
    def density_grid(values: Sequence[float]) -> "InitialCondition":
        return InitialCondition(InitialKind.GRID, grid_values=tuple(float(v) for v in values))


@dataclass(frozen=True)
class SplitStatistics:
    p_killed: float
    p_absorbed: float
    mean_kill_time: float
    mean_absorb_time: float
    ratio_rinf: float  # math.inf when nothing is killed
    p_killed_se: float = 0.0
    p_absorbed_se: float = 0.0
    mean_kill_time_se: float = 0.0
    mean_absorb_time_se: float = 0.0
    ratio_rinf_se: float = 0.0


@dataclass(frozen=True)
class SteadyStateSolution:
    x: np.ndarray
    density: np.ndarray
    absorbed_flux: float
    injected_flux: float
    kill_integral: float
    ratio_rs: float  # math.inf when the kill integral vanishes


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_problem(
    model: DiffusionModel,
    killing: KillingMeasure,
    ic: Optional[InitialCondition] = None,
) -> ValidationReport:
    """Collect every violated invariant of the (model, killing, ic) triple.

    Report-style: never raises.  An empty report means all three solver
    modules accept the problem without further errors.
    """
    bad = []
    dom = model.domain
    L = dom.length
    if not (L > 0):
        bad.append("domain length must be positive")
    if not (model.diffusion > 0):
        bad.append("diffusion coefficient must be positive")
    n_inject = 0
    for side, b in (("left", dom.left), ("right", dom.right)):
        if b.kind is BoundaryKind.INJECTION:
            n_inject += 1
            if not (b.phi > 0):
                bad.append(f"{side} injection flux must be positive")
        elif b.phi != 0.0:
            bad.append(f"{side} boundary carries a flux but is not an injection boundary")
    if n_inject > 1:
        bad.append("at most one boundary may be an injection boundary")

    if killing.kind is KillingKind.UNIFORM:
        if killing.v0 < 0:
            bad.append("uniform killing rate must be non-negative")
        elif killing.v0 == 0:
            bad.append("uniform killing rate must be strictly positive (use zero killing instead)")
    elif killing.kind is KillingKind.DIRAC:
        if not killing.spots:
            bad.append("point killing needs at least one spot")
        strengths = [k for _, k in killing.spots]
        if any(k < 0 for k in strengths):
            bad.append("spot strengths must be non-negative")
        elif killing.spots and not any(k > 0 for k in strengths):
            bad.append("at least one spot strength must be strictly positive")
        if L > 0:
            for x, _ in killing.spots:
                if not (0 < x < L):
                    bad.append(f"spot at {x} not strictly inside the interval (0, {L})")
    elif killing.kind is KillingKind.PIECEWISE:
        bps = killing.breakpoints
        if len(killing.rates) != len(bps) + 1:
            bad.append("piecewise killing needs exactly one rate per interval")
        if any(r < 0 for r in killing.rates):
            bad.append("piecewise rates must be non-negative")
        elif killing.rates and not any(r > 0 for r in killing.rates):
            bad.append("at least one piecewise rate must be strictly positive")
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            bad.append("piecewise breakpoints must be strictly increasing")
        if L > 0 and bps and not (0 <= bps[0] and bps[-1] <= L):
            bad.append("piecewise breakpoints must lie inside the interval")

    if ic is not None:
        if ic.kind is InitialKind.POINT:
            if L > 0 and not (0 < ic.y < L):
                bad.append(f"point source at {ic.y} not strictly inside the interval (0, {L})")
        else:
            vals = np.asarray(ic.grid_values, dtype=float)
            if vals.size < 2:
                bad.append("density grid needs at least two values")
            if np.any(vals < 0):
                bad.append("density grid values must be non-negative")
            elif vals.size >= 2 and L > 0:
                mass = float(np.trapezoid(vals, dx=L / (vals.size - 1)))
                if mass > 1 + MASS_TOLERANCE:
                    bad.append(f"density grid mass {mass:.6g} exceeds 1")

    return ValidationReport(tuple(bad))


def require_valid(model: DiffusionModel, killing: KillingMeasure, ic: Optional[InitialCondition] = None) -> None:
    report = validate_problem(model, killing, ic)
    if not report.ok:
        raise ValueError("invalid problem: " + "; ".join(report.violations))


def interval(
    length: float,
    left: str = "absorbing",
    right: str = "absorbing",
    diffusion: float = 1.0,
    drift: float = 0.0,
    phi: float = 0.0,
) -> DiffusionModel:
    """Convenience constructor used throughout tests and scripts."""

    def bb(name: str) -> BoundaryBehavior:
        kind = BoundaryKind(name)
        return BoundaryBehavior(kind, phi if kind is BoundaryKind.INJECTION else 0.0)

    return DiffusionModel(Domain1D(length, bb(left), bb(right)), diffusion, drift)
