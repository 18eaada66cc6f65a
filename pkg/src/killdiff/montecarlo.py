"""Trajectory-level Euler-Maruyama simulation of killed diffusion.

The independent stochastic oracle: every observable is estimated from
termination events of simulated trajectories.  Point killings are
regularized as top-hats of width `dirac_width`; the per-step kill decision
uses the exact factor 1 - exp(-k dt).  Worker streams are counter-based
(Philox keyed by (seed, worker index)) and reduced in worker order, so
results are bit-identical for a fixed configuration regardless of
scheduling.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .model import (
    BoundaryKind,
    DiffusionModel,
    KillingKind,
    KillingMeasure,
    SplitStatistics,
    require_valid,
)
from .numerics import AccuracyError

FATE_KILLED = 0
FATE_ABSORBED = 1


@dataclass(frozen=True)
class McConfig:
    dt: float
    n_trajectories: int
    seed: int = 0
    workers: int = 1
    dirac_width: float = 0.05
    bridge_correction: bool = False
    max_steps: int = 2_000_000

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n_trajectories < 1:
            raise ValueError("n_trajectories must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if not self.dirac_width > 0:
            raise ValueError("dirac_width must be positive")


@dataclass(frozen=True)
class TrajectoryOutcomes:
    """Per-trajectory fate (killed/absorbed), termination time and position."""

    fate: np.ndarray  # uint8, FATE_KILLED or FATE_ABSORBED
    time: np.ndarray
    position: np.ndarray

    @property
    def n(self) -> int:
        return self.fate.size

    @property
    def killed(self) -> np.ndarray:
        return self.fate == FATE_KILLED

    @property
    def absorbed(self) -> np.ndarray:
        return self.fate == FATE_ABSORBED


def _rate_field(killing: KillingMeasure, width: float):
    """Vectorized killing-rate field with top-hat regularized spots."""
    if killing.kind is KillingKind.DIRAC:
        spots = np.array([x for x, _ in killing.spots])
        heights = np.array([k for _, k in killing.spots]) / width

        def rate(x: np.ndarray) -> np.ndarray:
            r = np.zeros_like(x)
            for xs, hgt in zip(spots, heights):
                r += np.where(np.abs(x - xs) < width / 2, hgt, 0.0)
            return r

        return rate
    return killing.smooth_rate


def _simulate_worker(args) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    model, killing, y0, cfg, n, worker = args
    rng = np.random.Generator(
        np.random.Philox(key=np.array([cfg.seed & 0xFFFFFFFFFFFFFFFF, worker], dtype=np.uint64))
    )
    dom = model.domain
    L = dom.length
    D = model.diffusion
    a = model.drift
    dt = cfg.dt
    sigma = math.sqrt(2 * D * dt)
    rate = _rate_field(killing, cfg.dirac_width)
    has_rate = not killing.is_zero
    left_abs = dom.left.kind is BoundaryKind.ABSORBING
    right_abs = dom.right.kind is BoundaryKind.ABSORBING

    x = np.full(n, y0, dtype=float)
    fate = np.empty(n, dtype=np.uint8)
    t_end = np.empty(n, dtype=float)
    x_end = np.empty(n, dtype=float)
    alive = np.arange(n)

    step = 0
    while alive.size:
        if step >= cfg.max_steps:
            raise AccuracyError(
                f"{alive.size / n:.3%} of trajectories still alive after "
                f"{cfg.max_steps} steps; raise max_steps or check termination"
            )
        step += 1
        t_now = step * dt

        if has_rate:
            k_here = rate(x)
            u = rng.random(x.size)
            killed = u < -np.expm1(-k_here * dt)
            if np.any(killed):
                idx = alive[killed]
                fate[idx] = FATE_KILLED
                t_end[idx] = t_now
                x_end[idx] = x[killed]
                keep = ~killed
                x = x[keep]
                alive = alive[keep]
                if not alive.size:
                    break

        x_old = x
        x = x + a * dt + sigma * rng.standard_normal(x.size)

        done = np.zeros(x.size, dtype=bool)
        hit_pos = np.empty(x.size, dtype=float)
        if left_abs:
            hit = x <= 0.0
            done |= hit
            hit_pos[hit] = 0.0
        else:
            x = np.where(x < 0.0, -x, x)
        if right_abs:
            hit = (~done) & (x >= L)
            done |= hit
            hit_pos[hit] = L
        else:
            x = np.where(x > L, 2 * L - x, x)
            # a reflected step can only leave [0, L] for absurdly large dt;
            # clamp as a guard
            np.clip(x, 0.0, L, out=x)

        if cfg.bridge_correction:
            live = ~done
            if left_abs and np.any(live):
                p_cross = np.exp(-np.maximum(x_old * x, 0.0)[live] / (D * dt))
                bridged = rng.random(p_cross.size) < p_cross
                sel = np.flatnonzero(live)[bridged]
                done[sel] = True
                hit_pos[sel] = 0.0
            live = ~done
            if right_abs and np.any(live):
                p_cross = np.exp(
                    -np.maximum((L - x_old) * (L - x), 0.0)[live] / (D * dt)
                )
                bridged = rng.random(p_cross.size) < p_cross
                sel = np.flatnonzero(live)[bridged]
                done[sel] = True
                hit_pos[sel] = L

        if np.any(done):
            idx = alive[done]
            fate[idx] = FATE_ABSORBED
            t_end[idx] = t_now
            x_end[idx] = hit_pos[done]
            keep = ~done
            x = x[keep]
            alive = alive[keep]

    return fate, t_end, x_end


def simulate_outcomes(
    model: DiffusionModel, killing: KillingMeasure, y: float, cfg: McConfig
) -> TrajectoryOutcomes:
    """Run all trajectories from the start position y and collect outcomes."""
    require_valid(model, killing)
    dom = model.domain
    if not (0 <= y <= dom.length):
        raise ValueError("start position outside the interval")
    has_absorbing = BoundaryKind.ABSORBING in (dom.left.kind, dom.right.kind)
    if not has_absorbing and killing.is_zero:
        raise ValueError("trajectories would never terminate")
    if killing.kind is KillingKind.DIRAC:
        recommended = 2 * math.sqrt(2 * model.diffusion * cfg.dt)
        if cfg.dirac_width < recommended:
            warnings.warn(
                f"dirac_width {cfg.dirac_width:.3g} below the recommended "
                f"2*sqrt(2 D dt) = {recommended:.3g}; spot kill counts may be noisy",
                stacklevel=2,
            )

    counts = [cfg.n_trajectories // cfg.workers] * cfg.workers
    for w in range(cfg.n_trajectories % cfg.workers):
        counts[w] += 1
    jobs = [
        (model, killing, y, cfg, counts[w], w) for w in range(cfg.workers) if counts[w] > 0
    ]
    if cfg.workers == 1 or len(jobs) == 1:
        parts = [_simulate_worker(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_simulate_worker, jobs))
    fate = np.concatenate([p[0] for p in parts])
    time = np.concatenate([p[1] for p in parts])
    pos = np.concatenate([p[2] for p in parts])
    return TrajectoryOutcomes(fate, time, pos)


def split_from_outcomes(out: TrajectoryOutcomes) -> SplitStatistics:
    n = out.n
    nk = int(np.count_nonzero(out.killed))
    na = n - nk
    pk = nk / n
    pa = na / n
    p_se = math.sqrt(pk * pa / n)

    def cond_mean(mask: np.ndarray):
        cnt = int(np.count_nonzero(mask))
        if cnt == 0:
            return math.nan, 0.0
        vals = out.time[mask]
        mean = float(np.mean(vals))
        se = float(np.std(vals, ddof=1) / math.sqrt(cnt)) if cnt > 1 else 0.0
        return mean, se

    mk, mk_se = cond_mean(out.killed)
    ma, ma_se = cond_mean(out.absorbed)
    if nk > 0:
        ratio = pa / pk
        ratio_se = p_se / pk**2  # delta method on R = p/(1-p)
    else:
        ratio, ratio_se = math.inf, 0.0
    return SplitStatistics(pk, pa, mk, ma, ratio, p_se, p_se, mk_se, ma_se, ratio_se)


def simulate_split(
    model: DiffusionModel, killing: KillingMeasure, y: float, cfg: McConfig
) -> SplitStatistics:
    return split_from_outcomes(simulate_outcomes(model, killing, y, cfg))


def kill_location_histogram(
    model: DiffusionModel,
    killing: KillingMeasure,
    y: float,
    cfg: McConfig,
    bins: np.ndarray | int = 50,
    min_events: int = 100,
) -> Tuple[np.ndarray, np.ndarray]:
    """Normalized histogram (edges, density) of kill positions."""
    if killing.is_zero:
        raise ValueError("kill histogram needs a nonzero killing measure")
    out = simulate_outcomes(model, killing, y, cfg)
    pos = out.position[out.killed]
    if pos.size < min_events:
        raise AccuracyError(f"only {pos.size} kill events; need at least {min_events}")
    density, edges = np.histogram(pos, bins=bins, density=True)
    return edges, density


def simulate_rs(
    model: DiffusionModel, killing: KillingMeasure, cfg: McConfig
) -> Tuple[float, float]:
    """Steady-injection absorbed/killed ratio with its standard error.

    Each trajectory starts at the injection end, which is reflecting for the
    live particle; the fate split of injected particles reproduces the
    steady flux ratio by linearity."""
    require_valid(model, killing)
    dom = model.domain
    kinds = (dom.left.kind, dom.right.kind)
    if kinds.count(BoundaryKind.INJECTION) != 1 or kinds.count(BoundaryKind.ABSORBING) != 1:
        raise ValueError("R_s simulation needs exactly one injection and one absorbing end")
    y0 = 0.0 if dom.left.kind is BoundaryKind.INJECTION else dom.length
    # the injection boundary behaves as reflecting for the live particle
    reflect = DiffusionModel(
        dom.__class__(
            dom.length,
            dom.left if dom.left.kind is not BoundaryKind.INJECTION else dom.left.reflecting(),
            dom.right if dom.right.kind is not BoundaryKind.INJECTION else dom.right.reflecting(),
        ),
        model.diffusion,
        model.drift,
    )
    out = simulate_outcomes(reflect, killing, y0, cfg)
    nk = int(np.count_nonzero(out.killed))
    if nk == 0:
        raise AccuracyError("no kill events; the ratio estimator is undefined")
    stats = split_from_outcomes(out)
    return stats.ratio_rinf, stats.ratio_rinf_se


def survival_curve(
    model: DiffusionModel,
    killing: KillingMeasure,
    y: float,
    cfg: McConfig,
    times: Sequence[float],
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Empirical survivor function of min(T, tau) at the given times,
    with pointwise binomial standard errors."""
    out = simulate_outcomes(model, killing, y, cfg)
    times = np.asarray(times, dtype=float)
    n = out.n
    s = np.array([np.count_nonzero(out.time > t) / n for t in times])
    se = np.sqrt(s * (1 - s) / n)
    return times, s, se
