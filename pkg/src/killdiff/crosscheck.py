"""Adjudication harness: runs closed forms, the PDE solver and Monte Carlo
on a scenario matrix, compares every observable pairwise, resolves the
formula variants that disagree with their own series, and emits a
machine-readable report."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import analytic
from .analytic import PI, UnitScaling
from .fpe import GridSpec, green_steady, split_statistics, steady_state
from .model import (
    DiffusionModel,
    InitialCondition,
    KillingKind,
    KillingMeasure,
    interval,
)
from .montecarlo import McConfig, simulate_rs, simulate_split
from .numerics import derivative_at_zero


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str  # "split" | "steady" | "green"
    model: DiffusionModel
    killing: KillingMeasure
    y: float = 0.0
    grid: GridSpec = GridSpec(200, 2e-3, 12.0)
    mc: McConfig = McConfig(dt=1e-3, n_trajectories=4000)
    mc_bias: float = 0.0  # documented discretization-bias allowance for MC bands
    acceptance: bool = True


@dataclass(frozen=True)
class Comparison:
    scenario: str
    observable: str
    method_a: str
    value_a: float
    method_b: str
    value_b: float
    sigma: float
    tol: float
    passed: bool
    acceptance: bool
    note: str = ""


@dataclass(frozen=True)
class Discrepancy:
    name: str
    paper_value: float
    derived_value: float
    note: str


@dataclass(frozen=True)
class ComparisonReport:
    rows: Tuple[Comparison, ...]
    discrepancies: Tuple[Discrepancy, ...]

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.rows if r.acceptance)

    def summary(self) -> str:
        lines = []
        for r in self.rows:
            status = "PASS" if r.passed else "FAIL"
            lines.append(
                f"[{status}] {r.scenario} / {r.observable}: {r.method_a}={r.value_a!r} "
                f"vs {r.method_b}={r.value_b!r} (tol {r.tol:g})"
            )
        n_fail = sum(not r.passed for r in self.rows)
        lines.append(f"{len(self.rows) - n_fail}/{len(self.rows)} comparisons passed")
        return "\n".join(lines)

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as f:
            f.write(
                "scenario,observable,method_a,value_a,method_b,value_b,"
                "sigma,tol,passed,acceptance,note\n"
            )
            for r in self.rows:
                f.write(
                    f"{r.scenario},{r.observable},{r.method_a},{r.value_a!r},"
                    f"{r.method_b},{r.value_b!r},{r.sigma!r},{r.tol!r},"
                    f"{int(r.passed)},{int(r.acceptance)},{r.note}\n"
                )

    def write_discrepancies_csv(self, path: str) -> None:
        with open(path, "w", newline="") as f:
            f.write("name,paper_value,derived_value,note\n")
            for d in self.discrepancies:
                f.write(f"{d.name},{d.paper_value!r},{d.derived_value!r},{d.note}\n")


def _compare(
    scenario: str,
    observable: str,
    a: str,
    va: float,
    b: str,
    vb: float,
    tol: float,
    sigma: float = 0.0,
    acceptance: bool = True,
    note: str = "",
) -> Comparison:
    if math.isinf(va) and math.isinf(vb):
        passed = True
    else:
        passed = abs(va - vb) <= tol
    return Comparison(scenario, observable, a, va, b, vb, sigma, tol, passed, acceptance, note)


def analytic_split_dirac(
    model: DiffusionModel, killing: KillingMeasure, y: float
) -> Tuple[float, float]:
    """(p_killed, mean kill time) in closed form for a single point killing
    with both ends absorbing, via rescaling to the reference interval."""
    if killing.kind is not KillingKind.DIRAC or len(killing.spots) != 1:
        raise ValueError("closed form available for a single point killing only")
    xs, ks = killing.spots[0]
    sc = UnitScaling(model.domain.length, model.diffusion)
    x1u, yu = sc.to_unit_position(xs), sc.to_unit_position(y)
    vu = sc.to_unit_dirac_strength(ks)
    g_y = analytic.green_laplace_closed(x1u, yu, 0.0)
    g_xx = analytic.green_laplace_closed(x1u, x1u, 0.0)
    p_killed = vu * g_y / (1 + vu * g_xx)
    mfpt = analytic.conditional_mean_kill_time_dirac(yu, x1u, vu)
    return p_killed, sc.from_unit_time(mfpt.derived_value)


def default_matrix(seed: int = 0, workers: int = 1) -> List[Scenario]:
    """Twelve scenarios spanning zero, uniform, point, two-spot and piecewise
    killing, steady injection, the steady Green-function ratio, and drift."""

    def mc(n=4000, dt=1e-3, eps=0.05, i=0):
        return McConfig(
            dt=dt, n_trajectories=n, seed=seed + i, workers=workers, dirac_width=eps
        )

    return [
        Scenario(
            "zero-absorbing",
            "split",
            interval(PI),
            KillingMeasure.zero(),
            y=PI / 2,
            grid=GridSpec(200, 2e-3, 10.0),
            mc=mc(i=1),
            mc_bias=0.02,
        ),
        Scenario(
            "uniform-wide",
            "split",
            interval(40.0),
            KillingMeasure.uniform(1.0),
            y=20.0,
            grid=GridSpec(400, 5e-3, 16.0),
            mc=mc(i=2),
            mc_bias=0.01,
        ),
        Scenario(
            "uniform-reflecting",
            "split",
            interval(1.0, "reflecting", "reflecting"),
            KillingMeasure.uniform(1.0),
            y=0.5,
            grid=GridSpec(64, 2e-3, 16.0),
            mc=mc(i=3),
            mc_bias=0.01,
        ),
        Scenario(
            "uniform-absorbing",
            "split",
            interval(2.0),
            KillingMeasure.uniform(1.0),
            y=0.7,
            grid=GridSpec(200, 1e-3, 8.0),
            mc=mc(i=4),
            mc_bias=0.01,
        ),
        Scenario(
            "dirac-reference",
            "split",
            interval(PI),
            KillingMeasure.dirac([(2.0, 1.0)]),
            y=1.0,
            grid=GridSpec(400, 1e-3, 14.0),
            mc=mc(n=6000, eps=0.09, i=5),
            mc_bias=0.02,
        ),
        Scenario(
            "dirac-unit",
            "split",
            interval(1.0),
            KillingMeasure.dirac([(0.6, 5.0)]),
            y=0.3,
            grid=GridSpec(400, 2e-4, 2.0),
            mc=mc(n=6000, dt=2e-4, eps=0.04, i=6),
            mc_bias=0.02,
        ),
        Scenario(
            "two-spots",
            "green",
            interval(1.0),
            KillingMeasure.dirac([(0.3, 2.0), (0.7, 3.0)]),
            y=0.5,
            grid=GridSpec(400, 2e-4, 2.0),
            mc=mc(n=6000, dt=2e-4, eps=0.04, i=7),
            mc_bias=0.1,
        ),
        Scenario(
            "piecewise",
            "split",
            interval(1.0),
            KillingMeasure.piecewise([0.5], [0.5, 2.0]),
            y=0.4,
            grid=GridSpec(200, 2e-4, 2.0),
            mc=mc(dt=2e-4, i=8),
            mc_bias=0.01,
        ),
        Scenario(
            "steady-dirac",
            "steady",
            interval(1.0, "absorbing", "injection", phi=1.0),
            KillingMeasure.dirac([(0.4, 2.0)]),
            grid=GridSpec(800, 1e-3, 1.0),
            mc=mc(n=6000, dt=2e-4, eps=0.04, i=9),
            mc_bias=0.05,
        ),
        Scenario(
            "steady-uniform",
            "steady",
            interval(1.0, "absorbing", "injection", phi=1.0),
            KillingMeasure.uniform(4.0),
            grid=GridSpec(800, 1e-3, 1.0),
            mc=mc(n=6000, dt=2e-4, i=10),
            mc_bias=0.01,
        ),
        Scenario(
            "green-rinf",
            "green",
            interval(1.0),
            KillingMeasure.dirac([(0.25, 1.0)]),
            y=0.75,
            grid=GridSpec(800, 1e-4, 1.5),
            mc=mc(n=20000, dt=1e-4, eps=0.03, i=11),
            mc_bias=1.5,
        ),
        Scenario(
            "drift",
            "split",
            interval(2.0, diffusion=1.0, drift=0.5),
            KillingMeasure.uniform(1.0),
            y=0.7,
            grid=GridSpec(200, 1e-3, 8.0),
            mc=mc(i=12),
            mc_bias=0.01,
        ),
    ]


def _run_split(sc: Scenario) -> List[Comparison]:
    rows: List[Comparison] = []
    ic = InitialCondition.point(sc.y)
    pde = split_statistics(sc.model, sc.killing, ic, sc.grid)
    mc = simulate_split(sc.model, sc.killing, sc.y, sc.mc)

    rows.append(
        _compare(sc.name, "pk+pa", "pde", pde.p_killed + pde.p_absorbed, "exact", 1.0, 1e-6)
    )
    rows.append(
        _compare(sc.name, "pk+pa", "mc", mc.p_killed + mc.p_absorbed, "exact", 1.0, 1e-12)
    )

    for obs, v_pde, v_mc, se in (
        ("p_killed", pde.p_killed, mc.p_killed, mc.p_killed_se),
        ("mean_kill_time", pde.mean_kill_time, mc.mean_kill_time, mc.mean_kill_time_se),
        ("mean_absorb_time", pde.mean_absorb_time, mc.mean_absorb_time, mc.mean_absorb_time_se),
    ):
        if math.isnan(v_pde) or math.isnan(v_mc):
            continue  # conditional mean undefined for at least one method
        tol = max(3 * se + sc.mc_bias * max(1.0, abs(v_pde)), 1e-6)
        rows.append(_compare(sc.name, obs, "pde", v_pde, "mc", v_mc, tol, sigma=se))

    if sc.killing.kind is KillingKind.DIRAC and len(sc.killing.spots) == 1:
        pk_an, mk_an = analytic_split_dirac(sc.model, sc.killing, sc.y)
        rows.append(
            _compare(sc.name, "p_killed", "analytic", pk_an, "pde", pde.p_killed, 2e-3)
        )
        rows.append(
            _compare(
                sc.name,
                "mean_kill_time",
                "analytic",
                mk_an,
                "pde",
                pde.mean_kill_time,
                5e-3 * max(1.0, mk_an),
            )
        )
    if sc.killing.kind is KillingKind.UNIFORM and sc.model.drift == 0:
        kinds = {sc.model.domain.left.kind.value, sc.model.domain.right.kind.value}
        if kinds == {"reflecting"}:
            # closed domain: killing commutes with diffusion, E[T] = 1/v0
            rows.append(
                _compare(
                    sc.name,
                    "mean_kill_time",
                    "analytic",
                    1.0 / sc.killing.v0,
                    "pde",
                    pde.mean_kill_time,
                    1e-4,
                )
            )
    return rows


def _run_steady(sc: Scenario) -> List[Comparison]:
    rows: List[Comparison] = []
    sol = steady_state(sc.model, sc.killing, sc.grid)
    rows.append(
        _compare(
            sc.name,
            "conservation",
            "pde",
            sol.absorbed_flux + sol.kill_integral,
            "exact",
            sol.injected_flux,
            1e-10,
        )
    )
    D = sc.model.diffusion
    L = sc.model.domain.length
    if sc.killing.kind is KillingKind.DIRAC and len(sc.killing.spots) == 1:
        xs, ks = sc.killing.spots[0]
        d_abs = xs if sc.model.domain.left.kind.value == "absorbing" else L - xs
        ref = analytic.ratio_rs_dirac(D, ks, d_abs)
    elif sc.killing.kind is KillingKind.UNIFORM:
        ref = analytic.ratio_rs_uniform(D, sc.killing.v0, L)
    else:
        ref = None
    if ref is not None:
        rows.append(
            _compare(sc.name, "ratio_rs", "analytic", ref, "pde", sol.ratio_rs, 1e-3 * ref)
        )
        mc_ratio, mc_se = simulate_rs(sc.model, sc.killing, sc.mc)
        tol = 3 * mc_se + sc.mc_bias * ref
        rows.append(
            _compare(sc.name, "ratio_rs", "analytic", ref, "mc", mc_ratio, tol, sigma=mc_se)
        )
    return rows


def _run_green(sc: Scenario) -> List[Comparison]:
    rows: List[Comparison] = []
    gr = green_steady(sc.model, sc.killing, sc.y, sc.grid)
    pde = split_statistics(sc.model, sc.killing, InitialCondition.point(sc.y), sc.grid)
    rows.append(
        _compare(
            sc.name,
            "ratio_rinf",
            "green_steady",
            gr.ratio_rinf,
            "split_stats",
            pde.ratio_rinf,
            1e-3 * max(1.0, abs(gr.ratio_rinf)),
        )
    )
    mc = simulate_split(sc.model, sc.killing, sc.y, sc.mc)
    tol = 3 * mc.ratio_rinf_se + sc.mc_bias * max(1.0, abs(gr.ratio_rinf))
    rows.append(
        _compare(
            sc.name,
            "ratio_rinf",
            "green_steady",
            gr.ratio_rinf,
            "mc",
            mc.ratio_rinf,
            tol,
            sigma=mc.ratio_rinf_se,
        )
    )
    spots = sc.killing.spots
    if len(spots) == 1 and spots[0][0] < sc.y:
        res = analytic.ratio_rinf_dirac_interval(
            sc.model.diffusion, spots[0][1], sc.model.domain.length, sc.y, spots[0][0]
        )
        rows.append(
            _compare(
                sc.name,
                "ratio_rinf",
                "analytic_derived",
                res.derived_value,
                "green_steady",
                gr.ratio_rinf,
                1e-3 * res.derived_value,
            )
        )
        rows.append(
            _compare(
                sc.name,
                "paper*derived",
                "analytic",
                res.paper_value * res.derived_value,
                "exact",
                1.0,
                1e-9,
            )
        )
    return rows


def paper_resolvent_cosine_sum(x: float, y: float, q: float, n_terms: int = 200000) -> float:
    """The source text's cosh/tanh cosine-sum resolvent, kept verbatim for
    the discrepancy table (it does not reproduce its own series)."""
    if q <= 0:
        raise ValueError("paper formula quoted for q > 0")
    s = math.sqrt(q)

    def su(z: float) -> float:
        return (math.cosh(s * z) / math.tanh(s * PI) - 1.0 / (s * PI)) * PI / (2 * s)

    return (su(x - y) - su(x + y)) / PI


def build_discrepancy_table() -> Tuple[Discrepancy, ...]:
    y, x1, q = 1.0, 2.0, 1.0
    mfpt = analytic.conditional_mean_kill_time_dirac(y, x1, 1.0)
    rinf = analytic.ratio_rinf_dirac_interval(1.0, 1.0, 1.0, 0.75, 0.25)
    return (
        Discrepancy(
            "survival_transform_at_zero(y=1)",
            analytic.paper_q_polynomial(y) / (6 * PI),
            y * (PI - y) / 2,
            "printed Q(y)/(6 pi) vs what the resolvent series sums to",
        ),
        Discrepancy(
            "resolvent(x=1;y=2;q=1)",
            paper_resolvent_cosine_sum(1.0, 2.0, q),
            analytic.green_laplace_closed(1.0, 2.0, q),
            "printed cosh/tanh cosine sum vs sinh-product form matching the series",
        ),
        Discrepancy(
            "conditional_mfpt(x1=2;y=1;V=1)",
            mfpt.paper_value,
            mfpt.derived_value,
            "printed closed form (misprinted n^-4 sum) vs -(alpha+beta) with corrected sum",
        ),
        Discrepancy(
            "rinf(D=1;k=1;L=1;x1=0.75;y=0.25)",
            rinf.paper_value,
            rinf.derived_value,
            "printed ratio is the exact reciprocal of absorbed/killed",
        ),
        Discrepancy(
            "survival_decay_rate(y=pi/2)",
            6 * PI / analytic.series_q_polynomial(PI / 2),
            1.0,
            "claimed 6 pi/Q(y) decay rate vs the y-independent spectral rate",
        ),
    )


def run_matrix(
    scenarios: Optional[Sequence[Scenario]] = None,
    seed: int = 0,
    workers: int = 1,
) -> ComparisonReport:
    if scenarios is None:
        scenarios = default_matrix(seed=seed, workers=workers)
    rows: List[Comparison] = []
    for sc in scenarios:
        runner = {"split": _run_split, "steady": _run_steady, "green": _run_green}[sc.kind]
        try:
            rows.extend(runner(sc))
        except Exception as exc:  # record per-scenario errors, not fatal
            rows.append(
                Comparison(
                    sc.name, "error", "-", math.nan, "-", math.nan, 0.0, 0.0, False,
                    sc.acceptance, note=f"{type(exc).__name__}: {exc}",
                )
            )
    return ComparisonReport(tuple(rows), build_discrepancy_table())


@dataclass(frozen=True)
class MfptVerdict:
    sign_combination: str  # e.g. "-(alpha+beta)" or "inconclusive"
    table: Tuple[Tuple[float, float, float, float, Dict[str, float]], ...]
    # rows of (x1, y, V, oracle, candidate values)


def adjudicate_conditional_mfpt(
    points: Optional[Sequence[Tuple[float, float, float]]] = None,
    tol: float = 1e-4,
) -> MfptVerdict:
    """Decide which sign combination of (alpha, beta) reproduces the
    Laplace-derivative oracle for the conditional mean kill time."""
    if points is None:
        points = [
            (x1, y, V)
            for x1 in (PI / 4, PI / 2, 3 * PI / 4)
            for y in (PI / 4, PI / 2, 3 * PI / 4)
            for V in (0.0, 1.0, 10.0)
        ]
    combos: Dict[str, Callable[[float, float], float]] = {
        "alpha+beta": lambda a, b: a + b,
        "-alpha+beta": lambda a, b: -a + b,
        "alpha-beta": lambda a, b: a - b,
        "-(alpha+beta)": lambda a, b: -(a + b),
    }
    hits = {name: 0 for name in combos}
    table = []
    for x1, y, V in points:
        def log_kill_transform(q: float) -> float:
            g = analytic.green_laplace_closed(x1, y, q)
            return math.log(g / (1 + V * analytic.green_laplace_closed(x1, x1, q)))

        d, _ = derivative_at_zero(log_kill_transform, h0=0.02, levels=9)
        oracle = -d
        res = analytic.conditional_mean_kill_time_dirac(y, x1, V)
        values = {name: f(res.alpha, res.beta) for name, f in combos.items()}
        for name, v in values.items():
            if abs(v - oracle) <= tol * max(1.0, abs(oracle)):
                hits[name] += 1
        table.append((x1, y, V, oracle, values))
    n = len(points)
    winners = [name for name, h in hits.items() if h >= 0.9 * n]
    # degenerate combos can tie at V=0 only; require a full-grid winner
    exact = [name for name in winners if hits[name] == n]
    verdict = exact[0] if len(exact) >= 1 else "inconclusive"
    return MfptVerdict(verdict, tuple(table))
