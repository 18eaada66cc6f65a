"""Command-line interface: scenario config parsing, one subcommand per
solver, parameter sweeps, and the cross-validation run.

Scenario configs are INI files with sections:

    [domain]     length, left, right (absorbing|reflecting|injection), phi
    [diffusion]  d, drift
    [killing]    kind (zero|uniform|dirac|piecewise), v0,
                 spots = "x:strength, x:strength", breakpoints, rates
    [initial]    y
    [method]     method (analytic|pde|mc|all), cells, dt, t_max,
                 mc_dt, mc_n, mc_seed, mc_workers, mc_width, bridge
    [output]     dir

Unknown sections or keys are rejected.  All quantities are dimensionless;
supply consistent units (d in length^2/time, rates in 1/time, spot
strengths in length/time).

CSV schemas (stable):
    survival.csv   t,survival,stderr
    split.csv      method,p_killed,p_absorbed,mean_kill_time,
                   mean_absorb_time,ratio_rinf,(same)_se
    steady.csv     quantity,value          (injected/absorbed/kill/ratio_rs)
    green.csv      quantity,value          (absorbed/kill/ratio_rinf)
    analytic.csv   name,value
    sweep.csv      param,value,observable,method,result
    histogram.csv  bin_left,bin_right,density
    report.csv     scenario,observable,method_a,value_a,method_b,value_b,
                   sigma,tol,passed,acceptance,note

Exit codes: 0 success, 1 failed acceptance row in `crosscheck`, 2 config or
usage error.  Identical invocations with identical seeds produce
byte-identical output files.
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

from . import analytic, crosscheck, fpe, montecarlo
from .fpe import GridSpec
from .model import (
    BoundaryKind,
    DiffusionModel,
    InitialCondition,
    KillingKind,
    KillingMeasure,
    SplitStatistics,
    interval,
    validate_problem,
)
from .montecarlo import McConfig


class ConfigError(Exception):
    pass


_SCHEMA: Dict[str, Tuple[str, ...]] = {
    "domain": ("length", "left", "right", "phi"),
    "diffusion": ("d", "drift"),
    "killing": ("kind", "v0", "spots", "breakpoints", "rates"),
    "initial": ("y",),
    "method": (
        "method", "cells", "dt", "t_max",
        "mc_dt", "mc_n", "mc_seed", "mc_workers", "mc_width", "bridge",
    ),
    "output": ("dir",),
}


@dataclass(frozen=True)
class ScenarioConfig:
    model: DiffusionModel
    killing: KillingMeasure
    y: float
    method: str
    grid: GridSpec
    mc: McConfig
    out_dir: str


def _floats(text: str) -> List[float]:
    return [float(tok) for tok in text.replace(",", " ").split()]


def parse_config(path: str) -> ScenarioConfig:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ConfigError(f"cannot read config file {path!r}")
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key in cp[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
    try:
        return _build_config(cp)
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc


def _build_config(cp: configparser.ConfigParser) -> ScenarioConfig:
    if "domain" not in cp:
        raise ConfigError("missing required section [domain]")
    dom = cp["domain"]
    length = float(dom["length"])
    diff = cp["diffusion"] if "diffusion" in cp else {}
    model = interval(
        length,
        dom.get("left", "absorbing"),
        dom.get("right", "absorbing"),
        diffusion=float(diff.get("d", 1.0)),
        drift=float(diff.get("drift", 0.0)),
        phi=float(dom.get("phi", 0.0)),
    )

    ks = cp["killing"] if "killing" in cp else {"kind": "zero"}
    kind = ks.get("kind", "zero")
    if kind == "zero":
        killing = KillingMeasure.zero()
    elif kind == "uniform":
        killing = KillingMeasure.uniform(float(ks["v0"]))
    elif kind == "dirac":
        spots = []
        for item in ks["spots"].split(","):
            pos, _, strength = item.partition(":")
            if not strength:
                raise ConfigError(f"spot {item.strip()!r} must be 'position:strength'")
            spots.append((float(pos), float(strength)))
        killing = KillingMeasure.dirac(spots)
    elif kind == "piecewise":
        killing = KillingMeasure.piecewise(_floats(ks["breakpoints"]), _floats(ks["rates"]))
    else:
        raise ConfigError(f"unknown killing kind {kind!r}")

    y = float(cp["initial"]["y"]) if "initial" in cp and "y" in cp["initial"] else length / 2

    m = cp["method"] if "method" in cp else {}
    method = m.get("method", "all")
    if method not in ("analytic", "pde", "mc", "all"):
        raise ConfigError(f"unknown method {method!r}")
    grid = GridSpec(
        int(m.get("cells", 200)), float(m.get("dt", 1e-3)), float(m.get("t_max", 10.0))
    )
    mc = McConfig(
        dt=float(m.get("mc_dt", 1e-3)),
        n_trajectories=int(m.get("mc_n", 10000)),
        seed=int(m.get("mc_seed", 0)),
        workers=int(m.get("mc_workers", 1)),
        dirac_width=float(m.get("mc_width", 0.05)),
        bridge_correction=m.get("bridge", "no").lower() in ("1", "yes", "true", "on"),
    )
    out_dir = cp["output"]["dir"] if "output" in cp and "dir" in cp["output"] else "."

    report = validate_problem(model, killing, InitialCondition.point(y))
    if not report.ok:
        raise ConfigError("; ".join(report.violations))
    return ScenarioConfig(model, killing, y, method, grid, mc, out_dir)


def render_config(cfg: ScenarioConfig) -> str:
    """Inverse of parse_config: the rendered text parses back field-exact."""
    dom = cfg.model.domain
    lines = [
        "[domain]",
        f"length = {dom.length!r}",
        f"left = {dom.left.kind.value}",
        f"right = {dom.right.kind.value}",
    ]
    phi = dom.left.phi + dom.right.phi
    if phi:
        lines.append(f"phi = {phi!r}")
    lines += [
        "",
        "[diffusion]",
        f"d = {cfg.model.diffusion!r}",
        f"drift = {cfg.model.drift!r}",
        "",
        "[killing]",
        f"kind = {cfg.killing.kind.value}",
    ]
    if cfg.killing.kind is KillingKind.UNIFORM:
        lines.append(f"v0 = {cfg.killing.v0!r}")
    elif cfg.killing.kind is KillingKind.DIRAC:
        lines.append("spots = " + ", ".join(f"{x!r}:{k!r}" for x, k in cfg.killing.spots))
    elif cfg.killing.kind is KillingKind.PIECEWISE:
        lines.append("breakpoints = " + " ".join(repr(b) for b in cfg.killing.breakpoints))
        lines.append("rates = " + " ".join(repr(r) for r in cfg.killing.rates))
    lines += [
        "",
        "[initial]",
        f"y = {cfg.y!r}",
        "",
        "[method]",
        f"method = {cfg.method}",
        f"cells = {cfg.grid.cell_count}",
        f"dt = {cfg.grid.dt!r}",
        f"t_max = {cfg.grid.t_max!r}",
        f"mc_dt = {cfg.mc.dt!r}",
        f"mc_n = {cfg.mc.n_trajectories}",
        f"mc_seed = {cfg.mc.seed}",
        f"mc_workers = {cfg.mc.workers}",
        f"mc_width = {cfg.mc.dirac_width!r}",
        f"bridge = {'yes' if cfg.mc.bridge_correction else 'no'}",
        "",
        "[output]",
        f"dir = {cfg.out_dir}",
        "",
    ]
    return "\n".join(lines)


# --- output helpers --------------------------------------------------------

def _out_path(cfg_dir: str, args, name: str) -> str:
    d = args.out if args.out else cfg_dir
    os.makedirs(d, exist_ok=True)
    return os.path.join(d, name)


def _write_rows(path: str, header: str, rows: Sequence[Sequence[object]]) -> None:
    with open(path, "w", newline="") as f:
        f.write(header + "\n")
        for row in rows:
            f.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")
    print(f"wrote {path}")


def _apply_overrides(cfg: ScenarioConfig, args) -> ScenarioConfig:
    mc = cfg.mc
    if args.seed is not None:
        mc = replace(mc, seed=args.seed)
    workers = args.workers or int(os.environ.get("KILLDIFF_WORKERS", "0")) or mc.workers
    mc = replace(mc, workers=workers)
    return replace(cfg, mc=mc)


def _split_rows(cfg: ScenarioConfig) -> List[Tuple[str, SplitStatistics]]:
    rows: List[Tuple[str, SplitStatistics]] = []
    methods = ("analytic", "pde", "mc") if cfg.method == "all" else (cfg.method,)
    for m in methods:
        if m == "analytic":
            stats = _analytic_split(cfg)
            if stats is None:
                if cfg.method == "analytic":
                    raise ConfigError("no closed-form split statistics for this scenario")
                continue
        elif m == "pde":
            stats = fpe.split_statistics(
                cfg.model, cfg.killing, InitialCondition.point(cfg.y), cfg.grid
            )
        else:
            stats = montecarlo.simulate_split(cfg.model, cfg.killing, cfg.y, cfg.mc)
        rows.append((m, stats))
    return rows


def _analytic_split(cfg: ScenarioConfig) -> Optional[SplitStatistics]:
    dom = cfg.model.domain
    kinds = {dom.left.kind, dom.right.kind}
    if (
        kinds == {BoundaryKind.ABSORBING}
        and cfg.killing.kind is KillingKind.DIRAC
        and len(cfg.killing.spots) == 1
        and cfg.model.drift == 0
    ):
        pk, mk = crosscheck.analytic_split_dirac(cfg.model, cfg.killing, cfg.y)
        ratio = (1 - pk) / pk if pk > 0 else math.inf
        return SplitStatistics(pk, 1 - pk, mk, math.nan, ratio)
    if (
        kinds == {BoundaryKind.REFLECTING}
        and cfg.killing.kind is KillingKind.UNIFORM
        and cfg.model.drift == 0
    ):
        return SplitStatistics(1.0, 0.0, 1.0 / cfg.killing.v0, math.nan, 0.0)
    return None


# --- subcommands -----------------------------------------------------------

def _cmd_analytic(args) -> int:
    cfg = _apply_overrides(parse_config(args.config), args)
    dom = cfg.model.domain
    kinds = (dom.left.kind, dom.right.kind)
    rows: List[Tuple[str, float]] = []
    if kinds.count(BoundaryKind.INJECTION) == 1 and kinds.count(BoundaryKind.ABSORBING) == 1:
        D, L = cfg.model.diffusion, dom.length
        if cfg.killing.kind is KillingKind.UNIFORM:
            rows.append(("ratio_rs", analytic.ratio_rs_uniform(D, cfg.killing.v0, L)))
        elif cfg.killing.kind is KillingKind.DIRAC and len(cfg.killing.spots) == 1:
            xs, ks = cfg.killing.spots[0]
            d_abs = xs if dom.left.kind is BoundaryKind.ABSORBING else L - xs
            rows.append(("ratio_rs", analytic.ratio_rs_dirac(D, ks, d_abs)))
    else:
        stats = _analytic_split(cfg)
        if stats is not None:
            rows.append(("p_killed", stats.p_killed))
            rows.append(("p_absorbed", stats.p_absorbed))
            rows.append(("mean_kill_time", stats.mean_kill_time))
            rows.append(("ratio_rinf", stats.ratio_rinf))
        if (
            cfg.killing.kind is KillingKind.DIRAC
            and len(cfg.killing.spots) == 1
            and cfg.killing.spots[0][0] < cfg.y
            and set(kinds) == {BoundaryKind.ABSORBING}
        ):
            xs, ks = cfg.killing.spots[0]
            res = analytic.ratio_rinf_dirac_interval(
                cfg.model.diffusion, ks, dom.length, cfg.y, xs
            )
            rows.append(("ratio_rinf_derived", res.derived_value))
            rows.append(("ratio_rinf_paper", res.paper_value))
    if not rows:
        raise ConfigError("no closed form applies to this scenario")
    _write_rows(_out_path(cfg.out_dir, args, "analytic.csv"), "name,value", rows)
    return 0


def _cmd_pde(args) -> int:
    cfg = _apply_overrides(parse_config(args.config), args)
    dom = cfg.model.domain
    if args.mode == "steady":
        sol = fpe.steady_state(cfg.model, cfg.killing, cfg.grid)
        _write_rows(
            _out_path(cfg.out_dir, args, "steady.csv"),
            "quantity,value",
            [
                ("injected_flux", sol.injected_flux),
                ("absorbed_flux", sol.absorbed_flux),
                ("kill_integral", sol.kill_integral),
                ("ratio_rs", sol.ratio_rs),
            ],
        )
        return 0
    if args.mode == "green":
        gr = fpe.green_steady(cfg.model, cfg.killing, cfg.y, cfg.grid)
        _write_rows(
            _out_path(cfg.out_dir, args, "green.csv"),
            "quantity,value",
            [
                ("absorbed_flux", gr.absorbed_flux),
                ("kill_integral", gr.kill_integral),
                ("ratio_rinf", gr.ratio_rinf),
            ],
        )
        return 0
    res = fpe.evolve(cfg.model, cfg.killing, InitialCondition.point(cfg.y), cfg.grid)
    s = res.series
    stride = max(1, args.stride)
    rows = [
        (float(s.times[i]), float(s.survival[i]), 0.0)
        for i in range(0, s.times.size, stride)
    ]
    _write_rows(_out_path(cfg.out_dir, args, "survival.csv"), "t,survival,stderr", rows)
    return 0


def _cmd_mc(args) -> int:
    cfg = _apply_overrides(parse_config(args.config), args)
    out = montecarlo.simulate_outcomes(cfg.model, cfg.killing, cfg.y, cfg.mc)
    t_hi = float(out.time.max())
    times = [t_hi * (i + 1) / args.points for i in range(args.points)]
    import numpy as np

    n = out.n
    rows = []
    for t in times:
        sv = float(np.count_nonzero(out.time > t)) / n
        rows.append((t, sv, math.sqrt(sv * (1 - sv) / n)))
    _write_rows(_out_path(cfg.out_dir, args, "survival.csv"), "t,survival,stderr", rows)
    if args.histogram:
        pos = out.position[out.killed]
        if pos.size:
            density, edges = np.histogram(pos, bins=50, density=True)
            _write_rows(
                _out_path(cfg.out_dir, args, "histogram.csv"),
                "bin_left,bin_right,density",
                [
                    (float(edges[i]), float(edges[i + 1]), float(density[i]))
                    for i in range(density.size)
                ],
            )
    stats = montecarlo.split_from_outcomes(out)
    _write_rows(
        _out_path(cfg.out_dir, args, "split.csv"),
        _SPLIT_HEADER,
        [_split_row("mc", stats)],
    )
    return 0


_SPLIT_HEADER = (
    "method,p_killed,p_absorbed,mean_kill_time,mean_absorb_time,ratio_rinf,"
    "p_killed_se,p_absorbed_se,mean_kill_time_se,mean_absorb_time_se,ratio_rinf_se"
)


def _split_row(method: str, s: SplitStatistics) -> Tuple[object, ...]:
    return (
        method, s.p_killed, s.p_absorbed, s.mean_kill_time, s.mean_absorb_time,
        s.ratio_rinf, s.p_killed_se, s.p_absorbed_se, s.mean_kill_time_se,
        s.mean_absorb_time_se, s.ratio_rinf_se,
    )


def _cmd_split(args) -> int:
    cfg = _apply_overrides(parse_config(args.config), args)
    if args.method:
        cfg = replace(cfg, method=args.method)
    rows = [_split_row(m, s) for m, s in _split_rows(cfg)]
    _write_rows(_out_path(cfg.out_dir, args, "split.csv"), _SPLIT_HEADER, rows)
    return 0


_SWEEPABLE = ("length", "y", "v0", "spot_position", "drift", "diffusion")


def _with_param(cfg: ScenarioConfig, param: str, value: float) -> ScenarioConfig:
    model, killing, y = cfg.model, cfg.killing, cfg.y
    if param == "length":
        model = DiffusionModel(
            replace(model.domain, length=value), model.diffusion, model.drift
        )
    elif param == "y":
        y = value
    elif param == "v0":
        killing = KillingMeasure.uniform(value)
    elif param == "spot_position":
        if killing.kind is not KillingKind.DIRAC or len(killing.spots) != 1:
            raise ConfigError("spot_position sweep needs a single-spot point killing")
        killing = KillingMeasure.dirac([(value, killing.spots[0][1])])
    elif param == "drift":
        model = DiffusionModel(model.domain, model.diffusion, value)
    elif param == "diffusion":
        model = DiffusionModel(model.domain, value, model.drift)
    else:
        raise ConfigError(f"sweep parameter must be one of {_SWEEPABLE}")
    return replace(cfg, model=model, killing=killing, y=y)


def _cmd_sweep(args) -> int:
    cfg = _apply_overrides(parse_config(args.config), args)
    try:
        values = _floats(args.values)
    except ValueError as exc:
        raise ConfigError(f"bad --values: {exc}") from exc
    if not values:
        raise ConfigError("--values is empty")
    dom = cfg.model.domain
    steady = (dom.left.kind, dom.right.kind).count(BoundaryKind.INJECTION) == 1
    rows = []
    for v in values:
        sub = _with_param(cfg, args.param, v)
        ic = None if steady else InitialCondition.point(sub.y)
        report = validate_problem(sub.model, sub.killing, ic)
        if not report.ok:
            raise ConfigError(f"{args.param}={v}: " + "; ".join(report.violations))
        if steady:
            sol = fpe.steady_state(sub.model, sub.killing, sub.grid)
            rows.append((args.param, v, "ratio_rs", "pde", sol.ratio_rs))
        else:
            for m, s in _split_rows(sub):
                rows.append((args.param, v, "ratio_rinf", m, s.ratio_rinf))
                rows.append((args.param, v, "p_killed", m, s.p_killed))
    _write_rows(
        _out_path(cfg.out_dir, args, "sweep.csv"),
        "param,value,observable,method,result",
        rows,
    )
    return 0


def _cmd_crosscheck(args) -> int:
    seed = args.seed if args.seed is not None else 0
    workers = args.workers or int(os.environ.get("KILLDIFF_WORKERS", "0")) or 1
    report = crosscheck.run_matrix(seed=seed, workers=workers)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    report.write_csv(os.path.join(out, "report.csv"))
    report.write_discrepancies_csv(os.path.join(out, "discrepancies.csv"))
    summary = report.summary()
    with open(os.path.join(out, "summary.txt"), "w") as f:
        f.write(summary + "\n")
    print(summary)
    return 0 if report.all_passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="killdiff",
        description="Killed diffusion in an interval: closed forms, PDE solver, Monte Carlo.",
    )
    parser.add_argument("--seed", type=int, default=None, help="override the MC seed")
    parser.add_argument(
        "--workers", type=int, default=0,
        help="MC worker count (default: KILLDIFF_WORKERS env var or config)",
    )
    parser.add_argument("--out", default=None, help="output directory (overrides config)")
    parser.add_argument("--format", choices=("csv",), default="csv")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="evaluate applicable closed forms")
    p.add_argument("config")
    p.set_defaults(func=_cmd_analytic)

    p = sub.add_parser("pde", help="Fokker-Planck solve (evolve, steady or green)")
    p.add_argument("config")
    p.add_argument("--mode", choices=("evolve", "steady", "green"), default="evolve")
    p.add_argument("--stride", type=int, default=10, help="survival output stride")
    p.set_defaults(func=_cmd_pde)

    p = sub.add_parser("mc", help="Monte Carlo simulation")
    p.add_argument("config")
    p.add_argument("--points", type=int, default=50, help="survival curve sample count")
    p.add_argument("--histogram", action="store_true", help="emit kill-location histogram")
    p.set_defaults(func=_cmd_mc)

    p = sub.add_parser("split", help="absorbed/killed split statistics")
    p.add_argument("config")
    p.add_argument("--method", choices=("analytic", "pde", "mc", "all"), default=None)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("sweep", help="sweep one parameter and tabulate observables")
    p.add_argument("config")
    p.add_argument("--param", required=True, choices=_SWEEPABLE)
    p.add_argument("--values", required=True, help="comma/space separated values")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("crosscheck", help="run the cross-validation scenario matrix")
    p.set_defaults(func=_cmd_crosscheck)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
