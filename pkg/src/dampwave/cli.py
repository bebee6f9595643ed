"""Command line driver: configs, sweeps, CSV artifacts and run manifests.

Every subcommand reads one INI section named after it (``--config``), then
applies ``--<key> value`` overrides.  Unknown keys exit with status 2; a
failed acceptance check exits with status 1.  Each run writes
``<out>/<command>.csv`` and ``<out>/manifest.json``.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import hashlib
import io
import json
import sys
import time
import typing
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .averaging import CASES, LOG_POW_TOL, POW_TOL, RationalDirection, verify_lemma
from .damping_models import strip_profile, thin_profile
from .golden import run_golden, wide_report
from .quasimodes import residual_exponent, residual_sweep
from .rate_calculus import (GrowthExpr, Z, build_M_thin, build_M_thin_lower, compose,
                            envelope_inverse, format_expr, parse_expr)
from .resolvent import auto_N, scaling_report, sup_over_E
from .wave_sim import (WaveSystem, evolve, fit_decay_rate, fit_power_decay,
                       quasimode_data, random_smooth, single_frequency)


class ConfigError(ValueError):
    pass


# -- configs ---------------------------------------------------------------------

@dataclass(frozen=True)
class RateConfig:
    V: str = "z^2 @small"
    mode: str = "strip"          # strip | thin | thin_lower
    delta: str = "11/10"


@dataclass(frozen=True)
class ResolventSweepConfig:
    profile: str = "strip"       # strip | thin | constant
    growth: str = "z^2 @small"
    sigma: float = 1.0
    level: float = 1.0
    smoothing: float = 0.0       # 0 leaves the raw profile
    h_exponents: tuple = (4, 5, 6, 7, 8, 9, 10, 11, 12)
    N: int = 0                   # 0 picks auto_N per h
    E_max: float = 0.0           # 0 means the resolved band
    predicted: str = ""          # empty derives h M(h) from the rate pipeline
    pow_tol: float = 0.05
    log_tol: float = 0.5


@dataclass(frozen=True)
class AverageFitConfig:
    case: str = "convex"
    beta: float = 2.0
    gamma: float = 0.0
    beta1: float = 1.0
    beta2: float = 2.0
    alpha1: float = 1.0
    alpha2: float = 1.0
    n: float = 4.0
    m: float = 4.0
    direction: tuple = ()
    quad_n: int = 64


@dataclass(frozen=True)
class QuasimodeCheckConfig:
    V: str = "z^2 @small"
    ns: tuple = (16, 32, 64, 128, 256, 512)
    cutoff: str = "plateau"
    exponent_tol: float = 0.05


@dataclass(frozen=True)
class SimulateConfig:
    profile: str = "strip"
    growth: str = "z^2 @small"
    sigma: float = 1.0
    level: float = 1.0
    smoothing: float = 0.0
    modes: tuple = (0, 1, 2)
    N_x: int = 64
    dt: float = 1e-3
    T: float = 1.0
    initial_data: str = "random_smooth"   # quasimode | random_smooth | single_frequency
    seed: int = 0
    width: float = 4.0
    k: int = 1
    every: int = 10
    fit: bool = False
    identity_tol: float = 1e-8


@dataclass(frozen=True)
class GoldenTableConfig:
    pass


CONFIGS = {
    "rate": RateConfig,
    "resolvent-sweep": ResolventSweepConfig,
    "average-fit": AverageFitConfig,
    "quasimode-check": QuasimodeCheckConfig,
    "simulate": SimulateConfig,
    "golden-table": GoldenTableConfig,
}


def _fields(cls) -> dict:
    hints = typing.get_type_hints(cls)
    return {f.name: hints[f.name] for f in dataclasses.fields(cls)}


def _parse_value(key: str, kind, text: str):
    text = text.strip()
    try:
        if kind is bool:
            low = text.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return low in ("true", "1", "yes")
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        if kind is tuple:
            parts = text.replace(",", " ").split()
            return tuple(int(p) for p in parts)
        return text
    except ValueError as e:
        raise ConfigError(f"bad value for {key!r}: {text!r}") from e


def _format_value(v) -> str:
    if isinstance(v, tuple):
        return " ".join(str(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def build_config(command: str, values: dict):
    """Typed config from string values; unknown keys are errors."""
    if command not in CONFIGS:
        raise ConfigError(f"unknown command {command!r}")
    cls = CONFIGS[command]
    kinds = _fields(cls)
    kw = {}
    for key, text in values.items():
        if key not in kinds:
            raise ConfigError(f"unknown key {key!r} for {command}")
        kw[key] = _parse_value(key, kinds[key], text)
    return cls(**kw)


def read_ini(text: str, command: str) -> dict:
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(str(e)) from e
    for section in cp.sections():
        if section not in CONFIGS:
            raise ConfigError(f"unknown section {section!r}")
    return dict(cp[command]) if cp.has_section(command) else {}


def to_ini(command: str, cfg) -> str:
    lines = [f"[{command}]"]
    for f in dataclasses.fields(cfg):
        lines.append(f"{f.name} = {_format_value(getattr(cfg, f.name))}")
    return "\n".join(lines) + "\n"


def config_hash(command: str, cfg) -> str:
    return hashlib.sha256(to_ini(command, cfg).encode()).hexdigest()


# -- helpers ---------------------------------------------------------------------

def _expr(text: str, key: str) -> GrowthExpr:
    try:
        return parse_expr(text)
    except ValueError as e:
        raise ConfigError(f"bad expression for {key!r}: {e}") from e


def _profile(cfg):
    kw = {"smoothing": cfg.smoothing} if cfg.smoothing > 0 else {}
    try:
        if cfg.profile == "strip":
            return strip_profile(cfg.sigma, _expr(cfg.growth, "growth"), **kw)
        if cfg.profile == "thin":
            return thin_profile(_expr(cfg.growth, "growth"), **kw)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    if cfg.profile == "constant":
        return float(cfg.level)
    raise ConfigError(f"bad value for 'profile': {cfg.profile!r}")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except ValueError as e:
        raise ConfigError(f"bad value for 'delta': {text!r}") from e


@dataclass
class Outcome:
    rows: list
    criteria: list          # (name, passed, detail)
    tolerances: dict
    notes: list = dataclasses.field(default_factory=list)


def _map(fn, items, workers: int):
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


# -- commands --------------------------------------------------------------------

def run_rate(cfg: RateConfig, workers: int) -> Outcome:
    V = _expr(cfg.V, "V")
    if cfg.mode == "strip":
        rep = wide_report(V, _fraction(cfg.delta))
    elif cfg.mode == "thin":
        rep = build_M_thin(V)
    elif cfg.mode == "thin_lower":
        rep = build_M_thin_lower(V)
    else:
        raise ConfigError(f"bad value for 'mode': {cfg.mode!r}")
    row = {"V": format_expr(V), "mode": cfg.mode, "M": format_expr(rep.M),
           "m": format_expr(rep.m), "positive_increase": rep.positive_increase,
           "rate": format_expr(rep.rate), "flags": "; ".join(rep.technical_flags)}
    return Outcome([row], [("rate computed", True, row["rate"])], {"exact": True})


def _sweep_prediction(cfg, prof) -> GrowthExpr:
    if cfg.predicted:
        return _expr(cfg.predicted, "predicted")
    if cfg.profile == "constant":
        return GrowthExpr.small(pow=1)
    V = _expr(cfg.growth, "growth")
    rep = wide_report(V) if cfg.profile == "strip" else build_M_thin(V)
    return rep.M * Z(1)


def run_resolvent_sweep(cfg: ResolventSweepConfig, workers: int) -> Outcome:
    prof = _profile(cfg)
    predicted = _sweep_prediction(cfg, prof)
    hs = [2.0 ** -e for e in cfg.h_exponents]

    def one(h):
        N = cfg.N or auto_N(prof, h)
        return sup_over_E(h, prof, N=N, E_max=cfg.E_max or None)

    res = _map(one, hs, workers)
    rows = [{"h": r.h, "E_star": r.E_star, "norm": r.norm, "N": r.N, "method": r.method} for r in res]
    rep = scaling_report([(r.h, r.norm) for r in res], predicted, cfg.pow_tol, cfg.log_tol)
    detail = (f"fitted power {rep.pow_hat:.4f} log {rep.log_pow_hat:.3f}, "
              f"predicted {format_expr(predicted)}")
    return Outcome(rows, [("sup_E norm exponent", rep.passed, detail)],
                   {"pow_tol": cfg.pow_tol, "log_tol": cfg.log_tol, "solver_tol": 1e-10})


def run_average_fit(cfg: AverageFitConfig, workers: int) -> Outcome:
    if cfg.case not in CASES:
        raise ConfigError(f"bad value for 'case': {cfg.case!r}")
    params = {k: getattr(cfg, k) for k in ("beta", "gamma", "beta1", "beta2", "alpha1", "alpha2", "n", "m")}
    params = {k: (int(v) if float(v).is_integer() else v) for k, v in params.items()}
    d = None
    if cfg.direction:
        if len(cfg.direction) != 2:
            raise ConfigError("bad value for 'direction': need two integers")
        try:
            d = RationalDirection(*cfg.direction)
        except ValueError as e:
            raise ConfigError(f"bad value for 'direction': {e}") from e
    rep = verify_lemma(cfg.case, params, d, quad_n=cfg.quad_n)
    rows = [{"s": s, "log_A": la} for s, la in rep.samples]
    detail = f"fitted ({rep.fit.pow_hat:.4f}, {rep.fit.log_pow_hat:.3f}) predicted {rep.predicted}"
    return Outcome(rows, [(f"{cfg.case} growth order", rep.passed, detail)],
                   {"pow_tol": POW_TOL, "log_pow_tol": LOG_POW_TOL, "quad_n": cfg.quad_n})


def predicted_residual(V: GrowthExpr) -> GrowthExpr:
    """V(R^-1(h)) / h with R = z^2 V."""
    return compose(V, envelope_inverse(Z(2) * V)) * Z(-1)


def run_quasimode_check(cfg: QuasimodeCheckConfig, workers: int) -> Outcome:
    V = _expr(cfg.V, "V")
    rows = _map(lambda n: residual_sweep(V, [n], cutoff=cfg.cutoff)[0], list(cfg.ns), workers)
    want = float(predicted_residual(V).pow)
    got = residual_exponent(rows)
    ratios = [r.ratio for r in rows]
    crit = [("residual exponent", abs(got - want) <= cfg.exponent_tol, f"{got:.4f} vs {want:.4f}"),
            ("residual / predicted bounded", max(ratios) / min(ratios) < 10.0,
             f"ratio range [{min(ratios):.3g}, {max(ratios):.3g}]")]
    return Outcome([r.row() for r in rows], crit, {"exponent_tol": cfg.exponent_tol, "norm": 1e-10})


def run_simulate(cfg: SimulateConfig, workers: int) -> Outcome:
    prof = _profile(cfg)
    if cfg.initial_data == "quasimode":
        if len(cfg.modes) != 1:
            raise ConfigError("bad value for 'modes': quasimode data uses exactly one mode")
        state = quasimode_data(_expr(cfg.growth, "growth"), cfg.modes[0], cfg.N_x)
    elif cfg.initial_data == "random_smooth":
        state = random_smooth(cfg.N_x, cfg.modes, cfg.seed, cfg.width)
    elif cfg.initial_data == "single_frequency":
        if len(cfg.modes) != 1:
            raise ConfigError("bad value for 'modes': single_frequency uses exactly one mode")
        state = single_frequency(cfg.N_x, cfg.k, cfg.modes[0])
    else:
        raise ConfigError(f"bad value for 'initial_data': {cfg.initial_data!r}")
    steps = max(1, round(cfg.T / cfg.dt))
    try:
        traj = evolve(WaveSystem(prof, cfg.N_x), state, cfg.dt, steps, workers=workers)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    worst = float(np.max(traj.residual))
    crit = [("energy monotone", traj.monotone, ""),
            ("energy identity residual", worst <= cfg.identity_tol, f"max {worst:.3g}")]
    notes = []
    if cfg.fit:
        # exploratory only: generic data shows the asymptotic rate late, if at all
        notes.append(f"qualitative: exponential rate {fit_decay_rate(traj.t, traj.E):.4g}, "
                     f"power rate {fit_power_decay(traj.t, traj.E):.4g}")
    return Outcome(traj.rows(cfg.every), crit, {"identity_tol": cfg.identity_tol, "dt": cfg.dt},
                   notes)


def run_golden_table(cfg: GoldenTableConfig, workers: int) -> Outcome:
    rows = [{k: r[k] for k in ("case", "quantity", "expected", "computed", "match")} for r in run_golden()]
    bad = [f"{r['case']}.{r['quantity']}" for r in rows if not r["match"]]
    return Outcome(rows, [("golden table exact", not bad, ", ".join(bad))], {"exact": True})


RUNNERS = {
    "rate": run_rate,
    "resolvent-sweep": run_resolvent_sweep,
    "average-fit": run_average_fit,
    "quasimode-check": run_quasimode_check,
    "simulate": run_simulate,
    "golden-table": run_golden_table,
}


# -- artifacts -------------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(rows: list) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(rows[0]))
        for r in rows:
            w.writerow([_cell(v) for v in r.values()])
    return buf.getvalue()


def run(command: str, cfg, out: Path, workers: int = 1) -> int:
    t0 = time.perf_counter()
    outcome = RUNNERS[command](cfg, workers)
    wall = time.perf_counter() - t0
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{command}.csv"
    csv_path.write_text(csv_text(outcome.rows))
    passed = all(p for _, p, _ in outcome.criteria)
    manifest = {
        "tool": "dampwave",
        "version": __version__,
        "command": command,
        "config": {f.name: _format_value(getattr(cfg, f.name)) for f in dataclasses.fields(cfg)},
        "config_hash": config_hash(command, cfg),
        "wall_time_s": wall,
        "workers": workers,
        "tolerances": outcome.tolerances,
        "criteria": [{"name": n, "passed": bool(p), "detail": d} for n, p, d in outcome.criteria],
        "notes": outcome.notes,
        "passed": passed,
        "artifacts": [csv_path.name],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    for n, p, d in outcome.criteria:
        print(f"{'PASS' if p else 'FAIL'}  {n}  {d}".rstrip())
    for note in outcome.notes:
        print(note)
    return 0 if passed else 1


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dampwave", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, cls in CONFIGS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path)
        p.add_argument("--out", type=Path, default=Path("results"))
        p.add_argument("--workers", type=int, default=1)
        for key in _fields(cls):
            p.add_argument(f"--{key}", dest=f"set_{key}", metavar="VALUE")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        values = read_ini(args.config.read_text(), args.command) if args.config else {}
        for key, val in vars(args).items():
            if key.startswith("set_") and val is not None:
                values[key[4:]] = val
        cfg = build_config(args.command, values)
        if args.workers < 1:
            raise ConfigError("--workers must be positive")
        return run(args.command, cfg, args.out, args.workers)
    except (ConfigError, OSError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
