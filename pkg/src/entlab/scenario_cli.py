"""Named scenarios, flat key = value configs and CSV/JSON export.

A config file holds one section per run:

    [fig3]
    q = 2/3
    t_max = 20
    output = fig3.csv

Section names are scenario names; a section may also be called
``name.label`` to run the same scenario twice.  Exit codes: 0 ok,
1 config error, 2 numerical error.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

import click
import numpy as np
import scipy

from . import __version__
from . import double_jc as djc
from . import ensemble_gaussian as eg
from . import free_space as fs
from . import nonrwa as nr
from . import single_cavity as sc
from .errors import ContractViolation, CutoffInsufficient, NumericalFailure, PatternViolation
from .qstate import build_named_state

WORKERS_ENV = "ENTLAB_WORKERS"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2
COMMON_KEYS = ("output", "format")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Table:
    columns: tuple
    rows: list


@dataclass(frozen=True)
class Scenario:
    name: str
    summary: str
    defaults: dict
    runner: Callable
    required: tuple = ()
    choices: dict = field(default_factory=dict)
    fmt: str = "csv"


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    params: dict
    output: str | None = None
    format: str = "csv"


# --- value parsing -----------------------------------------------------------------


def parse_value(key: str, raw: str, default):
    raw = raw.strip()
    if isinstance(default, str):
        return raw
    if isinstance(default, bool):
        low = raw.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if isinstance(default, (list, tuple)):
        return [parse_value(key, part, default[0] if default else 0.0) for part in raw.split(",") if part.strip()]
    try:
        val = float(Fraction(raw)) if "/" in raw else float(raw)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
    if isinstance(default, int):
        if val != int(val):
            raise ConfigError(f"{key}: expected an integer, got {raw!r}")
        return int(val)
    return val


def resolve(scenario: Scenario, raw: dict) -> dict:
    """Defaults overlaid with raw string values; unknown keys rejected."""
    params = dict(scenario.defaults)
    for key, value in raw.items():
        if key not in scenario.defaults:
            allowed = ", ".join(sorted(scenario.defaults))
            raise ConfigError(f"[{scenario.name}] unknown key {key!r} (allowed: {allowed})")
        params[key] = parse_value(key, value, scenario.defaults[key]) if isinstance(value, str) else value
    for key in scenario.required:
        if key not in raw:
            raise ConfigError(f"[{scenario.name}] missing required key {key!r}")
    for key, allowed in scenario.choices.items():
        if params[key] not in allowed:
            raise ConfigError(f"[{scenario.name}] {key} must be one of {', '.join(allowed)}, got {params[key]!r}")
    for key in ("t_max",):
        if key in params and not params[key] > 0:
            raise ConfigError(f"[{scenario.name}] {key} must be positive")
    for key in ("n_points",):
        if key in params and params[key] < 2:
            raise ConfigError(f"[{scenario.name}] {key} must be at least 2")
    return params


def load_config(path) -> list[ScenarioConfig]:
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    if not parser.sections():
        raise ConfigError("config has no scenario sections")
    out = []
    for section in parser.sections():
        name = section.split(".", 1)[0]
        if name not in SCENARIOS:
            raise ConfigError(f"unknown scenario {name!r}")
        items = dict(parser.items(section))
        output = items.pop("output", None)
        fmt = items.pop("format", SCENARIOS[name].fmt)
        if fmt not in ("csv", "json"):
            raise ConfigError(f"[{section}] format must be csv or json")
        params = resolve(SCENARIOS[name], items)
        out.append(ScenarioConfig(name, params, output, fmt))
    return out


# --- scenario runners ---------------------------------------------------------------


def _grid(p):
    return np.linspace(0.0, p["t_max"], p["n_points"])


def _free_params(p):
    if p["r12_over_lambda"] <= 0:
        return fs.independent_params(p["gamma"])
    kr = fs.kr_from_separation(p["r12_over_lambda"])
    return fs.collective_params(kr, p["mu_dot_r"], p["gamma"])


def run_fig2(p):
    fp = _free_params(p)
    t = _grid(p)
    c = fs.concurrence_single_excitation(fp, t)
    return Table(("t", "C"), list(zip(t, c)))


def run_correlated(p):
    fp = _free_params(p)
    t = _grid(p)
    c1, c2 = fs.correlated_q_criteria(p["q"], fp, t)
    c = np.maximum(0.0, np.maximum(c1, c2))
    return Table(("t", "C", "C1", "C2"), list(zip(t, c, c1, c2)))


def run_fig6(p):
    t = _grid(p)
    (r11, rss, r44), c = fs.dicke_model_trajectory((p["rho11"], p["rho_ss"], p["rho44"]), t, p["gamma"])
    return Table(("t", "rho11", "rho_ss", "rho44", "C"), list(zip(t, r11, rss, r44, c)))


def run_birth(p):
    fp = _free_params(p)
    t = _grid(p)
    crit = fs.sudden_birth_criterion(fp, t)
    return Table(("t", "C", "criterion"), list(zip(t, np.maximum(0.0, crit), crit)))


def run_master(p):
    fp = _free_params(p)
    rho0 = build_named_state(p["initial"])
    traj = fs.evolve_master(rho0, fp, _grid(p))
    return Table(fs.CSV_COLUMNS, fs.trajectory_rows(traj))


def run_fig11(p):
    t = _grid(p)
    c = sc.triggered_concurrence(p["delta12"], p["omega12"], p["gamma_sp"], t)
    return Table(("t", "C"), list(zip(t, c)))


def run_diffraction(initial):
    def run(p):
        rows = []
        for x in np.linspace(0.0, p["r12_max"], p["n_r"]):
            for tau in np.linspace(0.0, p["tau_max"], p["n_tau"]):
                rows.append((x, tau, float(sc.diffraction_pattern(initial, x, tau, p["Gamma"]))))
        return Table(("r12_over_lambda", "tau", "C"), rows)

    return run


def run_bad_cavity(p):
    cp = sc.CavityParams(p["g1"], p["g2"], p["delta"], p["kappa"])
    t = _grid(p)
    c = sc.bad_cavity_concurrence_closed(p["initial"], cp, t)
    return Table(("t", "C"), list(zip(t, c)))


def run_fig19(p):
    gt = _grid(p)
    pc = djc.resonant_equal_coupling_concurrences(p["delta_over_g"], gt)
    cols = [getattr(pc, "c_" + k) for k in djc.PAIRS]
    return Table(djc.CSV_COLUMNS, [(t, *(float(col[i]) for col in cols)) for i, t in enumerate(gt)])


def run_frozen(p):
    gt = _grid(p)
    scans = djc.frozen_state_scan(p["theta"], p["phi"], p["delta"], gt, sign=p["sign"])
    return Table(djc.CSV_COLUMNS, [(t, *pc.values()) for t, pc in zip(gt, scans)])


def run_fig22(p):
    gt = _grid(p)
    d0 = djc.chi_sd(p["alpha"], p["beta"])
    jp = djc.JCParams(1.0, 1.0, p["delta"], p["delta"])
    rows = [(t, *djc.pair_concurrences_double(djc.double_exc_evolve(d0, jp, float(t))).values()) for t in gt]
    return Table(djc.CSV_COLUMNS, rows)


def run_fig25(p):
    gt = _grid(p)
    pc = djc.steered_transfer(p["ratio"], gt)
    cols = [getattr(pc, "c_" + k) for k in djc.PAIRS]
    return Table(djc.CSV_COLUMNS, [(t, *(float(col[i]) for col in cols)) for i, t in enumerate(gt)])


def _nonrwa_cell(args):
    d, p, rwa = args
    np_ = nr.NonRwaParams(
        g0=p["g0"], d_over_lambda=d, n_half=p["n_half"], omega_c=p["omega_c"], omega_0=p["omega_0"], kappa=p["kappa"], n_max=p["n_max"]
    )
    traj = nr.evolve_nonrwa(nr.initial_state(p=np_), np_, rwa, _grid(p))
    return [(d, *row) for row in nr.trajectory_rows(traj)]


def _map_cells(fn, cells):
    workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    if workers <= 1 or len(cells) == 1:
        return [fn(c) for c in cells]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells))


def run_nonrwa(rwa):
    def run(p):
        cells = [(float(d), p, rwa) for d in p["d_over_lambda"]]
        rows = [row for block in _map_cells(_nonrwa_cell, cells) for row in block]
        return Table(("d_over_lambda",) + nr.CSV_COLUMNS, rows)

    return run


def run_cluster(protocol):
    graph = eg.protocol_graph(protocol)

    def run(p):
        xi = p["xi"]
        target = eg.target_state(protocol, xi)
        out = {
            "protocol": protocol,
            "xi": xi,
            "nullifiers": dict(eg.cluster_variances(target, graph)),
            "closed_form": dict(zip((n for n, _ in eg.cluster_variances(target, graph)), eg.cluster_target_values(graph, xi))),
            "covariance": target.to_dict(),
        }
        if p["dynamic"]:
            res = eg.run_protocol(protocol, math.tanh(xi), p["kappa"], p["beta_scale"], p["tau"] / p["kappa"])
            out["dynamic"] = {
                "nullifiers": dict(eg.cluster_variances(res.final, graph)),
                "relaxation": res.report(),
                "unstable": res.unstable,
            }
        return out

    return run


def run_tables(protocol):
    def run(p):
        steps = eg.pulse_schedule(protocol, p["r"], p["tau"], p["variant"])
        return schedule_table(steps)

    return run


def schedule_table(steps) -> Table:
    rows = []
    for k, st in enumerate(steps):
        for n, ((ou, os_), (pu, ps)) in enumerate(zip(st.rabi, st.phases)):
            rows.append((k + 1, st.direction, n + 1, ou, os_, pu / math.pi, ps / math.pi))
    return Table(("step", "direction", "ensemble", "omega_u", "omega_s", "phi_u_over_pi", "phi_s_over_pi"), rows)


def run_single_ensemble(p):
    r = p["r"]
    res = eg.run_protocol("single_ensemble_12", r, p["kappa"], p["beta_scale"], p["tau"] / p["kappa"])
    xi = math.atanh(r)
    f = res.final
    epr_plus = f.variance(np.array([0, 0, 1, 0, 1, 0]))
    return {
        "protocol": "single_ensemble_12",
        "xi0": xi,
        "C0k_variances": [f.sigma[0, 0], f.sigma[1, 1]],
        "C0k_target": [math.exp(-2 * xi) / 2, math.exp(2 * xi) / 2],
        "epr_q_sum": epr_plus,
        "epr_target": math.exp(-2 * xi),
        "relaxation": res.report(),
        "covariance": f.to_dict(),
    }


_T = {"t_max": 10.0, "n_points": 1001}
_FREE = {"gamma": 1.0, "mu_dot_r": 0.0}

SCENARIOS: dict[str, Scenario] = {}


def _add(name, summary, defaults, runner, fmt="csv", choices=None, required=()):
    SCENARIOS[name] = Scenario(name, summary, defaults, runner, tuple(required), choices or {}, fmt)


_add("fig2", "free space: concurrence from one excited atom vs separation", {**_T, **_FREE, "r12_over_lambda": 0.1}, run_fig2)
_add("fig3", "free space: sudden death of the correlated-q state, independent atoms", {**_T, "t_max": 20.0, "n_points": 2001, **_FREE, "q": 2 / 3, "r12_over_lambda": 0.0}, run_correlated)
_add("fig5", "free space: death and revival with collective damping", {**_T, "t_max": 20.0, "n_points": 4001, **_FREE, "q": 0.9, "r12_over_lambda": 0.05}, run_correlated)
_add("fig6", "small separation: populations of the Dicke cascade from |ee>", {**_T, "gamma": 1.0, "rho11": 0.0, "rho_ss": 0.0, "rho44": 1.0}, run_fig6)
_add("fig7", "free space: sudden birth from |ee> at r12 = 0.25 lambda", {**_T, "t_max": 20.0, "n_points": 2001, **_FREE, "r12_over_lambda": 0.25}, run_birth)
_add("fig8", "free space: no birth at large separation", {**_T, "t_max": 20.0, "n_points": 2001, **_FREE, "r12_over_lambda": 3.0}, run_birth)
_add(
    "master",
    "free space: full master-equation trajectory of a named initial state",
    {**_T, **_FREE, "r12_over_lambda": 0.1, "initial": "Psi3"},
    run_master,
)
_add("fig11", "good cavity: entanglement from a level mismatch", {**_T, "delta12": 1.0, "omega12": 0.5, "gamma_sp": 0.05}, run_fig11)
_diff = {"r12_max": 1.0, "n_r": 101, "tau_max": 10.0, "n_tau": 201, "Gamma": 0.0}
_add("fig12", "good cavity: Psi3 concurrence surface over position and time", dict(_diff), run_diffraction("Psi3"))
_add("fig13", "good cavity: PsiS concurrence surface over position and time", dict(_diff), run_diffraction("PsiS"))
_add(
    "fig14",
    "bad cavity: concurrence from one excited atom",
    {**_T, "t_max": 50.0, "g1": 1.0, "g2": 2.0, "delta": 0.0, "kappa": 1.0, "initial": "Psi3"},
    run_bad_cavity,
    choices={"initial": ("Psi2", "Psi3")},
)
_add("fig19", "two JC pairs: six pair concurrences from (xi1 + xi2)/sqrt2", {**_T, "t_max": 10.0, "delta_over_g": 0.0}, run_fig19)
_add(
    "fig20",
    "two JC pairs: frozen uniform superposition",
    {**_T, "t_max": 50.0, "n_points": 2001, "theta": 0.0, "phi": 0.0, "delta": 0.0, "sign": 1},
    run_frozen,
)
_add("fig22", "two JC pairs: sudden death from the two-excitation state", {**_T, "alpha": math.pi / 12, "beta": 0.0, "delta": 0.0}, run_fig22)
_add("fig25", "two JC pairs: steered transfer for a coupling ratio", {**_T, "t_max": 20.0, "n_points": 4001, "ratio": 2.0}, run_fig25)
_nr = {"t_max": 3.0, "n_points": 61, "g0": 1.0, "n_half": 0.5, "omega_c": 1.0, "omega_0": 0.99, "kappa": 0.1, "n_max": 40}
_add("fig27", "counter-rotating terms: concurrence surface over atom spacing", {**_nr, "d_over_lambda": [0.0, 0.1, 0.2, 0.3]}, run_nonrwa(False))
_add("fig28", "rotating-wave comparison for the same cavity", {**_nr, "d_over_lambda": [0.0]}, run_nonrwa(True))
_cl = {"xi": 1.0, "dynamic": False, "kappa": 1.0, "beta_scale": 5.0, "tau": 4.0}
_add("cluster_linear", "linear four-mode cluster: nullifier variances", dict(_cl), run_cluster("linear_13"), fmt="json")
_add("cluster_square", "square four-mode cluster: nullifier variances", dict(_cl), run_cluster("square_13"), fmt="json")
_add("cluster_tshape", "T-shape four-mode cluster: nullifier variances", dict(_cl), run_cluster("tshape_13"), fmt="json")
_tab = {"r": math.tanh(1.0), "tau": 4.0, "variant": "corrected"}
_tab_choice = {"variant": ("corrected", "printed")}
_add("tables_linear", "linear cluster pulse schedule", dict(_tab), run_tables("linear_13"), choices=_tab_choice)
_add("tables_square", "square cluster pulse schedule", dict(_tab), run_tables("square_13"), choices=_tab_choice)
_add("tables_tshape", "T-shape cluster pulse schedule", dict(_tab), run_tables("tshape_13"), choices=_tab_choice)
_add(
    "single_ensemble",
    "one ensemble, two cavity modes: squeezed and EPR collective modes",
    {"r": math.tanh(1.0), "kappa": 1.0, "beta_scale": 5.0, "tau": 4.0},
    run_single_ensemble,
    fmt="json",
)


def list_scenarios() -> str:
    lines = []
    for s in SCENARIOS.values():
        keys = ", ".join(f"{k}={_fmt_default(v)}" for k, v in s.defaults.items())
        req = f" required: {', '.join(s.required)};" if s.required else ""
        lines.append(f"{s.name:16s} [{s.fmt}] {s.summary}\n{'':16s}{req} keys: {keys}")
    return "\n".join(lines)


def _fmt_default(v):
    if isinstance(v, float):
        return format(v, ".6g")
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt_default(x) for x in v)
    return str(v)


# --- output --------------------------------------------------------------------------


def _num(x) -> str:
    if isinstance(x, (str, bool)):
        return str(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(np.real(x)), ".17g")


def metadata(cfg: ScenarioConfig) -> dict:
    return {
        "scenario": cfg.scenario,
        "params": {k: cfg.params[k] for k in sorted(cfg.params)},
        "versions": {"entlab": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
    }


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def render(cfg: ScenarioConfig, result) -> str:
    meta = metadata(cfg)
    if cfg.format == "json":
        if isinstance(result, Table):
            result = {"columns": list(result.columns), "rows": [list(r) for r in result.rows]}
        return json.dumps({"metadata": _jsonable(meta), "data": _jsonable(result)}, indent=2, sort_keys=True) + "\n"
    if not isinstance(result, Table):
        raise ConfigError(f"scenario {cfg.scenario} produces JSON only")
    buf = io.StringIO()
    buf.write(f"# scenario: {meta['scenario']}\n")
    for k, v in meta["params"].items():
        buf.write(f"# {k} = {_fmt_default(v) if not isinstance(v, float) else _num(v)}\n")
    buf.write("# versions: " + " ".join(f"{k}={v}" for k, v in meta["versions"].items()) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(result.columns)
    for row in result.rows:
        w.writerow([_num(x) for x in row])
    return buf.getvalue()


def execute(cfg: ScenarioConfig) -> str:
    return render(cfg, SCENARIOS[cfg.scenario].runner(cfg.params))


def run_configs(configs, out_dir: Path | None = None, echo=print) -> None:
    for cfg in configs:
        text = execute(cfg)
        if cfg.output:
            path = Path(cfg.output)
            if out_dir is not None and not path.is_absolute():
                path = out_dir / path
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
            echo(f"{cfg.scenario}: wrote {path}")
        else:
            echo(text, nl=False) if echo is click.echo else echo(text)


# --- command line -------------------------------------------------------------------


@click.group()
@click.version_option(__version__)
def main():
    """Entanglement dynamics scenarios."""


@main.command("run")
@click.argument("config", type=click.Path(dir_okay=False))
@click.option("--scenario", "only", default=None, help="Run only sections for this scenario.")
def run_cmd(config, only):
    """Run every section of CONFIG."""
    try:
        configs = load_config(config)
        if only:
            configs = [c for c in configs if c.scenario == only]
            if not configs:
                raise ConfigError(f"no section for scenario {only!r}")
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    base = Path(config).resolve().parent
    try:
        run_configs(configs, base, click.echo)
    except (ConfigError, ContractViolation) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except (NumericalFailure, CutoffInsufficient, PatternViolation, ArithmeticError) as exc:
        click.echo(f"numerical error ({type(exc).__name__}): {exc}", err=True)
        sys.exit(EXIT_NUMERIC)


@main.command("list")
def list_cmd():
    """List scenarios with their keys and defaults."""
    click.echo(list_scenarios())


@main.command("dump-schedule")
@click.argument("protocol", type=click.Choice(eg.PROTOCOLS))
@click.option("--r", "r", type=float, default=math.tanh(1.0), show_default=True)
@click.option("--tau", type=float, default=4.0, show_default=True, help="Step duration in units of 1/kappa.")
@click.option("--variant", type=click.Choice(["corrected", "printed"]), default="corrected", show_default=True)
def dump_schedule_cmd(protocol, r, tau, variant):
    """Print the pulse schedule of PROTOCOL as CSV."""
    try:
        steps = eg.pulse_schedule(protocol, r, tau, variant)
    except ContractViolation as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    cfg = ScenarioConfig("dump-schedule", {"protocol": protocol, "r": r, "tau": tau, "variant": variant})
    click.echo(render(cfg, schedule_table(steps)), nl=False)


if __name__ == "__main__":
    main()
