"""Scenario ingestion, experiment orchestration and report emission.

Config files are flat sectioned key=value text (configparser syntax): one
[suite] section plus one [scenario NAME] section per run. See README for
the full schema and the named analytic profiles.
"""
from __future__ import annotations

import argparse
import configparser
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import multipliers as _mult
from .core import (
    DampingProfile, Grid, HypothesisViolation, Nonlinearity, NONLINEARITIES,
    PROFILES, Profile, constant_profile, indicator_profile, make_localization,
    nu_ratio, smooth_indicator_profile, zero_profile,
)
from .energy import build_energy_report, observability_ratio
from .solver import (
    EnergyMonotonicityError, InitialData, Scenario, Trajectory,
    run_auxiliary, run_derivative_system, run_simulation, theta_from_run,
)

KINDS = ("simulate", "aux_equivalence", "semi_global_sweep",
         "multiplier_report", "verify")
#: experiment kinds that invoke the stability theory, which needs 1 < p < inf
STABILITY_KINDS = ("aux_equivalence", "semi_global_sweep", "multiplier_report")

DEFAULTS = {
    "n_cells": 256,
    "t_final": 20.0,
    "p_list": (1.5, 2.0, 4.0),
    "splitting": "strang",
    "record_every": 1,
    "z0": "sine(1)",
    "z1": "zero",
    "amplitude": 1.0,
}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Profile spec parsing:  name  or  name(arg, arg, key=arg)
# ---------------------------------------------------------------------------

_CALL_RE = re.compile(r"^\s*([A-Za-z_][\w]*)\s*(?:\((.*)\))?\s*$")


def _parse_call(spec: str, key: str) -> tuple[str, list[float], dict[str, float]]:
    m = _CALL_RE.match(spec)
    if not m:
        raise ConfigError(f"key '{key}': cannot parse profile spec '{spec}'")
    name, argstr = m.group(1), m.group(2)
    args: list[float] = []
    kwargs: dict[str, float] = {}
    if argstr:
        for tok in argstr.split(","):
            tok = tok.strip()
            if not tok:
                continue
            if "=" in tok:
                k, v = tok.split("=", 1)
                kwargs[k.strip()] = float(v)
            else:
                args.append(float(tok))
    return name, args, kwargs


def parse_nonlinearity(spec: str) -> Nonlinearity:
    name, args, kwargs = _parse_call(spec, "g")
    if name not in NONLINEARITIES or args or kwargs:
        raise ConfigError(
            f"key 'g': unknown nonlinearity '{spec}' "
            f"(available: {', '.join(sorted(NONLINEARITIES))})")
    return NONLINEARITIES[name]()


def parse_damping(spec: str) -> DampingProfile:
    name, args, kwargs = _parse_call(spec, "a")
    try:
        if name == "zero":
            return zero_profile()
        if name == "constant":
            return constant_profile(*args, **kwargs)
        if name == "indicator":
            return indicator_profile(*args, **kwargs)
        if name == "smooth_indicator":
            return smooth_indicator_profile(*args, **kwargs)
    except TypeError as exc:
        raise ConfigError(f"key 'a': bad arguments in '{spec}': {exc}") from exc
    raise ConfigError(f"key 'a': unknown damping profile '{spec}'")


def parse_profile(spec: str, key: str) -> Profile:
    name, args, kwargs = _parse_call(spec, key)
    if name not in PROFILES:
        raise ConfigError(f"key '{key}': unknown profile '{spec}' "
                          f"(available: {', '.join(sorted(PROFILES))})")
    try:
        if name == "sine":
            return PROFILES[name](int(args[0]) if args else 1, **kwargs)
        return PROFILES[name](*args, **kwargs)
    except TypeError as exc:
        raise ConfigError(f"key '{key}': bad arguments in '{spec}': {exc}") from exc


def _parse_floats(text: str, key: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"key '{key}': cannot parse number list '{text}'") from exc


# ---------------------------------------------------------------------------
# Suite
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScenarioSpec:
    """A validated scenario plus experiment-level extras and the raw
    key=value pairs it was parsed from (for round-trip serialization)."""

    scenario: Scenario
    fit_window: tuple[float, float] | None = None
    alphas: tuple[float, ...] = ()
    epsilons: tuple[float, float, float] | None = None
    window: tuple[float, float] | None = None
    co_integrate_w: bool = False
    raw: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class ExperimentSuite:
    kind: str
    scenarios: tuple[ScenarioSpec, ...]
    output_dir: str = "out"
    seed: int = 0


_SCENARIO_KEYS = {"n_cells", "t_final", "p_list", "splitting", "record_every",
                  "g", "a", "z0", "z1", "amplitude", "fit_window", "alphas",
                  "epsilons", "window", "co_integrate_w"}


def parse_suite(config_text: str) -> ExperimentSuite:
    """Parse and fully validate a suite: schema, H1/H2 lattice checks,
    p-range restrictions for stability experiments, epsilon ordering."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(config_text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    if "suite" not in cp:
        raise ConfigError("missing [suite] section")
    suite_sec = cp["suite"]
    kind = suite_sec.get("kind", "simulate")
    if kind not in KINDS:
        raise ConfigError(f"key 'kind': unknown experiment kind '{kind}'")
    output_dir = suite_sec.get("output_dir", "out")
    seed = suite_sec.getint("seed", 0)

    specs: list[ScenarioSpec] = []
    names: set[str] = set()
    for section in cp.sections():
        if section == "suite":
            continue
        if not section.startswith("scenario"):
            raise ConfigError(f"unknown section '[{section}]'")
        name = section[len("scenario"):].strip() or "run"
        if name in names:
            raise ConfigError(f"duplicate scenario name '{name}'")
        names.add(name)
        specs.append(_parse_scenario(name, dict(cp[section]), kind))
    if not specs and kind != "verify":
        raise ConfigError("no [scenario NAME] sections found")
    return ExperimentSuite(kind=kind, scenarios=tuple(specs),
                           output_dir=output_dir, seed=seed)


def _parse_scenario(name: str, raw: dict[str, str], kind: str) -> ScenarioSpec:
    for key in raw:
        if key not in _SCENARIO_KEYS:
            raise ConfigError(f"scenario '{name}': unknown key '{key}'")

    n_cells = int(raw.get("n_cells", DEFAULTS["n_cells"]))
    t_final = float(raw.get("t_final", DEFAULTS["t_final"]))
    p_list = (_parse_floats(raw["p_list"], "p_list")
              if "p_list" in raw else DEFAULTS["p_list"])
    splitting = raw.get("splitting", DEFAULTS["splitting"])
    record_every = int(raw.get("record_every", DEFAULTS["record_every"]))
    amplitude = float(raw.get("amplitude", DEFAULTS["amplitude"]))

    for p in p_list:
        if p < 1.0:
            raise ConfigError(f"scenario '{name}': p = {p} < 1 is not allowed")
        if kind in STABILITY_KINDS and p <= 1.0:
            raise ConfigError(
                f"scenario '{name}': p = {p:g} rejected — the stability "
                f"theory covers 1 < p < inf only (experiment kind '{kind}')")

    g = parse_nonlinearity(raw.get("g", "identity"))
    g.validate()  # H2 lattice check at parse time
    a = parse_damping(raw.get("a", "indicator(0.7, 1, 1)"))
    a.validate(require_active=kind in STABILITY_KINDS)

    z0 = parse_profile(raw.get("z0", DEFAULTS["z0"]), "z0").scaled(amplitude)
    z1 = parse_profile(raw.get("z1", DEFAULTS["z1"]), "z1").scaled(amplitude)

    fit_window = None
    if "fit_window" in raw:
        vals = _parse_floats(raw["fit_window"], "fit_window")
        if len(vals) != 2 or vals[0] >= vals[1]:
            raise ConfigError(f"scenario '{name}': fit_window must be 't_lo, t_hi'")
        fit_window = (vals[0], vals[1])

    alphas = _parse_floats(raw["alphas"], "alphas") if "alphas" in raw else ()

    epsilons = None
    if "epsilons" in raw:
        vals = _parse_floats(raw["epsilons"], "epsilons")
        if len(vals) != 3:
            raise ConfigError(f"scenario '{name}': epsilons needs three values")
        epsilons = (vals[0], vals[1], vals[2])

    window = None
    if "window" in raw:
        vals = _parse_floats(raw["window"], "window")
        if len(vals) != 2 or not 0 <= vals[0] < vals[1]:
            raise ConfigError(f"scenario '{name}': window must be 'S, T' with S < T")
        window = (vals[0], vals[1])

    scenario = Scenario(name=name, grid=Grid(n_cells), t_final=t_final,
                        p_list=tuple(p_list), g=g, a=a,
                        initial=InitialData.from_profiles(z0, z1),
                        splitting=splitting, record_every=record_every)

    if kind == "multiplier_report":
        # fail early on a bad localization geometry
        make_localization((a.omega[0], 1.0), epsilons, scenario.grid)

    return ScenarioSpec(scenario=scenario, fit_window=fit_window, alphas=alphas,
                        epsilons=epsilons, window=window,
                        co_integrate_w=raw.get("co_integrate_w", "false").lower()
                        in ("1", "true", "yes"),
                        raw=dict(raw))


def serialize_suite(suite: ExperimentSuite) -> str:
    """Inverse of parse_suite on the raw key=value pairs."""
    lines = ["[suite]", f"kind = {suite.kind}",
             f"output_dir = {suite.output_dir}", f"seed = {suite.seed}", ""]
    for spec in suite.scenarios:
        lines.append(f"[scenario {spec.scenario.name}]")
        for key, value in spec.raw.items():
            lines.append(f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Experiment runners
# ---------------------------------------------------------------------------

def run_aux_equivalence(scenario: Scenario) -> dict:
    """Nonlinear run vs the auxiliary linear run with theta = nu(z_t)
    recorded densely along the nonlinear trajectory (the linearizing
    principle behind the stability proof)."""
    dense = Scenario(name=scenario.name, grid=scenario.grid,
                     t_final=scenario.t_final, p_list=scenario.p_list,
                     g=scenario.g, a=scenario.a, initial=scenario.initial,
                     splitting=scenario.splitting, record_every=1)
    traj_nl = run_simulation(dense)
    theta = theta_from_run(traj_nl)
    traj_aux = run_auxiliary(dense, theta)
    disc = 0.0
    for s_nl, s_aux in zip(traj_nl.states, traj_aux.states):
        disc = max(disc,
                   float(np.max(np.abs(s_nl.rho - s_aux.rho))),
                   float(np.max(np.abs(s_nl.xi - s_aux.xi))))
    m = float(np.max(traj_nl.diagnostics["max_zt"]))
    lattice = np.linspace(-m, m, 2001) if m > 0 else np.array([0.0])
    nu_vals = nu_ratio(lattice, scenario.g)
    nu1, nu2 = float(np.min(nu_vals)), float(np.max(nu_vals))
    th1, th2 = theta.bounds
    return {
        "name": scenario.name,
        "max_discrepancy": disc,
        "max_zt": m,
        "theta_bounds": [th1, th2],
        "nu_bounds": [nu1, nu2],
        "theta_inside_nu_bounds": bool(nu1 - 1e-12 <= th1 and th2 <= nu2 + 1e-12),
        "trajectories": (traj_nl, traj_aux),
    }


def run_semi_global_sweep(base: Scenario, alphas: tuple[float, ...],
                          fit_window: tuple[float, float]) -> dict:
    """Scale the initial data by each alpha, fit the decay rate on a fixed
    window, and report (alpha, strong-norm proxy c_p, rate) per exponent."""
    entries = []
    a_nodes = np.asarray(base.a.value(base.grid.nodes))
    for alpha in alphas:
        if alpha == 0.0:
            entries.append({"alpha": 0.0, "degenerate": True})
            continue
        sc = Scenario(name=f"{base.name}_a{alpha:g}", grid=base.grid,
                      t_final=base.t_final, p_list=base.p_list, g=base.g,
                      a=base.a, initial=base.initial.scaled(alpha),
                      splitting=base.splitting, record_every=base.record_every)
        traj = run_simulation(sc, keep_states=False)
        w0 = sc.initial.derivative_system_data(sc.grid, a_nodes, sc.g)
        entry: dict = {"alpha": alpha, "degenerate": False, "rates": {}}
        from .energy import energy_p_nodal
        for p in sc.p_list:
            rep = build_energy_report(traj, p, fit_window)
            c_p = (p * energy_p_nodal(w0.rho, w0.xi, p, sc.grid.dx)) ** (1.0 / p)
            entry["rates"][f"{p:g}"] = {"rate": rep.fit.rate, "r2": rep.fit.r2,
                                        "c_p": c_p}
        entries.append(entry)
    return {"name": base.name, "alphas": list(alphas), "entries": entries}


def run_one_simulation(spec: ScenarioSpec) -> dict:
    sc = spec.scenario
    if spec.co_integrate_w:
        traj, w_traj = run_derivative_system(sc, keep_states=False)
    else:
        traj = run_simulation(sc, keep_states=False)
        w_traj = None
    summary: dict = {"name": sc.name, "t_final": sc.t_final_actual,
                     "n_cells": sc.grid.n_cells, "fits": {}}
    for p in sc.p_list:
        rep = build_energy_report(traj, p, spec.fit_window)
        if rep.fit is not None:
            summary["fits"][f"{p:g}"] = {"fitted_rate": rep.fit.rate,
                                         "r2": rep.fit.r2,
                                         "window": list(rep.fit.window)}
    if spec.window is not None:
        s, t = spec.window
        summary["observability_ratio"] = {
            f"{p:g}": observability_ratio(traj, p, s, t) for p in sc.p_list}
    return {"summary": summary, "traj": traj, "w_traj": w_traj}


def run_one_multiplier_report(spec: ScenarioSpec) -> dict:
    sc = spec.scenario
    traj = run_simulation(sc, keep_states=True)
    triple = make_localization((sc.a.omega[0], 1.0), spec.epsilons, sc.grid)
    window = spec.window or (0.0, sc.t_final_actual)
    tables = {}
    for p in sc.p_list:
        rep = _mult.multiplier_terms(traj, triple, p, window)
        tables[f"{p:g}"] = {
            "regime": rep.regime, "terms": rep.terms,
            "int_energy": rep.int_energy, "energy_at_s": rep.energy_at_s,
            "chain_constants": rep.chain_constants,
            "eta_table": {f"{k:g}": v for k, v in rep.eta_table.items()},
        }
    return {"summary": {"name": sc.name, "window": list(window),
                        "multiplier_tables": tables},
            "traj": traj, "w_traj": None}


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------

def _csv_cell(x: float) -> str:
    return repr(float(x))  # shortest round-trip decimal


def write_energy_csv(path: Path, traj: Trajectory,
                     w_traj: Trajectory | None = None) -> None:
    p_list = traj.scenario.p_list
    header = ["t"]
    header += [f"E_p{p:g}" for p in p_list]
    header += [f"dEdt_p{p:g}" for p in p_list]
    header.append("max_zt")
    if w_traj is not None:
        header.append("W1p_zt")
    with path.open("w") as fh:
        fh.write(",".join(header) + "\n")
        for i, t in enumerate(traj.times):
            row = [_csv_cell(t)]
            row += [_csv_cell(traj.diagnostics[f"E_p{p:g}"][i]) for p in p_list]
            row += [_csv_cell(traj.diagnostics[f"dEdt_p{p:g}"][i]) for p in p_list]
            row.append(_csv_cell(traj.diagnostics["max_zt"][i]))
            if w_traj is not None:
                p0 = p_list[0]
                row.append(_csv_cell(w_traj.diagnostics[f"W1p_zt_p{p0:g}"][i]))
            fh.write(",".join(row) + "\n")


def emit_reports(results: list[dict], output_dir: str) -> list[Path]:
    """Write energies_<name>.csv (when a trajectory exists) and
    summary_<name>.json for every scenario result."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for res in results:
        name = res["summary"]["name"]
        traj = res.get("traj")
        if traj is not None:
            csv_path = out / f"energies_{name}.csv"
            write_energy_csv(csv_path, traj, res.get("w_traj"))
            written.append(csv_path)
        json_path = out / f"summary_{name}.json"
        with json_path.open("w") as fh:
            json.dump(res["summary"], fh, indent=2, default=float)
            fh.write("\n")
        written.append(json_path)
    return written


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------

def _run_spec(kind: str, spec: ScenarioSpec) -> dict:
    sc = spec.scenario
    if kind == "simulate":
        return run_one_simulation(spec)
    if kind == "aux_equivalence":
        res = run_aux_equivalence(sc)
        traj_nl, _ = res.pop("trajectories")
        return {"summary": res, "traj": traj_nl, "w_traj": None}
    if kind == "semi_global_sweep":
        window = spec.fit_window or (2.0, sc.t_final * 0.9)
        return {"summary": run_semi_global_sweep(sc, spec.alphas or (1.0, 4.0, 16.0),
                                                 window),
                "traj": None, "w_traj": None}
    if kind == "multiplier_report":
        return run_one_multiplier_report(spec)
    raise ConfigError(f"kind '{kind}' is not runnable here")


def _run_raw(kind: str, name: str, raw: dict[str, str], output_dir: str) -> str:
    """Worker-side entry: rebuild the spec from its raw form, run it and
    write its reports (trajectories are not picklable across processes)."""
    spec = _parse_scenario(name, raw, kind)
    emit_reports([_run_spec(kind, spec)], output_dir)
    return name


def run_suite(suite: ExperimentSuite, output_dir: str | None = None,
              jobs: int = 1) -> int:
    """Run every scenario, write reports, return a process exit code
    (0 iff all enabled assertions passed)."""
    if suite.kind == "verify":
        from .verify import run_all
        return 0 if all(r.passed for r in run_all()) else 1
    out = output_dir or suite.output_dir
    failures = []
    # scenarios hold closures, so workers get the raw key=value form and
    # re-parse it; each worker writes its own reports
    parallel = (jobs > 1 and len(suite.scenarios) > 1
                and all(spec.raw for spec in suite.scenarios))
    if parallel:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_raw, suite.kind, spec.scenario.name,
                                   spec.raw, out)
                       for spec in suite.scenarios]
            for spec, fut in zip(suite.scenarios, futures):
                try:
                    fut.result()
                except (EnergyMonotonicityError, HypothesisViolation) as exc:
                    failures.append((spec.scenario.name, exc))
    else:
        for spec in suite.scenarios:
            try:
                emit_reports([_run_spec(suite.kind, spec)], out)
            except (EnergyMonotonicityError, HypothesisViolation) as exc:
                failures.append((spec.scenario.name, exc))
    for name, exc in failures:
        print(f"FAIL {name}: {exc}", file=sys.stderr)
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavelab",
        description="Numerical laboratory for the 1D damped wave equation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment suite file")
    p_run.add_argument("suite_file", type=Path)
    p_run.add_argument("--out", default=None, help="output directory "
                       "(WAVELAB_OUT env var takes precedence)")
    p_run.add_argument("--jobs", type=int, default=1)

    sub.add_parser("verify", help="run the built-in acceptance suite")

    p_or = sub.add_parser("oracle", help="evaluate a reference oracle")
    p_or.add_argument("case", choices=["modal", "dalembert"])
    p_or.add_argument("--a0", type=float, default=0.5)
    p_or.add_argument("--k", type=int, default=1)
    p_or.add_argument("--t", type=float, default=0.5)
    p_or.add_argument("--x", type=float, default=0.5)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        try:
            suite = parse_suite(args.suite_file.read_text())
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        out = os.environ.get("WAVELAB_OUT") or args.out
        code = run_suite(suite, output_dir=out, jobs=args.jobs)
        return code
    if args.command == "verify":
        from .verify import run_all
        return 0 if all(r.passed for r in run_all()) else 1
    if args.command == "oracle":
        from . import oracle
        if args.case == "modal":
            lp, lm, rate = oracle.modal_rate(args.a0, args.k)
            print(json.dumps({"lambda_plus": [lp.real, lp.imag],
                              "lambda_minus": [lm.real, lm.imag],
                              "energy_rate": rate}))
        else:
            from .core import sine_profile, zero_function
            z0, z1 = sine_profile(args.k), zero_function()
            z = oracle.dalembert(z0.value, z1.value, args.t, args.x)
            print(json.dumps({"z": z, "t": args.t, "x": args.x,
                              "data": f"sine({args.k}), zero"}))
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
