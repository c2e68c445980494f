"""Command-line driver: simulate -> noise -> plan -> assemble -> select -> report.

Four subcommands cover the pipeline end to end:

    weakpde simulate   integrate one of the built-in PDE families, add noise,
                       and write the noisy + clean fields as grid files
    weakpde identify   run the full identification pipeline on a grid file and
                       emit a JSON report (optionally rendering figures)
    weakpde evaluate   score one report -- or a batch of seeded trials -- against
                       a ground-truth description, one CSV row per trial
    weakpde spectrum   print the test-function plan a grid would receive

Exit codes: 0 success, 2 usage error, 3 simulation instability, 4 runtime or
data error.  Reports are deterministic: identical inputs and flags produce
byte-identical output.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bspline import periodic_basis
from .grid import GridFormatError, NoiseSpec, add_noise, noise_sigma, read_grid, write_grid
from .metrics import e2_error, make_ground_truth, residual_error, support_scores
from .model_select import select_model
from .simulate import PdeSpec, SimulationError, simulate
from .spectrum import plan_test_functions
from .weak_system import assemble, dictionary_preset

_PDE_ALIASES = {
    "advection-diffusion": "advection-diffusion",
    "burgers": "viscous-burgers",
    "viscous-burgers": "viscous-burgers",
    "kdv": "kdv",
    "inviscid-burgers": "inviscid-burgers",
}


class CliError(Exception):
    """Fatal CLI failure carrying the process exit code."""

    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    """Hyper-parameter bundle shared by identify/evaluate (flat key=value file)."""

    dictionary: str = "poly3-deriv4"
    m: int = 7
    d: int = 6
    tau_x: float = 3.5
    tau_t: float = 0.6
    trim_tau: float = 0.1
    lookahead: int = 3
    rho_r: float = 0.01
    nsr: float = 0.0
    seed: int = 0
    trials: int = 1
    sigma_mode: str = "paper"


_CONFIG_FIELDS = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _load_config_file(path):
    """Parse a flat ``key = value`` config file into a dict of typed values."""
    updates = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(2, f"config: cannot read {path}: {exc.strerror or exc}")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(2, f"config: line {lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_FIELDS:
            raise CliError(2, f"config: line {lineno}: unknown key {key!r}")
        updates[key] = value
    return updates


def _coerce(name, value):
    kind = _CONFIG_FIELDS[name]
    try:
        if kind in ("int", int):
            return int(value)
        if kind in ("float", float):
            return float(value)
    except ValueError:
        raise CliError(2, f"config: {name} must be {kind}, got {value!r}")
    return str(value)


def _build_config(args):
    """Layer defaults < config file < explicit flags into one RunConfig."""
    values = dataclasses.asdict(RunConfig())
    if getattr(args, "config", None):
        for key, raw in _load_config_file(args.config).items():
            values[key] = _coerce(key, raw)
    for key in values:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    cfg = RunConfig(**values)
    if not 0.0 <= cfg.nsr <= 1.0:
        raise CliError(2, f"nsr must lie in [0, 1], got {cfg.nsr}")
    if cfg.trials < 1:
        raise CliError(2, f"trials must be >= 1, got {cfg.trials}")
    if cfg.sigma_mode not in ("paper", "rms"):
        raise CliError(2, f"sigma_mode must be 'paper' or 'rms', got {cfg.sigma_mode!r}")
    return cfg


_EXPR_NAMES = {
    "pi": np.pi,
    "e": np.e,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "sign": np.sign,
    "np": np,
}


def compile_expression(text):
    """Turn an expression in x (e.g. ``0.8*(sin(2*pi*x)+1)``) into a callable.

    The expression is evaluated with numpy semantics in a namespace holding
    only x and the whitelisted math names above; constants are broadcast to
    the shape of x.
    """
    try:
        code = compile(text, "<expression>", "eval")
    except SyntaxError as exc:
        raise CliError(2, f"bad expression {text!r}: {exc.msg}")

    def func(x):
        scope = dict(_EXPR_NAMES)
        scope["x"] = x
        try:
            out = eval(code, {"__builtins__": {}}, scope)  # noqa: S307 - restricted namespace
        except NameError as exc:
            raise CliError(2, f"bad expression {text!r}: {exc}")
        return np.broadcast_to(np.asarray(out, dtype=float), np.shape(x)).copy()

    return func


def _say(args, message):
    if not getattr(args, "quiet", False):
        print(message)


# ---------------------------------------------------------------------------
# simulate


def _clean_path(out):
    path = Path(out)
    return path.with_name(path.stem + ".clean" + path.suffix)


def cmd_simulate(args):
    cfg = _build_config(args)
    kind = _PDE_ALIASES[args.pde]
    x_probe = args.x0 + (args.length / args.nx) * np.arange(args.nx)
    coefficients = {}
    for name, text in (("a", args.a), ("b", args.b), ("c", args.c)):
        if text is None:
            continue
        func = compile_expression(text)
        sampled = func(x_probe)
        if np.ptp(sampled) == 0.0:
            coefficients[name] = float(sampled[0])
        else:
            coefficients[name] = func
    if kind in ("advection-diffusion", "viscous-burgers") and callable(coefficients.get("c")):
        raise CliError(2, f"simulate: {kind} takes a constant diffusion coefficient c")
    try:
        spec = PdeSpec(
            kind=kind,
            initial=compile_expression(args.ic),
            coefficients=coefficients,
            nx=args.nx,
            nt=args.nt,
            x0=args.x0,
            length=args.length,
            t0=args.t0,
            t1=args.t1,
        )
    except ValueError as exc:
        raise CliError(2, f"simulate: {exc}")
    try:
        clean = simulate(spec)
    except SimulationError as exc:
        raise CliError(3, f"simulate: {exc}")
    noisy = add_noise(clean, NoiseSpec(nsr=cfg.nsr, seed=cfg.seed, sigma_mode=cfg.sigma_mode))
    out = Path(args.out)
    try:
        write_grid(out, noisy)
        write_grid(_clean_path(out), clean)
    except OSError as exc:
        raise CliError(4, f"grid_data: cannot write {out}: {exc.strerror or exc}")
    for channel in range(clean.values.shape[0]):
        sigma = noise_sigma(clean, channel, cfg.nsr, cfg.sigma_mode)
        _say(args, f"sigma[{channel}] = {sigma:.17g}")
    _say(args, f"wrote {out} and {_clean_path(out)}")
    return 0


# ---------------------------------------------------------------------------
# identify


def _read_grid_or_die(path):
    try:
        return read_grid(path)
    except GridFormatError as exc:
        raise CliError(4, f"grid_data: {exc}")
    except OSError as exc:
        raise CliError(4, f"grid_data: cannot read {path}: {exc.strerror or exc}")


def _identify_field(field, cfg):
    """Shared pipeline body: plan, assemble, and select on one field."""
    try:
        dictionary = dictionary_preset(cfg.dictionary, n_channels=field.values.shape[0])
    except ValueError as exc:
        raise CliError(2, str(exc))
    basis = periodic_basis(field.x0, field.period, cfg.m, cfg.d)
    try:
        plan = plan_test_functions(field, p=cfg.d + 1, tau_x=cfg.tau_x, tau_t=cfg.tau_t)
    except ValueError as exc:
        raise CliError(4, f"spectrum: {exc}")
    try:
        system = assemble(field, dictionary, basis, plan)
    except ValueError as exc:
        raise CliError(4, f"weak_system: {exc}")
    report = select_model(
        system,
        field.x,
        trim_tau=cfg.trim_tau,
        lookahead=cfg.lookahead,
        rho=cfg.rho_r,
    )
    return system, plan, report


def _report_document(grid_path, cfg, system, plan, report, x):
    support_labels = [system.labels[k] for k in report.final.support]
    curves = {
        "x": [float(v) for v in x],
        "groups": {
            system.labels[k]: [float(v) for v in values]
            for k, values in report.curves.items()
        },
    }
    config_echo = dataclasses.asdict(cfg)
    config_echo["grid"] = str(grid_path)
    return {
        "theta_star": int(report.theta_star),
        "support": support_labels,
        "labels": list(system.labels),
        "coefficients": [float(v) for v in report.final.coefficients],
        "curves": curves,
        "q": [float(v) for v in report.q],
        "s": [float(v) for v in report.s],
        "plan": dataclasses.asdict(plan),
        "config_echo": config_echo,
        "fallback": bool(report.fallback),
    }


def cmd_identify(args):
    cfg = _build_config(args)
    field = _read_grid_or_die(args.grid)
    system, plan, report = _identify_field(field, cfg)
    document = _report_document(args.grid, cfg, system, plan, report, field.x)
    text = json.dumps(document, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        _say(args, f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    if args.figures:
        from . import figures

        paths = figures.render_report(document, args.figures)
        for path in paths:
            _say(args, f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# evaluate


def _load_truth(path, dictionary):
    """Read a truth file: {"support": [labels], "coef": {label: expression}}."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise CliError(4, f"metrics: cannot read {path}: {exc.strerror or exc}")
    except json.JSONDecodeError as exc:
        raise CliError(4, f"metrics: {path}: {exc}")
    support = raw.get("support")
    if not isinstance(support, list) or not support:
        raise CliError(4, f"metrics: {path}: missing non-empty 'support' list")
    for label in support:
        try:
            dictionary.index_of(label)
        except KeyError:
            raise CliError(4, f"metrics: truth label {label!r} not in dictionary")
    coef_texts = raw.get("coef", {})
    missing = [label for label in support if label not in coef_texts]
    if missing:
        raise CliError(4, f"metrics: truth coefficients missing for {missing}")
    return list(support), {label: str(coef_texts[label]) for label in support}


def _truth_functions(coef_texts):
    return {label: compile_expression(text) for label, text in coef_texts.items()}


def _trial_row(clean, cfg, truth_support, coef_texts, seed):
    """Run one seeded noise realization end to end and score it."""
    noisy = add_noise(clean, NoiseSpec(nsr=cfg.nsr, seed=seed, sigma_mode=cfg.sigma_mode))
    system, _, report = _identify_field(noisy, cfg)
    dictionary = dictionary_preset(cfg.dictionary, n_channels=clean.values.shape[0])
    basis = periodic_basis(clean.x0, clean.period, cfg.m, cfg.d)
    truth = make_ground_truth(dictionary, basis, _truth_functions(coef_texts))
    found_labels = tuple(system.labels[k] for k in report.final.support)
    tpr, ppv = support_scores(found_labels, truth_support)
    e2 = e2_error(report.final.coefficients, truth.c_star)
    e_res = residual_error(system.F, report.final.coefficients, system.b)
    return (seed, cfg.nsr, e2, e_res, tpr, ppv, report.theta_star)


def _format_row(row):
    seed, nsr, e2, e_res, tpr, ppv, theta_star = row
    return f"{seed},{nsr:g},{e2:.6g},{e_res:.6g},{tpr:.6g},{ppv:.6g},{theta_star}"


def cmd_evaluate(args):
    cfg = _build_config(args)
    lines = ["seed,nsr,e2,e_res,tpr,ppv,theta_star"]
    if args.report:
        report = json.loads(Path(args.report).read_text())
        echo = report.get("config_echo", {})
        cfg = dataclasses.replace(
            cfg,
            **{k: echo[k] for k in _CONFIG_FIELDS if k in echo},
        )
        field = _read_grid_or_die(args.grid or echo.get("grid"))
        dictionary = dictionary_preset(cfg.dictionary, n_channels=field.values.shape[0])
        truth_support, coef_texts = _load_truth(args.truth, dictionary)
        basis = periodic_basis(field.x0, field.period, cfg.m, cfg.d)
        truth = make_ground_truth(dictionary, basis, _truth_functions(coef_texts))
        system, _, _ = _identify_field(field, cfg)
        coefficients = np.asarray(report["coefficients"], dtype=float)
        tpr, ppv = support_scores(tuple(report["support"]), truth_support)
        row = (
            cfg.seed,
            cfg.nsr,
            e2_error(coefficients, truth.c_star),
            residual_error(system.F, coefficients, system.b),
            tpr,
            ppv,
            report["theta_star"],
        )
        lines.append(_format_row(row))
    else:
        clean = _read_grid_or_die(args.grid)
        dictionary = dictionary_preset(cfg.dictionary, n_channels=clean.values.shape[0])
        truth_support, coef_texts = _load_truth(args.truth, dictionary)
        seeds = [cfg.seed + i for i in range(cfg.trials)]
        if cfg.trials == 1:
            rows = [_trial_row(clean, cfg, truth_support, coef_texts, seeds[0])]
        else:
            workers = min(cfg.trials, os.cpu_count() or 1)
            with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
                rows = list(
                    pool.map(
                        _trial_row,
                        [clean] * cfg.trials,
                        [cfg] * cfg.trials,
                        [truth_support] * cfg.trials,
                        [coef_texts] * cfg.trials,
                        seeds,
                    )
                )
        lines.extend(_format_row(row) for row in rows)
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        _say(args, f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# spectrum


def cmd_spectrum(args):
    cfg = _build_config(args)
    field = _read_grid_or_die(args.grid)
    try:
        plan = plan_test_functions(field, p=cfg.d + 1, tau_x=cfg.tau_x, tau_t=cfg.tau_t)
    except ValueError as exc:
        raise CliError(4, f"spectrum: {exc}")
    print(f"k_x* = {plan.kstar_x}")
    print(f"k_t* = {plan.kstar_t}")
    print(f"alpha_x = {plan.alpha_x:.6g}")
    print(f"alpha_t = {plan.alpha_t:.6g}")
    print(f"J_x = {plan.j_x}")
    print(f"J_t = {plan.j_t}")
    print(f"S = {plan.j_x * plan.j_t}")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_config_flags(parser):
    parser.add_argument("--config", metavar="FILE", help="flat key = value config file")
    parser.add_argument("--seed", type=int, help="base RNG seed")
    parser.add_argument("--quiet", action="store_true", help="suppress informational output")
    parser.add_argument("--dictionary", help="feature dictionary preset name")
    parser.add_argument("--m", type=int, help="coefficient spline count per group")
    parser.add_argument("--d", type=int, help="spline degree for tests and coefficients")
    parser.add_argument("--tau-x", dest="tau_x", type=float, help="spatial support multiplier")
    parser.add_argument("--tau-t", dest="tau_t", type=float, help="temporal support multiplier")
    parser.add_argument("--trim-tau", dest="trim_tau", type=float, help="GF-Trim threshold")
    parser.add_argument("--lookahead", type=int, help="RR lookahead L")
    parser.add_argument("--rho-r", dest="rho_r", type=float, help="RR acceptance threshold")
    parser.add_argument("--sigma-mode", dest="sigma_mode", choices=("paper", "rms"),
                        help="noise scale convention")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="weakpde",
        description="Identify sparse PDEs with varying coefficients from gridded data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate a PDE and write grid files")
    sim.add_argument("--pde", required=True, choices=sorted(_PDE_ALIASES))
    sim.add_argument("--ic", required=True, help="initial condition, expression in x")
    sim.add_argument("--a", help="coefficient a(x), expression in x")
    sim.add_argument("--b", help="coefficient b(x), expression in x")
    sim.add_argument("--c", help="coefficient c(x), expression in x")
    sim.add_argument("--nx", type=int, default=256)
    sim.add_argument("--nt", type=int, default=200)
    sim.add_argument("--x0", type=float, default=0.0)
    sim.add_argument("--length", type=float, default=2.0)
    sim.add_argument("--t0", type=float, default=0.0)
    sim.add_argument("--t1", type=float, default=0.05)
    sim.add_argument("--nsr", type=float, help="noise-to-signal ratio in [0, 1]")
    sim.add_argument("--out", required=True, help="output grid path (clean copy goes beside it)")
    _add_config_flags(sim)
    sim.set_defaults(handler=cmd_simulate)

    ident = sub.add_parser("identify", help="run the identification pipeline on a grid")
    ident.add_argument("--grid", required=True, help="input grid file")
    ident.add_argument("--out", help="report path (stdout when omitted)")
    ident.add_argument("--figures", metavar="DIR", help="also render diagnostic figures to DIR")
    _add_config_flags(ident)
    ident.set_defaults(handler=cmd_identify)

    ev = sub.add_parser("evaluate", help="score identification against a known truth")
    ev.add_argument("--grid", help="grid file (clean data for --trials batches)")
    ev.add_argument("--report", help="existing identify report to score")
    ev.add_argument("--truth", required=True, help="truth JSON: support labels + coefficients")
    ev.add_argument("--nsr", type=float, help="noise-to-signal ratio for trial batches")
    ev.add_argument("--trials", type=int, help="number of seeded noise realizations")
    ev.add_argument("--out", help="CSV path (stdout when omitted)")
    _add_config_flags(ev)
    ev.set_defaults(handler=cmd_evaluate)

    spec = sub.add_parser("spectrum", help="print the test-function plan for a grid")
    spec.add_argument("--grid", required=True, help="input grid file")
    _add_config_flags(spec)
    spec.set_defaults(handler=cmd_spectrum)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "evaluate" and not (args.report or args.grid):
        parser.error("evaluate needs --report or --grid")
    if args.command == "evaluate" and not args.report and args.grid is None:
        parser.error("evaluate --trials needs --grid with clean data")
    try:
        return args.handler(args)
    except CliError as exc:
        print(f"weakpde: {exc}", file=sys.stderr)
        return exc.code
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
