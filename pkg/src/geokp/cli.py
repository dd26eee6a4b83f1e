"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 failed validation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import kp_left, kp_right, ladder, sim, tandem
from .dist import SupremumLaw, step_from_left_tail, step_from_right_tail, tv_distance
from .ladder import OracleDisagreement

SEED_ENV = "GEOKP_SEED"
ATOM_TOL = 1e-9
DEFAULT_K = 128
DEFAULT_TOL = 1e-8
DEFAULT_SEED = 42
Z_SIGMAS = 4.0

COMMANDS = ("right", "left", "tandem", "simulate", "verify")


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    parameters: dict = field(default_factory=dict)
    output_format: str = "json"
    output_path: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.output_format not in ("json", "csv"):
            raise InputError(f"unknown output format {self.output_format!r}")
        prm = self.parameters
        for key in ("xi", "r"):
            if prm.get(key) is not None and not 0.0 < prm[key] < 1.0:
                raise InputError(f"{key} = {prm[key]} must lie in (0, 1)")
        for key in ("alpha", "beta", "gamma"):
            if prm.get(key) is not None and not prm[key] > 0.0:
                raise InputError(f"{key} = {prm[key]} must be positive")
        if prm.get("K") is not None and prm["K"] < 1:
            raise InputError(f"K = {prm['K']} must be >= 1")


def parse_atoms(specs) -> dict[int, float]:
    """``["-1:0.6", "-3:0.1,-2:0.2"]`` -> {-1: 0.6, -3: 0.1, -2: 0.2}."""
    atoms: dict[int, float] = {}
    for spec in specs or ():
        for item in spec.split(","):
            item = item.strip()
            if not item:
                continue
            try:
                x, p = item.split(":")
                atoms[int(x)] = atoms.get(int(x), 0.0) + float(p)
            except ValueError:
                raise InputError(f"malformed atom {item!r}; expected x:prob") from None
    return atoms


def _rescale(atoms, xi):
    """Absorb decimal rounding: accept |sum + xi - 1| <= 1e-9, then renormalize."""
    total = sum(atoms.values()) + xi
    if abs(total - 1.0) > ATOM_TOL:
        raise InputError(f"atoms + xi sum to {total:.12g}, not 1")
    scale = (1.0 - xi) / sum(atoms.values())
    return {k: v * scale for k, v in atoms.items()}


def _step(prm):
    atoms = parse_atoms(prm.get("atom"))
    if not atoms:
        raise InputError("no atoms given (law would sit on a half-axis)")
    atoms = _rescale(atoms, prm["xi"])
    if prm.get("side", "right") == "right":
        return step_from_right_tail(prm["xi"], prm["r"], atoms)
    return step_from_left_tail(prm["xi"], prm["r"], atoms)


def _oracle(step, law: SupremumLaw, x_max: int, tol: float):
    state = sim.lindley_run(step, x_max=max(x_max, 200), tol=tol * 1e-3)
    n = law.pmf.size
    tv = tv_distance(state.dist[:n], law.pmf)
    sup = float(np.max(np.abs(state.law.sf(n - 1) - law.sf(n - 1))))
    return {"oracle_tv": tv, "oracle_supnorm": sup, "iterations": state.iteration}


def _report(params, solution, law: SupremumLaw, diagnostics) -> dict:
    return {
        "params": params,
        "solution": solution,
        "sup_pmf": [float(v) for v in law.pmf],
        "tail_bound": float(law.tail_bound),
        "diagnostics": diagnostics,
    }


def run_right(prm) -> dict:
    step = _step({**prm, "side": "right"})
    sol = kp_right.solve(step)
    law = kp_right.sup_law(sol, prm["K"])
    zeta = ladder.zeta_series(step, crosscheck=False).value
    diag = _oracle(step, law, prm["K"], prm["tol"])
    solution = {"p": sol.p, "zeta": zeta, "s_star": sol.s_star, "decay": sol.decay}
    return _report(_echo(prm), solution, law, diag)


def run_left(prm) -> dict:
    step = _step({**prm, "side": "left"})
    sol = kp_left.solve(step, K=prm["K"])
    diag = _oracle(step, sol.sup, prm["K"], prm["tol"])
    diag.update(route_gap=sol.route_gap, dp_p=sol.dp_p, dp_zeta=sol.dp_zeta)
    return _report(_echo(prm), {"p": sol.p, "zeta": sol.zeta}, sol.sup, diag)


def _tandem_params(prm):
    return tandem.TandemParams(prm["alpha"], prm["beta"], prm["gamma"])


def run_tandem(prm) -> dict:
    params = _tandem_params(prm)
    params.check()
    rep = tandem.analyze(params, K=prm["K"])
    sol = rep.solution
    diag = _oracle(rep.step, sol.sup, prm["K"], prm["tol"])
    diag.update(route_gap=sol.route_gap, simplified_route_gap=rep.route_gap,
                tail_check=rep.check.max_deviation, dp_p=sol.dp_p, dp_zeta=sol.dp_zeta)
    solution = {"p": sol.p, "zeta": sol.zeta, "xi": rep.xi}
    return _report({**_echo(prm), **params.as_dict()}, solution, sol.sup, diag)


def run_simulate(prm) -> dict:
    if prm["model"] == "tandem":
        params = _tandem_params(prm)
        rep = sim.simulate_tandem(params, prm["cycles"], seed=prm["seed"], workers=prm["workers"])
    else:
        step = _step(prm)
        rep = sim.mc_sup(step, prm["paths"], seed=prm["seed"], workers=prm["workers"])
    freq = rep.frequencies()
    law = SupremumLaw(pmf=freq, tail_bound=0.0)
    solution = {"p": float(1.0 - freq[0]), "zeta": None}
    return _report(_echo(prm), solution, law, {"simulation": rep.to_dict()})


def _check(name, value, tol):
    ok = bool(value <= tol)
    return {"name": name, "value": float(value), "tolerance": tol, "pass": ok}


def _mc_bins(freq, expected, se, n, min_count=100.0):
    bins = np.flatnonzero(expected[: freq.size] * n >= min_count)
    if bins.size == 0:
        return 0.0
    z = np.abs(freq[bins] - expected[bins]) / np.maximum(se[bins], 1e-300)
    return float(z.max())


def run_verify(prm) -> dict:
    model = prm["model"]
    tol = prm["tol"]
    checks = []
    if model == "tandem":
        params = _tandem_params(prm)
        params.check()
        rep = tandem.analyze(params, K=prm["K"])
        step, sol = rep.step, rep.solution
        law, solution = sol.sup, {"p": sol.p, "zeta": sol.zeta, "xi": rep.xi}
        checks.append(_check("series_vs_convolution", sol.route_gap, tol))
        checks.append(_check("simplified_vs_generic_mgf", rep.route_gap, tol))
        checks.append(_check("left_tail_form", rep.check.max_deviation, 1e-10))
        checks.append(_check("zeta_series_vs_dp", abs(sol.zeta - sol.dp_zeta), 1e-6))
        checks.append(_check("p_closed_vs_dp", abs(sol.p - sol.dp_p), 1e-6))
        mc = sim.simulate_tandem(params, prm["cycles"], seed=prm["seed"], workers=prm["workers"])
        mean_f, se = sim.batch_means(mc, law.K)
        checks.append(_check("simulation_z_sigmas", _mc_bins(mean_f, law.pmf, se, mc.n_samples),
                             Z_SIGMAS))
        params_out = {**_echo(prm), **params.as_dict()}
    else:
        step = _step({**prm, "side": model})
        if model == "right":
            rs = kp_right.solve(step)
            law = kp_right.sup_law(rs, prm["K"])
            solution = {"p": rs.p, "zeta": None, "s_star": rs.s_star, "decay": rs.decay}
            dp = ladder.ladder_dp(step)
            checks.append(_check("p_closed_vs_dp", abs(rs.p - dp.p), 1e-6))
        else:
            sol = kp_left.solve(step, K=prm["K"])
            law, solution = sol.sup, {"p": sol.p, "zeta": sol.zeta}
            checks.append(_check("series_vs_convolution", sol.route_gap, tol))
            checks.append(_check("zeta_series_vs_dp", abs(sol.zeta - sol.dp_zeta), 1e-6))
            checks.append(_check("p_closed_vs_dp", abs(sol.p - sol.dp_p), 1e-6))
        mc = sim.mc_sup(step, prm["paths"], seed=prm["seed"], workers=prm["workers"])
        freq = mc.frequencies(x_max=law.K)
        se = np.sqrt(law.pmf * (1.0 - law.pmf) / mc.n_samples)
        checks.append(_check("monte_carlo_sigmas", _mc_bins(freq, law.pmf, se, mc.n_samples),
                             Z_SIGMAS))
        params_out = _echo(prm)
    diag = _oracle(step, law, law.K, tol)
    checks.insert(0, _check("lindley_tv", diag["oracle_tv"], 1e-6))
    checks.insert(1, _check("lindley_supnorm", diag["oracle_supnorm"], tol))
    diag["checks"] = checks
    diag["passed"] = all(c["pass"] for c in checks)
    return _report(params_out, solution, law, diag)


RUNNERS = {"right": run_right, "left": run_left, "tandem": run_tandem,
           "simulate": run_simulate, "verify": run_verify}


def _echo(prm) -> dict:
    return {k: v for k, v in prm.items() if v is not None}


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "pmf", "cdf", "tail_bound"])
    cdf = 0.0
    for x, p in enumerate(report["sup_pmf"]):
        cdf += p
        w.writerow([x, repr(p), repr(cdf), repr(max(0.0, 1.0 - cdf))])
    return buf.getvalue()


def check_table(report: dict) -> str:
    lines = [f"{'check':<28} {'value':>12} {'tol':>10}  result"]
    for c in report["diagnostics"].get("checks", []):
        lines.append(f"{c['name']:<28} {c['value']:>12.3e} {c['tolerance']:>10.1e}  "
                     f"{'PASS' if c['pass'] else 'FAIL'}")
    return "\n".join(lines)


def run(config: RunConfig) -> tuple[int, dict]:
    """Execute one command; returns ``(exit_code, report)``."""
    try:
        report = RUNNERS[config.command](dict(config.parameters))
    except OracleDisagreement as exc:
        return 2, {"error": str(exc)}
    except (ValueError, InputError) as exc:
        return 1, {"error": str(exc)}
    code = 0
    if config.command == "verify" and not report["diagnostics"]["passed"]:
        code = 2
    return code, report


def _default_seed() -> int:
    env = os.environ.get(SEED_ENV)
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise SystemExit(f"{SEED_ENV}={env!r} is not an integer") from None


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="geokp", formatter_class=fmt,
        description="Supremum law of integer random walks with a geometric tail.")
    sub = parser.add_subparsers(dest="command", required=True)
    seed = _default_seed()

    def common(p, K=True):
        if K:
            p.add_argument("--K", type=int, default=DEFAULT_K, help="truncation order")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="agreement tolerance")
        p.add_argument("--format", dest="output_format", choices=("json", "csv"), default="json")
        p.add_argument("--output", dest="output_path", default=None, help="write report here")

    def walk(p, side_default=None):
        p.add_argument("--xi", type=float, required=side_default is None,
                       default=None, help="tail weight xi")
        p.add_argument("--r", type=float, required=side_default is None,
                       default=None, help="tail ratio r")
        p.add_argument("--atom", action="append", default=None,
                       help="x:prob atoms off the tail side, comma-separated; repeatable")

    def rates(p, required=True):
        for name in ("alpha", "beta", "gamma"):
            p.add_argument(f"--{name}", type=float, required=required, default=None,
                           help=f"mean time {name}")

    def mc(p):
        p.add_argument("--seed", type=int, default=seed, help=f"RNG seed (env {SEED_ENV})")
        p.add_argument("--cycles", type=int, default=200_000, help="tandem busy cycles")
        p.add_argument("--paths", type=int, default=100_000, help="Monte Carlo walk paths")
        p.add_argument("--workers", type=int, default=1, help="worker processes")

    p = sub.add_parser("right", formatter_class=fmt, help="geometric right tail")
    walk(p)
    common(p)
    p = sub.add_parser("left", formatter_class=fmt, help="geometric left tail")
    walk(p)
    common(p)
    p = sub.add_parser("tandem", formatter_class=fmt, help="tandem-queue example")
    rates(p)
    common(p)
    p = sub.add_parser("simulate", formatter_class=fmt, help="Monte Carlo / event simulation")
    p.add_argument("--model", choices=("tandem", "walk"), default="tandem")
    p.add_argument("--side", choices=("right", "left"), default="right",
                   help="tail side for --model walk")
    rates(p, required=False)
    walk(p, side_default="right")
    mc(p)
    common(p, K=False)
    p = sub.add_parser("verify", formatter_class=fmt,
                       help="analytic route vs Lindley and Monte Carlo oracles")
    p.add_argument("--model", choices=("right", "left", "tandem"), default="tandem")
    rates(p, required=False)
    walk(p, side_default="right")
    mc(p)
    common(p)
    return parser


VERIFY_DEFAULTS = {
    "right": {"xi": 0.4, "r": 0.5, "atom": ["-1:0.6"]},
    "left": {"xi": 0.7, "r": 0.6, "atom": ["1:0.15,3:0.15"]},
    "tandem": {"alpha": 1.0, "beta": 0.3, "gamma": 0.5},
}


def config_from_args(args: argparse.Namespace) -> RunConfig:
    prm = {k: v for k, v in vars(args).items()
           if k not in ("command", "output_format", "output_path")}
    if args.command in ("verify", "simulate"):
        model = prm["model"]
        key = {"walk": prm.get("side", "right")}.get(model, model)
        for k, v in VERIFY_DEFAULTS[key].items():
            if prm.get(k) is None:
                prm[k] = v
    return RunConfig(args.command, prm, args.output_format, args.output_path)


def _glue_atoms(argv):
    """Let ``--atom -1:0.6`` through argparse, which would read it as a flag."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--atom":
            val = next(it, None)
            out.append(tok if val is None else f"--atom={val}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_atoms(argv))
    try:
        config = config_from_args(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    code, report = run(config)
    if "error" in report:
        print(f"error: {report['error']}", file=sys.stderr)
        return code
    text = to_csv(report) if config.output_format == "csv" else json.dumps(report, indent=2)
    if config.output_path:
        with open(config.output_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    if config.command == "verify":
        print(check_table(report), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
