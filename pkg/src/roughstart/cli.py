"""Command line entry point: configuration, orchestration, artifacts.

Commands (TOML-configured, results as JSON/CSV plus a manifest):

    classify     scaling table for the equation catalogue
    sample       draw Gaussian initial data, emit the spectral JSON
    probe        exact Wick moments vs Monte Carlo, singularity fit
    solve        Picard fixed-point runs (fix1 / fix2 / second_order)
    blowup       mode-ODE trichotomy Monte Carlo
    asymptotics  envelope bound checks for the dyadic heat sums

Exit codes: 0 success, 2 configuration/validation error, 3 numerical
failure (non-contraction, blow-up mid-run).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib
from pathlib import Path

import numpy as np

from . import __version__
from .blowup import BlowupWeightSpec, trichotomy_mc
from .criticality import asymptotic_G, classify, envelope_ratio
from .equations import catalogue, equation_from_toml
from .lp import DyadicPartition
from .random_ic import GaussianICConfig, sample_ic
from .solver import (
    LinearOperator,
    NumericalBlowupError,
    solve_fix1,
    solve_fix2,
    solve_second_order,
)
from .spectral import SpectralField, TorusLattice
from .stochastic import (
    block_singularity_curve,
    exact_second_moment,
    fit_power_law,
    mc_block_point_second_moment,
    singularity_times,
)


class ConfigError(ValueError):
    pass


GOLDEN_KINDS = ("surface_growth", "kpz", "ks", "reaction_diffusion")


def golden_table() -> list[dict]:
    """Catalogue classification rows, exact rationals rendered as strings."""
    rows = []
    for kind in GOLDEN_KINDS:
        rep = classify(catalogue(kind))
        rows.append({
            "equation": kind,
            "tau": str(rep.tau), "sigma": str(rep.sigma),
            "a": str(rep.a), "b": str(rep.b),
            "alpha_min": str(rep.alpha_min), "delta": str(rep.delta),
            "critical_space": f"C^{rep.critical_exponent}",
            "r_threshold_fix1": str(rep.r_threshold_fix1),
            "regime": rep.regime,
        })
    return rows


def _require(cfg: dict, section: str, command: str) -> dict:
    if section not in cfg:
        raise ConfigError(f"command '{command}' requires a [{section}] section")
    return cfg[section]


def _ic_from_section(sec: dict) -> GaussianICConfig:
    try:
        return GaussianICConfig(theta=float(sec["theta"]), d=int(sec.get("d", 1)),
                                N=int(sec.get("N", 32)), nu=float(sec.get("nu", 0.0)),
                                seed=int(sec["seed"]))
    except KeyError as e:
        raise ConfigError(f"[ic] section missing key {e.args[0]!r}") from None


def _write_manifest(out: Path, command: str, cfg: dict, seed):
    manifest = {
        "command": command,
        "config": cfg,
        "seed": seed,
        "versions": {"roughstart": __version__, "numpy": np.__version__},
        "threads": os.environ.get("ROUGHSTART_THREADS", "all"),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str))


def _write_csv(path: Path, header: list[str], rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{x:.12g}" if isinstance(x, float) else x for x in row])


def cmd_classify(cfg: dict, out: Path, seed) -> int:
    rows = golden_table()
    extra = cfg.get("equation")
    if extra:
        rep = classify(equation_from_toml(extra), theta=extra.get("theta"))
        rows.append({"equation": rep.kind, "tau": str(rep.tau), "sigma": str(rep.sigma),
                     "a": str(rep.a), "b": str(rep.b), "alpha_min": str(rep.alpha_min),
                     "delta": str(rep.delta), "critical_space": f"C^{rep.critical_exponent}",
                     "r_threshold_fix1": str(rep.r_threshold_fix1), "regime": rep.regime})
    cols = list(rows[0])
    widths = [max(len(c), *(len(r[c]) for r in rows)) for c in cols]
    print("  ".join(c.ljust(w) for c, w in zip(cols, widths)))
    for r in rows:
        print("  ".join(r[c].ljust(w) for c, w in zip(cols, widths)))
    (out / "classify.json").write_text(json.dumps(rows, indent=2))
    return 0


def cmd_sample(cfg: dict, out: Path, seed) -> int:
    sec = dict(_require(cfg, "ic", "sample"))
    if seed is not None:
        sec["seed"] = seed
    if "seed" not in sec:
        raise ConfigError("sample needs a seed ([ic].seed or --seed)")
    ic = _ic_from_section(sec)
    field = sample_ic(ic)
    (out / "sample.json").write_text(field.to_json())
    print(f"wrote sample.json (d={ic.d}, N={ic.N}, theta={ic.theta})")
    return 0


def cmd_probe(cfg: dict, out: Path, seed) -> int:
    ic_sec = dict(_require(cfg, "ic", "probe"))
    eq_sec = _require(cfg, "equation", "probe")
    if seed is not None:
        ic_sec["seed"] = seed
    if "seed" not in ic_sec:
        raise ConfigError("probe needs a seed ([ic].seed or --seed)")
    ic = _ic_from_section(ic_sec)
    spec = equation_from_toml(eq_sec)
    probe = cfg.get("probe", {})
    js = [int(j) for j in probe.get("js", [3, 4])]
    ts = [float(t) for t in probe.get("ts", [1e-3, 1e-2])]
    M = int(probe.get("samples", 200))
    alpha = float(probe.get("alpha", 0.0))
    lat = TorusLattice(ic.d, ic.N)
    part = DyadicPartition(lat)
    mc = mc_block_point_second_moment(spec, ic, js, ts, M, ic.seed)
    rows = []
    for a, j in enumerate(js):
        for b, t in enumerate(ts):
            exact = exact_second_moment(ic, spec, j, t, part)
            rows.append((t, j, exact, float(mc["mean"][a, b]), float(mc["se"][a, b])))
    _write_csv(out / "probe.csv", ["t", "j", "exact_moment", "mc_mean", "mc_stderr"], rows)
    fit_j = int(probe.get("fit_block", js[0]))
    t_max = float(probe.get("fit_t_max", min(1e-3, 0.2 * 2.0 ** (-fit_j * spec.tau))))
    times = singularity_times(ic.N, spec.tau, t_max=t_max,
                              n_points=int(probe.get("fit_points", 12)))
    curve = block_singularity_curve(ic, spec, fit_j, times, part)
    fit = fit_power_law(times, curve)
    rep = classify(spec, theta=ic.theta)
    beta0 = float(rep.beta0_of_alpha(alpha))
    verdict = {"alpha": alpha, "beta_hat": fit["beta"], "beta0": beta0,
               "pass": bool(fit["beta"] <= beta0 + 0.1)}
    (out / "probe_verdict.json").write_text(json.dumps(verdict, indent=2))
    print(json.dumps(verdict))
    return 0


def _solver_ic(cfg: dict, spec, seed):
    if "ic" in cfg:
        sec = dict(cfg["ic"])
        if seed is not None:
            sec["seed"] = seed
        if "seed" not in sec:
            raise ConfigError("solve with [ic] needs a seed")
        ic = _ic_from_section(sec)
        return sample_ic(ic), ic
    sol = cfg.get("solver", {})
    profile = sol.get("ic_profile", "sine")
    N = int(sol.get("N", 32))
    lat = TorusLattice(1, N)
    if profile != "sine":
        raise ConfigError(f"unknown deterministic ic_profile {profile!r}")
    # sin x = (e_1 - e_{-1}) / 2i
    c = np.zeros(lat.shape, dtype=complex)
    c[lat.N + 1] = -0.5j
    c[lat.N - 1] = 0.5j
    return SpectralField(lat, c, hermitian=True, mean_zero=True), None


def cmd_solve(cfg: dict, out: Path, seed) -> int:
    eq_sec = _require(cfg, "equation", "solve")
    sol = _require(cfg, "solver", "solve")
    spec = equation_from_toml(eq_sec)
    u0, ic = _solver_ic(cfg, spec, seed)
    op = LinearOperator(spec, u0.lattice)
    formulation = sol.get("formulation", "fix1")
    T = float(sol.get("T", 0.05))
    kw = dict(T=T, n_steps=int(sol.get("n_steps", 64)),
              beta=float(sol.get("beta", 0.0)), tol=float(sol.get("tol", 1e-8)),
              max_iter=int(sol.get("max_iter", 60)),
              max_halvings=int(sol.get("max_halvings", 20)))
    theta = ic.theta if ic is not None else 0.0
    rep = classify(spec, theta=theta)
    from .criticality import fix1_feasible, fix2_feasible
    if formulation == "fix1":
        if not fix1_feasible(kw["beta"], rep.delta):
            raise ConfigError("solver parameters violate the fix1 weight window")
        result = solve_fix1(spec, op, u0, alpha=float(sol.get("alpha", 0.0)),
                            kappa=float(sol.get("kappa", 0.0)), **kw)
    elif formulation == "fix2":
        gamma = float(sol.get("gamma", 0.5))
        if not fix2_feasible(kw["beta"], gamma, rep.delta):
            raise ConfigError("solver parameters violate the fix2 weight window")
        result = solve_fix2(spec, op, u0, alpha=float(sol.get("alpha", 0.0)),
                            kappa=float(sol.get("kappa", 0.0)),
                            nu=float(sol.get("weight_nu", 0.0)), **kw)
    elif formulation == "second_order":
        result = solve_second_order(spec, op, u0, kappa=float(sol.get("kappa", 1.3)), **kw)
    else:
        raise ConfigError(f"unknown formulation {formulation!r}")
    summary = {"formulation": formulation, "params": sol, "converged": result.converged,
               "T_effective": result.T, "iterations": result.iterations,
               "ratios": result.contraction_ratios}
    (out / "solve.json").write_text(json.dumps(summary, indent=2, default=str))
    _write_csv(out / "iterates.csv", ["iteration", "weighted_norm"],
               list(enumerate(result.iterate_norms)))
    print(json.dumps({k: summary[k] for k in ("formulation", "converged", "T_effective")}))
    if not result.converged:
        raise NumericalBlowupError("fixed-point iteration did not contract")
    return 0


def cmd_blowup(cfg: dict, out: Path, seed) -> int:
    sec = dict(_require(cfg, "blowup", "blowup"))
    if seed is not None:
        sec["seed"] = seed
    if "seed" not in sec:
        raise ConfigError("blowup needs a seed ([blowup].seed or --seed)")
    try:
        spec = BlowupWeightSpec(
            regime=sec.get("regime", "tail_bounded"), K_max=int(sec.get("K_max", 500)),
            lam=float(sec.get("lambda", 2.0)), epsilon=float(sec.get("epsilon", 0.1)),
            eps_c=float(sec.get("eps_c", 1.0)), eps_s=float(sec.get("eps_s", 0.0)),
            seed=int(sec["seed"]))
    except ValueError as e:
        raise ConfigError(str(e)) from None
    M = int(sec.get("samples", 200))
    eps_grid = [float(e) for e in sec.get("epsilon_grid", [spec.epsilon / 2, spec.epsilon])]
    report = trichotomy_mc(spec, M, eps_grid)
    rows = [(k + 1, float(report["sigma"][k]), float(report["per_mode_analytic"][k]),
             float(report["per_mode_empirical"][k])) for k in range(spec.K_max)]
    _write_csv(out / "blowup_modes.csv", ["k", "sigma_k", "P_analytic", "P_empirical"], rows)
    verdict = {"regime": spec.regime, "fraction_before": report["fraction_before"]}
    if spec.regime == "tail_bounded":
        verdict["tail_bound"] = report["tail_bound"]
    else:
        verdict["own_eps_count_mean"] = report["own_eps_count_mean"]
        verdict["own_eps_count_analytic"] = report["own_eps_count_analytic"]
    (out / "blowup_verdict.json").write_text(json.dumps(verdict, indent=2, default=str))
    print(json.dumps(verdict, default=str))
    return 0


def cmd_asymptotics(cfg: dict, out: Path, seed) -> int:
    sec = cfg.get("asymptotics", {})
    triples = sec.get("triples", [[0.0, 1.0, 2.0], [0.5, 3.0, 4.0], [1.0, 3.0, 4.0]])
    rows = []
    results = []
    for nu, p, tau in triples:
        ts = np.geomspace(1e-6, 1.0, 60)
        ratios = [envelope_ratio(nu, p, tau, float(t)) for t in ts]
        fit_ts = ts[(ts >= 1e-6) & (ts <= 1e-2)]
        # divide out the log envelope so the fit isolates the power t^{-p/tau}
        from .criticality import tamed_log
        comp = [asymptotic_G(nu, p, tau, float(t)) * tamed_log(float(t)) ** (-nu)
                for t in fit_ts]
        slope = fit_power_law(fit_ts, comp)
        results.append({"nu": nu, "p": p, "tau": tau,
                        "sup_ratio": float(max(ratios)),
                        "loglog_slope": -slope["beta"], "expected_slope": -p / tau})
        for t, r in zip(ts, ratios):
            rows.append((nu, p, tau, float(t), asymptotic_G(nu, p, tau, float(t)), r))
    _write_csv(out / "asymptotics.csv", ["nu", "p", "tau", "t", "G", "envelope_ratio"], rows)
    (out / "asymptotics.json").write_text(json.dumps(results, indent=2))
    print(json.dumps(results))
    return 0


COMMANDS = {
    "classify": cmd_classify,
    "sample": cmd_sample,
    "probe": cmd_probe,
    "solve": cmd_solve,
    "blowup": cmd_blowup,
    "asymptotics": cmd_asymptotics,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="roughstart",
                                     description="scaling, random data and fixed points "
                                                 "for semilinear parabolic equations")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", type=Path, default=None, help="TOML config file")
    parser.add_argument("--seed", type=int, default=None, help="override config seeds")
    parser.add_argument("--out", type=Path, default=Path("."), help="artifact directory")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker cap (default: ROUGHSTART_THREADS or all)")
    args = parser.parse_args(argv)
    if args.threads is not None:
        os.environ["ROUGHSTART_THREADS"] = str(args.threads)
    cfg = {}
    try:
        if args.config is not None:
            try:
                cfg = tomllib.loads(args.config.read_text())
            except (OSError, tomllib.TOMLDecodeError) as e:
                raise ConfigError(f"cannot read config: {e}") from None
        args.out.mkdir(parents=True, exist_ok=True)
        _write_manifest(args.out, args.command, cfg, args.seed)
        return COMMANDS[args.command](cfg, args.out, args.seed)
    except (ConfigError, tomllib.TOMLDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except NumericalBlowupError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
