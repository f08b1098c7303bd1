"""Command-line front end: `cattaneo-hyp {spectrum,symmetrizer,coupling,wave,all}`.

Exit codes: 0 all checks pass, 1 a check failed (with --strict), 2 usage or
config error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .coupling import (default_grid, dissipativity_sweep, genuinely_coupled, icosphere, linearize,
                       reduce_1d, witness_branch, write_sweep_csv)
from .errors import ArtifactError, AssumptionViolation, ConfigError, DomainError, NumericalError
from .spectral import (char_speeds, distinct_speed_gap, gap_bounds, hyperbolicity_sweep,
                       multiplicity_profile, random_directions, random_states, spectrum_numeric)
from .symbol import (EquilibriumState, FluidState, assemble_A, assemble_A0, assemble_symbol,
                     friedrichs_S0, jacobian_DQ)
from .symmetrize import (certify, constraints_from_symbols, feasibility_directions, forced_zero_trace,
                         friedrichs_feasibility, projector_symmetrizer, validate_symmetrizer)
from .thermo import ThermoClosure, box_bounds, get_closure
from .waves import WaveExperiment, run_wave_experiment, write_field, write_norms_csv

COMMANDS = ("spectrum", "symmetrizer", "coupling", "wave")
CONVENTIONS = {
    "variables": "(rho, v1, v2, v3, theta, q1, q2, q3)",
    "fourier": "V_hat = fftn(V)/N^3; ||V||_L2^2 = L1*L2*L3*sum|V_hat|^2",
    "time_evolution": "W_hat(t) = expm(-t (i A(xi) + B)) W_hat(0)",
    "domain": "periodic box discretization of the whole-space construction",
    "one_d_model": "restriction of the 3D symbol to (rho, v1, theta, q1) with x1-dependence only",
}


def jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def check(value: float, tolerance: float, op: str = "<=") -> Dict[str, Any]:
    ops: Dict[str, Callable[[float, float], bool]] = {
        "<=": lambda a, b: a <= b, ">=": lambda a, b: a >= b, "<": lambda a, b: a < b,
        ">": lambda a, b: a > b, "==": lambda a, b: a == b,
    }
    return {"value": value, "tolerance": tolerance, "comparison": op, "passed": bool(ops[op](value, tolerance))}


def expect(value: Any, expected: Any) -> Dict[str, Any]:
    return {"value": value, "expected": expected, "passed": value == expected}


class Context:
    """Resolved config plus derived objects shared by the commands."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        try:
            params = {**cfg.closure_params, "tau": cfg.tau}
            self.closure: ThermoClosure = get_closure(cfg.closure, **params)
        except KeyError as exc:
            raise ConfigError(f"closure: {exc.args[0]}") from exc
        except (TypeError, AssumptionViolation) as exc:
            raise ConfigError(f"closure_params: {exc}") from exc
        s, e = cfg.state, cfg.equilibrium
        try:
            self.state = FluidState(s["rho"], s.get("v", [0, 0, 0]), s["theta"], s.get("q", [0, 0, 0]))
            self.equilibrium = EquilibriumState(e["rho"], e.get("v", [0, 0, 0]), e["theta"])
        except (KeyError, DomainError) as exc:
            raise ConfigError(f"state: {exc}") from exc
        self.one_d = cfg.model == "cattaneo-1d"
        self.hyperbolic_model = cfg.model != "general-lambda-nu" or (cfg.lam, cfg.nu) == (1.0, -1.0)

    def rng(self, stream: int) -> np.random.Generator:
        return np.random.default_rng([self.cfg.seed, stream])

    def symbol(self, xi, U: FluidState) -> np.ndarray:
        m = self.cfg.model
        if m == "ccj-3d":
            return assemble_A0(xi, U, self.closure).matrix
        if m == "general-lambda-nu":
            return assemble_symbol(xi, U, self.closure, self.cfg.lam, self.cfg.nu).matrix
        A = assemble_A(xi, U, self.closure).matrix
        return A[np.ix_([0, 1, 4, 5], [0, 1, 4, 5])] if self.one_d else A

    def pmap(self, fn, items: List[Any]) -> List[Any]:
        if self.cfg.threads > 1 and len(items) > 1:
            with ThreadPoolExecutor(self.cfg.threads) as pool:
                return list(pool.map(fn, items))
        return [fn(x) for x in items]


def cmd_spectrum(ctx: Context) -> Dict[str, Any]:
    cfg, cl = ctx.cfg, ctx.closure
    out: Dict[str, Any] = {"model": cfg.model, "lambda": cfg.lam, "nu": cfg.nu}
    checks: Dict[str, Any] = {}
    U = ctx.state
    rows, worst = [], 0.0
    dirs = [np.array([1.0, 0, 0])] if ctx.one_d else list(np.eye(3))
    for xi in dirs:
        rep = char_speeds(xi, U, cl)
        num = spectrum_numeric(ctx.symbol(xi, U))
        closed = np.sort(np.array(rep.etas)) if ctx.one_d else rep.closed_form
        row = {"xi": xi, "z_plus_sq": rep.z_plus_sq, "z_minus_sq": rep.z_minus_sq,
               "closed_form": closed, "numeric_real": num.eigenvalues.real,
               "max_abs_imag": float(np.max(np.abs(num.eigenvalues.imag))), "condition": num.condition}
        if ctx.hyperbolic_model:
            err = float(np.max(np.abs(np.sort(num.eigenvalues.real) - closed)))
            row["pairing_error"] = err
            scale = 1 + abs(float(np.dot(xi, U.v))) + math.sqrt(rep.z_plus_sq)
            worst = max(worst, err / scale)
        rows.append(row)
    out["state"] = {"rho": U.rho, "v": U.v, "theta": U.theta, "q": U.q}
    out["rows"] = rows
    if ctx.hyperbolic_model:
        checks["pairing_error_scaled"] = check(worst, cfg.tolerances["pairing"])
        if not ctx.one_d:
            profiles = [[m for _, m in multiplicity_profile(xi, U, cl)] for xi in dirs]
            out["multiplicity_profiles"] = profiles
            checks["multiplicity_profile"] = expect(
                sorted(profiles[0], reverse=True), [4, 1, 1, 1, 1])

        box = box_bounds(cl, cfg.box["rho"], cfg.box["theta"])
        gb = gap_bounds(box, cl.tau)
        rng = ctx.rng(1)
        states = random_states(rng, cfg.gap_samples, cfg.box["rho"], cfg.box["theta"])
        xis = random_directions(rng, cfg.gap_samples)

        def gap(i):
            if ctx.one_d:
                return distinct_speed_gap(np.linalg.eigvals(ctx.symbol([1.0, 0, 0], states[i])).real)
            rep = char_speeds(xis[i], states[i], cl)
            if not rep.ordering_holds():
                return -1.0
            return distinct_speed_gap(np.linalg.eigvals(ctx.symbol(xis[i], states[i])).real)

        gaps = np.array(ctx.pmap(gap, list(range(cfg.gap_samples))))
        out["gap_bounds"] = {"box": {"rho": cfg.box["rho"], "theta": cfg.box["theta"], "M1": box.M1,
                                     "M2": box.M2}, "delta1": gb.delta1, "delta2": gb.delta2, "delta3": gb.delta3,
                             "delta4": gb.delta4, "delta": gb.delta, "samples": cfg.gap_samples,
                             "min_observed_gap": float(gaps.min())}
        checks["ordering_and_gap"] = check(float(gaps.min()), gb.delta, ">=")
    if not ctx.one_d and cfg.model != "ccj-3d":
        sw = hyperbolicity_sweep(cl, cfg.lam, cfg.nu, ctx.rng(2), cfg.sweep_states, cfg.sweep_directions)
        out["hyperbolicity_sweep"] = {
            "samples": sw.samples, "non_hyperbolic": sw.non_hyperbolic, "max_abs_imag": sw.max_imag,
            "max_condition": sw.max_condition, "hyperbolic": sw.hyperbolic,
            "witness": None if sw.witness_xi is None else {
                "xi": sw.witness_xi, "state": sw.witness_state.as_vector(), "verdict": sw.witness_verdict},
        }
        if ctx.hyperbolic_model:
            checks["sweep_hyperbolic"] = check(sw.non_hyperbolic, 0, "==")
    out["checks"] = checks
    return out


def cmd_symmetrizer(ctx: Context) -> Dict[str, Any]:
    cfg, cl, U = ctx.cfg, ctx.closure, ctx.state
    tol = cfg.tolerances
    out: Dict[str, Any] = {"model": cfg.model}
    checks: Dict[str, Any] = {}
    if ctx.one_d:
        A = ctx.symbol([1.0, 0, 0], U)
        cert = certify(constraints_from_symbols([A], state=U), tol["null_space"], ctx.rng(3))
        S0 = friedrichs_S0(U, cl).matrix[np.ix_([0, 1, 4, 5], [0, 1, 4, 5])]
        res, mineig = validate_symmetrizer(S0, [A])
        out["S0_restricted"] = {"residual": res, "min_eigenvalue": mineig}
        checks["S0_restricted_symmetrizes"] = check(res, tol["symmetrizer_residual"])
        expected = "feasible"
    else:
        dirs = feasibility_directions(cfg.feasibility_directions, cfg.seed)
        if cfg.model == "cattaneo-1m1-3d":
            cert = friedrichs_feasibility(U, cl, cfg.feasibility_directions, tol["null_space"], cfg.seed)
        else:
            system = constraints_from_symbols([ctx.symbol(xi, U) for xi in dirs], dirs, U)
            cert = certify(system, tol["null_space"], np.random.default_rng(cfg.seed))
        q_all = bool(np.all(U.q != 0))
        expected = None
        if cfg.model == "ccj-3d" or not np.any(U.q != 0):
            expected = "feasible"
        elif ctx.hyperbolic_model and q_all:
            expected = "infeasible"
        if expected == "infeasible":
            steps = forced_zero_trace(U, cl, tol["null_space"])
            out["forced_zero_trace"] = [{"step": s.description, "forced": s.forced} for s in steps]
            checks["cascade_ends_with_diagonal_q_block"] = expect(steps[-1].forced, ["s66", "s77", "s88"])
    out["certificate"] = cert.to_dict()
    if expected is not None:
        checks["verdict"] = expect(cert.verdict, expected)
    else:
        out["note"] = "no theoretical verdict for this model/state; numeric verdict reported only"
    if cert.verdict == "feasible":
        checks["witness_positive"] = check(cert.min_eig, 0.0, ">")
    if ctx.hyperbolic_model and not ctx.one_d:
        rng = ctx.rng(4)
        states = random_states(rng, cfg.microlocal_samples, cfg.box["rho"], cfg.box["theta"])
        xis = random_directions(rng, cfg.microlocal_samples)

        def one(i):
            M = ctx.symbol(xis[i], states[i])
            S = projector_symmetrizer(M)
            S2 = projector_symmetrizer(ctx.symbol(2.5 * xis[i], states[i]))
            return (float(np.max(np.abs(S @ M - M.T @ S))), float(np.max(np.abs(S - S.conj().T))),
                    float(np.linalg.eigvalsh(0.5 * (S + S.conj().T))[0]), float(np.max(np.abs(S - S2))))

        r = np.array(ctx.pmap(one, list(range(cfg.microlocal_samples))))
        out["microlocal"] = {"samples": cfg.microlocal_samples, "max_residual": r[:, 0].max(),
                             "max_hermitian_defect": r[:, 1].max(), "min_eigenvalue": r[:, 2].min(),
                             "max_homogeneity_defect": r[:, 3].max()}
        checks["microlocal_residual"] = check(float(r[:, 0].max()), tol["symmetrizer_residual"])
        checks["microlocal_hermitian"] = check(float(r[:, 1].max()), tol["hermitian"])
        checks["microlocal_positive"] = check(float(r[:, 2].min()), 0.0, ">")
        checks["microlocal_homogeneous"] = check(float(r[:, 3].max()), tol["symmetrizer_residual"])
    out["checks"] = checks
    return out


def cmd_coupling(ctx: Context, out_dir: Path) -> Dict[str, Any]:
    cfg, cl, Ve = ctx.cfg, ctx.closure, ctx.equilibrium
    tol = cfg.tolerances
    out: Dict[str, Any] = {"model": cfg.model, "equilibrium": {"rho": Ve.rho, "v": Ve.v, "theta": Ve.theta}}
    checks: Dict[str, Any] = {}
    if ctx.one_d:
        sys_ = reduce_1d(Ve, cl)
        out["reading"] = CONVENTIONS["one_d_model"]
        grid = default_grid(sys_)
        verdicts = [genuinely_coupled(sys_, x) for x in grid]
        n_coupled = sum(r.verdict == "coupled" for r in verdicts)
        out["genuine_coupling"] = {"grid_points": len(grid), "coupled": n_coupled,
                                   "min_sigma": min(r.min_sigma for r in verdicts)}
        checks["coupled_everywhere"] = check(n_coupled, len(grid), "==")
        sw = dissipativity_sweep(sys_, threads=cfg.threads, threshold=tol["strict_dissipativity"])
        checks["strictly_dissipative"] = check(sw.max_real, -tol["strict_dissipativity"], "<")
    else:
        sys_ = linearize(Ve, cl)
        dirs = icosphere(2)
        results = ctx.pmap(lambda d: genuinely_coupled(sys_, d), list(dirs))
        violated = [r for r in results if r.verdict == "violated"]
        worst = max((max(r.witness.residual_B, r.witness.residual_eig) for r in violated), default=np.inf)
        out["genuine_coupling"] = {"directions": len(dirs), "violated": len(violated),
                                   "max_witness_residual": worst,
                                   "example_witness": results[0].witness.to_dict() if violated else None}
        checks["violated_everywhere"] = check(len(violated), len(dirs), "==")
        checks["witness_residual"] = check(worst, tol["coupling"])
        sw = dissipativity_sweep(sys_, threads=cfg.threads, threshold=tol["strict_dissipativity"])
        checks["not_strictly_dissipative"] = check(abs(sw.max_real), tol["energy_bound"])

        branch = witness_branch(np.array([1.0, 0, 0]), np.array([0, 0, 1.0]), Ve.v)
        a = np.linspace(-0.3, 0.3, 10)
        pts = [np.array([1.0, s, t]) for s in a for t in a]
        B = jacobian_DQ(cl.tau).matrix
        res = 0.0
        for xi in pts:
            Z, mu = branch(xi)
            res = max(res, float(np.max(np.abs(sys_.symbol(xi) @ Z - mu * Z))), float(np.max(np.abs(B @ Z))))
        out["witness_branch"] = {"xi_bar": [1.0, 0.0, 0.0], "probe": [0.0, 0.0, 1.0], "grid_points": len(pts),
                                 "max_residual": res}
        checks["witness_branch"] = check(res, 1e-13)
    out["dissipativity"] = sw.to_dict()
    checks["energy_bound"] = check(sw.max_real, tol["energy_bound"])
    write_sweep_csv(sw, out_dir / "dissipativity.csv")
    out["checks"] = checks
    return out


def cmd_wave(ctx: Context, out_dir: Path) -> Dict[str, Any]:
    cfg, cl = ctx.cfg, ctx.closure
    if ctx.one_d:
        return {"model": cfg.model, "skipped": "the persistent-wave experiment is three-dimensional", "checks": {}}
    w = cfg.wave
    exp = WaveExperiment(N=int(w["N"]), L=float(w["L"]), center=tuple(w["center"]), r_B=float(w["r_B"]),
                         r_Omega=float(w["r_Omega"]), probe=tuple(w["probe"]), rho=ctx.equilibrium.rho,
                         v=tuple(ctx.equilibrium.v), theta=ctx.equilibrium.theta, t_end=float(w["t_end"]),
                         checkpoints=int(w["checkpoints"]))
    try:
        sys_ = linearize(ctx.equilibrium, cl)
        run = run_wave_experiment(exp, sys_, cl)
    except DomainError as exc:
        raise ConfigError(f"wave: {exc}") from exc
    write_norms_csv(run, out_dir / "norms.csv")
    manifest = {"grid": {"N": exp.N, "L": [exp.L] * 3},
                "bump": {"center": exp.center, "r_B": exp.r_B, "r_Omega": exp.r_Omega, "probe": exp.probe},
                "state": {"rho": exp.rho, "v": exp.v, "theta": exp.theta},
                "closure": {"name": cl.name, "params": dict(cl.params)}, "seed": cfg.seed,
                "times": {"t_end": exp.t_end, "checkpoints": exp.checkpoints},
                "conventions": {k: CONVENTIONS[k] for k in ("fourier", "time_evolution", "domain")}}
    (out_dir / "wave_manifest.json").write_text(json.dumps(jsonable(manifest), sort_keys=True, indent=2) + "\n")
    if w.get("write_field"):
        write_field(run.final, out_dir / "field.bin")
    tol = cfg.tolerances
    return {
        "model": cfg.model,
        "populated_modes": run.populated_modes,
        "l2_initial": float(run.l2[0]),
        "s0_energy_initial": float(run.energy[0]),
        "checks": {
            "l2_constant": check(run.l2_relative_deviation, tol["l2_drift"]),
            "q_components_zero": check(float(run.qmax.max()), tol["q_leak"]),
            "matches_translation": check(float(run.translation_error.max()), tol["translation"]),
            "field_real": check(float(run.imag_defect.max()), tol["realness"]),
        },
    }


def run(command: str, cfg: ExperimentConfig) -> Dict[str, Any]:
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    ctx = Context(cfg)
    todo = COMMANDS if command == "all" else (command,)
    sections = {}
    for name in todo:
        if name == "spectrum":
            sections[name] = cmd_spectrum(ctx)
        elif name == "symmetrizer":
            sections[name] = cmd_symmetrizer(ctx)
        elif name == "coupling":
            sections[name] = cmd_coupling(ctx, out_dir)
        else:
            sections[name] = cmd_wave(ctx, out_dir)
    passed = all(c["passed"] for s in sections.values() for c in s["checks"].values())
    report = {"tool": "cattaneo_hyp", "version": __version__, "command": command,
              "config": {k: v for k, v in cfg.to_dict().items() if k not in ("threads", "out")},
              "config_sha256": cfg.sha256(), "conventions": CONVENTIONS, "sections": sections,
              "all_passed": passed}
    report = jsonable(report)
    (out_dir / "report.json").write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    return report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cattaneo-hyp", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS + ("all",))
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--strict", action="store_true", help="exit 1 if any check fails")
    p.add_argument("--out", help="output directory (default: config 'out')")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        cfg = ExperimentConfig.load(args.config, seed=args.seed, out=args.out)
        report = run(args.command, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except ArtifactError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    for name, sec in report["sections"].items():
        for cname, c in sec["checks"].items():
            print(f"{'PASS' if c['passed'] else 'FAIL'}  {name}.{cname}  value={c['value']}")
    sweep = report["sections"].get("spectrum", {}).get("hyperbolicity_sweep")
    if sweep and not sweep["hyperbolic"]:
        print(f"NOTE  spectrum: {sweep['non_hyperbolic']}/{sweep['samples']} sampled symbols not "
              f"real-diagonalizable (max |Im| {sweep['max_abs_imag']:.3e}, witness {sweep['witness']['verdict']})")
    print(f"report: {Path(cfg.out) / 'report.json'}")
    if args.strict and not report["all_passed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
