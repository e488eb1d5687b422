"""Command-line interface.

Subcommands: region | solve | verify | spectrum | audit-hamiltonian | linking.
Exit codes: 0 success, 2 validation failure, 3 converged to the trivial
solution, 4 non-convergence (or residuals above the verify threshold).
Region sampling honors the FRACLE_THREADS environment variable; all
outputs are deterministic functions of (config, seed).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .exponents import ExponentParams, check_pq0, check_pq1, sample_region, theta_window
from .grid import GridFunction, make_grid
from .hamiltonian import audit_growth, hamiltonian_from_name
from .operators import (
    assemble_integral_fraclap,
    assemble_local,
    assemble_spectral_fraclap,
)
from .solver import InitSpec, SolverConfig, solve
from .spectral import ProductElement, eig_decompose
from .variational import (
    EnergyFunctional,
    LinkingGeometry,
    make_z_plus,
    pick_munu,
    residual_report,
    verify_I3,
    verify_I4_I5,
)

__all__ = ["main"]


class ConfigError(Exception):
    """Invalid configuration; maps to exit code 2."""


def _threads() -> int:
    raw = os.environ.get("FRACLE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# ----------------------------------------------------------------------------
# configuration loading
# ----------------------------------------------------------------------------

def _load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _parse_init(raw) -> InitSpec:
    if raw is None:
        return InitSpec()
    if isinstance(raw, dict):
        if "file" in raw:
            return InitSpec(kind="file", path=raw["file"])
        return InitSpec(
            kind=raw.get("kind", "positive_mode"),
            mode=int(raw.get("mode", 1)),
            amplitude=float(raw.get("amplitude", 1.0)),
            path=raw.get("path"),
        )
    text = str(raw).strip()
    if text == "positive_mode":
        return InitSpec()
    if text.startswith("scaled_mode"):
        inner = text[text.index("(") + 1 : text.rindex(")")]
        mode_str, amp_str = inner.split(",")
        return InitSpec(kind="scaled_mode", mode=int(mode_str), amplitude=float(amp_str))
    raise ConfigError(f"unknown solver init {raw!r}")


class RunSetup:
    """Validated configuration with the assembled functional ingredients."""

    def __init__(self, config: dict):
        self.config = config
        try:
            self.grid = make_grid(**config["grid"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid grid: {exc}") from exc

        op_cfg = config.get("operator", {"kind": "local"})
        kind = op_cfg.get("kind")
        s_op = op_cfg.get("s")
        exp_cfg = config.get("exponents")
        self.params = None
        if exp_cfg is not None:
            try:
                self.params = ExponentParams(**exp_cfg)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"invalid exponents: {exc}") from exc
            if s_op is not None and abs(s_op - self.params.s) > 1e-12:
                raise ConfigError(
                    f"operator order s={s_op} must match exponent parameter s={self.params.s}"
                )

        try:
            if kind == "local":
                self.operator = assemble_local(self.grid)
            elif kind == "integral_fractional":
                self.operator = assemble_integral_fraclap(self.grid, float(s_op))
            elif kind == "spectral_fractional":
                self.operator = assemble_spectral_fraclap(self.grid, float(s_op))
            else:
                raise ConfigError(
                    f"operator kind {kind!r} is not available through the CLI "
                    "(use local, integral_fractional, or spectral_fractional)"
                )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid operator: {exc}") from exc

        self.seed = int(config.get("seed", 0))
        self.theta = None
        self.window = None
        if self.params is not None:
            if not check_pq0(self.params):
                total = 1.0 / self.params.p + 1.0 / self.params.q
                raise ConfigError(
                    f"exponent condition (pq0) violated: need "
                    f"1 - 2s/n < 1/p + 1/q < 1, got 1/p + 1/q = {total:.6f} with "
                    f"1 - 2s/n = {1 - 2 * self.params.s / self.params.n:.6f}"
                )
            if not check_pq1(self.params):
                bound = (self.params.n - 4 * self.params.s) / (2 * self.params.n)
                raise ConfigError(
                    f"exponent condition (pq1) violated: need 1/p and 1/q > "
                    f"(n - 4s)/(2n) = {bound:.6f}"
                )
            self.window = theta_window(self.params)
            if self.window.empty:
                raise ConfigError("exponent condition (condpq) violated: empty theta window")
            override = config.get("theta")
            if override is None:
                self.theta = self.window.midpoint()
            else:
                self.theta = float(override)
                if not self.window.contains(self.theta):
                    raise ConfigError(
                        f"theta = {self.theta} violates (condpq): admissible window is "
                        f"({self.window.lo:.6f}, {self.window.hi:.6f})"
                    )

    def functional(self) -> EnergyFunctional:
        if self.theta is None:
            raise ConfigError("config needs an exponents block to build the functional")
        ham_name = self.config.get("hamiltonian")
        if ham_name is None:
            raise ConfigError("config needs a hamiltonian entry")
        try:
            ham = hamiltonian_from_name(ham_name)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return EnergyFunctional(
            eigensystem=eig_decompose(self.operator),
            theta=self.theta,
            hamiltonian=ham,
            quadrature=self.grid.quadrature(),
            operator=self.operator,
            grid=self.grid,
        )

    def solver_config(self) -> SolverConfig:
        raw = self.config.get("solver", {})
        try:
            return SolverConfig(
                method=raw.get("method", "newton_coupled"),
                tol=float(raw.get("tol", 1e-8)),
                max_iter=int(raw.get("max_iter", 100)),
                damping=float(raw.get("damping", 1.0)),
                init=_parse_init(raw.get("init")),
            )
        except ValueError as exc:
            raise ConfigError(f"invalid solver config: {exc}") from exc


# ----------------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------------

def cmd_region(args) -> int:
    try:
        region = sample_region(
            n=args.n,
            s=args.s,
            p_range=tuple(args.p_range),
            q_range=tuple(args.q_range),
            resolution=args.resolution,
            max_workers=_threads(),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = Path(args.out)
    io.write_region_csv(region, out)
    svg = Path(args.svg) if args.svg else out.with_suffix(".svg")
    io.write_region_svg(region, svg)
    written = [str(out), str(svg)]
    if not args.no_figures:
        from .figures import save_region_png

        png = Path(args.png) if args.png else out.with_suffix(".png")
        save_region_png(region, png)
        written.append(str(png))
    print("wrote " + ", ".join(written))
    return 0


def _solution_paths(outdir: Path, base: str) -> dict:
    return {
        "report": outdir / f"{base}_report.json",
        "solution": outdir / f"{base}_solution.csv",
        "trace": outdir / f"{base}_trace.csv",
        "solution_png": outdir / f"{base}_solution.png",
        "trace_png": outdir / f"{base}_trace.png",
    }


def cmd_solve(args) -> int:
    setup = RunSetup(_load_json(args.config))
    functional = setup.functional()
    report = solve(functional, setup.solver_config())

    out_cfg = setup.config.get("output", {})
    outdir = Path(args.outdir or out_cfg.get("directory", "."))
    outdir.mkdir(parents=True, exist_ok=True)
    base = out_cfg.get("basename", "solve")
    paths = _solution_paths(outdir, base)

    payload = report.to_dict()
    payload["config"] = setup.config
    payload["theta"] = setup.theta
    payload["theta_window"] = [setup.window.lo, setup.window.hi]
    io.write_json(paths["report"], payload)
    io.write_solution_csv(setup.grid, report.z.u.values, report.z.v.values, paths["solution"])
    io.write_trace_csv(report.ps_trace, paths["trace"])
    if not args.no_figures and bool(out_cfg.get("figures", True)):
        from .figures import save_solution_png, save_trace_png

        save_solution_png(setup.grid, report.z.u.values, report.z.v.values, paths["solution_png"])
        save_trace_png(report.ps_trace, paths["trace_png"])

    print(
        f"status={report.status} energy={report.energy!r} "
        f"theta_weak={report.residuals.theta_weak!r} -> {paths['report']}"
    )
    if report.status == "converged":
        return 0
    if report.status == "converged_trivial":
        return 3
    return 4


def cmd_verify(args) -> int:
    setup = RunSetup(_load_json(args.config))
    functional = setup.functional()
    path = Path(args.solution)
    if not path.exists():
        raise ConfigError(f"solution file {path} does not exist")
    try:
        if path.suffix == ".json":
            payload = json.loads(path.read_text(encoding="utf-8"))
            u = np.asarray(payload["u"], dtype=float)
            v = np.asarray(payload["v"], dtype=float)
        else:
            _, u, v = io.read_solution_csv(path)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse solution file {path}: {exc}") from exc
    if u.shape != (setup.grid.n_total,):
        raise ConfigError(
            f"solution length {u.shape[0]} does not match the grid "
            f"({setup.grid.n_total} interior nodes)"
        )
    z = ProductElement(GridFunction(setup.grid, u), GridFunction(setup.grid, v))
    report = residual_report(functional, z)
    threshold = float(setup.config.get("verify", {}).get("threshold", 1e-6))
    from .spectral import e_norm

    nontrivial = e_norm(functional.eigensystem, functional.theta, z) > 100.0 * threshold
    payload = report.to_dict()
    payload["threshold"] = threshold
    payload["nontrivial"] = nontrivial
    payload["passed"] = report.max_residual() < threshold
    if args.out:
        io.write_json(args.out, payload)
    print(io.dump_json(payload), end="")
    return 0 if payload["passed"] else 4


def cmd_spectrum(args) -> int:
    setup = RunSetup(_load_json(args.config))
    eig = eig_decompose(setup.operator)
    k_max = args.k_max or eig.n
    out = Path(args.out)
    io.write_spectrum_csv(eig.eigenvalues[:k_max], out)
    gram = (eig.eigenvectors.T * eig.mass[None, :]) @ eig.eigenvectors
    ortho_defect = float(np.abs(gram - np.eye(eig.n)).max())
    summary = {
        "n_modes": int(eig.n),
        "lambda_min": float(eig.eigenvalues[0]),
        "lambda_max": float(eig.eigenvalues[-1]),
        "orthonormality_defect": ortho_defect,
        "csv": str(out),
    }
    if args.self_convergence:
        refined_cfg = dict(setup.config)
        grid_cfg = dict(refined_cfg["grid"])
        n_ref = grid_cfg["n_interior"]
        grid_cfg["n_interior"] = (
            2 * n_ref + 1 if isinstance(n_ref, int) else [2 * n + 1 for n in n_ref]
        )
        refined_cfg["grid"] = grid_cfg
        refined = RunSetup(refined_cfg)
        lam1_fine = eig_decompose(refined.operator).eigenvalues[0]
        summary["self_convergence"] = {
            "n_interior_refined": grid_cfg["n_interior"],
            "lambda1_coarse": float(eig.eigenvalues[0]),
            "lambda1_refined": float(lam1_fine),
            "lambda1_relative_gap": float(
                abs(eig.eigenvalues[0] - lam1_fine) / lam1_fine
            ),
        }
    if not args.no_figures:
        from .figures import save_spectrum_png

        png = Path(args.png) if args.png else out.with_suffix(".png")
        save_spectrum_png(eig.eigenvalues[:k_max], png)
        summary["png"] = str(png)
    print(io.dump_json(summary), end="")
    return 0


def cmd_audit_hamiltonian(args) -> int:
    try:
        ham = hamiltonian_from_name(args.hamiltonian)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    audit = audit_growth(
        ham,
        box=(args.box[0], args.box[1]),
        samples=args.samples,
        seed=args.seed,
    )
    payload = audit.to_dict()
    payload["hamiltonian"] = ham.name
    if args.out:
        io.write_json(args.out, payload)
    print(io.dump_json(payload), end="")
    return 0


def cmd_linking(args) -> int:
    setup = RunSetup(_load_json(args.config))
    functional = setup.functional()
    ham = functional.hamiltonian
    try:
        mu, nu = pick_munu(ham.p, ham.q)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    eig = functional.eigensystem
    z_plus = make_z_plus(eig, functional.theta, k=args.mode - 1, norm=1.0)
    try:
        geom = LinkingGeometry(
            mu=mu,
            nu=nu,
            rho=args.rho,
            sigma=args.sigma,
            big_m=args.big_m,
            z_plus=z_plus,
            delta=args.delta,
        )
        geom.validate_with(eig, functional.theta, munu_check=(ham.p, ham.q))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    i45 = verify_I4_I5(functional, geom, n_samples=args.n_samples, seed=setup.seed)
    i3 = [
        verify_I3(eig, functional.theta, geom, omega=w).to_dict()
        for w in args.omega
    ]
    payload = {
        "mu": mu,
        "nu": nu,
        "rho": args.rho,
        "sigma": args.sigma,
        "M": args.big_m,
        "i4_i5": i45.to_dict(),
        "i3": i3,
    }
    if args.out:
        io.write_json(args.out, payload)
    print(io.dump_json(payload), end="")
    return 0


# ----------------------------------------------------------------------------
# parser and entry point
# ----------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracle",
        description=(
            "Numerical toolkit for fractional Lane-Emden Hamiltonian systems: "
            "admissible exponent regions, Dirichlet fractional operators, and "
            "critical-point solves with residual verification."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    region = sub.add_parser("region", help="Sample the admissible (p, q) region.")
    region.add_argument("--n", type=int, default=5)
    region.add_argument("--s", type=float, default=0.5)
    region.add_argument("--p-range", nargs=2, type=float, default=[1.0, 6.0], metavar=("LO", "HI"))
    region.add_argument("--q-range", nargs=2, type=float, default=[1.0, 6.0], metavar=("LO", "HI"))
    region.add_argument("--resolution", type=int, default=200)
    region.add_argument("--out", default="region.csv")
    region.add_argument("--svg", default=None)
    region.add_argument("--png", default=None)
    region.add_argument("--no-figures", action="store_true")
    region.set_defaults(func=cmd_region)

    solve_p = sub.add_parser("solve", help="Solve the discrete system from a config file.")
    solve_p.add_argument("--config", required=True)
    solve_p.add_argument("--outdir", default=None)
    solve_p.add_argument("--no-figures", action="store_true")
    solve_p.set_defaults(func=cmd_solve)

    verify = sub.add_parser("verify", help="Evaluate residuals of a stored solution.")
    verify.add_argument("--solution", required=True)
    verify.add_argument("--config", required=True)
    verify.add_argument("--out", default=None)
    verify.set_defaults(func=cmd_verify)

    spectrum = sub.add_parser("spectrum", help="Eigenvalue table of the configured operator.")
    spectrum.add_argument("--config", required=True)
    spectrum.add_argument("--out", default="spectrum.csv")
    spectrum.add_argument("--png", default=None)
    spectrum.add_argument("--k-max", type=int, default=None)
    spectrum.add_argument(
        "--self-convergence", action="store_true",
        help="also report the ground-eigenvalue gap against a doubled grid",
    )
    spectrum.add_argument("--no-figures", action="store_true")
    spectrum.set_defaults(func=cmd_spectrum)

    audit = sub.add_parser("audit-hamiltonian", help="Sample-check the growth conditions.")
    audit.add_argument("--hamiltonian", required=True, metavar="NAME(p,q)")
    audit.add_argument("--box", nargs=2, type=float, default=[-10.0, 10.0])
    audit.add_argument("--samples", type=int, default=10000)
    audit.add_argument("--seed", type=int, default=0)
    audit.add_argument("--out", default=None)
    audit.set_defaults(func=cmd_audit_hamiltonian)

    linking = sub.add_parser("linking", help="Check the linking geometry conditions.")
    linking.add_argument("--config", required=True)
    linking.add_argument("--rho", type=float, default=0.5)
    linking.add_argument("--sigma", type=float, default=30.0)
    linking.add_argument("--big-m", type=float, default=30.0)
    linking.add_argument("--delta", type=float, default=1e-4)
    linking.add_argument("--mode", type=int, default=1)
    linking.add_argument("--n-samples", type=int, default=60)
    linking.add_argument("--omega", nargs="+", type=float, default=[0.0, 1.0])
    linking.add_argument("--out", default=None)
    linking.set_defaults(func=cmd_linking)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
