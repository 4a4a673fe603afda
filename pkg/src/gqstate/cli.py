"""Command-line front end: ``gqstate <subcommand> [flags]``.

Every subcommand writes plot-ready data files and a JSON report into
``--output-dir``, prints the report to stdout and exits 0. Failures exit
nonzero with a JSON error record on stderr.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (
    DEFAULT_BURN_IN,
    BakerParams,
    StandardMapParams,
    baker_information_dimension,
    grid_evolution,
    trajectory,
)
from .errors import GQStateError
from .estimator import (
    aep_entropy_estimate,
    auto_fit_window,
    fit_dimension,
    fit_report,
    save_curve_csv,
    saturation_index,
    scaling_curve,
)
from .finite_env import dimensional_entropy_h0, induced_gqs, load_bipartite_state
from .gaussian_box import (
    BoxGaussianParams,
    closed_form_h2,
    density_grid,
    gaussian_density,
    params_from_box,
    untruncated_h2,
)
from .gqs import EmpiricalSample, load_sample_csv, reduced_density_matrix, von_neumann_entropy
from .spin_chain import save_atoms_csv, thermodynamic_sweep
from .state_space import BlochPoint

SCHEMA_VERSION = "1"
LARGE_N_ENV = 16
# report keys holding entropies, converted by --bits for display
_ENTROPY_KEYS = {
    "intercept", "intercept_stderr", "dimensional_entropy", "ent_stderr", "h0_nats",
    "svn_nats", "h_nats", "ln_d_e", "closed_form", "untruncated", "quadrature",
    "fitted", "fitted_stderr", "aep_mean", "aep_stderr", "entropy_nats",
}


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("usage", "cli", message)
        sys.exit(2)


def _emit_error(kind, module, message):
    record = {"schema_version": SCHEMA_VERSION,
              "error": {"type": kind, "module": module, "message": str(message)}}
    print(json.dumps(record), file=sys.stderr)


def parse_scales(text: str) -> list:
    """``a:b`` means L = 2^a .. 2^b; otherwise a comma list of L values."""
    if ":" in text:
        a, b = (int(x) for x in text.split(":"))
        return [2**k for k in range(a, b + 1)]
    return [int(x) for x in text.split(",")]


def parse_window(text: str):
    """``auto`` or ``a:b`` (half-open index range into the scale list)."""
    if text == "auto":
        return "auto"
    a, b = (int(x) for x in text.split(":"))
    return (a, b)


def _floats(text: str) -> list:
    return [float(x) for x in text.split(",")]


def _fit(curve, window, sample_size=None):
    win = auto_fit_window(curve, sample_size) if window == "auto" else window
    curve = curve.with_window(win)
    return curve, fit_dimension(curve)


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in r])


def _dump_trajectory(path, p, phi):
    with open(path, "w", newline="") as fh:
        fh.write("step,p,phi\n")
        for i, (a, b) in enumerate(zip(p.tolist(), phi.tolist())):
            fh.write(f"{i},{a!r},{b!r}\n")


def _config(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k == "func":
            continue
        out[k] = list(v) if isinstance(v, tuple) else v
    return out


def cmd_baker(args, out: Path) -> dict:
    params = BakerParams(args.lambda_a, args.lambda_b, args.beta)
    p, phi = trajectory(params, BlochPoint(args.ic_p, args.ic_phi), args.steps, args.burn_in)
    sample = EmpiricalSample.from_bloch(p, phi)
    curve, fit = _fit(scaling_curve(sample, args.scales), args.window)
    if args.format == "csv":
        _dump_trajectory(out / "attractor.csv", p, phi)
        save_curve_csv(curve, out / "curve.csv")
    report = fit_report(curve, fit)
    report["analytic_dimension"] = baker_information_dimension(params)
    return report


def cmd_standard_map(args, out: Path) -> dict:
    params = StandardMapParams(args.k)
    if args.grid:
        steps = [int(s) for s in args.grid_steps.split(",")]
        frames = grid_evolution(params, args.grid, steps)
        if args.format == "csv":
            rows = []
            for step, (p, phi) in frames.items():
                for j in range(args.grid):
                    for k in range(args.grid):
                        rows.append((j, k, step, float(p[j, k]), float(phi[j, k])))
            _write_rows(out / "grid.csv", ["ic_j", "ic_k", "step", "p", "phi"], rows)
        return {"schema_version": SCHEMA_VERSION, "grid": args.grid, "steps": steps}
    p, phi = trajectory(params, BlochPoint(args.ic_p, args.ic_phi), args.steps, args.burn_in)
    curve, fit = _fit(scaling_curve(EmpiricalSample.from_bloch(p, phi), args.scales), args.window)
    if args.format == "csv":
        _dump_trajectory(out / "trajectory.csv", p, phi)
        save_curve_csv(curve, out / "curve.csv")
    return fit_report(curve, fit)


def _quadrature_h2(state, n=2048):
    """-integral q ln q d nu_FS on an n x n midpoint grid, via the product structure."""
    f, g = state.marginals
    u = (np.arange(n) + 0.5) / n
    a, b = f(u), g(2 * math.pi * u)
    # q = a_i b_j: -E[ln a] - E[ln b] under the normalized midpoint weights
    wa, wb = a / a.sum(), b / b.sum()
    return float(-(wa @ np.log(a)) - (wb @ np.log(b)))


def cmd_gaussian(args, out: Path) -> dict:
    if args.box:
        vals = _floats(args.box)
        if len(vals) != 8:
            raise CliError("--box takes x0,x1,y0,y1,mu_x,sigma_x,mu_y,sigma_y")
        x0, x1, y0, y1, mux, sx, muy, sy = vals
        params = params_from_box(mux, sx, x0, x1, muy, sy, y0, y1)
    else:
        params = BoxGaussianParams(args.mu_p, args.sigma_p, args.mu_phi, args.sigma_phi)
    state = gaussian_density(params)
    curve, fit = _fit(scaling_curve(state, args.scales, subgrid=args.subgrid), args.window)
    aep_mean, aep_se = aep_entropy_estimate(state, args.aep_samples, args.seed)
    if args.format == "csv":
        p, phi, q = density_grid(params, args.grid_size, args.grid_size)
        _write_rows(out / "density.csv", ["p", "phi", "q"], zip(p.tolist(), phi.tolist(), q.tolist()))
        save_curve_csv(curve, out / "curve.csv")
    report = fit_report(curve, fit)
    report["params"] = {k: float(v) for k, v in vars(params).items()}
    report["h2"] = {
        "closed_form": closed_form_h2(params),
        "untruncated": untruncated_h2(params),
        "quadrature": _quadrature_h2(state),
        "fitted": fit.dimensional_entropy,
        "fitted_stderr": fit.ent_stderr,
        "aep_mean": aep_mean,
        "aep_stderr": aep_se,
    }
    return report


def cmd_finite_env(args, out: Path) -> dict:
    state = load_bipartite_state(args.state)
    mix = induced_gqs(state)
    h0 = dimensional_entropy_h0(mix)
    svn = von_neumann_entropy(reduced_density_matrix(mix))
    report = {
        "schema_version": SCHEMA_VERSION,
        "d_s": state.d_s,
        "d_e": state.d_e,
        "n_atoms": len(mix),
        "h0_nats": h0,
        "svn_nats": svn,
        "ln_d_e": math.log(state.d_e),
        "bounds_hold": bool(svn - 1e-9 <= h0 <= math.log(state.d_e) + 1e-9),
    }
    if mix.dim == 2:
        if args.format == "csv":
            save_atoms_csv(mix, out / "atoms.csv")
        curve = scaling_curve(mix, args.scales)
        sat = saturation_index(curve)
        if sat is not None and len(curve) - sat >= 3:
            curve, fit = _fit(curve, (sat, len(curve)))
            report["post_saturation_fit"] = fit.as_dict()
    return report


def cmd_heisenberg(args, out: Path) -> dict:
    if args.n_env_max > LARGE_N_ENV and not args.large:
        raise CliError(f"N_E above {LARGE_N_ENV} needs --large (memory and runtime grow as 2^N)")
    rep = thermodynamic_sweep(
        range(args.n_env_min, args.n_env_max + 1),
        b_field=(args.bx, args.by, args.bz), coupling=args.coupling, scales=args.scales,
        window=args.window, env_basis=args.env_basis, seed=args.seed,
    )
    if args.format == "csv":
        for r in rep.sizes:
            if r.mixture is not None:
                save_atoms_csv(r.mixture, out / f"atoms_N{r.n_env}.csv")
    return rep.as_dict()


def cmd_estimate_dim(args, out: Path) -> dict:
    sample = load_sample_csv(args.input)
    curve, fit = _fit(scaling_curve(sample, args.scales), args.window)
    if args.format == "csv":
        save_curve_csv(curve, out / "curve.csv")
    return fit_report(curve, fit)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gqstate", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output-dir", default=".")
    common.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="csv: data files plus report.json; json: report.json only")
    common.add_argument("--bits", action="store_true", help="print entropies in bits (files stay in nats)")
    common.add_argument("--window", type=parse_window, default="auto")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("baker", parents=[common], help="Extended Baker's Map attractor")
    p.add_argument("--lambda-a", type=float, default=0.2)
    p.add_argument("--lambda-b", type=float, default=0.2)
    p.add_argument("--beta", type=float, default=4 * math.pi / 10)
    p.add_argument("--steps", type=lambda s: int(float(s)), default=10**6)
    p.add_argument("--burn-in", type=int, default=DEFAULT_BURN_IN)
    p.add_argument("--ic-p", type=float, default=0.32865)
    p.add_argument("--ic-phi", type=float, default=0.98886)
    p.add_argument("--scales", type=parse_scales, default=parse_scales("4:10"))
    p.set_defaults(func=cmd_baker)

    p = sub.add_parser("standard-map", parents=[common], help="Chirikov standard map orbit")
    p.add_argument("--k", type=float, default=2.0)
    p.add_argument("--steps", type=lambda s: int(float(s)), default=10**6)
    p.add_argument("--burn-in", type=int, default=0)
    p.add_argument("--ic-p", type=float, default=0.1)
    p.add_argument("--ic-phi", type=float, default=4 * math.pi / 10)
    p.add_argument("--scales", type=parse_scales, default=parse_scales("4:10"))
    p.add_argument("--grid", type=int, default=0, help="evolve an N x N lattice of initial states instead")
    p.add_argument("--grid-steps", default="0,25,1000")
    p.set_defaults(func=cmd_standard_map)

    p = sub.add_parser("gaussian", parents=[common], help="truncated-Gaussian box state")
    p.add_argument("--mu-p", type=float, default=0.5)
    p.add_argument("--sigma-p", type=float, default=0.15)
    p.add_argument("--mu-phi", type=float, default=math.pi)
    p.add_argument("--sigma-phi", type=float, default=1.0)
    p.add_argument("--box", default=None, help="x0,x1,y0,y1,mu_x,sigma_x,mu_y,sigma_y")
    p.add_argument("--aep-samples", type=lambda s: int(float(s)), default=10**5)
    p.add_argument("--scales", type=parse_scales, default=parse_scales("4:10"))
    p.add_argument("--subgrid", type=int, default=4)
    p.add_argument("--grid-size", type=int, default=64)
    p.set_defaults(func=cmd_gaussian)

    p = sub.add_parser("finite-env", parents=[common], help="state induced by a finite environment")
    p.add_argument("--state", required=True, help="amplitude file (.json or .csv)")
    p.add_argument("--scales", type=parse_scales, default=parse_scales("1:20"))
    p.set_defaults(func=cmd_finite_env)

    p = sub.add_parser("heisenberg", parents=[common], help="defect Heisenberg chain sweep")
    p.add_argument("--n-env-min", type=int, default=10)
    p.add_argument("--n-env-max", type=int, default=16)
    p.add_argument("--bx", type=float, default=0.0)
    p.add_argument("--by", type=float, default=0.0)
    p.add_argument("--bz", type=float, default=0.5)
    p.add_argument("--coupling", type=float, default=1.0)
    p.add_argument("--env-basis", choices=("z", "x", "y"), default="z")
    p.add_argument("--scales", type=parse_scales, default=parse_scales("1:12"))
    p.add_argument("--large", action="store_true", help=f"allow N_E > {LARGE_N_ENV}")
    p.set_defaults(func=cmd_heisenberg)

    p = sub.add_parser("estimate-dim", parents=[common], help="fit a qubit sample CSV (columns p,phi)")
    p.add_argument("--input", required=True)
    p.add_argument("--scales", type=parse_scales, default=parse_scales("1:12"))
    p.set_defaults(func=cmd_estimate_dim)
    return parser


def _to_bits(obj):
    if isinstance(obj, dict):
        return {k: (_scale(v) if k in _ENTROPY_KEYS else _to_bits(v)) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_to_bits(v) for v in obj]
    return obj


def _scale(v):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return v / math.log(2)
    if isinstance(v, list):
        return [_scale(x) for x in v]
    return v


def _clean(obj):
    """JSON cannot hold NaN/inf; map them to null."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Path(args.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        report = args.func(args, out)
    except (GQStateError, CliError, OSError, ValueError, KeyError) as exc:
        module = getattr(exc, "module", "cli")
        _emit_error(type(exc).__name__, module, exc)
        return 1
    report = _clean(report)
    report["schema_version"] = SCHEMA_VERSION
    report["config"] = _clean(_config(args))
    report["entropy_unit"] = "nats"
    with open(out / "report.json", "w") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
    shown = report
    if args.bits:
        shown = _to_bits(report)
        shown["entropy_unit"] = "bits"
    json.dump(shown, sys.stdout, indent=1, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
