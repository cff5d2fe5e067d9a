"""Command-line interface.

Commands: steady, sweep, figure <id>, optima. Exit codes: 0 on success,
2 on validation/usage errors, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, harness, quantum, steady
from .errors import (
    IllConditionedError,
    IntegrationError,
    OutOfRegimeError,
    PhysicalityError,
    UnstableSystemError,
    ValidationError,
)
from .params import default_params, derive_model, load_config

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

_NUMERICAL_ERRORS = (UnstableSystemError, IllConditionedError,
                     IntegrationError, PhysicalityError)


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None,
                        help="parameter file (key = value); built-in defaults if omitted")
    parser.add_argument("--out", type=Path, default=Path("out"),
                        help="output directory for CSV files")
    parser.add_argument("--grid", type=int, default=None,
                        help="points per sweep axis (figure/sweep defaults if omitted)")
    parser.add_argument("--branch", choices=harness.BRANCH_CHOICES,
                        default="both", help="branch selection for sweeps")
    parser.add_argument("--threads", type=int, default=1,
                        help="parallel workers for sweep rows")
    parser.add_argument("--validity-threshold", type=float,
                        default=quantum.VALIDITY_THRESHOLD,
                        help="linearization validity bound on n_o/|alpha_s|^2")


def _parse_axis(text: str) -> harness.AxisSpec:
    """Parse NAME=LO:HI[:N] into an axis; NAME=VALUE gives a single point.

    Detunings and the coupling are given in units of omega_m and scaled
    later; power in W, temperature in K, eta dimensionless.
    """
    if "=" not in text:
        raise ValidationError(f"axis: expected NAME=LO:HI[:N], got {text!r}")
    name, _, grid = text.partition("=")
    name = name.strip()
    parts = grid.split(":")
    try:
        if len(parts) == 1:
            return harness.AxisSpec(name, (float(parts[0]),))
        lo, hi = float(parts[0]), float(parts[1])
        n = int(parts[2]) if len(parts) > 2 else 0
    except ValueError as exc:
        raise ValidationError(f"axis {name}: bad grid {grid!r}") from exc
    if len(parts) > 3:
        raise ValidationError(f"axis {name}: bad grid {grid!r}")
    return harness.AxisSpec(name, (lo, hi) if n == 0 else
                            harness.linear_grid(lo, hi, n))


def _scale_axis(axis: harness.AxisSpec, n_default: int,
                omega_m: float) -> harness.AxisSpec:
    values = axis.values
    if len(values) == 2 and n_default > 2:
        values = harness.linear_grid(values[0], values[1], n_default)
    if axis.name in ("bare_detuning", "effective_detuning", "coupling"):
        values = tuple(v * omega_m for v in values)
    return harness.AxisSpec(axis.name, values)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optomech-bistab",
        description="Bistable-regime optomechanics: steady states, covariance "
                    "dynamics, cooling and entanglement data files.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_steady = sub.add_parser("steady", help="steady states at the config power")
    _common_flags(p_steady)

    p_sweep = sub.add_parser("sweep", help="custom 1-D or 2-D parameter sweep")
    _common_flags(p_sweep)
    p_sweep.add_argument("--axis1", required=True,
                         help="NAME=LO:HI[:N]; names: " + ", ".join(harness.AXIS_NAMES))
    p_sweep.add_argument("--axis2", default=None, help="optional second axis")

    p_fig = sub.add_parser("figure", help="emit the data behind one figure panel")
    _common_flags(p_fig)
    p_fig.add_argument("id", choices=harness.FIGURE_IDS)

    p_opt = sub.add_parser("optima", help="closed-form cooling/entanglement optima")
    _common_flags(p_opt)

    return parser


def _load_physical(args):
    if args.config is None:
        return default_params()
    return load_config(args.config)


def _cmd_steady(args) -> int:
    physical = _load_physical(args)
    mp = derive_model(physical)
    points = steady.steady_states(mp)
    columns = ("P_in_W", "branch", "q_s", "photons", "Delta_over_wm",
               "G_over_wm", "eta", "stable")
    rows = [{
        "P_in_W": physical.power,
        "branch": wp.branch,
        "q_s": wp.q_s,
        "photons": wp.photons,
        "Delta_over_wm": wp.delta / mp.omega_m,
        "G_over_wm": wp.G / mp.omega_m,
        "eta": wp.eta,
        "stable": wp.stable,
    } for wp in points]
    result = harness.SweepResult(columns=columns, rows=rows, meta={
        "kappa_over_wm": repr(mp.kappa / mp.omega_m),
        "nbar": repr(mp.nbar),
    })
    path = harness.write_csv(result, args.out / "steady.csv", __version__)
    for wp in points:
        print(f"{wp.branch:>6}: q_s={wp.q_s:.6e} photons={wp.photons:.6e} "
              f"Delta={wp.delta / mp.omega_m:.4f} wm  eta={wp.eta:.4f} "
              f"stable={wp.stable}")
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    physical = _load_physical(args)
    mp = derive_model(physical)
    n_default = args.grid or 101
    axis1 = _scale_axis(_parse_axis(args.axis1), n_default, mp.omega_m)
    axis2 = None
    if args.axis2 is not None:
        axis2 = _scale_axis(_parse_axis(args.axis2), n_default, mp.omega_m)
    spec = harness.SweepSpec(
        base=mp, physical=physical, axis1=axis1, axis2=axis2,
        branch=args.branch, validity_threshold=args.validity_threshold)
    result = harness.sweep(spec, threads=args.threads)
    path = harness.write_csv(result, args.out / "sweep.csv", __version__)
    print(f"wrote {path} ({len(result.rows)} rows)")
    return EXIT_OK


def _cmd_figure(args) -> int:
    physical = _load_physical(args)
    paths = harness.figure_command(
        args.id, physical, args.out, grid=args.grid, threads=args.threads,
        validity_threshold=args.validity_threshold, version=__version__)
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_optima(args) -> int:
    physical = _load_physical(args)
    mp = derive_model(physical)
    w = mp.omega_m
    d_cool = quantum.optimal_cooling_detuning(mp.kappa, w)
    n_min = quantum.cooling_limit(mp.kappa, w)
    d_ent = quantum.optimal_entanglement_detuning(mp.kappa, w)
    e_max = quantum.max_entanglement(mp.kappa, w)
    print(f"kappa/omega_m                 = {mp.kappa / w:.6f}")
    print(f"cooling Delta_opt/omega_m     = {d_cool / w:.6f}")
    print(f"cooling minimal n_m           = {n_min:.6e}")
    print(f"entanglement Delta_opt/omega_m= {d_ent / w:.6f}")
    print(f"entanglement max E_N          = {e_max:.6f}")
    return EXIT_OK


_COMMANDS = {
    "steady": _cmd_steady,
    "sweep": _cmd_sweep,
    "figure": _cmd_figure,
    "optima": _cmd_optima,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValidationError, OutOfRegimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
