"""Parameter sweeps, figure reproduction and CSV emission.

Two families of sweep axes are supported. Experimental axes (power,
bare_detuning, temperature) re-derive the model from the physical inputs
and solve the steady-state cubic per grid point. Theoretical axes
(effective_detuning, eta, coupling) prescribe the linearization inputs
directly, inverting the bistability parameter for the coupling when eta
is swept; they cannot be mixed with experimental axes in one sweep.

Per-row failures (instability, marginal decay, ill conditioning) are
recorded in the ``status`` column and never abort a sweep.
"""

from __future__ import annotations

import datetime
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from scipy.constants import hbar as _HBAR

from . import dynamics, quantum, steady
from .errors import IllConditionedError, ValidationError
from .params import (
    ModelParams,
    PhysicalParams,
    derive_model,
    laser_frequency,
    with_detuning,
    with_power,
    with_temperature,
)

EXPERIMENTAL_AXES = ("power", "bare_detuning", "temperature")
THEORETICAL_AXES = ("effective_detuning", "eta", "coupling")
AXIS_NAMES = EXPERIMENTAL_AXES + THEORETICAL_AXES

BRANCH_CHOICES = ("lower", "upper", "both", "all")

OUTPUT_NAMES = ("eta", "n_m", "n_o", "E_N", "Sigma", "detV", "G", "Delta",
                "validity")

_AXIS_COLUMN = {
    "power": "P_in_W",
    "bare_detuning": "Delta0_over_wm",
    "temperature": "T_K",
    "effective_detuning": "Delta_target_over_wm",
    "eta": "eta_target",
    "coupling": "G_target_over_wm",
}

_OUTPUT_COLUMNS = {
    "Delta": ("Delta_over_wm",),
    "G": ("G_over_wm",),
    "eta": ("eta",),
    "n_m": ("n_m",),
    "n_o": ("n_o",),
    "Sigma": ("Sigma",),
    "detV": ("detV",),
    "E_N": ("E_N",),
    "validity": ("validity_ok", "validity_ratio"),
}

FIGURE_IDS = ("fig2", "fig3a", "fig3b", "fig4", "fig5a", "fig5b", "fig6")

STATUS_OK = "ok"
STATUS_UNSTABLE = "unstable"
STATUS_MARGINAL = "marginal"
STATUS_CONDITIONING = "conditioning"
STATUS_DEGENERATE = "degenerate"
STATUS_ERROR = "error"


@dataclass(frozen=True)
class AxisSpec:
    """One sweep axis: a named, strictly monotone grid of values.

    Values are absolute: W for power, K for temperature, rad/s for the
    detunings and the coupling, dimensionless for eta.
    """

    name: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class SweepSpec:
    base: ModelParams
    axis1: AxisSpec
    axis2: AxisSpec | None = None
    branch: str = "both"
    physical: PhysicalParams | None = None
    outputs: tuple[str, ...] = OUTPUT_NAMES
    validity_threshold: float = quantum.VALIDITY_THRESHOLD


@dataclass
class SweepResult:
    columns: tuple[str, ...]
    rows: list[dict]
    meta: dict = field(default_factory=dict)


_AXIS_RANGE = {
    # name: (lower bound, inclusive, upper bound or None)
    "power": (0.0, True, None),
    "temperature": (0.0, True, None),
    "effective_detuning": (0.0, False, None),
    "coupling": (0.0, True, None),
    "eta": (None, True, 1.0),
}


def _check_axis(axis: AxisSpec) -> None:
    if axis.name not in AXIS_NAMES:
        raise ValidationError(
            f"axis: unknown name {axis.name!r}, expected one of {AXIS_NAMES}")
    if not axis.values:
        raise ValidationError(f"axis {axis.name}: grid must be non-empty")
    if not all(math.isfinite(v) for v in axis.values):
        raise ValidationError(f"axis {axis.name}: grid values must be finite")
    if len(axis.values) > 1:
        diffs = [b - a for a, b in zip(axis.values, axis.values[1:])]
        if not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
            raise ValidationError(
                f"axis {axis.name}: grid must be strictly monotone")
    lo, lo_incl, hi = _AXIS_RANGE.get(axis.name, (None, True, None))
    for v in axis.values:
        if lo is not None and (v < lo or (not lo_incl and v == lo)):
            raise ValidationError(
                f"axis {axis.name}: value {v} out of range")
        if hi is not None and v > hi:
            raise ValidationError(
                f"axis {axis.name}: value {v} out of range")


def validate_spec(spec: SweepSpec) -> None:
    """Reject malformed sweep requests before any computation."""
    _check_axis(spec.axis1)
    axes = [spec.axis1.name]
    if spec.axis2 is not None:
        _check_axis(spec.axis2)
        if spec.axis2.name == spec.axis1.name:
            raise ValidationError("axes: axis names must be distinct")
        axes.append(spec.axis2.name)
    if spec.branch not in BRANCH_CHOICES:
        raise ValidationError(
            f"branch: must be one of {BRANCH_CHOICES}, got {spec.branch!r}")
    unknown = [o for o in spec.outputs if o not in OUTPUT_NAMES]
    if unknown:
        raise ValidationError(f"outputs: unknown names {unknown}")
    experimental = [a for a in axes if a in EXPERIMENTAL_AXES]
    theoretical = [a for a in axes if a in THEORETICAL_AXES]
    if experimental and theoretical:
        raise ValidationError(
            "axes: experimental and theoretical axes cannot be mixed "
            f"({experimental[0]} vs {theoretical[0]})")
    if experimental and spec.physical is None:
        raise ValidationError(
            f"physical: required for the {experimental[0]} axis")
    if theoretical and set(theoretical) == {"effective_detuning"}:
        raise ValidationError(
            "axes: an effective_detuning sweep needs an eta or coupling axis "
            "to fix the working point")
    if "eta" in theoretical and "coupling" in theoretical:
        raise ValidationError("axes: eta and coupling axes are redundant")
    if not spec.validity_threshold > 0:
        raise ValidationError("validity_threshold: must be positive")


def evaluate_point(wp: steady.WorkingPoint, mp: ModelParams,
                   validity_threshold: float = quantum.VALIDITY_THRESHOLD) -> dict:
    """One pipeline row: steady-state point -> covariance -> observables.

    Unstable, marginal, degenerate and ill-conditioned points keep their
    steady-state fields but carry no covariance-derived values.
    """
    row = {
        "branch": wp.branch,
        "q_s": wp.q_s,
        "photons": wp.photons,
        "Delta_over_wm": wp.delta / mp.omega_m,
        "G_over_wm": wp.G / mp.omega_m,
        "eta": wp.eta,
        "n_m": None,
        "n_o": None,
        "Sigma": None,
        "detV": None,
        "E_N": None,
        "validity_ratio": None,
        "validity_ok": None,
        "stable": wp.stable,
    }
    if wp.degenerate:
        row["status"] = STATUS_DEGENERATE
        return row
    if not wp.stable:
        row["status"] = STATUS_UNSTABLE
        return row
    A = dynamics.drift_from_rates(wp.delta, wp.G, mp.kappa, mp.omega_m,
                                  mp.gamma_m)
    if dynamics.decay_rate(A) < dynamics.MARGINAL_DECAY_FRACTION * mp.omega_m:
        row["status"] = STATUS_MARGINAL
        return row
    try:
        V = dynamics.solve_lyapunov(A, dynamics.diffusion_matrix(mp))
    except IllConditionedError:
        row["status"] = STATUS_CONDITIONING
        return row
    report = quantum.log_negativity(V, photons=wp.photons,
                                    validity_threshold=validity_threshold)
    row.update({
        "n_m": report.n_m,
        "n_o": report.n_o,
        "Sigma": report.sigma,
        "detV": report.det_v,
        "E_N": report.e_n,
        "validity_ratio": report.validity_ratio,
        "validity_ok": report.validity_ok,
        "status": STATUS_OK,
    })
    return row


def _select_branch(points: list[steady.WorkingPoint],
                   branch: str) -> list[steady.WorkingPoint]:
    if branch == "all":
        return list(points)
    if branch == "lower":
        return [points[0]]
    if branch == "upper":
        return [points[-1]]
    if len(points) == 1:
        return [points[0]]
    return [points[0], points[-1]]


def _cell_rows(spec: SweepSpec, values: dict[str, float]) -> list[dict]:
    axis_cols = {}
    for name, value in values.items():
        col = _AXIS_COLUMN[name]
        if name in ("bare_detuning", "effective_detuning", "coupling"):
            axis_cols[col] = value / spec.base.omega_m
        else:
            axis_cols[col] = value

    if any(name in THEORETICAL_AXES for name in values):
        mp = spec.base
        delta = values.get("effective_detuning", mp.delta0)
        if "eta" in values:
            wp = steady.working_point_from_eta(mp, values["eta"], delta)
        else:
            wp = steady.working_point_from_coupling(mp, values["coupling"], delta)
        selected = [wp]
    else:
        p = spec.physical
        if "power" in values:
            p = with_power(p, values["power"])
        if "bare_detuning" in values:
            p = with_detuning(p, values["bare_detuning"])
        if "temperature" in values:
            p = with_temperature(p, values["temperature"])
        mp = derive_model(p)
        selected = _select_branch(steady.steady_states(mp), spec.branch)

    rows = []
    for wp in selected:
        try:
            row = evaluate_point(wp, mp, spec.validity_threshold)
        except Exception as exc:  # failures are data, not aborts
            row = {
                "branch": wp.branch, "q_s": wp.q_s, "photons": wp.photons,
                "Delta_over_wm": wp.delta / mp.omega_m,
                "G_over_wm": wp.G / mp.omega_m, "eta": wp.eta,
                "n_m": None, "n_o": None, "Sigma": None, "detV": None,
                "E_N": None, "validity_ratio": None, "validity_ok": None,
                "stable": wp.stable, "status": f"{STATUS_ERROR}:{type(exc).__name__}",
            }
        rows.append({**axis_cols, **row})
    return rows


def sweep_columns(spec: SweepSpec) -> tuple[str, ...]:
    cols = [_AXIS_COLUMN[spec.axis2.name]] if spec.axis2 is not None else []
    cols.append(_AXIS_COLUMN[spec.axis1.name])
    cols += ["branch", "q_s", "photons"]
    for name in OUTPUT_NAMES:
        if name in spec.outputs:
            cols += list(_OUTPUT_COLUMNS[name])
    cols += ["stable", "status"]
    return tuple(cols)


def sweep(spec: SweepSpec, threads: int = 1) -> SweepResult:
    """Run the pipeline over the grid; row order is axis2-major, then
    axis1, then branch. Deterministic for a given spec, regardless of
    ``threads``."""
    validate_spec(spec)
    axis2_values = spec.axis2.values if spec.axis2 is not None else (None,)

    cells = []
    for v2 in axis2_values:
        for v1 in spec.axis1.values:
            values = {spec.axis1.name: v1}
            if spec.axis2 is not None:
                values[spec.axis2.name] = v2
            cells.append(values)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_cell = list(pool.map(lambda v: _cell_rows(spec, v), cells))
    else:
        per_cell = [_cell_rows(spec, v) for v in cells]

    columns = sweep_columns(spec)
    rows = []
    for cell in per_cell:
        for raw in cell:
            rows.append({col: raw.get(col) for col in columns})

    meta = {
        "axis1": f"{spec.axis1.name}[{len(spec.axis1.values)}]",
        "branch": spec.branch,
        "kappa_over_wm": repr(spec.base.kappa / spec.base.omega_m),
        "gamma_over_wm": repr(spec.base.gamma_m / spec.base.omega_m),
        "nbar": repr(spec.base.nbar),
        "validity_threshold": repr(spec.validity_threshold),
    }
    if spec.axis2 is not None:
        meta["axis2"] = f"{spec.axis2.name}[{len(spec.axis2.values)}]"
    return SweepResult(columns=columns, rows=rows, meta=meta)


def _format(value) -> str:
    if value is None:
        return "NaN"
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, str):
        return value
    value = float(value)
    if math.isnan(value):
        return "NaN"
    return repr(value)


def write_csv(result: SweepResult, path, version: str,
              timestamp: str | None = None) -> Path:
    """Write a sweep result; only the first (timestamp) line varies
    between identical runs."""
    path = Path(path)
    if timestamp is None:
        timestamp = datetime.datetime.now(datetime.timezone.utc) \
            .strftime("%Y-%m-%dT%H:%M:%SZ")
    lines = [f"# optomech-bistab v{version} {timestamp}"]
    for key in sorted(result.meta):
        lines.append(f"# {key}={result.meta[key]}")
    lines.append(",".join(result.columns))
    for row in result.rows:
        lines.append(",".join(_format(row[col]) for col in result.columns))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def linear_grid(lo: float, hi: float, n: int) -> tuple[float, ...]:
    if n < 1:
        raise ValidationError(f"grid: need at least one point, got {n}")
    if n == 1:
        return (lo,)
    step = (hi - lo) / (n - 1)
    return tuple(lo + i * step for i in range(n))


def bistable_window_estimate(mp: ModelParams,
                             omega_L: float) -> tuple[float, float] | None:
    """(switch-down, switch-up) powers from the turning points of the
    steady-state cubic; None when the response is single-valued. Used only
    to centre default figure grids."""
    disc = mp.delta0 ** 2 - 3.0 * mp.kappa ** 2
    if disc <= 0 or mp.G0 <= 0 or mp.delta0 <= 0:
        return None

    def power_at(q):
        delta = mp.delta0 - mp.G0 * q
        e2 = mp.omega_m * q * (mp.kappa ** 2 + delta ** 2) / mp.G0
        return _HBAR * omega_L * e2 / (2.0 * mp.kappa)

    root = math.sqrt(disc)
    q_lo = (2.0 * mp.delta0 - root) / (3.0 * mp.G0)  # local max of the cubic
    q_hi = (2.0 * mp.delta0 + root) / (3.0 * mp.G0)  # local min
    return power_at(q_hi), power_at(q_lo)


def _hysteresis_rows(trace: steady.HysteresisTrace,
                     mp: ModelParams) -> SweepResult:
    columns = ("P_in_W", "branch", "q_s", "photons", "Delta_over_wm",
               "G_over_wm", "eta", "stable", "on_up_sweep", "on_down_sweep")
    rows = []
    for power, pts, up, down in zip(trace.powers, trace.points, trace.up,
                                    trace.down):
        for wp in pts:
            rows.append({
                "P_in_W": power,
                "branch": wp.branch,
                "q_s": wp.q_s,
                "photons": wp.photons,
                "Delta_over_wm": wp.delta / mp.omega_m,
                "G_over_wm": wp.G / mp.omega_m,
                "eta": wp.eta,
                "stable": wp.stable,
                "on_up_sweep": wp is up,
                "on_down_sweep": wp is down,
            })
    meta = {
        "switch_up_W": "NaN" if trace.switch_up is None else repr(trace.switch_up),
        "switch_down_W": "NaN" if trace.switch_down is None else repr(trace.switch_down),
        "kappa_over_wm": repr(mp.kappa / mp.omega_m),
    }
    return SweepResult(columns=columns, rows=rows, meta=meta)


def _default_power_grid(mp: ModelParams, omega_L: float, fallback: float,
                        n: int) -> tuple[float, ...]:
    window = bistable_window_estimate(mp, omega_L)
    if window is None:
        return linear_grid(0.1 * fallback, 2.0 * fallback, n)
    p_down, p_up = window
    return linear_grid(0.5 * p_down, 1.15 * p_up, n)


def figure_command(fig_id: str, physical: PhysicalParams, out_dir,
                   grid: int | None = None, threads: int = 1,
                   validity_threshold: float = quantum.VALIDITY_THRESHOLD,
                   version: str = "0", timestamp: str | None = None) -> list[Path]:
    """Emit the CSV data behind one figure panel; returns written paths.

    fig2   hysteresis loop of the intracavity power vs input power
    fig3a  E_N over (eta, effective detuning); fig3b the coupling surface
    fig4   E_N vs input power on both branches
    fig5a  eta over (bare detuning, input power); fig5b the E_N surface
    fig6   the fig4 sweep at bath temperatures 0.4, 5 and 10 K
    """
    if fig_id not in FIGURE_IDS:
        raise ValidationError(
            f"figure: unknown id {fig_id!r}, expected one of {FIGURE_IDS}")
    out_dir = Path(out_dir)
    mp = derive_model(physical)
    omega_L = laser_frequency(physical.wavelength)

    def emit(result: SweepResult, name: str) -> Path:
        return write_csv(result, out_dir / name, version, timestamp)

    if fig_id == "fig2":
        n = grid or 400
        powers = _default_power_grid(mp, omega_L, physical.power, n)
        trace = steady.hysteresis(mp, powers, omega_L)
        return [emit(_hysteresis_rows(trace, mp), "fig2.csv")]

    if fig_id in ("fig3a", "fig3b"):
        n = grid or 101
        spec = SweepSpec(
            base=mp,
            axis1=AxisSpec("eta", linear_grid(1e-3, 1.0, n)),
            axis2=AxisSpec("effective_detuning",
                           linear_grid(0.02 * mp.omega_m, 3.0 * mp.omega_m, n)),
            branch="all",
            validity_threshold=validity_threshold,
        )
        result = sweep(spec, threads=threads)
        return [emit(result, f"{fig_id}.csv")]

    if fig_id == "fig4":
        n = grid or 400
        spec = SweepSpec(
            base=mp,
            physical=physical,
            axis1=AxisSpec("power", _default_power_grid(mp, omega_L,
                                                        physical.power, n)),
            branch="both",
            validity_threshold=validity_threshold,
        )
        return [emit(sweep(spec, threads=threads), "fig4.csv")]

    if fig_id in ("fig5a", "fig5b"):
        n = grid or 201
        window = bistable_window_estimate(mp, omega_L)
        p_hi = 1.5 * window[1] if window else 2.0 * physical.power
        spec = SweepSpec(
            base=mp,
            physical=physical,
            axis1=AxisSpec("power", linear_grid(p_hi / n, p_hi, n)),
            axis2=AxisSpec("bare_detuning",
                           linear_grid(0.5 * mp.omega_m, 4.0 * mp.omega_m, n)),
            branch="lower",
            validity_threshold=validity_threshold,
        )
        return [emit(sweep(spec, threads=threads), f"{fig_id}.csv")]

    # fig6
    n = grid or 400
    spec = SweepSpec(
        base=mp,
        physical=physical,
        axis1=AxisSpec("power", _default_power_grid(mp, omega_L,
                                                    physical.power, n)),
        axis2=AxisSpec("temperature", (0.4, 5.0, 10.0)),
        branch="both",
        validity_threshold=validity_threshold,
    )
    return [emit(sweep(spec, threads=threads), "fig6.csv")]
