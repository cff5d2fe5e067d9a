"""Experimental parameters and derived model constants.

Every frequency stored on the dataclasses below is an angular frequency in
rad/s. Config files may declare their frequency-like entries either as
angular frequencies or as cycles per second (``freq_convention``); the
conversion happens once, at ingestion.

Derived constants:

    kappa = pi*c / (2*F*L)            amplitude (half-linewidth) decay rate,
                                      unless an explicit override is given
    omega_L = 2*pi*c / lambda_L
    omega_c = omega_L + Delta_0
    G0 = (omega_c/L) * sqrt(hbar/(m*omega_m))
    E  = sqrt(2*P*kappa / (hbar*omega_L))
    nbar = 1 / (exp(hbar*omega_m/(kB*T)) - 1),  nbar = 0 at T = 0
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from scipy.constants import c as _C, hbar as _HBAR, k as _KB

from .errors import ValidationError

ANGULAR = "angular"
CYCLIC = "cyclic"

_TWO_PI = 2.0 * math.pi

# config keys, in canonical file order
CONFIG_KEYS = (
    "cavity_length_m",
    "finesse",
    "wavelength_m",
    "power_W",
    "mass_kg",
    "mech_freq",
    "mech_damping",
    "temperature_K",
    "bare_detuning",
    "freq_convention",
    "kappa_override",
)

# frequency-like config entries subject to the angular/cyclic convention
_FREQ_KEYS = ("mech_freq", "mech_damping", "bare_detuning", "kappa_override")


@dataclass(frozen=True)
class PhysicalParams:
    """Experiment-level inputs, SI units, angular frequencies."""

    cavity_length: float        # m
    finesse: float
    wavelength: float           # m
    power: float                # W
    mass: float                 # kg
    omega_m: float              # rad/s
    gamma_m: float              # rad/s
    temperature: float          # K
    delta0: float               # rad/s, bare detuning omega_c - omega_L
    kappa_override: float | None = None  # rad/s, bypasses the finesse formula


@dataclass(frozen=True)
class ModelParams:
    """Constants of the driven-cavity model, angular frequencies in rad/s."""

    kappa: float      # cavity amplitude decay rate
    G0: float         # single-photon coupling, rad/s per unit displacement
    E: float          # drive amplitude
    delta0: float     # bare detuning
    omega_m: float    # mechanical frequency
    gamma_m: float    # mechanical damping
    nbar: float       # mean thermal phonon number (dimensionless)


def _require(condition: bool, field: str, message: str) -> None:
    if not condition:
        raise ValidationError(f"{field}: {message}")


def _check_physical(p: PhysicalParams) -> None:
    strictly_positive = (
        ("cavity_length", p.cavity_length),
        ("finesse", p.finesse),
        ("wavelength", p.wavelength),
        ("mass", p.mass),
        ("omega_m", p.omega_m),
        ("gamma_m", p.gamma_m),
    )
    for name, value in strictly_positive:
        _require(isinstance(value, (int, float)) and math.isfinite(value), name,
                 "must be a finite number")
        _require(value > 0, name, "must be strictly positive")
    for name, value in (("power", p.power), ("temperature", p.temperature)):
        _require(isinstance(value, (int, float)) and math.isfinite(value), name,
                 "must be a finite number")
        _require(value >= 0, name, "must be non-negative")
    _require(math.isfinite(p.delta0), "delta0", "must be finite")
    if p.kappa_override is not None:
        _require(math.isfinite(p.kappa_override) and p.kappa_override > 0,
                 "kappa_override", "must be finite and strictly positive")


def thermal_phonons(omega_m: float, temperature: float) -> float:
    """Bose occupation 1/(exp(hbar*w/kB*T) - 1); exactly 0 at T = 0."""
    if temperature == 0.0:
        return 0.0
    return 1.0 / math.expm1(_HBAR * omega_m / (_KB * temperature))


def laser_frequency(wavelength: float) -> float:
    """Angular laser frequency 2*pi*c/lambda."""
    return _TWO_PI * _C / wavelength


def cavity_decay(cavity_length: float, finesse: float) -> float:
    """Amplitude decay rate pi*c/(2*F*L) (half-linewidth convention)."""
    return math.pi * _C / (2.0 * finesse * cavity_length)


def drive_amplitude(power: float, kappa: float, omega_L: float) -> float:
    """Drive amplitude sqrt(2*P*kappa/(hbar*omega_L))."""
    return math.sqrt(2.0 * power * kappa / (_HBAR * omega_L))


def derive_model(p: PhysicalParams) -> ModelParams:
    """Derive the model constants from experiment-level inputs.

    Raises ValidationError naming the offending field on non-finite or
    out-of-range inputs.
    """
    _check_physical(p)
    omega_L = laser_frequency(p.wavelength)
    omega_c = omega_L + p.delta0
    kappa = p.kappa_override if p.kappa_override is not None \
        else cavity_decay(p.cavity_length, p.finesse)
    g0 = (omega_c / p.cavity_length) * math.sqrt(_HBAR / (p.mass * p.omega_m))
    drive = drive_amplitude(p.power, kappa, omega_L)
    return ModelParams(
        kappa=kappa,
        G0=g0,
        E=drive,
        delta0=p.delta0,
        omega_m=p.omega_m,
        gamma_m=p.gamma_m,
        nbar=thermal_phonons(p.omega_m, p.temperature),
    )


def normalize(mp: ModelParams) -> ModelParams:
    """Divide every rate by omega_m so that omega_m = 1 internally."""
    if not mp.omega_m > 0:
        raise ValidationError("omega_m: must be strictly positive")
    w = mp.omega_m
    return ModelParams(
        kappa=mp.kappa / w,
        G0=mp.G0 / w,
        E=mp.E / w,
        delta0=mp.delta0 / w,
        omega_m=1.0,
        gamma_m=mp.gamma_m / w,
        nbar=mp.nbar,
    )


def denormalize(mp: ModelParams, omega_m: float) -> ModelParams:
    """Undo normalize(): scale every rate back by the given omega_m."""
    return ModelParams(
        kappa=mp.kappa * omega_m,
        G0=mp.G0 * omega_m,
        E=mp.E * omega_m,
        delta0=mp.delta0 * omega_m,
        omega_m=mp.omega_m * omega_m,
        gamma_m=mp.gamma_m * omega_m,
        nbar=mp.nbar,
    )


def default_params() -> PhysicalParams:
    """Reference parameter set of the bundled config.

    Millimetre Fabry-Perot cavity, 810 nm drive, 10 MHz / 5 ng mechanical
    mode at 400 mK, bare detuning 2.62 omega_m. The cavity decay is pinned
    to 1.4 omega_m via the override (the full-linewidth reading of the
    quoted finesse), which keeps both stable branches dynamically alive
    over a useful power range.
    """
    return PhysicalParams(
        cavity_length=1e-3,
        finesse=1.07e4,
        wavelength=810e-9,
        power=0.057,
        mass=5e-12,
        omega_m=_TWO_PI * 1e7,
        gamma_m=_TWO_PI * 100.0,
        temperature=0.4,
        delta0=_TWO_PI * 2.62e7,
        kappa_override=_TWO_PI * 1.4e7,
    )


def _convert_frequency(value: float, convention: str) -> float:
    if convention == ANGULAR:
        return value
    if convention == CYCLIC:
        return _TWO_PI * value
    raise ValidationError(
        f"freq_convention: must be '{ANGULAR}' or '{CYCLIC}', got {convention!r}")


def load_config(path) -> PhysicalParams:
    """Read a flat ``key = value`` config file into PhysicalParams.

    Lines starting with '#' and blank lines are ignored. Frequency-like
    entries (mech_freq, mech_damping, bare_detuning, kappa_override) are
    interpreted per ``freq_convention`` (default: cyclic).
    """
    raw: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValidationError(
                        f"config line {lineno}: expected 'key = value', got {line!r}")
                key, _, value = line.partition("=")
                key = key.strip()
                if key not in CONFIG_KEYS:
                    raise ValidationError(f"config line {lineno}: unknown key {key!r}")
                if key in raw:
                    raise ValidationError(f"config line {lineno}: duplicate key {key!r}")
                raw[key] = value.strip()
    except OSError as exc:
        raise ValidationError(f"config: cannot read {path}: {exc}") from exc

    convention = raw.pop("freq_convention", CYCLIC)
    if convention not in (ANGULAR, CYCLIC):
        raise ValidationError(
            f"freq_convention: must be '{ANGULAR}' or '{CYCLIC}', got {convention!r}")

    required = [k for k in CONFIG_KEYS if k not in ("freq_convention", "kappa_override")]
    missing = [k for k in required if k not in raw]
    if missing:
        raise ValidationError(f"config: missing keys {', '.join(missing)}")

    def number(key: str) -> float:
        try:
            return float(raw[key])
        except ValueError as exc:
            raise ValidationError(f"{key}: not a number: {raw[key]!r}") from exc

    values = {k: number(k) for k in raw}
    for key in _FREQ_KEYS:
        if key in values:
            values[key] = _convert_frequency(values[key], convention)

    return PhysicalParams(
        cavity_length=values["cavity_length_m"],
        finesse=values["finesse"],
        wavelength=values["wavelength_m"],
        power=values["power_W"],
        mass=values["mass_kg"],
        omega_m=values["mech_freq"],
        gamma_m=values["mech_damping"],
        temperature=values["temperature_K"],
        delta0=values["bare_detuning"],
        kappa_override=values.get("kappa_override"),
    )


def with_power(p: PhysicalParams, power: float) -> PhysicalParams:
    return replace(p, power=power)


def with_detuning(p: PhysicalParams, delta0: float) -> PhysicalParams:
    return replace(p, delta0=delta0)


def with_temperature(p: PhysicalParams, temperature: float) -> PhysicalParams:
    return replace(p, temperature=temperature)
