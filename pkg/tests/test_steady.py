import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.constants import hbar as HBAR

from optomech_bistab import dynamics
from optomech_bistab.errors import ValidationError
from optomech_bistab.params import ModelParams, derive_model, laser_frequency
from optomech_bistab.steady import (
    bistability_parameter,
    cubic_root_count,
    hysteresis,
    real_cubic_roots,
    steady_states,
    working_point_from_coupling,
    working_point_from_eta,
)

TWO_PI = 2.0 * math.pi


def _cubic_coeffs(mp):
    return (mp.omega_m * mp.G0 ** 2,
            -2.0 * mp.omega_m * mp.G0 * mp.delta0,
            mp.omega_m * (mp.kappa ** 2 + mp.delta0 ** 2),
            -mp.G0 * mp.E ** 2)


def dense_scan_roots(mp, n=1_000_000):
    """Independent root localization: sign changes of the cubic on a fine
    displacement grid covering all physically reachable q."""
    q_max = 1.2 * mp.G0 * mp.E ** 2 / (mp.omega_m * mp.kappa ** 2)
    q = np.linspace(0.0, q_max, n)
    c3, c2, c1, c0 = _cubic_coeffs(mp)
    f = ((c3 * q + c2) * q + c1) * q + c0
    idx = np.nonzero(np.diff(np.sign(f)) != 0)[0]
    return 0.5 * (q[idx] + q[idx + 1])


# --- trivial structure ----------------------------------------------------

def test_decoupled_cavity_single_root(reference_model):
    mp = replace(reference_model, G0=0.0)
    pts = steady_states(mp)
    assert len(pts) == 1
    wp = pts[0]
    assert wp.q_s == 0.0
    assert wp.branch == "lower"
    expected = mp.E / complex(mp.kappa, mp.delta0)
    assert wp.alpha_s == pytest.approx(expected, rel=1e-14)
    assert wp.G == 0.0
    assert wp.eta == 1.0


def test_undriven_cavity_single_root(reference_model):
    mp = replace(reference_model, E=0.0)
    pts = steady_states(mp)
    assert len(pts) == 1
    wp = pts[0]
    assert wp.q_s == 0.0
    assert wp.alpha_s == 0.0
    assert wp.delta == mp.delta0
    assert wp.eta == 1.0


# --- bistable structure against the dense-scan oracle ----------------------

def test_three_roots_inside_window(default_model):
    pts = steady_states(default_model)
    assert [wp.branch for wp in pts] == ["lower", "middle", "upper"]

    oracle = dense_scan_roots(default_model)
    assert len(oracle) == 3
    for wp, q_ref in zip(pts, oracle):
        assert wp.q_s == pytest.approx(q_ref, rel=1e-4)

    lower, middle, upper = pts
    assert dynamics.is_stable_rh(lower.delta, lower.G, default_model.kappa,
                                 default_model.omega_m)
    assert not dynamics.is_stable_rh(middle.delta, middle.G,
                                     default_model.kappa,
                                     default_model.omega_m)
    assert dynamics.is_stable_rh(upper.delta, upper.G, default_model.kappa,
                                 default_model.omega_m)


def test_root_residual_contract(default_model):
    c = _cubic_coeffs(default_model)
    scale = max(abs(x) for x in c)
    for wp in steady_states(default_model):
        q = wp.q_s
        res = ((c[0] * q + c[1]) * q + c[2]) * q + c[3]
        assert abs(res) <= 1e-9 * scale


def test_working_point_self_consistency(default_model):
    mp = default_model
    for wp in steady_states(mp):
        assert abs(wp.alpha_s * complex(mp.kappa, wp.delta) - mp.E) \
            <= 1e-9 * mp.E
        assert wp.q_s == pytest.approx(mp.G0 * wp.photons / mp.omega_m,
                                       rel=1e-9)
        assert wp.p_s == 0.0
        assert wp.delta == pytest.approx(mp.delta0 - mp.G0 * wp.q_s, rel=1e-12)


def test_eta_sign_matches_routh_hurwitz(default_physical, rng):
    for _ in range(60):
        power = float(rng.uniform(1e-4, 0.12))
        mp = derive_model(replace(default_physical, power=power))
        for wp in steady_states(mp):
            if wp.delta <= 0:
                continue
            verdict = dynamics.is_stable_rh(wp.delta, wp.G, mp.kappa,
                                            mp.omega_m)
            assert (wp.eta > 0) == verdict


# --- cubic solver against numpy -------------------------------------------

@given(b=st.floats(-5, 5), c=st.floats(-5, 5), d=st.floats(-5, 5))
@settings(max_examples=200, deadline=None)
def test_cubic_roots_match_numpy(b, c, d):
    from hypothesis import assume

    from optomech_bistab.steady import _cubic_discriminant

    disc, scale = _cubic_discriminant(1.0, b, c, d)
    assume(abs(disc) > 1e-8 * scale)  # root separation is unambiguous
    roots, degenerate = real_cubic_roots(1.0, b, c, d)
    assert not degenerate
    np_roots = np.roots([1.0, b, c, d])
    np_real = np.sort(np_roots[np.abs(np_roots.imag)
                               <= 1e-8 * np.abs(np_roots)].real)
    assert len(roots) == len(np_real)
    for mine, ref in zip(roots, np_real):
        assert mine == pytest.approx(ref, rel=1e-6, abs=1e-9)


def test_cubic_triple_root():
    # (x - 2)^3 = x^3 - 6x^2 + 12x - 8
    roots, degenerate = real_cubic_roots(1.0, -6.0, 12.0, -8.0)
    assert degenerate
    assert roots == pytest.approx([2.0], abs=1e-9)


def test_cubic_double_root():
    # (x - 1)^2 (x + 2) = x^3 - 3x + 2
    roots, degenerate = real_cubic_roots(1.0, 0.0, -3.0, 2.0)
    assert degenerate
    assert roots == pytest.approx([-2.0, 1.0], abs=1e-9)
    assert cubic_root_count(1.0, 0.0, -3.0, 2.0) == 2


# --- bistability parameter --------------------------------------------------

def test_eta_trivial_values():
    assert bistability_parameter(2.0, 0.0, 1.0, 1.0) == 1.0
    delta, kappa, omega = 1.3, 0.8, 1.0
    g_boundary = math.sqrt(omega * (kappa ** 2 + delta ** 2) / delta)
    assert bistability_parameter(delta, g_boundary, kappa, omega) \
        == pytest.approx(0.0, abs=1e-14)
    assert bistability_parameter(1.0, 1.0, 1.0, 1.0) == pytest.approx(0.5)


def test_synthetic_working_points():
    mp = ModelParams(kappa=1.4, G0=1e-5, E=0.0, delta0=1.0, omega_m=1.0,
                     gamma_m=1e-5, nbar=0.0)
    wp = working_point_from_eta(mp, 0.25, 1.0)
    assert wp.eta == pytest.approx(0.25, rel=1e-12)
    assert wp.branch == "synthetic"
    wp2 = working_point_from_coupling(mp, wp.G, 1.0)
    assert wp2.eta == pytest.approx(0.25, rel=1e-12)
    assert wp2.photons == pytest.approx(wp.G ** 2 / (2 * mp.G0 ** 2), rel=1e-12)
    with pytest.raises(ValidationError):
        working_point_from_eta(mp, 1.5, 1.0)
    with pytest.raises(ValidationError):
        working_point_from_eta(mp, 0.5, -1.0)


# --- hysteresis --------------------------------------------------------------

def window_estimate(mp, omega_L):
    """Turning-point powers from a dense scan of the cubic level curve
    (independent of the bisection path under test)."""
    disc = mp.delta0 ** 2 - 3.0 * mp.kappa ** 2
    assert disc > 0
    q_hi = (2.0 * mp.delta0 + math.sqrt(disc)) / (3.0 * mp.G0)
    q = np.linspace(0.0, 1.5 * q_hi, 1_000_000)
    delta = mp.delta0 - mp.G0 * q
    level = mp.omega_m * q * (mp.kappa ** 2 + delta ** 2) / mp.G0  # = E^2
    power = HBAR * laser_frequency(810e-9) * level / (2.0 * mp.kappa)
    # between the two turning points the level curve is non-monotone
    interior = (q > 0.05 * q_hi) & (q < 1.45 * q_hi)
    local_max_mask = (level[1:-1] > level[:-2]) & (level[1:-1] > level[2:])
    local_min_mask = (level[1:-1] < level[:-2]) & (level[1:-1] < level[2:])
    p_up = power[1:-1][local_max_mask & interior[1:-1]]
    p_down = power[1:-1][local_min_mask & interior[1:-1]]
    assert len(p_up) == 1 and len(p_down) == 1
    return float(p_down[0]), float(p_up[0])


def test_hysteresis_window(default_model, default_physical):
    omega_L = laser_frequency(default_physical.wavelength)
    p_down_ref, p_up_ref = window_estimate(default_model, omega_L)
    powers = np.linspace(0.5 * p_down_ref, 1.2 * p_up_ref, 120)
    trace = hysteresis(default_model, powers, omega_L)

    assert trace.switch_down is not None and trace.switch_up is not None
    assert trace.switch_down < trace.switch_up
    assert trace.switch_down == pytest.approx(p_down_ref, rel=1e-4)
    assert trace.switch_up == pytest.approx(p_up_ref, rel=1e-4)

    for power, pts in zip(trace.powers, trace.points):
        inside = trace.switch_down < power < trace.switch_up
        assert len(pts) == (3 if inside else 1)

    # the sweeps disagree exactly inside the window
    for power, up, down in zip(trace.powers, trace.up, trace.down):
        inside = trace.switch_down < power < trace.switch_up
        assert (up is not down) == inside


def test_hysteresis_grid_starting_inside_window(default_model,
                                                default_physical):
    # arrival from above: the down-sweep stays on the upper branch across
    # every in-window point even when the lower window edge is off-grid
    omega_L = laser_frequency(default_physical.wavelength)
    p_down_ref, p_up_ref = window_estimate(default_model, omega_L)
    powers = np.linspace(0.5 * (p_down_ref + p_up_ref), 1.3 * p_up_ref, 30)
    trace = hysteresis(default_model, powers, omega_L)
    assert trace.switch_down is None and trace.switch_up is not None
    for power, pts, up, down in zip(trace.powers, trace.points, trace.up,
                                    trace.down):
        if len(pts) == 3:
            assert up is pts[0] and down is pts[-1]
        else:
            assert up is down is pts[0]


def test_hysteresis_below_window(default_model, default_physical):
    omega_L = laser_frequency(default_physical.wavelength)
    p_down_ref, _ = window_estimate(default_model, omega_L)
    powers = np.linspace(0.05 * p_down_ref, 0.5 * p_down_ref, 25)
    trace = hysteresis(default_model, powers, omega_L)
    assert trace.switch_up is None and trace.switch_down is None
    assert all(u is d for u, d in zip(trace.up, trace.down))


def test_hysteresis_linear_when_decoupled(reference_model, reference_physical):
    mp = replace(reference_model, G0=0.0)
    omega_L = laser_frequency(reference_physical.wavelength)
    powers = np.linspace(1e-4, 0.1, 12)
    trace = hysteresis(mp, powers, omega_L)
    for power, wp in zip(trace.powers, trace.up):
        expected = 2.0 * power * mp.kappa / (
            HBAR * omega_L * (mp.kappa ** 2 + mp.delta0 ** 2))
        assert wp.photons == pytest.approx(expected, rel=1e-12)


def test_eta_vanishes_toward_turning_points(default_model, default_physical):
    omega_L = laser_frequency(default_physical.wavelength)
    p_down_ref, p_up_ref = window_estimate(default_model, omega_L)
    width = p_up_ref - p_down_ref
    lower_end, upper_end = [], []
    for frac in (1e-1, 1e-2, 1e-3, 1e-4):
        up_trace = hysteresis(default_model, [p_up_ref - frac * width],
                              omega_L)
        lower_end.append(up_trace.up[0].eta)
        down_trace = hysteresis(default_model, [p_down_ref + frac * width],
                                omega_L)
        upper_end.append(down_trace.down[0].eta)
    for etas in (lower_end, upper_end):
        assert all(b < a for a, b in zip(etas, etas[1:]))
        assert etas[-1] < 0.02


def test_stable_red_detuned_eta_within_unit_interval(default_physical, rng):
    for _ in range(40):
        power = float(rng.uniform(1e-4, 0.12))
        mp = derive_model(replace(default_physical, power=power))
        points = steady_states(mp)
        for wp in points:
            if wp.stable and wp.delta > 0:
                assert 0.0 <= wp.eta <= 1.0
        if len(points) == 3:
            middle = points[1]
            assert middle.eta <= 0.0 or not dynamics.is_stable_rh(
                middle.delta, middle.G, mp.kappa, mp.omega_m)


def test_hysteresis_validation(default_model, default_physical):
    omega_L = laser_frequency(default_physical.wavelength)
    with pytest.raises(ValidationError, match="non-empty"):
        hysteresis(default_model, [], omega_L)
    with pytest.raises(ValidationError, match="increasing"):
        hysteresis(default_model, [0.02, 0.01], omega_L)
    with pytest.raises(ValidationError, match="non-negative"):
        hysteresis(default_model, [-0.01, 0.02], omega_L)


def test_degenerate_root_at_turning_point(default_model):
    mp = default_model
    disc = mp.delta0 ** 2 - 3.0 * mp.kappa ** 2
    q_turn = (2.0 * mp.delta0 - math.sqrt(disc)) / (3.0 * mp.G0)
    delta = mp.delta0 - mp.G0 * q_turn
    e_turn = math.sqrt(mp.omega_m * q_turn * (mp.kappa ** 2 + delta ** 2)
                       / mp.G0)
    pts = steady_states(replace(mp, E=e_turn))
    assert any(wp.degenerate for wp in pts)
    degenerate = [wp for wp in pts if wp.degenerate]
    assert degenerate[0].q_s == pytest.approx(q_turn, rel=1e-6)
