"""Linearized Gaussian dynamics of the fluctuations.

State ordering is (dq, dp, X, Y) with X, Y the cavity quadratures. The
drift matrix is

        |   0      w_m     0      0   |
    A = |  -w_m   -g_m     G      0   |
        |   0      0      -kappa  D   |
        |   G      0      -D     -kappa|

and the diffusion matrix, fixed by the vacuum optical input and the
Markovian thermal force, is D = diag(0, g_m*(2*nbar+1), kappa, kappa).
The steady-state covariance solves A V + V A^T + D = 0; the adaptive
integrator below evolves the transient form and serves as an independent
oracle for the direct solver.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from .errors import (
    IllConditionedError,
    IntegrationError,
    OutOfRegimeError,
    UnstableSystemError,
)

if TYPE_CHECKING:  # pragma: no cover
    from .params import ModelParams
    from .steady import WorkingPoint

# decay rates slower than this fraction of omega_m are treated as marginal
MARGINAL_DECAY_FRACTION = 1e-8

# relative residual bound of the direct Lyapunov solve
LYAPUNOV_RESIDUAL_RTOL = 1e-9

# symmetric basis of 4x4 matrices and the packed index order
_PACK_IDX = [(i, j) for i in range(4) for j in range(i, 4)]
_SYM_BASIS = []
for _i, _j in _PACK_IDX:
    _E = np.zeros((4, 4))
    _E[_i, _j] = 1.0
    _E[_j, _i] = 1.0
    _SYM_BASIS.append(_E)


def drift_from_rates(delta: float, G: float, kappa: float,
                     omega_m: float, gamma_m: float) -> np.ndarray:
    """Drift matrix from the scalar rates (effective detuning, coupling)."""
    return np.array([
        [0.0, omega_m, 0.0, 0.0],
        [-omega_m, -gamma_m, G, 0.0],
        [0.0, 0.0, -kappa, delta],
        [G, 0.0, -delta, -kappa],
    ])


def drift_matrix(wp: "WorkingPoint", mp: "ModelParams") -> np.ndarray:
    """Drift matrix for a solved working point."""
    return drift_from_rates(wp.delta, wp.G, mp.kappa, mp.omega_m, mp.gamma_m)


def diffusion_matrix(mp: "ModelParams") -> np.ndarray:
    """Noise-strength matrix diag(0, gamma_m*(2*nbar+1), kappa, kappa)."""
    return np.diag([0.0, mp.gamma_m * (2.0 * mp.nbar + 1.0), mp.kappa, mp.kappa])


def is_stable_rh(delta: float, G: float, kappa: float, omega_m: float) -> bool:
    """Routh-Hurwitz stability verdict, valid in the red-detuned regime only.

    True iff omega_m*(kappa^2 + delta^2) - G^2*delta > 0. The boundary
    counts as not stable. Raises OutOfRegimeError for delta <= 0.
    """
    if delta <= 0:
        raise OutOfRegimeError(
            f"Routh-Hurwitz criterion requires delta > 0, got {delta}")
    return omega_m * (kappa * kappa + delta * delta) - G * G * delta > 0.0


def is_stable_spectral(A: np.ndarray) -> bool:
    """True iff every eigenvalue of A has strictly negative real part."""
    return bool(np.linalg.eigvals(A).real.max() < 0.0)


def decay_rate(A: np.ndarray) -> float:
    """Slowest decay rate -max Re(eig A); negative if A is unstable."""
    return float(-np.linalg.eigvals(A).real.max())


def effective_frequency(delta: float, G: float, kappa: float,
                        omega_m: float) -> float:
    """Adiabatic spring frequency omega_m * eta (diagnostic only)."""
    from .steady import bistability_parameter

    return omega_m * bistability_parameter(delta, G, kappa, omega_m)


def solve_lyapunov(A: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Unique symmetric V with A V + V A^T + D = 0.

    Solved as a dense 10-unknown linear system over the packed symmetric
    components. Raises UnstableSystemError (naming the offending
    eigenvalue) if A is not Hurwitz, and IllConditionedError if an
    eigenvalue pair nearly sums to zero or the residual contract
    max|A V + V A^T + D| <= 1e-9 * max|D| cannot be met.
    """
    eig = np.linalg.eigvals(A)
    worst = eig[np.argmax(eig.real)]
    if worst.real >= 0.0:
        raise UnstableSystemError(worst)
    pair_sums = np.abs(eig[:, None] + eig[None, :])
    scale = np.abs(eig).max()
    if pair_sums.min() < 1e-12 * scale:
        raise IllConditionedError(
            f"eigenvalue pair sums to ~0 (min |l_i + l_j| = {pair_sums.min():.3e})")

    M = np.empty((10, 10))
    for col, basis in enumerate(_SYM_BASIS):
        R = A @ basis + basis @ A.T
        M[:, col] = [R[i, j] for i, j in _PACK_IDX]
    rhs = -np.array([D[i, j] for i, j in _PACK_IDX])
    x = np.linalg.solve(M, rhs)

    V = np.empty((4, 4))
    for value, (i, j) in zip(x, _PACK_IDX):
        V[i, j] = value
        V[j, i] = value

    residual = np.abs(A @ V + V @ A.T + D).max()
    bound = LYAPUNOV_RESIDUAL_RTOL * max(np.abs(D).max(), 0.0)
    if residual > bound and np.abs(D).max() > 0.0:
        raise IllConditionedError(
            f"Lyapunov residual {residual:.3e} exceeds {bound:.3e}")
    return V


# Dormand-Prince 5(4) tableau
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
          187 / 2100, 1 / 40)
_DP_ERR = tuple(b5 - b4 for b5, b4 in zip(_DP_B5, _DP_B4))


def integrate_lyapunov(A: np.ndarray, D: np.ndarray, V0: np.ndarray,
                       t_final: float, tol: float = 1e-10) -> np.ndarray:
    """V(t_final) of dV/dt = A V + V A^T + D from V(0) = V0.

    Embedded Dormand-Prince 4(5) pair with PI-free step control and
    symmetrization of V after every accepted step. ``tol`` is applied as
    both absolute and relative local tolerance. Raises IntegrationError
    on step-size underflow.
    """
    if not t_final > 0:
        raise ValueError(f"t_final must be positive, got {t_final}")
    t = 0.0
    V = 0.5 * (V0 + V0.T)

    def rhs(M):
        return A @ M + M @ A.T + D

    a_norm = np.abs(A).max()
    h = min(t_final, 0.1 / a_norm) if a_norm > 0 else t_final
    h_min = 1e-14 * t_final
    k = [None] * 7
    k[0] = rhs(V)
    while t < t_final:
        h = min(h, t_final - t)
        for i in range(1, 7):
            Vi = V
            for j, aij in enumerate(_DP_A[i]):
                if aij:
                    Vi = Vi + (h * aij) * k[j]
            k[i] = rhs(Vi)
        V5 = V
        err = np.zeros_like(V)
        for i in range(7):
            if _DP_B5[i]:
                V5 = V5 + (h * _DP_B5[i]) * k[i]
            if _DP_ERR[i]:
                err = err + (h * _DP_ERR[i]) * k[i]
        scale = tol + tol * max(np.abs(V).max(), np.abs(V5).max())
        err_norm = np.abs(err).max() / scale
        if err_norm <= 1.0:
            t += h
            V = 0.5 * (V5 + V5.T)
            if t >= t_final:
                break
            k[0] = rhs(V)
        factor = 0.9 * err_norm ** -0.2 if err_norm > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
        if h < h_min:
            raise IntegrationError(
                f"step size underflow at t = {t:.6e} (h = {h:.3e})")
    return V


def split_blocks(V: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(mechanical, optical, cross) 2x2 blocks of the covariance matrix."""
    return V[:2, :2], V[2:, 2:], V[:2, 2:]


def symplectic_eigenvalues(V: np.ndarray) -> np.ndarray:
    """Symplectic spectrum |eig(i Omega V)| of a 4x4 covariance, ascending.

    Physical states have both values >= 1/2 in the vacuum-1/2 convention.
    """
    omega = np.array([
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ])
    ev = np.abs(np.linalg.eigvals(1j * omega @ V))
    return np.sort(ev)[::2]  # values come in equal pairs


def is_physical(V: np.ndarray, slack: float = 1e-9) -> bool:
    """Symmetry plus uncertainty principle, with numerical slack."""
    scale = max(np.abs(V).max(), 1.0)
    if np.abs(V - V.T).max() > 1e-10 * scale:
        return False
    return bool(symplectic_eigenvalues(V).min() >= 0.5 - slack)


def matrix_csv_row(M: np.ndarray) -> str:
    """Row-major 16-column CSV line of a 4x4 matrix (debug serialization)."""
    return ",".join(repr(float(x)) for x in np.asarray(M).reshape(-1))
