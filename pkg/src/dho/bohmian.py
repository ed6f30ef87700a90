"""Position-space density, probability current and Bohmian trajectories.

All spatial derivatives of rho(x, x', t) are taken in closed form: every term
of the superposition is a Gaussian times a phase, so d/dx of psi_i is
``g_i(x) psi_i`` with ``g_i = -(x - sqrt2 Re a_i(t)) + i sqrt2 Im a_i(t)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np
from scipy.integrate import trapezoid

from . import kernels
from .errors import DensityFloorHit, DomainError
from .states import EvolutionParams, SuperposedState, evolve_amplitude, position_wavefunction

SQRT2 = math.sqrt(2.0)
DENSITY_FLOOR = 1e-12
VELOCITY_CLAMP = 1e3


@dataclass(frozen=True)
class GridField:
    x: np.ndarray
    times: np.ndarray
    P: np.ndarray
    J: np.ndarray
    gamma0: float = 0.0

    @property
    def x_min(self) -> float:
        return float(self.x[0])

    @property
    def x_max(self) -> float:
        return float(self.x[-1])

    @property
    def nx(self) -> int:
        return int(self.x.size)

    def norms(self) -> np.ndarray:
        """Trapezoid integral of P at each stored time."""
        return trapezoid(self.P, self.x, axis=1)


@dataclass(frozen=True)
class TrajectoryEnsemble:
    initial_positions: np.ndarray
    times: np.ndarray
    paths: np.ndarray
    halted: np.ndarray
    solver_tolerance: float
    gamma0: float = 0.0


def _arrays(s: SuperposedState):
    return s.amplitude_array, s.pair_weights(), s.overlap_logs()


def density_matrix_position(s: SuperposedState, p: EvolutionParams, x, xp):
    """<x|rho(t)|x'> = N^2 sum_ij c_i c_j* f_ij psi_i(x, t) conj(psi_j(x', t))."""
    W = s.pair_weights() * s.decoherence_factors(p)
    x = np.asarray(x, dtype=np.float64)
    xp = np.asarray(xp, dtype=np.float64)
    psi_x = np.stack([position_wavefunction(a, p, x) for a in s.amplitudes], axis=-1)
    psi_xp = np.stack([position_wavefunction(a, p, xp) for a in s.amplitudes], axis=-1)
    out = np.einsum("...i,ij,...j->...", psi_x, W, np.conj(psi_xp))
    return out[()] if np.ndim(out) == 0 else out


def density_and_current(s: SuperposedState, p: EvolutionParams, x):
    amps, w, z = _arrays(s)
    return kernels.density_current_np(x, p.t, amps, w, z, p.gamma0)


def probability_density(s: SuperposedState, p: EvolutionParams, x):
    return density_and_current(s, p, x)[0]


def probability_current(s: SuperposedState, p: EvolutionParams, x):
    """J = Re{[-i d_r - (gamma0/2)(R + d_R/2)] rho(R, r)} on the diagonal r = 0."""
    return density_and_current(s, p, x)[1]


def current_gradient(s: SuperposedState, p: EvolutionParams, x):
    """dJ/dx in closed form.

    The bracket multiplying each term does not depend on x, so only the
    Gaussian factor ``(g_i + conj g_j) T_ij`` is differentiated.
    """
    at = s.amplitude_array * np.exp(-(1j + 0.5 * p.gamma0) * p.t)
    ar, ai = at.real, at.imag
    W = s.pair_weights() * s.decoherence_factors(p)
    xs = np.asarray(x, dtype=np.float64)[..., None]
    g = -(xs - SQRT2 * ar) + 1j * SQRT2 * ai
    psi = kernels.PI_QUARTER * np.exp(-0.5 * (xs - SQRT2 * ar) ** 2 + 1j * (SQRT2 * ai * xs - ar * ai))
    T = W * psi[..., :, None] * np.conj(psi)[..., None, :]
    gi, gj = g[..., :, None], np.conj(g)[..., None, :]
    K = -0.5j * (gi - gj) - 0.5 * p.gamma0 * (xs[..., None] + 0.5 * (gi + gj))
    return np.sum(K * (gi + gj) * T, axis=(-2, -1)).real


def density_time_derivative(s: SuperposedState, p: EvolutionParams, x):
    """dP/dt in closed form from the motion of the amplitudes and of f(t)."""
    g0 = p.gamma0
    at = s.amplitude_array * np.exp(-(1j + 0.5 * g0) * p.t)
    ar, ai = at.real, at.imag
    dar = ai - 0.5 * g0 * ar
    dai = -ar - 0.5 * g0 * ai
    W = s.pair_weights() * s.decoherence_factors(p)
    dlogf = g0 * math.exp(-g0 * p.t) * s.overlap_logs()
    xs = np.asarray(x, dtype=np.float64)[..., None]
    psi = kernels.PI_QUARTER * np.exp(-0.5 * (xs - SQRT2 * ar) ** 2 + 1j * (SQRT2 * ai * xs - ar * ai))
    dE = (SQRT2 * (xs - SQRT2 * ar) - 1j * ai) * dar + 1j * (SQRT2 * xs - ar) * dai
    T = W * psi[..., :, None] * np.conj(psi)[..., None, :]
    rate = dlogf + dE[..., :, None] + np.conj(dE)[..., None, :]
    return np.sum(rate * T, axis=(-2, -1)).real


def continuity_residual(s: SuperposedState, gamma0: float, x, times, h: float = 1e-5,
                        time_derivative: str = "central") -> float:
    """max over the grid of |dP/dt + dJ/dx|.

    ``central`` differentiates P in time by re-evaluating it at t +- h (a
    one-sided step is used at t = 0); ``analytic`` uses
    :func:`density_time_derivative`.
    """
    x = np.asarray(x, dtype=np.float64)
    worst = 0.0
    for t in np.atleast_1d(times):
        t = float(t)
        p = EvolutionParams(gamma0, t)
        if time_derivative == "analytic":
            dPdt = density_time_derivative(s, p, x)
        elif time_derivative == "central":
            lo = max(t - h, 0.0)
            hi = t + h
            dPdt = (probability_density(s, p.at(hi), x) - probability_density(s, p.at(lo), x)) / (hi - lo)
            if lo == t:
                # second-order one-sided difference at the initial time
                p2 = probability_density(s, p.at(t + 2 * h), x)
                p1 = probability_density(s, p.at(t + h), x)
                p0 = probability_density(s, p, x)
                dPdt = (-3 * p0 + 4 * p1 - p2) / (2 * h)
        else:
            raise ValueError(f"unknown time_derivative {time_derivative!r}")
        res = np.abs(dPdt + current_gradient(s, p, x))
        worst = max(worst, float(res.max()))
    return worst


def classical_center(a, p: EvolutionParams) -> float:
    """Packet centre sqrt2 Re a(t)."""
    return SQRT2 * complex(evolve_amplitude(a, p)).real


def quantile_starts(s: SuperposedState, n_per_packet: int) -> np.ndarray:
    """Equally spaced quantiles of each component's Gaussian at t = 0, sorted."""
    if n_per_packet < 1:
        raise DomainError("need at least one start per packet")
    unit = NormalDist(0.0, 1.0 / SQRT2)
    qs = [(k + 0.5) / n_per_packet for k in range(n_per_packet)]
    offsets = np.array([unit.inv_cdf(q) for q in qs])
    centres = sorted({SQRT2 * a.re for a in s.amplitudes})
    return np.sort(np.concatenate([c + offsets for c in centres]))


def integrate_trajectories(s: SuperposedState, gamma0: float, initial, t_final: float,
                           dt: float = 1e-3, stride: int = 1, floor: float = DENSITY_FLOOR,
                           vmax: float = VELOCITY_CLAMP, backend=None) -> TrajectoryEnsemble:
    """Fixed-step RK4 on dx/dt = J/P from every initial position."""
    initial = np.asarray(initial, dtype=np.float64)
    if t_final < 0 or dt <= 0:
        raise DomainError("need t_final >= 0 and dt > 0")
    P0 = probability_density(s, EvolutionParams(gamma0, 0.0), initial)
    if np.any(P0 <= floor):
        raise DomainError("every start point needs P(x, 0) above the density floor")
    nsteps = int(round(t_final / dt))
    if nsteps and abs(nsteps * dt - t_final) > 1e-9 * max(t_final, 1.0):
        nsteps = math.ceil(t_final / dt)
        dt = t_final / nsteps
    stride = max(1, int(stride))
    amps, w, z = _arrays(s)
    paths, halted = kernels.guidance_rk4(initial, amps, w, z, gamma0, 0.0, dt, nsteps,
                                         stride, floor, vmax, backend=backend)
    times = dt * stride * np.arange(paths.shape[1])
    if halted.any():
        warnings.warn(f"{int(halted.sum())} path(s) hit the density floor and were frozen",
                      DensityFloorHit, stacklevel=2)
    return TrajectoryEnsemble(initial, times, paths, halted, dt ** 4, gamma0)


def sample_grid(s: SuperposedState, gamma0: float, x, times) -> GridField:
    """P and J on a space-time lattice."""
    x = np.asarray(x, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    P = np.empty((times.size, x.size))
    J = np.empty_like(P)
    for k, t in enumerate(times):
        P[k], J[k] = density_and_current(s, EvolutionParams(gamma0, float(t)), x)
    return GridField(x, times, P, J, gamma0)


def fringe_contrast(P_row, x, window: float = 0.5) -> float:
    """max(P)/min(P) over |x| <= window; large when interference fringes are sharp."""
    P_row = np.asarray(P_row)
    sel = np.abs(np.asarray(x)) <= window
    lo = max(float(P_row[sel].min()), 1e-300)
    return float(P_row[sel].max()) / lo


def fringe_visibility(P_row, x, window: float = 0.5) -> float:
    """(max - min)/(max + min) of P over |x| <= window."""
    P_row = np.asarray(P_row)
    sel = np.abs(np.asarray(x)) <= window
    hi, lo = float(P_row[sel].max()), float(P_row[sel].min())
    return (hi - lo) / (hi + lo)
