"""Relative entropy of coherence in the energy, position and momentum bases."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from . import fock
from .errors import DomainError, NegativeBeyondTolerance, NotPure
from .states import (
    AmplitudeLike,
    EvolutionParams,
    SuperposedState,
    evolve_amplitude,
    make_cat,
    momentum_wavefunction,
    position_wavefunction,
)

LN2 = math.log(2.0)
CLAMP_TOL = 1e-9
BASES = ("energy", "position", "momentum")
METHODS = ("closed_form", "series", "spectral", "quadrature")


@dataclass(frozen=True)
class CoherenceResult:
    value: float
    basis: str
    method: str
    tail_bound: float = 0.0

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")

    def __float__(self):
        return self.value


def _clamped(value: float) -> float:
    if value < -CLAMP_TOL:
        raise NegativeBeyondTolerance(f"relative entropy of coherence came out {value:.3g}")
    return max(value, 0.0)


# ---------------------------------------------------------------------------
# energy basis
# ---------------------------------------------------------------------------


def poisson_log_factorial_series(lam: float):
    """sum_n e^{-lam} lam^n ln(n!)/n! and a bound on the neglected tail.

    Terms are summed until they drop below 1e-15 of the partial sum and the
    index is past lam + 10 sqrt(lam).
    """
    if lam <= 0:
        return 0.0, 0.0
    n_hi = int(lam + 10.0 * math.sqrt(lam) + 64)
    lf = fock.log_factorials(n_hi)
    ln_lam = math.log(lam)
    total = 0.0
    n = 2
    while True:
        if n > n_hi:
            n_hi *= 2
            lf = fock.log_factorials(n_hi)
        term = math.exp(-lam + n * ln_lam - lf[n]) * lf[n]
        total += term
        if n > lam + 10.0 * math.sqrt(lam) and term < 1e-15 * total:
            break
        n += 1
    if n + 1 > n_hi:
        lf = fock.log_factorials(n + 1)
    ratio = lam / (n + 1) * lf[n + 1] / lf[n]
    tail = term * ratio / (1.0 - ratio) if ratio < 1 else math.inf
    return total, tail


def cr_coherent_energy(a: AmplitudeLike, p: EvolutionParams) -> CoherenceResult:
    """Energy-basis coherence of the (always pure) evolved coherent state.

    C = lam (1 - ln lam) + e^{-lam} sum_n lam^n ln(n!)/n!  with lam = |a(t)|^2.
    """
    lam = abs(complex(a)) ** 2 * p.damping
    if lam == 0.0:
        return CoherenceResult(0.0, "energy", "series")
    series, tail = poisson_log_factorial_series(lam)
    value = lam * (1.0 - math.log(lam)) + series
    return CoherenceResult(_clamped(float(value)), "energy", "series", float(tail))


def cr_pure_state_energy(s: SuperposedState, p: EvolutionParams, n_max=None) -> CoherenceResult:
    """Entropy of the Fock populations of a state that stays pure."""
    if p.gamma0 > 0 and len(s) >= 2:
        raise NotPure("a damped superposition is mixed; use cr_mixed_energy")
    if n_max is None:
        n_max = fock.default_nmax(s.max_modulus_sq())
    v = fock.superposition_vector(s, p, n_max)
    return CoherenceResult(_clamped(fock.diagonal_entropy(np.diag(np.abs(v) ** 2))), "energy", "spectral")


def cr_cat_closed_form(alpha_mod_sq: float) -> CoherenceResult:
    """Closed form for the cat |alpha> + |-alpha> in the energy basis (time independent).

    ln(2 cosh x) - x ln x tanh x - (2 cosh x)^{-1} sum_n x^n w_n ln w_n,
    w_n = (1 + (-1)^n)/n!, with x = |alpha|^2.
    """
    x = float(alpha_mod_sq)
    if x < 0:
        raise DomainError("|alpha|^2 must be >= 0")
    if x == 0.0:
        return CoherenceResult(0.0, "energy", "closed_form")
    ln_cosh = x + math.log1p(math.exp(-2.0 * x)) - LN2
    ln_x = math.log(x)
    n_hi = int(x + 10.0 * math.sqrt(x) + 64)
    lf = fock.log_factorials(n_hi + 2)
    series = 0.0
    n = 0
    while n <= n_hi:
        # even n only: x^n (2/n!) ln(2/n!) / (2 cosh x)
        mag = math.exp(n * ln_x - lf[n] - ln_cosh)
        term = mag * (LN2 - lf[n])
        series += term
        if n > x + 10.0 * math.sqrt(x) and mag < 1e-18:
            break
        n += 2
    value = (LN2 + ln_cosh) - x * ln_x * math.tanh(x) - series
    return CoherenceResult(_clamped(float(value)), "energy", "closed_form")


def cr_mixed_energy(m, backend=None) -> CoherenceResult:
    """S(diagonal part) - S(rho) for a Fock-space density matrix."""
    value = fock.diagonal_entropy(m) - fock.von_neumann_entropy(m, backend=backend)
    return CoherenceResult(_clamped(value), "energy", "spectral")


def cr_superposition_energy(s: SuperposedState, p: EvolutionParams, n_max=None) -> CoherenceResult:
    """Energy-basis coherence of any zero-temperature evolved superposition."""
    if len(s) == 1 or p.gamma0 == 0:
        return cr_pure_state_energy(s, p, n_max)
    return cr_mixed_energy(fock.density_from_superposition(s, p, n_max))


# ---------------------------------------------------------------------------
# continuous bases
# ---------------------------------------------------------------------------


def cr_gaussian_position(variance: float) -> CoherenceResult:
    """Differential entropy 1/2 [1 + ln(2 pi variance)] of a Gaussian density."""
    if not variance > 0:
        raise DomainError(f"variance must be > 0, got {variance!r}")
    return CoherenceResult(0.5 * (1.0 + math.log(2.0 * math.pi * variance)), "position", "closed_form")


def nbar_from_kbt(kbt: float) -> float:
    """Mean thermal occupation 1/(e^{1/kT} - 1) with hbar omega0 = 1."""
    if kbt < 0:
        raise DomainError("temperature must be >= 0")
    if kbt == 0:
        return 0.0
    inv = 1.0 / kbt
    if inv > 745.0:
        return 0.0
    return 1.0 / math.expm1(inv)


def kbt_from_nbar(nbar: float) -> float:
    if nbar < 0:
        raise DomainError("nbar must be >= 0")
    if nbar == 0:
        return 0.0
    return 1.0 / math.log1p(1.0 / nbar)


def thermal_variance(p: EvolutionParams) -> float:
    """Position variance (2 nbar (1 - e^{-gamma0 t}) + 1)/2 of an evolved coherent state."""
    return 0.5 * (2.0 * p.nbar * p.decoherence_exponent + 1.0)


def low_temperature_limit(kbt: float) -> float:
    """Long-time, low-temperature approximation (1 + ln pi)/2 + e^{-1/kT}."""
    return 0.5 * (1.0 + math.log(math.pi)) + (math.exp(-1.0 / kbt) if kbt > 0 else 0.0)


def _differential_entropy_on_grid(density, centre: float, half_width: float = 12.0, n: int = 4001) -> float:
    x = np.linspace(centre - half_width, centre + half_width, n)
    P = density(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        integrand = np.where(P > 0, -P * np.log(P), 0.0)
    return float(trapezoid(integrand, x))


def cr_coherent_continuous(a: AmplitudeLike, p: EvolutionParams, basis: str = "position",
                           method: str = "closed_form") -> CoherenceResult:
    """Position- or momentum-basis coherence of the evolved coherent state.

    ``closed_form`` uses the Gaussian width (thermal width when ``p.nbar > 0``);
    ``quadrature`` integrates -P ln P of the wavefunction density directly and is
    only defined at zero temperature.
    """
    if basis not in ("position", "momentum"):
        raise DomainError(f"continuous basis expected, got {basis!r}")
    if method == "closed_form":
        r = cr_gaussian_position(thermal_variance(p))
        return CoherenceResult(r.value, basis, "closed_form")
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    if p.nbar:
        raise DomainError("quadrature path needs a pure state (nbar = 0)")
    at = complex(evolve_amplitude(a, p))
    if basis == "position":
        def density(x):
            return np.abs(position_wavefunction(a, p, x)) ** 2
        centre = math.sqrt(2.0) * at.real
    else:
        def density(k):
            return np.abs(momentum_wavefunction(a, p, k)) ** 2
        centre = math.sqrt(2.0) * at.imag
    return CoherenceResult(_differential_entropy_on_grid(density, centre), basis, "quadrature")


# ---------------------------------------------------------------------------
# superposition bounds
# ---------------------------------------------------------------------------


def cr_upper_bound_cat(a: AmplitudeLike, p: EvolutionParams) -> float:
    """[e^{-|a|^2} cosh|a|^2]^{-1} (C_coherent + ln 2), an upper bound for the cat."""
    x = abs(complex(a)) ** 2
    weight = 0.5 * (1.0 + math.exp(-2.0 * x))
    return (cr_coherent_energy(a, p).value + LN2) / weight


def cr_two_cat_inequality(alpha: AmplitudeLike, n_max=None):
    """(lhs, rhs) with lhs = C(T), rhs = N_T^2 [C(Phi) + C(Psi) + 2 ln 2] at gamma0 = 0."""
    p = EvolutionParams()
    T = make_cat(alpha, "two_cat_superposition")
    lhs = cr_pure_state_energy(T, p, n_max).value
    c_phi = cr_pure_state_energy(make_cat(alpha, "plus_minus_alpha"), p, n_max).value
    c_psi = cr_pure_state_energy(make_cat(alpha, "half_alpha_pair"), p, n_max).value
    rhs = T.normalization ** 2 * (c_phi + c_psi + 2.0 * LN2)
    return lhs, rhs
