"""Coherent-state algebra for the damped oscillator in scaled units.

Amplitudes rotate and shrink as ``alpha(t) = alpha * exp(-(i + gamma0/2) t)``
and superposition cross terms pick up the decoherence factor
``f = <beta|alpha> ** (1 - exp(-gamma0 t))``.  Everything here is a pure
function of immutable values.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, replace
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DegenerateInput, OverlapUnderflow

SQRT2 = math.sqrt(2.0)
PI_QUARTER = math.pi ** -0.25


@dataclass(frozen=True)
class CoherentAmplitude:
    """Complex label of a coherent state, stored as real and imaginary parts."""

    re: float
    im: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ValueError(f"non-finite coherent amplitude ({self.re}, {self.im})")

    @classmethod
    def of(cls, value: "AmplitudeLike") -> "CoherentAmplitude":
        if isinstance(value, cls):
            return value
        z = complex(value)
        return cls(z.real, z.imag)

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    def __complex__(self):
        return self.value

    def __abs__(self):
        return math.hypot(self.re, self.im)

    def __neg__(self):
        return CoherentAmplitude(-self.re, -self.im)

    def scaled(self, factor: float) -> "CoherentAmplitude":
        return CoherentAmplitude(self.re * factor, self.im * factor)


AmplitudeLike = Union[CoherentAmplitude, complex, float, int]


def as_complex(a: AmplitudeLike) -> complex:
    return complex(a)


@dataclass(frozen=True)
class EvolutionParams:
    """Scaled damping rate, time and thermal occupation (0 means zero temperature)."""

    gamma0: float = 0.0
    t: float = 0.0
    nbar: float = 0.0

    def __post_init__(self):
        for name in ("gamma0", "t", "nbar"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")

    @property
    def relaxation_time(self) -> float:
        if self.gamma0 == 0:
            raise DegenerateInput("relaxation time is undefined for gamma0 = 0")
        return 1.0 / self.gamma0

    @property
    def damping(self) -> float:
        """exp(-gamma0 t), the factor by which |alpha|^2 has shrunk."""
        return math.exp(-self.gamma0 * self.t)

    @property
    def decoherence_exponent(self) -> float:
        """1 - exp(-gamma0 t), computed without cancellation."""
        return -math.expm1(-self.gamma0 * self.t)

    def at(self, t: float) -> "EvolutionParams":
        return replace(self, t=t)


# ---------------------------------------------------------------------------
# overlaps and evolution
# ---------------------------------------------------------------------------


def overlap_log(a: AmplitudeLike, b: AmplitudeLike) -> complex:
    """Analytic logarithm of <a|b>: -(|a|^2 + |b|^2)/2 + conj(a) b.

    The real part is evaluated as -|a - b|^2 / 2, which is exact for a = b.
    """
    a, b = complex(a), complex(b)
    return complex(-0.5 * abs(a - b) ** 2, (a.conjugate() * b).imag)


def overlap(a: AmplitudeLike, b: AmplitudeLike) -> complex:
    """<a|b> for two coherent states."""
    return cmath.exp(overlap_log(a, b))


def overlap_power(a: AmplitudeLike, b: AmplitudeLike, power: float) -> complex:
    """<a|b> ** power, taking the power of the exponent rather than of the value.

    Coherent-state overlaps are exponentials, so raising the exponent keeps the
    result analytic in ``power`` and consistent with the evolved states.
    """
    return cmath.exp(power * overlap_log(a, b))


def evolve_amplitude(a: AmplitudeLike, p: EvolutionParams) -> CoherentAmplitude:
    z = complex(a) * cmath.exp(-(1j + 0.5 * p.gamma0) * p.t)
    return CoherentAmplitude(z.real, z.imag)


def decoherence_factor(a: AmplitudeLike, b: AmplitudeLike, p: EvolutionParams) -> complex:
    """Damping factor f(t) = <b|a> ** (1 - exp(-gamma0 t)) of the |a><b| term.

    Emits :class:`OverlapUnderflow` if the result underflows to zero.
    """
    s = p.decoherence_exponent
    if s == 0.0:
        return 1.0 + 0.0j
    log_ov = overlap_log(b, a)
    if s * log_ov.real < -745.0:
        warnings.warn(f"decoherence factor underflows (log modulus {s * log_ov.real:.3g})",
                      OverlapUnderflow, stacklevel=2)
        return 0.0j
    return cmath.exp(s * log_ov)


def evolved_overlap_identity_check(a: AmplitudeLike, b: AmplitudeLike,
                                   p: EvolutionParams) -> float:
    """|<a(t)|b(t)> - <a|b>^exp(-gamma0 t)|, which must vanish."""
    lhs = overlap(evolve_amplitude(a, p), evolve_amplitude(b, p))
    rhs = overlap_power(a, b, p.damping)
    return abs(lhs - rhs)


def decoherence_time(a: AmplitudeLike, b: AmplitudeLike, gamma0: float) -> float:
    """Short-time decoherence time 2 / (gamma0 |a - b|^2)."""
    sep2 = abs(complex(a) - complex(b)) ** 2
    if gamma0 <= 0 or sep2 == 0:
        raise DegenerateInput("decoherence time needs gamma0 > 0 and distinct amplitudes")
    return 2.0 / (gamma0 * sep2)


# ---------------------------------------------------------------------------
# wavefunctions
# ---------------------------------------------------------------------------


def position_wavefunction(a: AmplitudeLike, p: EvolutionParams, x):
    """<x|a(t)> evaluated on a scalar or array of positions.

    The phase is ``exp(-i Re(a) Im(a))``, the one that follows from the Fock
    expansion of the coherent state, so superpositions built from these
    wavefunctions agree with their Fock-space counterparts.
    """
    at = complex(evolve_amplitude(a, p))
    ar, ai = at.real, at.imag
    x = np.asarray(x, dtype=np.float64)
    out = PI_QUARTER * np.exp(-0.5 * (x - SQRT2 * ar) ** 2 + 1j * (SQRT2 * ai * x - ar * ai))
    return out[()] if out.ndim == 0 else out


def momentum_wavefunction(a: AmplitudeLike, p: EvolutionParams, mom):
    """Fourier transform (2 pi)^(-1/2) int psi(x) exp(-i p x) dx of the position wavefunction.

    The density is a Gaussian of variance 1/2 centred on sqrt(2) Im(a(t)).
    """
    at = complex(evolve_amplitude(a, p))
    ar, ai = at.real, at.imag
    k = np.asarray(mom, dtype=np.float64)
    out = PI_QUARTER * np.exp(-0.5 * (k - SQRT2 * ai) ** 2 - 1j * SQRT2 * ar * k + 1j * ar * ai)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# superpositions
# ---------------------------------------------------------------------------


def gram_matrix(amps: Sequence[AmplitudeLike]) -> np.ndarray:
    """G[i, j] = <a_i|a_j>."""
    z = np.array([complex(a) for a in amps])
    logs = -0.5 * np.abs(z[:, None] - z[None, :]) ** 2 + 1j * (np.conj(z)[:, None] * z[None, :]).imag
    return np.exp(logs)


@dataclass(frozen=True)
class SuperposedState:
    """``normalization * sum_i c_i |a_i>`` with unit norm.

    ``coefficients`` are kept unnormalised so that the prefactor (the usual
    N, N_Phi, N_Psi or N_T of a cat construction) is available on its own.
    """

    coefficients: tuple
    amplitudes: tuple
    normalization: float

    @classmethod
    def from_components(cls, components: Iterable[tuple]) -> "SuperposedState":
        """Build from ``(coefficient, amplitude)`` pairs, merging equal amplitudes."""
        merged: dict = {}
        for c, a in components:
            a = CoherentAmplitude.of(a)
            merged[a] = merged.get(a, 0j) + complex(c)
        items = [(c, a) for a, c in merged.items() if c != 0]
        if not items:
            raise DegenerateInput("superposition has no non-zero component")
        coeffs = np.array([c for c, _ in items])
        amps = [a for _, a in items]
        norm2 = float(np.real(np.conj(coeffs) @ gram_matrix(amps) @ coeffs))
        if norm2 <= 0:
            raise DegenerateInput("superposition has zero norm")
        return cls(tuple(complex(c) for c in coeffs), tuple(amps), 1.0 / math.sqrt(norm2))

    @classmethod
    def coherent(cls, a: AmplitudeLike) -> "SuperposedState":
        return cls.from_components([(1.0, a)])

    def __len__(self):
        return len(self.amplitudes)

    @property
    def amplitude_array(self) -> np.ndarray:
        return np.array([a.value for a in self.amplitudes])

    @property
    def coefficient_array(self) -> np.ndarray:
        return np.array(self.coefficients)

    def norm(self) -> float:
        c = self.coefficient_array
        return float(np.real(np.conj(c) @ gram_matrix(self.amplitudes) @ c)) * self.normalization ** 2

    def pair_weights(self) -> np.ndarray:
        """w[i, j] = N^2 c_i conj(c_j)."""
        c = self.coefficient_array
        return self.normalization ** 2 * np.outer(c, np.conj(c))

    def overlap_logs(self) -> np.ndarray:
        """z[i, j] = log <a_j|a_i>, the exponent behind the decoherence factors."""
        z = self.amplitude_array
        return -0.5 * np.abs(z[:, None] - z[None, :]) ** 2 + 1j * (z[:, None] * np.conj(z)[None, :]).imag

    def decoherence_factors(self, p: EvolutionParams) -> np.ndarray:
        return np.exp(p.decoherence_exponent * self.overlap_logs())

    def max_modulus_sq(self) -> float:
        return max(abs(a) ** 2 for a in self.amplitudes)


CAT_KINDS = ("plus_minus_alpha", "half_alpha_pair", "two_cat_superposition")


def make_cat(alpha: AmplitudeLike, kind: str = "plus_minus_alpha") -> SuperposedState:
    """Cat states built from +-alpha.

    ``plus_minus_alpha``: |alpha> + |-alpha>;
    ``half_alpha_pair``: |alpha/2> + |-alpha/2>;
    ``two_cat_superposition``: (|Phi> + |Psi>)/sqrt(2) of the two normalised cats.
    """
    a = CoherentAmplitude.of(alpha)
    if kind == "plus_minus_alpha":
        return SuperposedState.from_components([(1.0, a), (1.0, -a)])
    if kind == "half_alpha_pair":
        h = a.scaled(0.5)
        return SuperposedState.from_components([(1.0, h), (1.0, -h)])
    if kind == "two_cat_superposition":
        phi = make_cat(a, "plus_minus_alpha")
        psi = make_cat(a, "half_alpha_pair")
        r = 1.0 / math.sqrt(2.0)
        comps = [(r * phi.normalization * c, amp) for c, amp in zip(phi.coefficients, phi.amplitudes)]
        comps += [(r * psi.normalization * c, amp) for c, amp in zip(psi.coefficients, psi.amplitudes)]
        return SuperposedState.from_components(comps)
    raise ValueError(f"unknown cat kind {kind!r}; expected one of {CAT_KINDS}")
