"""Two identical damped oscillators prepared in (anti)symmetrized coherent states.

The two-particle state is ``N (|a>|b> +- |b>|a>)`` for bosons and fermions;
distinguishable particles use the equal-weight mixture of the two orderings.
Under the master equation every exchange cross term is multiplied by
``|f(t)|^2``, the product of the single-particle decoherence factors of
``|a><b|`` and ``|b><a|``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad
from scipy.special import erf, roots_hermite

from . import fock
from .coherence import CoherenceResult, cr_mixed_energy
from .errors import DegenerateInput, DomainError, EmptyWindow
from .faddeeva import complex_erf
from .states import (
    AmplitudeLike,
    CoherentAmplitude,
    EvolutionParams,
    decoherence_factor,
    evolve_amplitude,
    overlap,
    position_wavefunction,
)

SQRT2 = math.sqrt(2.0)
EMPTY_WINDOW_TOL = 1e-300

__all__ = [
    "Statistics",
    "TwoParticleState",
    "DetectorWindow",
    "MssDifferences",
    "reduced_single_particle",
    "cr_by_statistics",
    "mss",
    "mss_differences",
    "mss_gamma_derivative",
    "two_particle_position_density",
    "window_integrals",
    "joint_detection_ratio",
    "complex_erf",
]


class Statistics(enum.Enum):
    MB = 0
    BE = 1
    FD = -1

    @property
    def sign(self) -> int:
        return self.value

    @classmethod
    def parse(cls, name) -> "Statistics":
        if isinstance(name, cls):
            return name
        try:
            return cls[str(name).upper()]
        except KeyError:
            raise DomainError(f"unknown statistics {name!r}; expected MB, BE or FD") from None


@dataclass(frozen=True)
class TwoParticleState:
    """Single-particle labels ``alpha`` and ``beta`` plus the exchange statistics."""

    alpha: CoherentAmplitude
    beta: CoherentAmplitude
    stats: Statistics

    def __post_init__(self):
        object.__setattr__(self, "alpha", CoherentAmplitude.of(self.alpha))
        object.__setattr__(self, "beta", CoherentAmplitude.of(self.beta))
        object.__setattr__(self, "stats", Statistics.parse(self.stats))
        if self.stats is Statistics.FD and self.alpha == self.beta:
            raise DegenerateInput("an antisymmetric state needs alpha != beta")

    @classmethod
    def build(cls, alpha: AmplitudeLike, beta: AmplitudeLike, stats) -> "TwoParticleState":
        return cls(CoherentAmplitude.of(alpha), CoherentAmplitude.of(beta), Statistics.parse(stats))

    @property
    def overlap_sq(self) -> float:
        """|<alpha|beta>|^2, conserved by the evolution once |f|^2 is included."""
        return abs(overlap(self.alpha, self.beta)) ** 2

    @property
    def norm_sq(self) -> float:
        if self.stats is Statistics.MB:
            return 0.5
        return 1.0 / (2.0 * (1.0 + self.stats.sign * self.overlap_sq))

    @property
    def norm(self) -> float:
        return math.sqrt(self.norm_sq)

    def is_symmetric_real(self) -> bool:
        """True for beta = -alpha with alpha real, where closed forms apply."""
        return self.alpha.im == 0.0 and self.beta.im == 0.0 and self.beta.re == -self.alpha.re

    def with_stats(self, stats) -> "TwoParticleState":
        return TwoParticleState(self.alpha, self.beta, Statistics.parse(stats))


@dataclass(frozen=True)
class DetectorWindow:
    half_width: float
    center: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.half_width) and self.half_width > 0):
            raise DomainError(f"detector half-width must be > 0, got {self.half_width!r}")
        if not math.isfinite(self.center):
            raise DomainError("detector centre must be finite")

    @property
    def lo(self) -> float:
        return self.center - self.half_width

    @property
    def hi(self) -> float:
        return self.center + self.half_width


def _zero_temperature(p: EvolutionParams):
    if p.nbar:
        raise DomainError("identical-particle observables are defined at zero temperature only")


def _exchange_weight(tp: TwoParticleState, p: EvolutionParams) -> float:
    """|f(t)|^2 for the |alpha(t)><beta(t)| cross term."""
    return abs(decoherence_factor(tp.alpha, tp.beta, p)) ** 2


# ---------------------------------------------------------------------------
# reduced single-particle state and its coherence
# ---------------------------------------------------------------------------


def reduced_single_particle(tp: TwoParticleState, p: EvolutionParams, n_max=None,
                            tail_tol=fock.DEFAULT_TAIL_TOL) -> fock.FockDensityMatrix:
    """One-particle state left after tracing out the partner.

    BE/FD: N^2 (|a><a| + |b><b| +- <a|b>|f|^2 |a><b| +- <b|a>|f|^2 |b><a|) at time t.
    MB: (|a><a| + |b><b|)/2.
    """
    _zero_temperature(p)
    at, bt = evolve_amplitude(tp.alpha, p), evolve_amplitude(tp.beta, p)
    if n_max is None:
        n_max = fock.default_nmax(max(abs(tp.alpha), abs(tp.beta)) ** 2)
    fock._check_tail(max(abs(at), abs(bt)) ** 2, n_max, tail_tol)
    V = fock.coherent_matrix([at, bt], n_max)
    if tp.stats is Statistics.MB:
        W = np.diag([0.5, 0.5]).astype(np.complex128)
    else:
        s = tp.stats.sign
        f2 = _exchange_weight(tp, p)
        ov = overlap(at, bt)
        W = tp.norm_sq * np.array([[1.0, s * ov * f2], [s * ov.conjugate() * f2, 1.0]])
    rho = V @ W @ V.conj().T
    return fock.FockDensityMatrix(0.5 * (rho + rho.conj().T))


def cr_by_statistics(tp: TwoParticleState, p: EvolutionParams, n_max=None, backend=None) -> CoherenceResult:
    """Energy-basis relative entropy of coherence of the reduced single-particle state."""
    return cr_mixed_energy(reduced_single_particle(tp, p, n_max), backend=backend)


# ---------------------------------------------------------------------------
# mean square separation
# ---------------------------------------------------------------------------


def _x_element(a: complex, b: complex) -> complex:
    """<a|x|b> with x = (a + a^dag)/sqrt2."""
    return overlap(a, b) * (a.conjugate() + b) / SQRT2


def _x2_element(a: complex, b: complex) -> complex:
    """<a|x^2|b>."""
    return overlap(a, b) * ((a.conjugate() + b) ** 2 + 1.0) / 2.0


def _mss_closed_form(tp: TwoParticleState, p: EvolutionParams) -> float:
    a2 = tp.alpha.re ** 2
    E = p.damping
    c2 = math.cos(p.t) ** 2
    mb = 1.0 + 8.0 * a2 * E * c2
    if tp.stats is Statistics.MB:
        return mb
    s = tp.stats.sign
    q = math.exp(-4.0 * a2)
    s2 = math.sin(p.t) ** 2
    return (mb + s * q * (1.0 - 8.0 * a2 * E * s2)) / (1.0 + s * q)


def _mss_matrix_elements(tp: TwoParticleState, p: EvolutionParams) -> float:
    a = complex(evolve_amplitude(tp.alpha, p))
    b = complex(evolve_amplitude(tp.beta, p))
    mb = (_x2_element(a, a).real + _x2_element(b, b).real
          - 2.0 * _x_element(a, a).real * _x_element(b, b).real)
    if tp.stats is Statistics.MB:
        return mb
    s = tp.stats.sign
    f2 = _exchange_weight(tp, p)
    exch = (-2.0 * abs(_x_element(a, b)) ** 2
            + 2.0 * (_x2_element(a, b) * overlap(b, a)).real)
    return 2.0 * tp.norm_sq * (mb + s * f2 * exch)


def _mss_quadrature(tp: TwoParticleState, p: EvolutionParams, order: int = 96) -> float:
    """Gauss-Hermite evaluation of int int (x1 - x2)^2 rho(x1, x2) dx1 dx2."""
    nodes, weights = roots_hermite(order)
    x1, x2 = np.meshgrid(nodes, nodes, indexing="ij")
    w = np.outer(weights, weights) * np.exp(x1 ** 2 + x2 ** 2)
    dens = two_particle_position_density(tp, p, x1, x2)
    return float(np.sum(w * (x1 - x2) ** 2 * dens))


def mss(tp: TwoParticleState, p: EvolutionParams, method: str = "auto") -> float:
    """Mean square separation <(x1 - x2)^2>.

    ``auto`` uses the closed form when beta = -alpha with alpha real and the
    coherent-state matrix elements otherwise.  ``quadrature`` integrates the
    two-particle position density and exists for cross-checking.
    """
    _zero_temperature(p)
    if method == "auto":
        method = "closed_form" if tp.is_symmetric_real() else "matrix_elements"
    if method == "closed_form":
        if not tp.is_symmetric_real():
            raise DomainError("closed form needs beta = -alpha with alpha real")
        return _mss_closed_form(tp, p)
    if method == "matrix_elements":
        return _mss_matrix_elements(tp, p)
    if method == "quadrature":
        return _mss_quadrature(tp, p)
    raise ValueError(f"unknown method {method!r}")


class MssDifferences(NamedTuple):
    fd_mb: float
    mb_be: float
    fd_be: float

    @property
    def degenerate(self) -> bool:
        """Set when alpha = 0 and all three differences vanish identically."""
        return self.fd_mb == 0.0 and self.mb_be == 0.0 and self.fd_be == 0.0


def mss_differences(alpha: float, p: EvolutionParams) -> MssDifferences:
    """FD - MB, MB - BE and FD - BE for beta = -alpha, alpha real.

    Written with e^{-4 alpha^2} so large alpha does not overflow.  At alpha = 0
    the result is (0, 0, 0) with ``degenerate`` set.
    """
    x = 4.0 * float(alpha) ** 2
    if x == 0.0:
        return MssDifferences(0.0, 0.0, 0.0)
    pref = 8.0 * float(alpha) ** 2 * p.damping
    q = math.exp(-x)
    fd_mb = pref * q / -math.expm1(-x)
    mb_be = pref * q / (1.0 + q)
    fd_be = pref * 2.0 * q / -math.expm1(-2.0 * x)
    return MssDifferences(fd_mb, mb_be, fd_be)


def mss_gamma_derivative(alpha: float, p: EvolutionParams, stats) -> float:
    """d/d(gamma0) of the closed-form mean square separation (beta = -alpha, alpha real)."""
    stats = Statistics.parse(stats)
    a2 = float(alpha) ** 2
    pref = -8.0 * a2 * p.t * p.damping
    c2, s2 = math.cos(p.t) ** 2, math.sin(p.t) ** 2
    if stats is Statistics.MB:
        return pref * c2
    s = stats.sign
    q = math.exp(-4.0 * a2)
    return pref * (c2 - s * q * s2) / (1.0 + s * q)


# ---------------------------------------------------------------------------
# two-particle density and joint detection
# ---------------------------------------------------------------------------


def two_particle_position_density(tp: TwoParticleState, p: EvolutionParams, x1, x2):
    """<x1, x2|rho(t)|x1, x2>; symmetric under x1 <-> x2."""
    _zero_temperature(p)
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    pa1 = position_wavefunction(tp.alpha, p, x1)
    pb1 = position_wavefunction(tp.beta, p, x1)
    pa2 = position_wavefunction(tp.alpha, p, x2)
    pb2 = position_wavefunction(tp.beta, p, x2)
    mb = 0.5 * (np.abs(pa1) ** 2 * np.abs(pb2) ** 2 + np.abs(pb1) ** 2 * np.abs(pa2) ** 2)
    if tp.stats is Statistics.MB:
        return mb
    cross = (pa1 * np.conj(pb1) * pb2 * np.conj(pa2)).real
    out = 2.0 * tp.norm_sq * (mb + tp.stats.sign * _exchange_weight(tp, p) * cross)
    return out[()] if np.ndim(out) == 0 else out


def _gaussian_window(centre: float, w: DetectorWindow) -> float:
    """int over the window of pi^{-1/2} exp(-(x - centre)^2)."""
    return 0.5 * float(erf(w.hi - centre) - erf(w.lo - centre))


def window_integrals(tp: TwoParticleState, p: EvolutionParams, w: DetectorWindow,
                     method: str = "auto"):
    """(I_alpha, I_beta, I_cross) over the detector window.

    I_cross = int psi_alpha conj(psi_beta) dx.  The closed form (erf of a complex
    argument) needs beta = -alpha real and a centred window; ``quadrature``
    works for any labels.
    """
    if method == "auto":
        method = "closed_form" if (tp.is_symmetric_real() and w.center == 0.0) else "quadrature"
    at = complex(evolve_amplitude(tp.alpha, p))
    bt = complex(evolve_amplitude(tp.beta, p))
    if method == "closed_form":
        if not (tp.is_symmetric_real() and w.center == 0.0):
            raise DomainError("closed form needs beta = -alpha real and a window centred at 0")
        d = w.half_width
        c = SQRT2 * at.real
        i_a = 0.5 * float(erf(d - c) + erf(d + c))
        k = SQRT2 * at.imag
        i_cross = 0.5 * math.exp(-2.0 * abs(at) ** 2) * complex(complex_erf(d + 1j * k) + complex_erf(d - 1j * k))
        return i_a, i_a, i_cross
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    i_a = _gaussian_window(SQRT2 * at.real, w)
    i_b = _gaussian_window(SQRT2 * bt.real, w)

    def integrand(x, part):
        v = position_wavefunction(tp.alpha, p, x) * np.conj(position_wavefunction(tp.beta, p, x))
        return float(v.real if part == 0 else v.imag)

    kw = dict(epsabs=1e-13, epsrel=1e-10, limit=200)
    re = quad(integrand, w.lo, w.hi, args=(0,), **kw)[0]
    im = quad(integrand, w.lo, w.hi, args=(1,), **kw)[0]
    return i_a, i_b, complex(re, im)


def joint_detection_ratio(tp: TwoParticleState, p: EvolutionParams, w: DetectorWindow,
                          method: str = "auto") -> float:
    """p_+- = P_joint(BE or FD) / P_joint(MB) for a detector covering the window.

    Equals 2 N^2 (1 +- |f|^2 |I_cross|^2 / (I_alpha I_beta)); 1 for MB.
    """
    _zero_temperature(p)
    i_a, i_b, i_cross = window_integrals(tp, p, w, method)
    if i_a < EMPTY_WINDOW_TOL or i_b < EMPTY_WINDOW_TOL:
        raise EmptyWindow(f"detector window sees no probability (I_alpha={i_a:.3g}, I_beta={i_b:.3g})")
    if tp.stats is Statistics.MB:
        return 1.0
    ratio = _exchange_weight(tp, p) * abs(i_cross) ** 2 / (i_a * i_b)
    return 2.0 * tp.norm_sq * (1.0 + tp.stats.sign * ratio)
