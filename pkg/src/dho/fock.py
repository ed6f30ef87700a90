"""Truncated Fock-space representations and entropies."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammainc

from . import kernels
from .errors import DomainError, NoConvergence, TruncationTooSmall
from .states import AmplitudeLike, EvolutionParams, SuperposedState, evolve_amplitude

EIG_CLAMP = 1e-10
DEFAULT_TAIL_TOL = 1e-10


@lru_cache(maxsize=None)
def _log_factorials(n_max: int) -> np.ndarray:
    """ln(n!) for n = 0..n_max as a cumulative sum of ln k."""
    out = np.zeros(n_max + 1)
    if n_max > 0:
        out[1:] = np.cumsum(np.log(np.arange(1, n_max + 1, dtype=np.float64)))
    out.setflags(write=False)
    return out


def log_factorials(n_max: int) -> np.ndarray:
    return _log_factorials(int(n_max))


def poisson_tail(mean: float, n_max: int) -> float:
    """P(n > n_max) for a Poisson distribution of the given mean."""
    if mean <= 0:
        return 0.0
    # regularised lower incomplete gamma P(n_max + 1, mean) is the upper tail
    return float(gammainc(n_max + 1, mean))


def default_nmax(max_modulus_sq: float) -> int:
    """Cutoff leaving a Poisson tail far below 1e-12 for any |alpha|^2 up to the argument."""
    m = max(float(max_modulus_sq), 0.0)
    return int(math.ceil(m + 10.0 * math.sqrt(m) + 20.0))


def _check_tail(mean: float, n_max: int, tail_tol):
    if tail_tol is None:
        return
    tail = poisson_tail(mean, n_max)
    if tail > tail_tol:
        raise TruncationTooSmall(
            f"n_max={n_max} leaves Poisson tail {tail:.3g} > {tail_tol:.3g} for |alpha|^2={mean:.4g}")


@dataclass(frozen=True)
class FockVector:
    coeffs: np.ndarray

    @property
    def n_max(self) -> int:
        return self.coeffs.shape[0] - 1

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def inner(self, other: "FockVector") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.coeffs, other.coeffs))


@dataclass(frozen=True)
class FockDensityMatrix:
    elements: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.elements, dtype=np.complex128)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {e.shape}")
        object.__setattr__(self, "elements", e)

    @property
    def n_max(self) -> int:
        return self.elements.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.elements).real)

    def purity(self) -> float:
        e = self.elements
        return float(np.sum(np.abs(e) ** 2))

    def hermiticity_error(self) -> float:
        e = self.elements
        return float(np.max(np.abs(e - e.conj().T)))

    def populations(self) -> np.ndarray:
        return np.diagonal(self.elements).real.copy()

    def __sub__(self, other):
        return FockDensityMatrix(self.elements - _elements(other))

    def __add__(self, other):
        return FockDensityMatrix(self.elements + _elements(other))


def _elements(m) -> np.ndarray:
    if isinstance(m, FockDensityMatrix):
        return m.elements
    return np.asarray(m, dtype=np.complex128)


def coherent_fock_vector(a: AmplitudeLike, n_max: int, tail_tol=None) -> FockVector:
    """Coefficients e^{-|a|^2/2} a^n / sqrt(n!) by the recurrence c_{n+1} = c_n a / sqrt(n+1)."""
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    z = complex(a)
    _check_tail(abs(z) ** 2, n_max, tail_tol)
    c = np.empty(n_max + 1, dtype=np.complex128)
    c[0] = math.exp(-0.5 * abs(z) ** 2)
    for n in range(n_max):
        c[n + 1] = c[n] * z / math.sqrt(n + 1)
    return FockVector(c)


def coherent_matrix(amps, n_max: int) -> np.ndarray:
    """Columns are coherent Fock vectors, built in log space for large |a|."""
    z = np.asarray([complex(a) for a in amps])
    n = np.arange(n_max + 1)
    lf = log_factorials(n_max)
    out = np.zeros((n_max + 1, z.size), dtype=np.complex128)
    for k, zk in enumerate(z):
        if zk == 0:
            out[0, k] = 1.0
            continue
        logmag = -0.5 * abs(zk) ** 2 + n * math.log(abs(zk)) - 0.5 * lf
        out[:, k] = np.exp(logmag + 1j * n * cmath.phase(zk))
    return out


def superposition_vector(s: SuperposedState, p: EvolutionParams, n_max: int,
                         tail_tol=DEFAULT_TAIL_TOL) -> np.ndarray:
    """Fock coefficients of a superposition evolved without decoherence (pure case)."""
    amps_t = [evolve_amplitude(a, p) for a in s.amplitudes]
    _check_tail(max(abs(a) ** 2 for a in amps_t), n_max, tail_tol)
    return s.normalization * (coherent_matrix(amps_t, n_max) @ s.coefficient_array)


def density_from_superposition(s: SuperposedState, p: EvolutionParams, n_max=None,
                               tail_tol=DEFAULT_TAIL_TOL) -> FockDensityMatrix:
    """Analytic zero-temperature state N^2 sum_ij c_i c_j* f_ij |a_i(t)><a_j(t)|."""
    if p.nbar:
        raise DomainError("the closed-form superposition solution is zero-temperature only")
    if n_max is None:
        n_max = default_nmax(s.max_modulus_sq())
    amps_t = [evolve_amplitude(a, p) for a in s.amplitudes]
    _check_tail(max(abs(a) ** 2 for a in amps_t), n_max, tail_tol)
    V = coherent_matrix(amps_t, n_max)
    W = s.pair_weights() * s.decoherence_factors(p)
    rho = V @ W @ V.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return FockDensityMatrix(rho)


def projector(vec) -> FockDensityMatrix:
    v = vec.coeffs if isinstance(vec, FockVector) else np.asarray(vec, dtype=np.complex128)
    return FockDensityMatrix(np.outer(v, np.conj(v)))


def hermitian_eigenvalues(m, tol_rel=1e-13, max_sweeps=60, backend=None) -> np.ndarray:
    """All eigenvalues, descending, by cyclic Jacobi rotations."""
    a = _elements(m)
    scale = float(np.linalg.norm(a))
    if a.shape[0] == 0:
        return np.zeros(0)
    if scale == 0.0:
        return np.zeros(a.shape[0])
    ev, sweeps, off = kernels.jacobi_eigenvalues(a, tol_rel * scale, max_sweeps, backend=backend)
    if off > tol_rel * scale:
        raise NoConvergence(f"Jacobi did not converge in {sweeps} sweeps (off-diagonal {off:.3g})")
    return np.sort(ev)[::-1]


def _entropy_of(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def von_neumann_entropy(m, backend=None) -> float:
    """-tr(rho ln rho) in nats; eigenvalues above -1e-10 are clamped to zero."""
    lam = hermitian_eigenvalues(m, backend=backend)
    if lam.size and lam.min() < -EIG_CLAMP:
        raise DomainError(f"matrix has eigenvalue {lam.min():.3g} below -{EIG_CLAMP}")
    return _entropy_of(np.clip(lam, 0.0, None))


def diagonal_entropy(m) -> float:
    """Entropy of the populations, i.e. of the dephased state."""
    d = np.diagonal(_elements(m)).real
    return _entropy_of(np.clip(d, 0.0, None))


def trace_distance(a, b, backend=None) -> float:
    """Half the sum of absolute eigenvalues of ``a - b``."""
    lam = hermitian_eigenvalues(_elements(a) - _elements(b), backend=backend)
    return 0.5 * float(np.sum(np.abs(lam)))
