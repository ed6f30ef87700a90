"""Truncated-Fock integration of the damped-oscillator master equation.

This is the numerical oracle for the closed-form solutions: it knows nothing
about coherent states and only steps

    d rho/dt = -i[a^dag a, rho]
               + gamma0 (nbar + 1) (a rho a^dag - {a^dag a, rho}/2)
               + gamma0 nbar (a^dag rho a - {a a^dag, rho}/2)

forward with fixed-step RK4.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, StepTooLarge, TruncationTooSmall
from .fock import FockDensityMatrix, _elements

TRACE_DRIFT_TOL = 1e-6
TOP_LEVEL_TOL = 1e-8
# classical RK4 is stable for |h lambda| up to about 2.8 on both axes
RK4_STABILITY = 2.5


@dataclass(frozen=True)
class LadderOperators:
    a: np.ndarray
    adag: np.ndarray

    @classmethod
    def build(cls, n_max: int) -> "LadderOperators":
        a = np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=np.float64)), k=1).astype(np.complex128)
        return cls(a, a.conj().T.copy())

    @property
    def number(self) -> np.ndarray:
        return self.adag @ self.a

    def commutator_defect(self) -> np.ndarray:
        """a a^dag - a^dag a - 1; non-zero only in the last row/column."""
        n = self.a.shape[0]
        return self.a @ self.adag - self.adag @ self.a - np.eye(n)


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 0.005
    t_final: float = 0.0
    method: str = "rk4"
    renormalize: bool = False
    check_every: int = 200
    stability_check: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError("dt must be > 0")
        if self.t_final < 0:
            raise DomainError("t_final must be >= 0")
        if self.method != "rk4":
            raise DomainError(f"unsupported method {self.method!r}")


def lindblad_rhs(m, gamma0: float, nbar: float = 0.0) -> FockDensityMatrix:
    """d rho/dt for the damped oscillator, using the truncated ladder operators."""
    rho = _elements(m)
    return FockDensityMatrix(kernels.lindblad_rhs_np(rho, float(gamma0), float(nbar)))


def lindblad_rhs_operator(rho, gamma0: float, nbar: float, ops: LadderOperators) -> np.ndarray:
    """Same generator written with explicit operator products (slow, for cross-checks)."""
    a, ad = ops.a, ops.adag
    num = ad @ a
    aad = a @ ad
    out = -1j * (num @ rho - rho @ num)
    out += gamma0 * (nbar + 1.0) * (a @ rho @ ad - 0.5 * (num @ rho + rho @ num))
    out += gamma0 * nbar * (ad @ rho @ a - 0.5 * (aad @ rho + rho @ aad))
    return out


def max_stable_dt(n_max: int, gamma0: float, nbar: float = 0.0) -> float:
    """Conservative RK4 step limit from the generator's spectral radius."""
    radius = n_max + 2.0 * gamma0 * (2.0 * nbar + 1.0) * (n_max + 1)
    return RK4_STABILITY / max(radius, 1e-300)


def _top_population(rho: np.ndarray) -> float:
    d = np.diagonal(rho).real
    return float(np.sum(np.abs(d[-2:])))


def integrate(m0, gamma0: float, nbar: float, cfg: IntegratorConfig, backend=None) -> FockDensityMatrix:
    """Evolve ``m0`` to ``cfg.t_final``.

    The step is shrunk to divide ``t_final`` exactly.  Raises
    :class:`StepTooLarge` when the step is outside the RK4 stability range
    (unless ``cfg.stability_check`` is off) or the trace drifts by more than
    1e-6 (or the purity rises above tr^2), and :class:`TruncationTooSmall` when
    the two highest Fock levels carry more than 1e-8 of population.
    """
    rho = np.array(_elements(m0), dtype=np.complex128, copy=True)
    n_max = rho.shape[0] - 1
    if cfg.stability_check and cfg.dt > max_stable_dt(n_max, gamma0, nbar):
        raise StepTooLarge(f"dt={cfg.dt} exceeds the RK4 stability limit "
                           f"{max_stable_dt(n_max, gamma0, nbar):.3g} for n_max={n_max}")
    if cfg.t_final == 0:
        return FockDensityMatrix(rho)
    nsteps = max(1, math.ceil(cfg.t_final / cfg.dt - 1e-9))
    h = cfg.t_final / nsteps
    tr0 = float(np.trace(rho).real)
    done = 0
    while done < nsteps:
        chunk = min(cfg.check_every, nsteps - done)
        rho = kernels.lindblad_rk4(rho, gamma0, nbar, h, chunk, backend=backend)
        done += chunk
        tr = float(np.trace(rho).real)
        if not math.isfinite(tr) or abs(tr - tr0) > TRACE_DRIFT_TOL:
            raise StepTooLarge(f"trace drifted from {tr0:.12g} to {tr:.12g} at t={done * h:.4g}")
        # RK4 preserves the trace exactly even while unstable modes explode,
        # so also watch the purity, which cannot exceed tr^2 for a valid state
        purity = float(np.sum(np.abs(rho) ** 2))
        if not math.isfinite(purity) or purity > tr * tr + TRACE_DRIFT_TOL:
            raise StepTooLarge(f"state norm drifted (purity {purity:.6g} > tr^2) at t={done * h:.4g}")
        top = _top_population(rho)
        if top > TOP_LEVEL_TOL:
            raise TruncationTooSmall(f"top Fock levels hold {top:.3g} at t={done * h:.4g}; raise n_max")
        if cfg.renormalize:
            rho *= tr0 / tr
    return FockDensityMatrix(rho)


def evolve_to_times(m0, gamma0: float, nbar: float, times, dt: float = 0.005,
                    backend=None) -> list:
    """States at each of the (non-decreasing) ``times``, integrating segment by segment."""
    times = [float(t) for t in times]
    if any(b < a for a, b in zip(times, times[1:])) or (times and times[0] < 0):
        raise DomainError("times must be non-negative and non-decreasing")
    out = []
    state = FockDensityMatrix(_elements(m0))
    t_now = 0.0
    for t in times:
        if t > t_now:
            state = integrate(state, gamma0, nbar, IntegratorConfig(dt=dt, t_final=t - t_now), backend)
            t_now = t
        out.append(state)
    return out


def thermal_state(n_max: int, nbar: float) -> FockDensityMatrix:
    """Gibbs populations (nbar/(nbar+1))^n, normalised on the truncated space."""
    if nbar == 0:
        d = np.zeros(n_max + 1)
        d[0] = 1.0
    else:
        r = nbar / (nbar + 1.0)
        d = r ** np.arange(n_max + 1)
        d /= d.sum()
    return FockDensityMatrix(np.diag(d).astype(np.complex128))


def two_particle_step_check(ma, mb, gamma0: float, nbar: float = 0.0) -> float:
    """max |d/dt(rho1 x rho2) - [(L rho1) x rho2 + rho1 x (L rho2)]|.

    The left side applies the two-oscillator generator, built from
    ``a x 1`` and ``1 x a``, to the product state; the right side uses the
    single-oscillator generator on each factor.
    """
    r1, r2 = _elements(ma), _elements(mb)
    if r1.shape[0] > 13 or r2.shape[0] > 13:
        raise DomainError("two-particle check is limited to n_max <= 12")
    o1 = LadderOperators.build(r1.shape[0] - 1)
    o2 = LadderOperators.build(r2.shape[0] - 1)
    i1, i2 = np.eye(r1.shape[0]), np.eye(r2.shape[0])
    joint_ops = [LadderOperators(np.kron(o1.a, i2), np.kron(o1.adag, i2)),
                 LadderOperators(np.kron(i1, o2.a), np.kron(i1, o2.adag))]
    product = np.kron(r1, r2)
    lhs = sum(lindblad_rhs_operator(product, gamma0, nbar, ops) for ops in joint_ops)
    rhs = (np.kron(lindblad_rhs(r1, gamma0, nbar).elements, r2)
           + np.kron(r1, lindblad_rhs(r2, gamma0, nbar).elements))
    return float(np.max(np.abs(lhs - rhs)))
