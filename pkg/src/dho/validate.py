"""Oracle suite: each closed form against an independent numerical route."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np
from scipy.special import wofz

from . import bohmian, coherence, fock, identical, lindblad
from ._accel import HAVE_NUMBA
from .errors import DhoError
from .faddeeva import complex_erf, faddeeva
from .states import EvolutionParams, SuperposedState, make_cat


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return math.isfinite(self.residual) and self.residual < self.tolerance

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        text = f"{tag} {self.name}: residual={self.residual:.3e} tol={self.tolerance:.1e}"
        return text + (f" ({self.detail})" if self.detail else "")


def _lindblad_oracle(dt: float, n_max: int) -> CheckResult:
    cat = make_cat(1.0, "plus_minus_alpha")
    gamma0 = 0.2
    rho0 = fock.density_from_superposition(cat, EvolutionParams(gamma0, 0.0), n_max)
    try:
        states = lindblad.evolve_to_times(rho0, gamma0, 0.0, [1.0, 3.0], dt=dt)
    except DhoError as exc:
        return CheckResult("lindblad_vs_analytic", math.inf, 1e-6, f"{type(exc).__name__}: {exc}")
    worst = max(fock.trace_distance(m, fock.density_from_superposition(cat, EvolutionParams(gamma0, t), n_max))
                for m, t in zip(states, (1.0, 3.0)))
    return CheckResult("lindblad_vs_analytic", worst, 1e-6, f"cat alpha=+-1, gamma0=0.2, dt={dt:g}")


def _trace_drift(dt: float, n_max: int) -> CheckResult:
    cat = make_cat(1.0, "plus_minus_alpha")
    rho0 = fock.density_from_superposition(cat, EvolutionParams(0.2, 0.0), n_max)
    cfg = lindblad.IntegratorConfig(dt=dt, t_final=10.0, stability_check=False)
    try:
        m = lindblad.integrate(rho0, 0.2, 0.0, cfg)
    except DhoError as exc:
        return CheckResult("trace_drift", math.inf, lindblad.TRACE_DRIFT_TOL, f"{type(exc).__name__}: {exc}")
    return CheckResult("trace_drift", abs(m.trace() - rho0.trace()), lindblad.TRACE_DRIFT_TOL, f"dt={dt:g}, t=10")


def _thermal_fixed_point(dt: float) -> CheckResult:
    nbar, n_max = 0.3, 30
    rho = fock.projector(fock.coherent_fock_vector(0.8, n_max))
    try:
        m = lindblad.integrate(rho, 1.0, nbar, lindblad.IntegratorConfig(dt=dt, t_final=40.0))
    except DhoError as exc:
        return CheckResult("thermal_fixed_point", math.inf, 1e-8, f"{type(exc).__name__}: {exc}")
    err = float(np.max(np.abs(m.elements - lindblad.thermal_state(n_max, nbar).elements)))
    return CheckResult("thermal_fixed_point", err, 1e-8, "gamma0=1, nbar=0.3, t=40")


def _series_vs_spectral() -> CheckResult:
    worst = 0.0
    for a in (0.5, 1.0, 1.5 + 0.5j):
        for t in (0.0, 2.0, 7.0):
            p = EvolutionParams(0.1, t)
            series = coherence.cr_coherent_energy(a, p).value
            spectral = coherence.cr_pure_state_energy(SuperposedState.coherent(a), p).value
            worst = max(worst, abs(series - spectral))
    return CheckResult("energy_series_vs_spectral", worst, 1e-9)


def _cat_closed_vs_spectral() -> CheckResult:
    worst = 0.0
    for x in (0.0, 0.25, 1.0, 4.0):
        closed = coherence.cr_cat_closed_form(x).value
        spectral = coherence.cr_pure_state_energy(make_cat(math.sqrt(x)), EvolutionParams()).value
        worst = max(worst, abs(closed - spectral))
    return CheckResult("cat_closed_vs_spectral", worst, 1e-9)


def _continuous_bases() -> CheckResult:
    target = 0.5 * (1.0 + math.log(math.pi))
    worst = 0.0
    for basis in ("position", "momentum"):
        for g, t in ((0.0, 3.0), (0.3, 5.0)):
            r = coherence.cr_coherent_continuous(1.0 + 0.5j, EvolutionParams(g, t), basis, "quadrature")
            worst = max(worst, abs(r.value - target))
    return CheckResult("continuous_closed_vs_quadrature", worst, 1e-10)


def _continuity(kind: str) -> CheckResult:
    x = np.linspace(-12.0, 12.0, 400)
    times = np.linspace(0.0, 5.0, 11)
    if kind == "coherent":
        s, tol = SuperposedState.coherent(1.0 + 0.5j), 1e-6
    else:
        s, tol = make_cat(7.0 / math.sqrt(2.0)), 1e-5
    worst = max(bohmian.continuity_residual(s, g, x, times) for g in (0.0, 0.1))
    return CheckResult(f"continuity_{kind}", worst, tol)


def _mss_paths() -> CheckResult:
    worst = 0.0
    for a in (0.5, 1.0):
        for g in (0.0, 0.2):
            for t in np.linspace(0.0, math.pi, 5):
                p = EvolutionParams(g, float(t))
                for st in identical.Statistics:
                    tp = identical.TwoParticleState.build(a, -a, st)
                    worst = max(worst, abs(identical.mss(tp, p, "closed_form") - identical.mss(tp, p, "quadrature")))
    return CheckResult("mss_closed_vs_quadrature", worst, 1e-8)


def _detection_paths() -> CheckResult:
    worst = 0.0
    for st in ("BE", "FD"):
        tp = identical.TwoParticleState.build(1.0, -1.0, st)
        for d in (1.0, 2.0):
            w = identical.DetectorWindow(d)
            for t in (0.0, 0.7, 2.5):
                p = EvolutionParams(0.05, t)
                a = identical.joint_detection_ratio(tp, p, w, "closed_form")
                b = identical.joint_detection_ratio(tp, p, w, "quadrature")
                worst = max(worst, abs(a - b))
    return CheckResult("detection_closed_vs_quadrature", worst, 1e-9)


def _faddeeva() -> CheckResult:
    rng = np.random.default_rng(20240601)
    z = rng.uniform(-10, 10, 2000) + 1j * rng.uniform(-8, 8, 2000)
    ref = wofz(z)
    err_w = float(np.max(np.abs(faddeeva(z) - ref) / np.abs(ref)))
    # erf(z) = 1 - exp(-z^2) w(iz); keep points where this reference is well conditioned
    zz = z[np.abs(z) < 4]
    ref_erf = 1.0 - np.exp(-zz * zz) * wofz(1j * zz)
    err_e = float(np.max(np.abs(complex_erf(zz) - ref_erf) / np.maximum(np.abs(ref_erf), 1.0)))
    return CheckResult("faddeeva_vs_reference", max(err_w, err_e), 1e-12)


def _backend_parity() -> Optional[CheckResult]:
    if not HAVE_NUMBA:
        return None
    rng = np.random.default_rng(7)
    m = rng.normal(size=(24, 24)) + 1j * rng.normal(size=(24, 24))
    m = m + m.conj().T
    a = fock.hermitian_eigenvalues(m, backend="numba")
    b = fock.hermitian_eigenvalues(m, backend="numpy")
    return CheckResult("backend_parity_jacobi", float(np.max(np.abs(a - b))), 1e-10)


def run_checks(dt: float = 0.005, n_max: int = 40) -> List[CheckResult]:
    checks: List[Callable[[], Optional[CheckResult]]] = [
        lambda: _lindblad_oracle(dt, n_max),
        lambda: _trace_drift(dt, n_max),
        lambda: _thermal_fixed_point(dt),
        _series_vs_spectral,
        _cat_closed_vs_spectral,
        _continuous_bases,
        lambda: _continuity("coherent"),
        lambda: _continuity("cat"),
        _mss_paths,
        _detection_paths,
        _faddeeva,
        _backend_parity,
    ]
    out = []
    for check in checks:
        r = check()
        if r is not None:
            out.append(r)
    return out
