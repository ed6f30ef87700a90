"""Hot numeric kernels with numba and pure-numpy implementations.

Three loops dominate runtime: Jacobi sweeps for Hermitian eigenvalues,
fixed-step RK4 for the truncated-Fock master equation, and RK4 for
ensembles of Bohmian paths.  Each has a ``*_nb`` version compiled with
numba and a ``*_np`` version written with vectorised numpy.  The public
dispatchers pick one according to :func:`dho._accel.default_backend`, or
an explicit ``backend=`` argument.
"""
import math

import numpy as np

from ._accel import HAVE_NUMBA, default_backend, njit

PI_QUARTER = math.pi ** -0.25
SQRT2 = math.sqrt(2.0)


def _resolve(backend):
    backend = backend or default_backend()
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend


# ---------------------------------------------------------------------------
# Jacobi eigenvalues of a complex Hermitian matrix
# ---------------------------------------------------------------------------


@njit(cache=True)
def _offdiag_norm_nb(a):
    n = a.shape[0]
    s = 0.0
    for p in range(n):
        for q in range(p + 1, n):
            v = a[p, q]
            s += v.real * v.real + v.imag * v.imag
    return math.sqrt(2.0 * s)


@njit(cache=True)
def _jacobi_nb(a, tol, max_sweeps):
    a = a.copy()
    n = a.shape[0]
    sweeps = 0
    off = _offdiag_norm_nb(a)
    while off > tol and sweeps < max_sweeps:
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                g = abs(apq)
                if g < 1e-300:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                ph = np.conj(apq / g)
                theta = (aqq - app) / (2.0 * g)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                u10 = -s * ph
                u11 = c * ph
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = akp * c + akq * u10
                    a[k, q] = akp * s + akq * u11
                cu10 = np.conj(u10)
                cu11 = np.conj(u11)
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk + cu10 * aqk
                    a[q, k] = s * apk + cu11 * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = app - t * g
                a[q, q] = aqq + t * g
        sweeps += 1
        off = _offdiag_norm_nb(a)
    out = np.empty(n)
    for i in range(n):
        out[i] = a[i, i].real
    return out, sweeps, off


def _round_robin(n):
    """Disjoint (p, q) pair sets covering every pair once (circle method)."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            p, q = players[i], players[m - 1 - i]
            if p < n and q < n:
                ps.append(min(p, q))
                qs.append(max(p, q))
        rounds.append((np.array(ps, dtype=np.intp), np.array(qs, dtype=np.intp)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _offdiag_norm_np(a):
    iu = np.triu_indices(a.shape[0], 1)
    return math.sqrt(2.0 * float(np.sum(np.abs(a[iu]) ** 2)))


def _jacobi_np(a, tol, max_sweeps):
    a = np.array(a, dtype=np.complex128, copy=True)
    n = a.shape[0]
    rounds = _round_robin(n) if n > 1 else []
    sweeps = 0
    off = _offdiag_norm_np(a)
    while off > tol and sweeps < max_sweeps:
        for P, Q in rounds:
            apq = a[P, Q]
            g = np.abs(apq)
            live = g >= 1e-300
            if not live.any():
                continue
            P, Q, apq, g = P[live], Q[live], apq[live], g[live]
            app = a[P, P].real
            aqq = a[Q, Q].real
            ph = np.conj(apq / g)
            theta = (aqq - app) / (2.0 * g)
            with np.errstate(over="ignore"):
                t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t = np.where(theta == 0.0, 1.0, t)
            big = np.abs(theta) > 1e150
            t[big] = 0.5 / theta[big]
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            u10 = -s * ph
            u11 = c * ph
            colp = a[:, P].copy()
            colq = a[:, Q]
            a[:, P] = colp * c + colq * u10
            a[:, Q] = colp * s + colq * u11
            rowp = a[P, :].copy()
            rowq = a[Q, :]
            a[P, :] = c[:, None] * rowp + np.conj(u10)[:, None] * rowq
            a[Q, :] = s[:, None] * rowp + np.conj(u11)[:, None] * rowq
            a[P, Q] = 0.0
            a[Q, P] = 0.0
            a[P, P] = app - t * g
            a[Q, Q] = aqq + t * g
        sweeps += 1
        off = _offdiag_norm_np(a)
    return np.diagonal(a).real.copy(), sweeps, off


def jacobi_eigenvalues(a, tol, max_sweeps=60, backend=None):
    """Eigenvalues (unsorted), sweep count and final off-diagonal norm."""
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if _resolve(backend) == "numba":
        return _jacobi_nb(a, float(tol), int(max_sweeps))
    return _jacobi_np(a, float(tol), int(max_sweeps))


# ---------------------------------------------------------------------------
# Master-equation generator and RK4 stepping in truncated Fock space
# ---------------------------------------------------------------------------


def _generator_coefficients(n, gamma0, nbar):
    """Diagonal coefficient, lowering and raising weights of the generator."""
    idx = np.arange(n, dtype=np.float64)
    m, k = np.meshgrid(idx, idx, indexing="ij")
    down = gamma0 * (nbar + 1.0)
    up = gamma0 * nbar
    # <k|a a^dag|k> is k+1 except on the last kept level, where it vanishes
    aad = np.where(idx < n - 1, idx + 1.0, 0.0)
    diag = -1j * (m - k) - 0.5 * down * (m + k) - 0.5 * up * (aad[:, None] + aad[None, :])
    lower = down * np.sqrt((m[:-1, :-1] + 1.0) * (k[:-1, :-1] + 1.0))
    raise_ = up * np.sqrt(m[1:, 1:] * k[1:, 1:])
    return diag, lower, raise_


def lindblad_rhs_np(rho, gamma0, nbar, coeffs=None):
    n = rho.shape[0]
    diag, lower, raise_ = coeffs or _generator_coefficients(n, gamma0, nbar)
    out = diag * rho
    out[:-1, :-1] += lower * rho[1:, 1:]
    out[1:, 1:] += raise_ * rho[:-1, :-1]
    return out


@njit(cache=True)
def _rhs_into_nb(rho, out, diag, lower, raise_, thermal):
    n = rho.shape[0]
    for i in range(n):
        for j in range(n):
            v = diag[i, j] * rho[i, j]
            if i < n - 1 and j < n - 1:
                v += lower[i, j] * rho[i + 1, j + 1]
            if thermal and i > 0 and j > 0:
                v += raise_[i - 1, j - 1] * rho[i - 1, j - 1]
            out[i, j] = v


@njit(cache=True)
def _rk4_nb(rho, dt, nsteps, diag, lower, raise_, thermal):
    n = rho.shape[0]
    y = rho.copy()
    k1 = np.empty_like(y)
    k2 = np.empty_like(y)
    k3 = np.empty_like(y)
    k4 = np.empty_like(y)
    tmp = np.empty_like(y)
    half = 0.5 * dt
    sixth = dt / 6.0
    for _ in range(nsteps):
        _rhs_into_nb(y, k1, diag, lower, raise_, thermal)
        for i in range(n):
            for j in range(n):
                tmp[i, j] = y[i, j] + half * k1[i, j]
        _rhs_into_nb(tmp, k2, diag, lower, raise_, thermal)
        for i in range(n):
            for j in range(n):
                tmp[i, j] = y[i, j] + half * k2[i, j]
        _rhs_into_nb(tmp, k3, diag, lower, raise_, thermal)
        for i in range(n):
            for j in range(n):
                tmp[i, j] = y[i, j] + dt * k3[i, j]
        _rhs_into_nb(tmp, k4, diag, lower, raise_, thermal)
        for i in range(n):
            for j in range(n):
                y[i, j] += sixth * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])
        # re-symmetrise so round-off cannot break Hermiticity
        for i in range(n):
            y[i, i] = y[i, i].real
            for j in range(i + 1, n):
                v = 0.5 * (y[i, j] + np.conj(y[j, i]))
                y[i, j] = v
                y[j, i] = np.conj(v)
    return y


def _rk4_np(rho, dt, nsteps, coeffs):
    y = np.array(rho, dtype=np.complex128, copy=True)
    for _ in range(nsteps):
        k1 = lindblad_rhs_np(y, None, None, coeffs)
        k2 = lindblad_rhs_np(y + 0.5 * dt * k1, None, None, coeffs)
        k3 = lindblad_rhs_np(y + 0.5 * dt * k2, None, None, coeffs)
        k4 = lindblad_rhs_np(y + dt * k3, None, None, coeffs)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        y = 0.5 * (y + y.conj().T)
    return y


def lindblad_rk4(rho, gamma0, nbar, dt, nsteps, backend=None):
    """Advance ``rho`` by ``nsteps`` classical RK4 steps of size ``dt``."""
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    coeffs = _generator_coefficients(rho.shape[0], float(gamma0), float(nbar))
    if nsteps <= 0:
        return rho.copy()
    if _resolve(backend) == "numba":
        diag, lower, raise_ = coeffs
        return _rk4_nb(rho, float(dt), int(nsteps), diag, lower, raise_, bool(nbar))
    return _rk4_np(rho, float(dt), int(nsteps), coeffs)


# ---------------------------------------------------------------------------
# Position-space density, current and Bohmian guidance
# ---------------------------------------------------------------------------
#
# A superposition is described by its initial amplitudes ``amps`` (k,),
# the pair weights ``w[i, j] = N^2 c_i conj(c_j)`` and the analytic
# overlap logarithms ``z[i, j] = log <alpha_j|alpha_i>``.


def density_current_np(x, t, amps, w, z, gamma0):
    """P(x, t) and J(x, t) on an array of positions."""
    x = np.asarray(x, dtype=np.float64)
    at = amps * np.exp(-(1j + 0.5 * gamma0) * t)
    ar, ai = at.real, at.imag
    s = -np.expm1(-gamma0 * t)
    wf = w * np.exp(s * z)
    xs = x[..., None]
    g = -(xs - SQRT2 * ar) + 1j * SQRT2 * ai
    psi = PI_QUARTER * np.exp(-0.5 * (xs - SQRT2 * ar) ** 2 + 1j * (SQRT2 * ai * xs - ar * ai))
    # T_ij = wf_ij psi_i conj(psi_j)
    T = wf * psi[..., :, None] * np.conj(psi)[..., None, :]
    gi = g[..., :, None]
    gj = np.conj(g)[..., None, :]
    K = -0.5j * (gi - gj) - 0.5 * gamma0 * (xs[..., None] + 0.5 * (gi + gj))
    P = np.sum(T, axis=(-2, -1)).real
    J = np.sum(K * T, axis=(-2, -1)).real
    return P, J


def _velocity_np(x, t, amps, w, z, gamma0, floor, vmax):
    P, J = density_current_np(x, t, amps, w, z, gamma0)
    low = P < floor
    v = np.where(low, 0.0, J / np.where(low, 1.0, P))
    return np.clip(v, -vmax, vmax), low


def _guidance_np(x0, amps, w, z, gamma0, t0, dt, nsteps, stride, floor, vmax):
    x = np.array(x0, dtype=np.float64, copy=True)
    nrec = nsteps // stride + 1
    paths = np.empty((x.size, nrec))
    paths[:, 0] = x
    halted = np.zeros(x.size, dtype=bool)
    for step in range(nsteps):
        t = t0 + step * dt
        k1, l1 = _velocity_np(x, t, amps, w, z, gamma0, floor, vmax)
        k2, l2 = _velocity_np(x + 0.5 * dt * k1, t + 0.5 * dt, amps, w, z, gamma0, floor, vmax)
        k3, l3 = _velocity_np(x + 0.5 * dt * k2, t + 0.5 * dt, amps, w, z, gamma0, floor, vmax)
        k4, l4 = _velocity_np(x + dt * k3, t + dt, amps, w, z, gamma0, floor, vmax)
        halted |= l1 | l2 | l3 | l4
        x = np.where(halted, x, x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))
        if (step + 1) % stride == 0:
            paths[:, (step + 1) // stride] = x
    return paths, halted


@njit(cache=True)
def _velocity_nb(x, t, amps, w, z, gamma0, floor, vmax):
    k = amps.shape[0]
    damp = math.exp(-0.5 * gamma0 * t)
    s = -math.expm1(-gamma0 * t)
    rot = complex(math.cos(t), -math.sin(t)) * damp
    psi = np.empty(k, dtype=np.complex128)
    g = np.empty(k, dtype=np.complex128)
    for i in range(k):
        a = amps[i] * rot
        ar = a.real
        ai = a.imag
        d = x - SQRT2 * ar
        psi[i] = PI_QUARTER * np.exp(complex(-0.5 * d * d, SQRT2 * ai * x - ar * ai))
        g[i] = complex(-d, SQRT2 * ai)
    P = 0.0
    J = 0.0
    for i in range(k):
        for j in range(k):
            T = w[i, j] * np.exp(s * z[i, j]) * psi[i] * np.conj(psi[j])
            gj = np.conj(g[j])
            K = -0.5j * (g[i] - gj) - 0.5 * gamma0 * (x + 0.5 * (g[i] + gj))
            P += T.real
            J += (K * T).real
    if P < floor:
        return 0.0, True
    v = J / P
    if v > vmax:
        v = vmax
    elif v < -vmax:
        v = -vmax
    return v, False


@njit(cache=True)
def _guidance_nb(x0, amps, w, z, gamma0, t0, dt, nsteps, stride, floor, vmax):
    n = x0.shape[0]
    nrec = nsteps // stride + 1
    paths = np.empty((n, nrec))
    halted = np.zeros(n, dtype=np.bool_)
    for p in range(n):
        x = x0[p]
        paths[p, 0] = x
        for step in range(nsteps):
            if not halted[p]:
                t = t0 + step * dt
                k1, h1 = _velocity_nb(x, t, amps, w, z, gamma0, floor, vmax)
                k2, h2 = _velocity_nb(x + 0.5 * dt * k1, t + 0.5 * dt, amps, w, z, gamma0, floor, vmax)
                k3, h3 = _velocity_nb(x + 0.5 * dt * k2, t + 0.5 * dt, amps, w, z, gamma0, floor, vmax)
                k4, h4 = _velocity_nb(x + dt * k3, t + dt, amps, w, z, gamma0, floor, vmax)
                if h1 or h2 or h3 or h4:
                    halted[p] = True
                else:
                    x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if (step + 1) % stride == 0:
                paths[p, (step + 1) // stride] = x
    return paths, halted


def guidance_rk4(x0, amps, w, z, gamma0, t0, dt, nsteps, stride=1,
                 floor=1e-12, vmax=1e3, backend=None):
    """Integrate dx/dt = J/P for every start point in ``x0``.

    Returns ``(paths, halted)``; ``paths`` has one row per start point and
    ``nsteps // stride + 1`` columns.  A path whose density drops below
    ``floor`` is frozen and marked in ``halted``.
    """
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    amps = np.ascontiguousarray(amps, dtype=np.complex128)
    w = np.ascontiguousarray(w, dtype=np.complex128)
    z = np.ascontiguousarray(z, dtype=np.complex128)
    args = (x0, amps, w, z, float(gamma0), float(t0), float(dt), int(nsteps),
            int(stride), float(floor), float(vmax))
    if _resolve(backend) == "numba":
        return _guidance_nb(*args)
    return _guidance_np(*args)
