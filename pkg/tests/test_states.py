import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial.hermite import hermval
from scipy.integrate import quad
from scipy.special import factorial

from dho.errors import DegenerateInput, OverlapUnderflow
from dho.fock import coherent_fock_vector
from dho.states import (
    CoherentAmplitude,
    EvolutionParams,
    SuperposedState,
    decoherence_factor,
    decoherence_time,
    evolve_amplitude,
    evolved_overlap_identity_check,
    gram_matrix,
    make_cat,
    momentum_wavefunction,
    overlap,
    position_wavefunction,
)

amplitude = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)


def hermite_wavefunction(a, x, n_max=80):
    """Oracle: sum_n c_n <x|n> with Hermite-function eigenstates."""
    c = coherent_fock_vector(a, n_max).coeffs
    n = np.arange(n_max + 1)
    norms = 1.0 / np.sqrt(2.0 ** n * factorial(n) * math.sqrt(math.pi))
    x = np.atleast_1d(x)
    out = np.zeros(x.shape, dtype=complex)
    for k in range(n_max + 1):
        coef = np.zeros(k + 1)
        coef[k] = 1.0
        out += c[k] * norms[k] * hermval(x, coef) * np.exp(-x ** 2 / 2)
    return out


class TestOverlap:
    def test_vacuum(self):
        assert overlap(0, 0) == pytest.approx(1.0)

    @given(amplitude)
    def test_self_overlap_is_one(self, a):
        assert abs(overlap(a, a) - 1.0) < 1e-12

    def test_plus_minus_one_against_fock_series(self):
        va = coherent_fock_vector(1, 60)
        vb = coherent_fock_vector(-1, 60)
        series = va.inner(vb)
        assert overlap(1, -1) == pytest.approx(math.exp(-2), abs=1e-15)
        assert abs(series - overlap(1, -1)) < 1e-14

    @given(amplitude, amplitude)
    def test_modulus_bounded(self, a, b):
        m = abs(overlap(a, b))
        assert m <= 1.0 + 1e-15
        if abs(a - b) > 1e-3:
            assert m < 1.0

    @given(amplitude, amplitude)
    def test_modulus_is_gaussian_in_distance(self, a, b):
        assert abs(overlap(a, b)) == pytest.approx(math.exp(-0.5 * abs(a - b) ** 2), rel=1e-12, abs=1e-300)


class TestEvolution:
    def test_rotation_preserves_modulus(self):
        for t in (0.3, 2.0, 17.0):
            assert abs(evolve_amplitude(1, EvolutionParams(0.0, t))) == pytest.approx(1.0, abs=1e-15)

    def test_quarter_period(self):
        z = complex(evolve_amplitude(1, EvolutionParams(0.0, math.pi / 2)))
        assert abs(z - (-1j)) < 1e-15

    def test_damped_modulus(self):
        assert abs(evolve_amplitude(1, EvolutionParams(0.2, 10.0))) == pytest.approx(math.exp(-1), rel=1e-14)

    @given(amplitude, st.floats(0, 1), st.floats(0, 10), st.floats(0, 10))
    def test_composition(self, a, g, t1, t2):
        once = complex(evolve_amplitude(a, EvolutionParams(g, t1 + t2)))
        twice = complex(evolve_amplitude(evolve_amplitude(a, EvolutionParams(g, t1)), EvolutionParams(g, t2)))
        assert abs(once - twice) < 1e-12

    def test_params_validation(self):
        with pytest.raises(ValueError):
            EvolutionParams(-0.1, 1.0)
        with pytest.raises(ValueError):
            EvolutionParams(0.1, float("nan"))
        with pytest.raises(DegenerateInput):
            EvolutionParams(0.0).relaxation_time
        assert EvolutionParams(0.25).relaxation_time == 4.0

    def test_amplitude_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            CoherentAmplitude(float("inf"), 0.0)


class TestDecoherenceFactor:
    @given(amplitude, amplitude)
    def test_trivial_limits(self, a, b):
        assert decoherence_factor(a, b, EvolutionParams(0.3, 0.0)) == 1.0
        assert decoherence_factor(a, b, EvolutionParams(0.0, 5.0)) == 1.0

    def test_long_time_limit(self):
        f = decoherence_factor(1, -1, EvolutionParams(1.0, 40.0))
        assert abs(f - overlap(-1, 1)) < 1e-10
        assert abs(f - math.exp(-2)) < 1e-10

    def test_underflow_warns(self):
        with pytest.warns(OverlapUnderflow):
            f = decoherence_factor(30, -30, EvolutionParams(1.0, 50.0))
        assert f == 0

    def test_exponent_not_principal_branch(self):
        # Im(conj(b) a) = 4 > pi: the analytic exponent keeps f consistent with
        # the evolved overlaps, a principal-branch power would not
        a, b, p = 2.0, 2.0j, EvolutionParams(0.3, 2.0)
        at, bt = complex(evolve_amplitude(a, p)), complex(evolve_amplitude(b, p))
        # |f|^2 |<b(t)|a(t)>|^2 = |<b|a>|^2 ties the pieces together
        f = decoherence_factor(a, b, p)
        assert abs(f) ** 2 * abs(overlap(bt, at)) ** 2 == pytest.approx(abs(overlap(b, a)) ** 2, rel=1e-12)
        principal = cmath.exp(p.decoherence_exponent * cmath.log(overlap(b, a)))
        assert abs(principal - f) > 1e-3


class TestIdentity:
    def test_trivial(self):
        assert evolved_overlap_identity_check(1 + 1j, 1 + 1j, EvolutionParams(0.2, 3.0)) < 1e-15
        assert evolved_overlap_identity_check(1, -2j, EvolutionParams(0.0, 3.0)) < 1e-15

    def test_cat_pair(self):
        assert evolved_overlap_identity_check(1, -1, EvolutionParams(0.3, 2.0)) < 1e-12

    @settings(max_examples=60)
    @given(amplitude, amplitude, st.floats(0, 1), st.floats(0, 20))
    def test_grid(self, a, b, g, t):
        assert evolved_overlap_identity_check(a, b, EvolutionParams(g, t)) < 1e-12


def test_decoherence_time():
    assert decoherence_time(1, -1, 1.0) == pytest.approx(0.5)
    assert decoherence_time(2, -2, 1.0) == pytest.approx(0.125)
    assert decoherence_time(1, -1, 0.1) == pytest.approx(5.0)
    with pytest.raises(DegenerateInput):
        decoherence_time(1, 1, 1.0)
    with pytest.raises(DegenerateInput):
        decoherence_time(1, -1, 0.0)


class TestPositionWavefunction:
    def test_ground_state(self):
        x = np.linspace(-4, 4, 33)
        for t in (0.0, 2.3):
            dens = np.abs(position_wavefunction(0, EvolutionParams(0.1, t), x)) ** 2
            assert np.allclose(dens, np.exp(-x ** 2) / math.sqrt(math.pi), atol=1e-15)

    @pytest.mark.parametrize("a", [1.0, 1 + 0.5j, -0.3 + 2j])
    def test_normalized(self, a):
        p = EvolutionParams(0.1, 1.3)
        val, _ = quad(lambda x: abs(position_wavefunction(a, p, x)) ** 2, -np.inf, np.inf, epsabs=1e-13)
        assert val == pytest.approx(1.0, abs=1e-10)

    def test_peak_location(self):
        x = np.linspace(0, 3, 30001)
        dens = np.abs(position_wavefunction(1, EvolutionParams(), x)) ** 2
        assert x[np.argmax(dens)] == pytest.approx(math.sqrt(2), abs=1e-4)

    @pytest.mark.parametrize("a", [1.0, 1 + 0.5j, -0.7 + 1.2j, 2.5j])
    def test_matches_hermite_expansion(self, a):
        # includes the phase: this is the Fock-consistent convention
        x = np.linspace(-5, 5, 41)
        psi = position_wavefunction(a, EvolutionParams(), x)
        assert np.max(np.abs(psi - hermite_wavefunction(a, x))) < 1e-12

    def test_evolved_matches_hermite_expansion(self):
        p = EvolutionParams(0.2, 1.7)
        at = complex(evolve_amplitude(0.8 - 0.9j, p))
        x = np.linspace(-5, 5, 41)
        assert np.max(np.abs(position_wavefunction(0.8 - 0.9j, p, x) - hermite_wavefunction(at, x))) < 1e-12


class TestMomentumWavefunction:
    def test_ground_state(self):
        k = np.linspace(-4, 4, 17)
        dens = np.abs(momentum_wavefunction(0, EvolutionParams(), k)) ** 2
        assert np.allclose(dens, np.exp(-k ** 2) / math.sqrt(math.pi), atol=1e-15)

    def test_normalized(self):
        p = EvolutionParams(0.1, 1.0)
        val, _ = quad(lambda k: abs(momentum_wavefunction(1 + 0.5j, p, k)) ** 2, -np.inf, np.inf, epsabs=1e-13)
        assert val == pytest.approx(1.0, abs=1e-10)

    def test_fourier_transform_oracle(self):
        a, p = 1 + 0.5j, EvolutionParams(0.1, 1.0)
        x = np.linspace(-20, 20, 20001)
        dx = x[1] - x[0]
        psi = position_wavefunction(a, p, x)
        for k in np.linspace(-3, 3, 13):
            ft = np.sum(psi * np.exp(-1j * k * x)) * dx / math.sqrt(2 * math.pi)
            assert abs(ft - momentum_wavefunction(a, p, k)) < 1e-8


class TestSuperposition:
    def test_vacuum_cat(self):
        s = make_cat(0.0)
        assert len(s) == 1
        assert s.norm() == pytest.approx(1.0, abs=1e-14)

    def test_cat_normalization(self):
        s = make_cat(1.0)
        assert s.normalization == pytest.approx(1 / math.sqrt(2 * (1 + math.exp(-2))), rel=1e-14)

    def test_complex_cat_normalization_uses_modulus(self):
        a = 0.6 + 0.8j
        s = make_cat(a)
        assert s.normalization == pytest.approx(1 / math.sqrt(2 * (1 + math.exp(-2 * abs(a) ** 2))), rel=1e-14)

    @pytest.mark.parametrize("kind", ["plus_minus_alpha", "half_alpha_pair", "two_cat_superposition"])
    def test_unit_norm(self, kind):
        for a in (0.3, 1.0, 1.7 - 0.4j):
            assert make_cat(a, kind).norm() == pytest.approx(1.0, abs=1e-12)

    @given(st.lists(st.tuples(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), amplitude),
                    min_size=1, max_size=4))
    def test_general_norm(self, comps):
        try:
            s = SuperposedState.from_components(comps)
        except DegenerateInput:
            return
        assert s.norm() == pytest.approx(1.0, abs=1e-12)

    def test_gram_hermitian(self):
        g = gram_matrix([1, -1, 0.5j])
        assert np.allclose(g, g.conj().T)
        assert np.allclose(np.diag(g), 1.0)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            make_cat(1.0, "nope")
