import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dho import fock
from dho.errors import DomainError, NoConvergence, TruncationTooSmall
from dho.identical import TwoParticleState, reduced_single_particle
from dho.states import EvolutionParams, SuperposedState, gram_matrix, make_cat, overlap


def test_log_factorials_exact_small():
    lf = fock.log_factorials(20)
    assert np.allclose(lf, [math.lgamma(n + 1) for n in range(21)], rtol=1e-15, atol=1e-15)


def test_poisson_tail_matches_direct_sum():
    mean, n_max = 4.0, 12
    direct = 1.0 - sum(math.exp(-mean) * mean ** n / math.factorial(n) for n in range(n_max + 1))
    assert fock.poisson_tail(mean, n_max) == pytest.approx(direct, rel=1e-12)
    assert fock.poisson_tail(9.0, fock.default_nmax(9.0)) < 1e-12


class TestCoherentVector:
    def test_vacuum(self):
        v = fock.coherent_fock_vector(0, 10).coeffs
        assert v[0] == 1 and np.all(v[1:] == 0)

    def test_normalization(self):
        assert fock.coherent_fock_vector(1, 40).norm_sq() == pytest.approx(1.0, abs=1e-14)

    @settings(max_examples=40)
    @given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
           st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
    def test_inner_product_matches_overlap(self, a, b):
        va, vb = fock.coherent_fock_vector(a, 60), fock.coherent_fock_vector(b, 60)
        assert abs(va.inner(vb) - overlap(a, b)) < 1e-12

    def test_log_space_matrix_agrees_with_recurrence(self):
        amps = [0.3 - 1j, 2.5, -4j]
        V = fock.coherent_matrix(amps, 70)
        for k, a in enumerate(amps):
            assert np.max(np.abs(V[:, k] - fock.coherent_fock_vector(a, 70).coeffs)) < 1e-14

    def test_tail_guard(self):
        with pytest.raises(TruncationTooSmall):
            fock.coherent_fock_vector(3, 5, tail_tol=1e-10)


class TestDensityFromSuperposition:
    def test_pure_projector(self):
        m = fock.density_from_superposition(SuperposedState.coherent(1 + 1j), EvolutionParams(0.2, 0.0))
        assert m.purity() == pytest.approx(1.0, abs=1e-12)

    def test_cat_stays_pure_without_damping(self):
        for t in (0.0, 1.0, 4.0):
            m = fock.density_from_superposition(make_cat(1.0), EvolutionParams(0.0, t))
            assert m.purity() == pytest.approx(1.0, abs=1e-12)

    def test_trace_within_tail_and_hermitian(self):
        s = make_cat(2.0 + 1j)
        m = fock.density_from_superposition(s, EvolutionParams(0.3, 1.5))
        assert 1.0 - 1e-12 <= m.trace() <= 1.0 + 1e-12
        assert m.hermiticity_error() < 1e-14

    def test_damped_cat_is_mixed(self):
        m = fock.density_from_superposition(make_cat(1.0), EvolutionParams(0.2, 3.0))
        assert m.purity() < 0.99

    def test_finite_temperature_rejected(self):
        with pytest.raises(DomainError):
            fock.density_from_superposition(make_cat(1.0), EvolutionParams(0.2, 1.0, nbar=0.1))


class TestEigen:
    def test_identity(self, backend):
        ev = fock.hermitian_eigenvalues(np.eye(7), backend=backend)
        assert np.allclose(ev, 1.0)

    def test_rank_one(self, backend):
        m = fock.projector(fock.coherent_fock_vector(1.2 - 0.3j, 30))
        ev = fock.hermitian_eigenvalues(m, backend=backend)
        assert ev[0] == pytest.approx(1.0, abs=1e-10)
        assert np.max(np.abs(ev[1:])) < 1e-10

    def test_random_against_lapack(self, backend, rng):
        for n in (2, 5, 17, 40):
            a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            a = a + a.conj().T
            ev = fock.hermitian_eigenvalues(a, backend=backend)
            assert np.max(np.abs(ev - np.sort(np.linalg.eigvalsh(a))[::-1])) < 1e-11 * np.linalg.norm(a)

    def test_two_component_gram_reduction(self, backend):
        # rho = V W V^dag has the same non-zero spectrum as the 2x2 matrix W G
        tp = TwoParticleState.build(1.0, -0.5 + 0.8j, "BE")
        p = EvolutionParams(0.1, 1.2)
        m = reduced_single_particle(tp, p)
        ev = fock.hermitian_eigenvalues(m, backend=backend)
        from dho.identical import _exchange_weight
        from dho.states import evolve_amplitude
        at, bt = evolve_amplitude(tp.alpha, p), evolve_amplitude(tp.beta, p)
        ov, f2 = overlap(at, bt), _exchange_weight(tp, p)
        W = tp.norm_sq * np.array([[1, ov * f2], [np.conj(ov) * f2, 1]])
        M = W @ gram_matrix([at, bt])
        tr, det = np.trace(M).real, np.linalg.det(M).real
        disc = math.sqrt(tr * tr / 4 - det)
        closed = sorted([tr / 2 + disc, tr / 2 - disc], reverse=True)
        assert np.allclose(ev[:2], closed, atol=1e-10)
        assert np.max(np.abs(ev[2:])) < 1e-10

    def test_no_convergence(self, rng):
        a = rng.normal(size=(12, 12))
        a = a + a.T
        with pytest.raises(NoConvergence):
            fock.hermitian_eigenvalues(a, max_sweeps=1)

    def test_sum_equals_trace(self, backend):
        m = fock.density_from_superposition(make_cat(1.5), EvolutionParams(0.2, 2.0))
        assert fock.hermitian_eigenvalues(m, backend=backend).sum() == pytest.approx(m.trace(), abs=1e-10)


class TestEntropy:
    def test_pure(self, backend):
        m = fock.projector(fock.coherent_fock_vector(1.0, 30))
        assert abs(fock.von_neumann_entropy(m, backend=backend)) < 1e-9

    def test_two_level_maximally_mixed(self):
        assert fock.von_neumann_entropy(np.diag([0.5, 0.5, 0.0])) == pytest.approx(math.log(2), abs=1e-14)

    def test_mb_far_apart(self):
        tp = TwoParticleState.build(3.0, -3.0, "MB")
        assert fock.von_neumann_entropy(reduced_single_particle(tp, EvolutionParams())) == pytest.approx(
            math.log(2), abs=1e-6)

    def test_vacuum_diagonal_entropy(self):
        assert fock.diagonal_entropy(fock.projector(fock.coherent_fock_vector(0, 5))) == 0.0

    def test_coherent_diagonal_entropy_is_poisson_entropy(self):
        n = np.arange(60)
        pois = np.exp(-1.0 - np.array([math.lgamma(k + 1) for k in n]))
        direct = float(-np.sum(pois * np.log(pois)))
        m = fock.projector(fock.coherent_fock_vector(1.0, 40))
        assert fock.diagonal_entropy(m) == pytest.approx(direct, abs=1e-9)

    def test_diagonal_matrix(self):
        d = np.diag([0.1, 0.2, 0.3, 0.4])
        assert fock.diagonal_entropy(d) == pytest.approx(fock.von_neumann_entropy(d), abs=1e-14)

    def test_majorization(self):
        for g, t in ((0.0, 1.0), (0.1, 2.0), (0.3, 6.0)):
            m = fock.density_from_superposition(make_cat(1.3), EvolutionParams(g, t))
            assert fock.diagonal_entropy(m) >= fock.von_neumann_entropy(m) - 1e-12

    def test_negative_eigenvalue_rejected(self):
        with pytest.raises(DomainError):
            fock.von_neumann_entropy(np.diag([1.1, -0.1]))

    def test_trace_distance(self):
        a, b = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
        assert fock.trace_distance(a, b) == pytest.approx(1.0)
        assert fock.trace_distance(a, a) == 0.0
