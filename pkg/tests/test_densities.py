import math
from fractions import Fraction

import numpy as np
import pytest

from revstruct import densities as dn
from revstruct.densities import (
    ClassicalDensityGrid,
    ConjugationSpace,
    DensityMatrix,
    OperatorKernel,
    PhaseSpaceGrid,
    SupportEscapeError,
    WaveFunctionGrid,
)
from revstruct.symplectic import HamiltonianFlow

X = dn.symmetric_grid()
Q = dn.symmetric_grid(48, 8.0)


def gaussian(Qm, Pm, q0=0.0, p0=0.0, s=1.0):
    return np.exp(-((Qm - q0) ** 2 + (Pm - p0) ** 2) / (2 * s * s))


def test_grids_are_exactly_symmetric():
    assert np.array_equal(X, -X[::-1])
    assert X[0] == pytest.approx(-6) and X[-1] == pytest.approx(6)
    p = dn.momentum_grid(X)
    assert np.array_equal(p, -p[::-1])
    assert (p[1] - p[0]) * len(X) * (X[1] - X[0]) == pytest.approx(math.pi)


class TestClassical:
    def test_validation(self):
        with pytest.raises(ValueError):
            ClassicalDensityGrid(Q, Q, -np.ones((48, 48)))
        with pytest.raises(ValueError):
            ClassicalDensityGrid(Q, Q, np.ones((48, 48)))
        with pytest.raises(ValueError, match="asymmetric"):
            ClassicalDensityGrid.from_function(gaussian, Q, Q + 0.1)

    def test_reversal_flips_momentum(self):
        rho = ClassicalDensityGrid.from_function(lambda a, b: gaussian(a, b, 0.0, 3.0, 0.5), Q, Q)
        k = dn.induced_reversal_classical(rho)
        i, j = np.unravel_index(np.argmax(k.values), k.values.shape)
        assert k.p[j] == pytest.approx(-3.0, abs=0.2) and k.q[i] == pytest.approx(0.0, abs=0.2)
        assert dn.induced_reversal_classical(k).equals(rho)
        assert isinstance(k, ClassicalDensityGrid)

    def test_even_density_is_fixed(self):
        rho = ClassicalDensityGrid.from_function(gaussian, Q, Q)
        assert dn.induced_reversal_classical(rho).equals(rho)
        even, odd = dn.even_odd_split(rho)
        assert even.equals(rho.as_exact()) and not np.any(odd.values)

    def test_odd_function_splits_to_odd(self):
        Qm, Pm = np.meshgrid(Q, Q, indexing="ij")
        f = PhaseSpaceGrid(Q, Q, Pm * gaussian(Qm, Pm))
        even, odd = dn.even_odd_split(f)
        assert not np.any(even.values) and odd.equals(f.as_exact())

    def test_split_is_exact_where_floats_are_not(self):
        rng = np.random.default_rng(3)
        rho = dn.random_classical_density(rng, Q, Q)
        even, odd = dn.even_odd_split(rho)
        assert np.all(even.values + odd.values == rho.as_exact().values)
        assert all(isinstance(v, Fraction) for v in even.values.ravel()[:10])

    def test_split_check(self):
        r = dn.check_even_odd_split(count=5)
        assert r.passed and r.samples_tested == 5


class TestDynamics:
    rho = ClassicalDensityGrid.from_function(gaussian, Q, Q)
    free = HamiltonianFlow("free_particle")

    def test_identity_at_zero(self):
        assert dn.induced_dynamics_classical(self.rho, self.free, 0.0).sup_distance(self.rho) == 0

    def test_shear_against_closed_form(self):
        t = 0.75
        out = dn.induced_dynamics_classical(self.rho, self.free, t)
        Qm, Pm = np.meshgrid(Q, Q, indexing="ij")
        exact = gaussian(Qm - t * Pm, Pm) * (self.rho.values.max() / gaussian(0.0, 0.0))
        # bilinear interpolation error scales with the squared spacing
        assert out.sup_distance(PhaseSpaceGrid(Q, Q, exact)) < 0.5 * (Q[1] - Q[0]) ** 2 * self.rho.values.max()
        assert out.total() == pytest.approx(1.0, abs=1e-6)

    def test_reversal_conjugates_dynamics(self):
        K = dn.induced_reversal_classical
        for t in (0.3, -1.2):
            lhs = K(dn.induced_dynamics_classical(K(self.rho), self.free, t))
            assert lhs.sup_distance(dn.induced_dynamics_classical(self.rho, self.free, -t)) <= 1e-6

    def test_oscillator_period(self):
        osc = HamiltonianFlow("harmonic_oscillator")
        back = dn.induced_dynamics_classical(self.rho, osc, 2 * math.pi)
        assert back.sup_distance(self.rho) <= 1e-6

    def test_support_escape(self):
        with pytest.raises(SupportEscapeError, match="support escape"):
            dn.induced_dynamics_classical(self.rho, self.free, 6.0)

    def test_check(self):
        assert dn.check_induced_dynamics().passed


class TestWaveFunctions:
    def test_real_state_is_fixed(self):
        psi = dn.gaussian_ground_state(X)
        assert np.array_equal(dn.wavefunction_reversal(psi).values, psi.values)

    def test_plane_phase(self):
        g = dn.gaussian_ground_state(X).values
        psi = WaveFunctionGrid(X, np.exp(1.5j * X) * g)
        k = dn.wavefunction_reversal(psi)
        np.testing.assert_array_equal(k.values, np.conj(np.exp(1.5j * X) * g))
        assert k.norm() == psi.norm()

    def test_normalization_enforced(self):
        with pytest.raises(ValueError):
            WaveFunctionGrid(X, np.ones(len(X)))


class TestConjugationSpace:
    def test_worked_example(self):
        s = ConjugationSpace(1)
        A = s.vector([0, 1])  # J X_1
        X1 = s.vector([1, 0])
        assert s.K(s.translate(A, 1, s.K(X1))) == s.vector([1, -1])
        assert s.translate(A, -1, X1) == s.vector([1, -1])
        assert s.J(s.J(X1)) == s.vector([-1, 0])

    def test_check(self):
        r = dn.conjugation_translation_check(ConjugationSpace(2), [0, 0, 1, "1/3"], samples=200)
        assert r.passed and r.samples_tested == 200
        r0 = dn.conjugation_translation_check(ConjugationSpace(1), [0, 1], samples=10, t_list=[0])
        assert r0.passed

    def test_real_translation_rejected(self):
        with pytest.raises(ValueError, match="not a non-real translation"):
            dn.conjugation_translation_check(ConjugationSpace(1), [1, 1])


class TestDensityMatrices:
    rng = np.random.default_rng(11)

    def test_validation(self):
        dx = X[1] - X[0]
        with pytest.raises(ValueError, match="Hermitian"):
            DensityMatrix(X, np.triu(np.ones((64, 64))) / (64 * dx))
        with pytest.raises(ValueError, match="trace"):
            DensityMatrix(X, np.eye(64))
        with pytest.raises(ValueError, match="positive"):
            DensityMatrix(X, np.diag(np.r_[2.0, -1.0, np.zeros(62)]) / dx)
        psi = dn.gaussian_ground_state(X)
        with pytest.raises(ValueError):
            DensityMatrix.from_ensemble(X, [0.7, 0.7], [psi, psi])

    def test_real_kernel_is_fixed(self):
        rho = DensityMatrix.pure(dn.gaussian_ground_state(X))
        assert dn.density_matrix_reversal(rho).equals(rho)
        re, im = dn.real_imag_split(rho)
        assert re.equals(OperatorKernel(X, rho.kernel)) and not np.any(im.kernel)

    def test_pure_state_of_conjugate(self):
        g = dn.gaussian_ground_state(X).values
        psi = WaveFunctionGrid(X, np.exp(0.8j * X) * g)
        lhs = dn.density_matrix_reversal(DensityMatrix.pure(psi))
        rhs = DensityMatrix.pure(dn.wavefunction_reversal(psi))
        assert np.max(np.abs(lhs.kernel - rhs.kernel)) <= 1e-15

    def test_imaginary_antisymmetric_kernel(self):
        A = self.rng.standard_normal((64, 64))
        k = OperatorKernel(X, 1j * (A - A.T))
        re, im = dn.real_imag_split(k)
        assert not np.any(re.kernel) and im.equals(k)

    def test_spectrum_and_trace_preserved(self):
        rho = dn.random_density_matrix(self.rng, X)
        k = dn.density_matrix_reversal(rho)
        assert np.max(np.abs(k.spectrum() - rho.spectrum())) <= 1e-12
        assert abs(k.trace() - 1) <= 1e-9

    def test_checks(self):
        assert dn.check_density_reversal(count=5).passed
        assert dn.check_real_imag_split(count=5).passed


class TestWigner:
    def test_gaussian_benchmark(self):
        r = dn.check_gaussian_benchmark()
        assert r.passed and r.max_violation <= 1e-6

    def test_marginal_and_total(self):
        rho = dn.random_density_matrix(np.random.default_rng(5), X)
        W = dn.wigner_transform(rho)
        dp = W.p[1] - W.p[0]
        marginal = W.values.sum(axis=1) * dp
        assert np.max(np.abs(marginal - np.diag(rho.kernel).real)) <= 1e-6
        assert W.total() == pytest.approx(rho.trace().real, abs=1e-6)

    def test_first_excited_state(self):
        # analytic W = (2 r^2 - 1) exp(-r^2) / pi, negative near the origin
        psi = WaveFunctionGrid.normalized(X, X * np.exp(-(X**2) / 2))
        W = dn.wigner_transform(DensityMatrix.pure(psi))
        Qm, Pm = np.meshgrid(W.q, W.p, indexing="ij")
        r2 = Qm**2 + Pm**2
        assert np.max(np.abs(W.values - (2 * r2 - 1) * np.exp(-r2) / math.pi)) <= 1e-6
        assert W.values.min() < -0.29

    def test_plane_phase_shifts_momentum(self):
        g = dn.gaussian_ground_state(X)
        p = dn.momentum_grid(X)
        m = 5
        k = m * (p[1] - p[0])
        W0 = dn.wigner_transform(DensityMatrix.pure(g)).values
        Wk = dn.wigner_transform(DensityMatrix.pure(WaveFunctionGrid(X, np.exp(1j * k * X) * g.values))).values
        # with kernel conj(psi(x)) psi(x') the phase e^{ikx} moves W to p - k
        assert np.max(np.abs(Wk[:, : 64 - m] - W0[:, m:])) <= 1e-10

    def test_conjugate_mixture_is_even(self):
        psi = WaveFunctionGrid(X, np.exp(1.1j * X) * dn.gaussian_ground_state(X).values)
        rho = DensityMatrix.from_ensemble(X, [0.5, 0.5], [psi, dn.wavefunction_reversal(psi)])
        W = dn.wigner_transform(rho)
        assert np.max(np.abs(W.values - W.values[:, ::-1])) <= 1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_morphism(self, seed):
        rho = dn.random_density_matrix(np.random.default_rng(seed), X)
        assert dn.check_wigner_morphism(rho).max_violation <= 1e-12

    def test_errors(self):
        k = OperatorKernel(X, np.triu(np.ones((64, 64))))
        with pytest.raises(ValueError, match="hermiticity violated"):
            dn.wigner_transform(k)
        with pytest.raises(ValueError, match="asymmetric"):
            dn.wigner_transform(OperatorKernel(X + 0.5, np.eye(64)))


class TestCsv:
    def test_phase_grid_roundtrip(self, tmp_path):
        rho = ClassicalDensityGrid.from_function(gaussian, Q, Q)
        dn.write_phase_grid_csv(tmp_path / "g.csv", rho)
        back = dn.read_phase_grid_csv(tmp_path / "g.csv")
        assert back.equals(rho)
        lines = (tmp_path / "g.csv").read_text().splitlines()
        assert lines[0].startswith("# kind=phase_grid,nq=48,np=48") and lines[1] == "q,p,value"

    def test_kernel_roundtrip(self, tmp_path):
        rho = dn.random_density_matrix(np.random.default_rng(2), X)
        dn.write_kernel_csv(tmp_path / "k.csv", rho)
        assert dn.read_kernel_csv(tmp_path / "k.csv").equals(rho)

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("# kind=phase_grid,nq=2,np=2\nq,p,value\n0,0,1\n")
        with pytest.raises(ValueError):
            dn.read_phase_grid_csv(path)
