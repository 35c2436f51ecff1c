import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from revstruct import core, symplectic
from revstruct.symplectic import (
    CanonicalStructures,
    HamiltonianFlow,
    PhasePoint,
    TangentVector,
    apply_J,
    metric_g,
    omega,
    pushforward_K,
)


def block_matrices(n):
    """Oracle: omega, J and K_* as matrices on (dq, dp)."""
    I, Z = np.eye(n), np.zeros((n, n))
    Omega = np.block([[Z, I], [-I, Z]])
    J = np.block([[Z, -I], [I, Z]])
    K = np.block([[I, Z], [Z, -I]])
    return Omega, J, K


def vec(X):
    return np.concatenate([X.dq, X.dp])


@st.composite
def tangent_pairs(draw):
    n = draw(st.integers(1, 4))
    floats = st.floats(-10, 10, allow_nan=False)
    arr = lambda: np.array(draw(st.lists(floats, min_size=n, max_size=n)))  # noqa: E731
    base = PhasePoint(arr(), arr())
    return TangentVector(base, arr(), arr()), TangentVector(base, arr(), arr())


@given(tangent_pairs())
def test_structures_match_matrix_oracle(pair):
    X, Y = pair
    Omega, J, K = block_matrices(X.base.n)
    assert omega(X, Y) == pytest.approx(vec(X) @ Omega @ vec(Y), abs=1e-9)
    np.testing.assert_array_equal(vec(apply_J(X)), J @ vec(X))
    np.testing.assert_array_equal(vec(pushforward_K(X)), K @ vec(X))
    # the induced metric is minus the Euclidean one with these sign conventions
    assert metric_g(X, Y) == pytest.approx(-vec(X) @ vec(Y), abs=1e-9)


@given(tangent_pairs())
def test_reversal_laws_hold_exactly(pair):
    X, Y = pair
    KX, KY = pushforward_K(X), pushforward_K(Y)
    assert omega(KX, KY) == -omega(X, Y)
    assert vec(pushforward_K(apply_J(X))).tolist() == (-vec(apply_J(KX))).tolist()
    assert metric_g(KX, KY) == metric_g(X, Y)


@pytest.mark.parametrize("n", [1, 2, 5])
@pytest.mark.parametrize(
    "check", [symplectic.check_sr, symplectic.check_cr, symplectic.check_isometry,
              symplectic.check_j_compatibility]
)
def test_checks_pass(check, n):
    r = check(n)
    assert r.passed and r.samples_tested >= 1000 and r.max_violation <= 1e-12


def test_omega_nondegenerate():
    for n in (1, 3):
        s = CanonicalStructures(n)
        Omega, _, _ = block_matrices(n)
        np.testing.assert_array_equal(s.omega_matrix(), Omega)
        assert s.is_nondegenerate()


def test_tangent_vectors_need_common_base():
    a = TangentVector(PhasePoint([0.0], [0.0]), [1.0], [0.0])
    b = TangentVector(PhasePoint([1.0], [0.0]), [1.0], [0.0])
    with pytest.raises(ValueError):
        omega(a, b)


def test_phase_point_validation():
    with pytest.raises(ValueError):
        PhasePoint([0.0, 1.0], [0.0])
    with pytest.raises(ValueError):
        PhasePoint([math.nan], [0.0])
    m = PhasePoint([1.0], [2.0])
    with pytest.raises(ValueError):
        m.q[0] = 3.0


def test_phase_reversal_orientation():
    K = symplectic.phase_reversal(2)
    sample = lambda r: symplectic.random_phase_point(r, 2)  # noqa: E731
    assert core.verify_involution(K, sample, 100).passed
    assert core.verify_orientation(K, sample, 100).passed
    assert K.is_fixed(PhasePoint([3.0, 1.0], [0.0, 0.0]))


class TestFlows:
    def test_oscillator_quarter_period(self):
        # unit oscillator rotates (q, p) -> (p, -q) after a quarter period
        m = HamiltonianFlow("harmonic_oscillator").exact_at(math.pi / 2, PhasePoint([1.0], [2.0]))
        np.testing.assert_allclose([m.q[0], m.p[0]], [2.0, -1.0], atol=1e-15)

    def test_oscillator_conserves_energy(self):
        f = HamiltonianFlow("harmonic_oscillator", mass=2.0, frequency=3.0)
        m = PhasePoint([0.3, -1.0], [1.2, 0.5])
        energy = lambda s: (s.p @ s.p) / (2 * f.mass) + f.mass * f.frequency**2 * (s.q @ s.q) / 2  # noqa: E731
        for t in (0.1, 1.0, -2.5):
            assert energy(f.exact_at(t, m)) == pytest.approx(energy(m), rel=1e-13)

    def test_free_particle(self):
        m = HamiltonianFlow("free_particle", mass=2.0).exact_at(3.0, PhasePoint([1.0], [4.0]))
        assert (m.q[0], m.p[0]) == (7.0, 4.0)

    def test_leapfrog_is_second_order(self):
        f = HamiltonianFlow("harmonic_oscillator")
        m = PhasePoint([1.0], [0.0])
        err = lambda dt: f.leapfrog_at(m, dt, round(1 / dt)).distance(f.exact_at(1.0, m))  # noqa: E731
        assert err(1e-3) < 1e-6
        assert err(2e-3) / err(1e-3) == pytest.approx(4, rel=0.05)

    @pytest.mark.parametrize("kind", ["harmonic_oscillator", "free_particle"])
    def test_flow_reversal(self, kind):
        f = HamiltonianFlow(kind)
        assert symplectic.check_flow_reversal(f, "exact").max_violation <= 1e-12
        r = symplectic.check_flow_reversal(f, "leapfrog", tol=1e-9)
        assert r.passed and r.samples_tested == 600

    def test_core_time_reversal_on_flow(self):
        f = HamiltonianFlow("harmonic_oscillator")
        r = core.verify_time_reversal(
            symplectic.phase_reversal(2), f.as_flow(2),
            lambda r: symplectic.random_phase_point(r, 2), (0.5, -1.0), 1e-12,
        )
        assert r.passed

    def test_group_law_is_only_approximate(self):
        f = HamiltonianFlow("harmonic_oscillator").as_flow(1)
        sample = lambda r: symplectic.random_phase_point(r, 1)  # noqa: E731
        pairs = ((0.3, 0.4), (math.pi, 1.0))
        assert core.verify_flow_group_law(f, sample, pairs, 1e-12).passed
        assert not core.verify_flow_group_law(f, sample, pairs, 0.0).passed

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            HamiltonianFlow("pendulum")
        with pytest.raises(ValueError):
            HamiltonianFlow("free_particle", mass=0.0)
        with pytest.raises(ValueError):
            symplectic.check_flow_reversal(HamiltonianFlow("free_particle"), "rk4")
