import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from penalfr import sfd
from penalfr.masking import MaskField


def rk4_propagator(chi_f, delta, dt, doublings=None):
    """exp(A dt) by 2**doublings classical RK4 substeps.

    The step matrix I + D is raised to the power by repeated squaring of the
    increment, (I + D)^2 = I + (2D + D^2), so that round-off does not pile up
    in the identity part.
    """
    A = np.array([[-chi_f, chi_f], [1.0 / delta, -1.0 / delta]])
    if doublings is None:
        # substep with |z| <= 1/1024
        doublings = max(6, int(np.ceil(np.log2(1024 * (chi_f + 1.0 / delta) * dt + 1))))
    Z = A * (dt / 2.0**doublings)
    D = Z + Z @ Z / 2 + Z @ Z @ Z / 6 + Z @ Z @ Z @ Z / 24
    for _ in range(doublings):
        D = 2 * D + D @ D
    return np.eye(2) + D


@pytest.mark.parametrize("chi_f,delta,dt", [(1e3, 1.0, 1e-3), (10.0, 0.01, 1e-2), (1e5, 100.0, 1e-5)])
def test_propagator_matches_fine_rk4(chi_f, delta, dt):
    P = sfd.build_propagator(sfd.SfdParams(chi_f, delta), dt).as_matrix()
    np.testing.assert_allclose(P, rk4_propagator(chi_f, delta, dt), rtol=1e-10, atol=1e-300)


def test_zero_step_is_identity():
    P = sfd.build_propagator(sfd.SfdParams(50.0, 0.3), 0.0).as_matrix()
    np.testing.assert_array_equal(P, np.eye(2))


def test_steady_state_fixed_point():
    # q = qbar is untouched for any parameters
    prop = sfd.build_propagator(sfd.SfdParams(123.0, 4.5), 0.37)
    q, qb = prop.apply(np.array([2.5, -1.0]), np.array([2.5, -1.0]))
    np.testing.assert_allclose(q, [2.5, -1.0], rtol=1e-15)
    np.testing.assert_allclose(qb, [2.5, -1.0], rtol=1e-15)


def test_no_feedback_filter_only():
    prop = sfd.build_propagator(sfd.SfdParams(0.0, 2.0), 1.0)
    assert prop.a11 == 1.0 and prop.a12 == 0.0
    assert prop.a22 == pytest.approx(np.exp(-0.5))


def test_invalid_parameters():
    with pytest.raises(ValueError):
        sfd.SfdParams(chi_f=-1.0)
    with pytest.raises(ValueError):
        sfd.SfdParams(chi_f=1.0, delta=0.0)
    with pytest.raises(ValueError):
        sfd.build_propagator(sfd.SfdParams(1.0, 1.0), -1e-3)
    sfd.SfdParams.off()  # disabled parameters skip validation


@settings(max_examples=60, deadline=None)
@given(
    chi=st.floats(0.0, 1e6),
    delta=st.floats(1e-6, 1e4),
    dt=st.floats(0.0, 1.0),
)
def test_propagator_is_stochastic_and_contractive(chi, delta, dt):
    P = sfd.build_propagator(sfd.SfdParams(chi, delta), dt).as_matrix()
    # rows sum to one (constants preserved) and every entry lies in [0, 1]
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(P >= -1e-15) and np.all(P <= 1 + 1e-15)


@settings(max_examples=40, deadline=None)
@given(chi=st.floats(1e-2, 1e4), delta=st.floats(1e-3, 1e3), dt=st.floats(1e-6, 1e-1))
def test_semigroup_property(chi, delta, dt):
    p = sfd.SfdParams(chi, delta)
    one = sfd.build_propagator(p, 2 * dt).as_matrix()
    half = sfd.build_propagator(p, dt).as_matrix()
    np.testing.assert_allclose(one, half @ half, atol=1e-12)


def test_system_matrix_generates_propagator():
    from scipy.linalg import expm

    p = sfd.SfdParams(300.0, 0.05)
    np.testing.assert_allclose(expm(sfd.system_matrix(p) * 2e-3),
                               sfd.build_propagator(p, 2e-3).as_matrix(), rtol=1e-12)


def _mask():
    v = np.zeros((2, 3), dtype=np.int8)
    v[0, 1] = v[1, 2] = 1
    return MaskField(v, "circle")


def test_select_scatter_roundtrip_conserved():
    rng = np.random.default_rng(0)
    U = rng.uniform(0.5, 2.0, size=(4, 2, 3))
    U[3] += 10.0
    m = _mask()
    q = sfd.select_velocities(U, m)
    assert q.shape == (4,)
    np.testing.assert_allclose(q[0], U[1][0, 1] / U[0][0, 1])
    np.testing.assert_allclose(sfd.scatter_velocities(q, U, m), U, rtol=1e-14)


def test_scatter_keeps_pressure_and_density():
    rng = np.random.default_rng(1)
    U = rng.uniform(0.5, 2.0, size=(4, 2, 3))
    U[3] += 10.0
    m = _mask()
    out = sfd.scatter_velocities(np.zeros(4), U, m)
    gamma = 1.4
    p = lambda W: (gamma - 1) * (W[3] - 0.5 * (W[1] ** 2 + W[2] ** 2) / W[0])
    np.testing.assert_allclose(p(out), p(U), rtol=1e-13)
    np.testing.assert_array_equal(out[0], U[0])
    assert np.all(out[1][m.values == 1] == 0)
    np.testing.assert_array_equal(out[:, m.values == 0], U[:, m.values == 0])


def test_scalar_fields_and_shape_errors():
    m = _mask()
    u = np.arange(6.0).reshape(2, 3)
    q = sfd.select_velocities(u, m)
    np.testing.assert_array_equal(q, [1.0, 5.0])
    with pytest.raises(ValueError):
        sfd.scatter_velocities(np.zeros(3), u, m)
    with pytest.raises(ValueError):
        sfd.sfd_step(sfd.SfdState(np.zeros(2), np.zeros(2)), np.zeros(3), sfd.build_propagator(sfd.SfdParams(1, 1), 1))
    with pytest.raises(ValueError):
        sfd.SfdState(np.zeros(2), np.zeros(3))


def test_init_filtered_is_target_velocity():
    m = _mask()
    np.testing.assert_array_equal(sfd.init_filtered(m, (0.5, -1.0)), [0.5, -1.0, 0.5, -1.0])
    np.testing.assert_array_equal(sfd.init_filtered(m, (0.5, 0.0), scalar=True), [0.5, 0.5])


def test_sfd_step_damps_toward_filtered_value():
    prop = sfd.build_propagator(sfd.SfdParams(1e3, 10.0), 1e-2)
    state = sfd.SfdState(q=np.ones(3), q_bar=np.zeros(3))
    for _ in range(200):
        state = sfd.sfd_step(state, state.q, prop)
    assert state.residual() < 1e-10
