import numpy as np
import pytest

from shockstab import models
from shockstab.models import (
    ModelError,
    check_assumptions,
    evaluate_system,
    fd_jacobian,
    get_model,
    psystem_shock,
)


def test_burgers_pointwise():
    m = get_model("burgers")
    b = evaluate_system(m, np.array([2.0]))
    assert b.f1[0] == pytest.approx(2.0)
    assert b.df1[0, 0] == pytest.approx(2.0)
    assert b.B[0, 0] == 1.0


def test_psystem_matches_symbolic():
    # flux (-u - s v, p(v) - s u) with p = a0 v^-gamma; compare against
    # hand-differentiated Jacobian
    gamma, a0, s = 1.4, 1.0 / 1.4, 0.3
    m = models.psystem(gamma=gamma, a0=a0, speed=s)
    U = np.array([0.8, -0.2])
    b = evaluate_system(m, U)
    v, u = U
    assert b.f1 == pytest.approx([-u - s * v, a0 * v ** -gamma - s * u])
    dp = -a0 * gamma * v ** (-gamma - 1.0)
    assert b.df1 == pytest.approx(np.array([[-s, -1.0], [dp, -s]]))
    assert b.B[1, 1] == pytest.approx(1.0 / v)
    assert b.B[0, 0] == 0.0


@pytest.mark.parametrize("name,states", [
    ("burgers", np.linspace(-2, 2, 100).reshape(-1, 1)),
    ("psystem", np.column_stack([np.linspace(0.4, 2.0, 100),
                                 np.linspace(-1, 1, 100)])),
    ("cubic", np.random.default_rng(1).uniform(-1.5, 1.5, (100, 2))),
    ("ucquad", np.random.default_rng(2).uniform(-1.5, 1.5, (100, 2))),
])
def test_analytic_jacobians_match_finite_differences(name, states):
    m = get_model(name)
    for U in states:
        J = m.jac_f1(U)
        J_fd = fd_jacobian(m.f1, U)
        scale = max(1.0, np.max(np.abs(J)))
        assert np.max(np.abs(J - J_fd)) < 1e-6 * scale


def test_viscosity_zero_rows_bit_exact():
    m = get_model("psystem")
    for v in np.linspace(0.3, 2.0, 25):
        B = m.visc(np.array([v, 0.7]))
        assert np.all(B[0, :] == 0.0)


def test_evaluate_rejects_bad_input():
    m = get_model("burgers")
    with pytest.raises(ModelError):
        evaluate_system(m, np.array([np.nan]))
    with pytest.raises(ModelError):
        evaluate_system(m, np.array([1.0, 2.0]))


def test_burgers_assumptions_strictly_parabolic():
    m = get_model("burgers")
    rep = check_assumptions(m, np.array([1.0]), np.array([-1.0]))
    assert rep.strictly_parabolic
    assert rep.a1_ok and rep.a2_ok and rep.a3_ok
    assert rep.structurally_ok


def test_constructed_a2_violation():
    # eigenvector e1 of dF1 placed in ker B: genuine coupling fails
    bad = models.FluxViscositySystem(
        name="bad", n=2, r=1,
        f0=lambda u: u.copy(),
        f1=lambda u: np.array([2.0 * u[0], u[1]]),
        visc=lambda u: np.diag([0.0, 1.0]),
    )
    rep = check_assumptions(bad, np.array([0.0, 0.0]), np.array([1.0, 1.0]))
    assert rep.a2_ok is False


def test_psystem_assumptions_at_reference_state():
    # with a0 = 1/gamma, dF1 is symmetric at (v,u) = (1,0)
    m = models.psystem()
    rep = check_assumptions(m, np.array([1.0, 0.0]), np.array([1.0, 0.0]))
    assert rep.a1_ok and rep.a2_ok and rep.a3_ok
    assert not rep.strictly_parabolic


def test_check_assumptions_deterministic():
    m = models.psystem()
    r1 = check_assumptions(m, np.array([0.9, 0.1]), np.array([1.1, -0.1]))
    r2 = check_assumptions(m, np.array([0.9, 0.1]), np.array([1.1, -0.1]))
    assert r1.summary() == r2.summary()
    assert r1.minus["a2_min_ratio"] == r2.minus["a2_min_ratio"]


def test_psystem_shock_jump_conditions():
    m, Um, Up = psystem_shock(0.7, 1.0)
    assert np.allclose(m.f1(Um), m.f1(Up), atol=1e-12)


def test_w_coordinate_helpers_identity_f0():
    m = get_model("ucquad")
    W = np.array([0.3, -0.4])
    assert np.allclose(m.u_from_w(W), W)
    assert np.allclose(models.ftilde(m, W), m.f1(W))
    assert np.allclose(models.btilde(m, W), np.eye(2))


def test_dbtilde_apply_psystem():
    # B~ = diag(0, mu/v); derivative in direction (1,0) is diag(0, -mu/v^2)
    m = models.psystem(mu=1.0)
    W = np.array([0.8, 0.1])
    M = models.dbtilde_apply(m, W, np.array([1.0, 0.0]))
    assert M[1, 1] == pytest.approx(-1.0 / 0.64, rel=1e-6)
    assert abs(M[0, 0]) < 1e-10


def test_registry_roundtrip():
    assert set(models.available_models()) >= {"burgers", "psystem", "cubic", "ucquad"}
    with pytest.raises(ModelError):
        get_model("nope")
