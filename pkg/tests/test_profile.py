import numpy as np
import pytest
from scipy.integrate import solve_ivp

from shockstab import (
    ShockType,
    characteristic_data,
    classify_shock,
    get_model,
    solve_profile,
)
from shockstab.models import cubic_shock, psystem_shock
from shockstab.profile import ProfileError, profile_metadata, profile_to_csv


@pytest.fixture(scope="module")
def burgers_profile():
    return solve_profile(get_model("burgers"), [1.0], [-1.0],
                         halfwidth=20.0, h=0.01)


@pytest.fixture(scope="module")
def ucquad_profile():
    return solve_profile(get_model("ucquad"), [1.0, 0.0], [-1.0, 0.0],
                         halfwidth=18.0, h=0.01)


def test_burgers_profile_closed_form(burgers_profile):
    p = burgers_profile
    exact = -np.tanh(p.grid / 2.0)
    assert np.max(np.abs(p.values[:, 0] - exact)) < 1e-8
    # derivative field comes from the ODE itself
    dexact = -0.5 / np.cosh(p.grid / 2.0) ** 2
    assert np.max(np.abs(p.derivative[:, 0] - dexact)) < 1e-8
    assert p.residual < 1e-8


def test_burgers_pin_convention(burgers_profile):
    i0 = np.argmin(np.abs(burgers_profile.grid))
    assert burgers_profile.grid[i0] == pytest.approx(0.0)
    assert abs(burgers_profile.values[i0, 0]) < 1e-10


def test_constant_state_rejected():
    with pytest.raises(ProfileError, match="not a shock"):
        solve_profile(get_model("burgers"), [1.0], [1.0])


def test_rankine_hugoniot_enforced():
    with pytest.raises(ProfileError, match="jump condition"):
        solve_profile(get_model("burgers"), [1.0], [-2.0])


def test_ucquad_undercompressive_connection(ucquad_profile):
    p = ucquad_profile
    assert np.max(np.abs(p.values[:, 0] + np.tanh(p.grid))) < 1e-6
    assert np.max(np.abs(p.values[:, 1])) < 1e-10
    assert p.residual < 1e-6
    cd = characteristic_data(p.model, p)
    st = classify_shock(cd)
    assert st is ShockType.UNDERCOMPRESSIVE and st.gamma == 1


def test_ucquad_two_sided_shooting_oracle(ucquad_profile):
    """Independent two-sided shoot, matched at x = 0, confirms the orbit."""
    m = get_model("ucquad")
    c = np.asarray(m.f1(np.array([1.0, 0.0])))
    rhs = lambda x, u: np.asarray(m.f1(u)) - c
    eps = 1e-9
    fwd = solve_ivp(rhs, (0, 25), [1.0 - eps, 0.0], rtol=1e-12, atol=1e-14,
                    dense_output=True)
    bwd = solve_ivp(rhs, (0, -25), [-1.0 + eps, 0.0], rtol=1e-12, atol=1e-14,
                    dense_output=True)
    # both halves pass through u1 = 0; glue there and compare midpoint slopes
    t_f = next(t for t in np.linspace(0, 25, 20000) if fwd.sol(t)[0] <= 0.0)
    t_b = next(t for t in np.linspace(0, -25, 20000) if bwd.sol(t)[0] >= 0.0)
    slope_f = rhs(0.0, fwd.sol(t_f))
    slope_b = rhs(0.0, bwd.sol(t_b))
    assert np.allclose(slope_f, slope_b, atol=1e-6)
    # and the production profile's derivative at x=0 agrees
    p = ucquad_profile
    i0 = np.argmin(np.abs(p.grid))
    assert np.allclose(p.derivative[i0], slope_f, atol=1e-5)


def test_burgers_characteristics(burgers_profile):
    cd = characteristic_data(get_model("burgers"), burgers_profile)
    assert cd.a_minus == pytest.approx([1.0])
    assert cd.a_plus == pytest.approx([-1.0])
    assert (cd.i_minus, cd.i_plus) == (0, 1)
    assert cd.beta_minus[0] == pytest.approx(1.0)
    assert cd.beta_plus[0] == pytest.approx(1.0)
    assert classify_shock(cd) is ShockType.LAX


def test_psystem_characteristics():
    m, Um,Up = psystem_shock(0.7, 1.0)
    p = solve_profile(m, Um, Up, halfwidth=None, h=0.02)
    cd = characteristic_data(m, p)
    s = m.params["speed"]
    gamma, a0 = m.params["gamma"], m.params["a0"]
    for U, speeds in ((Um, cd.a_minus), (Up, cd.a_plus)):
        c = np.sqrt(a0 * gamma * U[0] ** (-gamma - 1.0))
        assert speeds == pytest.approx([-c - s, c - s], rel=1e-8)
    assert cd.i_plus == cd.i_minus + 1
    assert classify_shock(cd) is ShockType.LAX


def test_psystem_profile_against_reduced_ode():
    """Shooting oracle on the scalar v-equation for the eliminated system."""
    m, Um, Up = psystem_shock(0.7, 1.0)
    p = solve_profile(m, Um, Up, halfwidth=None, h=0.02)
    s, gamma, a0, mu = (m.params[k] for k in ("speed", "gamma", "a0", "mu"))
    pr = lambda v: a0 * v ** -gamma

    def g(v):  # s^2 (v - v-) + p(v) - p(v-)
        return s * s * (v - Um[0]) + pr(v) - pr(Um[0])

    # v' = -v g(v) / (mu s); integrate from the profile's own left sample
    i0 = np.argmin(np.abs(p.grid + 10.0))
    sol = solve_ivp(lambda x, v: [-v[0] * g(v[0]) / (mu * s)],
                    (p.grid[i0], p.grid[-1]), [p.values[i0, 0]],
                    t_eval=p.grid[i0:], rtol=1e-12, atol=1e-14)
    assert np.max(np.abs(sol.y[0] - p.values[i0:, 0])) < 1e-8


def test_eigenvector_fields_continuous(ucquad_profile):
    cd = characteristic_data(get_model("ucquad"), ucquad_profile)
    # normalization l_i . r_j = delta_ij everywhere
    prod = np.einsum("xkn,xnj->xkj", cd.l_fields, cd.r_fields)
    assert np.allclose(prod, np.eye(2)[None], atol=1e-10)
    # no sign flips: consecutive eigenvectors overlap positively
    dots = np.einsum("xnk,xnk->xk", cd.r_fields[:-1], cd.r_fields[1:])
    assert np.all(dots > 0.9)


def test_classification_exhaustive():
    # pure function of (i+, i-): check every pair for n up to 4
    from shockstab.profile import CharacteristicData

    for n in (1, 2, 3, 4):
        for im in range(n + 1):
            for ip in range(n + 1):
                cd = CharacteristicData(
                    grid=np.array([0.0]), a_minus=np.zeros(n), a_plus=np.zeros(n),
                    i_minus=im, i_plus=ip,
                    a_fields=None, r_fields=None, l_fields=None,
                    beta_minus=None, beta_plus=None,
                    sorted_to_field_minus=None, sorted_to_field_plus=None)
                st = classify_shock(cd)
                if ip == im + 1:
                    assert st is ShockType.LAX
                elif ip <= im:
                    assert st is ShockType.UNDERCOMPRESSIVE
                else:
                    assert st is ShockType.OVERCOMPRESSIVE


def test_cubic_overcompressive_classified():
    mc, Um, Up = cubic_shock(1.0, -0.3)
    p = solve_profile(mc, Um, Up, halfwidth=None, h=0.02)
    cd = characteristic_data(mc, p)
    assert classify_shock(cd) is ShockType.OVERCOMPRESSIVE


def test_residual_refinement_order(burgers_profile):
    m = get_model("burgers")
    coarse = solve_profile(m, [1.0], [-1.0], halfwidth=20.0, h=0.2,
                           polish=False, tol_profile=1e-4)
    fine = solve_profile(m, [1.0], [-1.0], halfwidth=20.0, h=0.1,
                         polish=False, tol_profile=1e-4)
    assert coarse.residual / fine.residual > 3.0


def test_translation_invariance_of_pinning():
    # solving on different windows reproduces identical values near the wave
    m = get_model("burgers")
    a = solve_profile(m, [1.0], [-1.0], halfwidth=20.0, h=0.01)
    b = solve_profile(m, [1.0], [-1.0], halfwidth=25.0, h=0.01)
    ia = np.argmin(np.abs(a.grid))
    ib = np.argmin(np.abs(b.grid))
    k = 800
    assert np.max(np.abs(a.values[ia - k:ia + k] - b.values[ib - k:ib + k])) < 1e-9


def test_export_roundtrip(tmp_path, burgers_profile):
    csv_path = tmp_path / "prof.csv"
    profile_to_csv(burgers_profile, csv_path)
    data = np.genfromtxt(csv_path, delimiter=",", skip_header=1)
    assert data.shape == (burgers_profile.grid.size, 3)
    assert np.allclose(data[:, 1], burgers_profile.values[:, 0])
    meta = profile_metadata(burgers_profile,
                            characteristic_data(get_model("burgers"),
                                                burgers_profile))
    assert meta["shock_type"] == "Lax"
    assert meta["i_plus"] == 1
