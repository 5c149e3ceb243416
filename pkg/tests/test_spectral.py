import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from shockstab import get_model, solve_profile
from shockstab import spectral as S
from shockstab.models import psystem_shock


@pytest.fixture(scope="module")
def burgers():
    m = get_model("burgers")
    p = solve_profile(m, [1.0], [-1.0], halfwidth=20.0, h=0.01)
    return m, p


@pytest.fixture(scope="module")
def burgers_solver(burgers):
    return S.EvansSolver(*burgers)


# -- exterior algebra ---------------------------------------------------------

@pytest.mark.parametrize("N,k", [(2, 1), (4, 2), (5, 2), (5, 3)])
def test_exterior_generator_exponential_identity(N, k):
    rng = np.random.default_rng(N * 10 + k)
    M = rng.standard_normal((N, N))
    tables = S.exterior_tables(N, k)
    lhs = expm(S.exterior_generator(M, tables))
    rhs = S.compound_matrix(expm(M), tables)
    assert np.allclose(lhs, rhs, atol=1e-9)


def test_wedge_pairing_is_determinant():
    rng = np.random.default_rng(7)
    N, k = 4, 2
    ta = S.exterior_tables(N, k)
    tb = S.exterior_tables(N, N - k)
    Va = rng.standard_normal((N, k))
    Vb = rng.standard_normal((N, N - k))
    wa = S.wedge_from_columns(Va, ta)
    wb = S.wedge_from_columns(Vb, tb)
    signs, comp = S._pairing_signs(ta, tb)
    pair = np.sum(signs * wa * wb[comp])
    assert pair == pytest.approx(np.linalg.det(np.hstack([Va, Vb])), rel=1e-10)


# -- eigenvalue system --------------------------------------------------------

def test_translate_mode_residual(burgers):
    assert S.operator_residual_translate(*burgers) < 1e-6


def test_translate_mode_residual_psystem():
    m, Um, Up = psystem_shock(0.7, 1.0)
    p = solve_profile(m, Um, Up, halfwidth=None, h=0.02)
    assert S.operator_residual_translate(m, p) < 1e-6


def test_burgers_system_structure(burgers_solver):
    # system size 2; endstate matrices realize mu^2 - a mu - lam = 0
    assert burgers_solver.size == 2
    for lam in (0.3, 2.0):
        ode = S.eigenvalue_system(burgers_solver.model, burgers_solver.profile,
                                  lam)
        for M, a in ((ode.M_minus, 1.0), (ode.M_plus, -1.0)):
            mu = np.linalg.eigvals(M)
            want = np.roots([1.0, -a, -lam])
            assert np.allclose(np.sort(mu.real), np.sort(want.real), atol=1e-6)
        assert ode.consistent_splitting()


def test_real_lambda_real_system(burgers_solver):
    M = burgers_solver.M_at_end(0.7 + 0.0j, "minus")
    assert np.allclose(M.imag, 0.0)


def test_consistent_splitting_right_half_plane(burgers_solver):
    for lam in (0.1, 1.0, 4.0 + 3.0j, 0.01 + 1.0j):
        km, kp = burgers_solver.splitting(lam)
        assert km + kp == burgers_solver.size


# -- Evans values -------------------------------------------------------------

def _oracle_burgers_D(lam, X=20.0):
    """Two-sided shooting with matching determinant (independent path)."""
    a = lambda x: -np.tanh(x / 2.0)

    def rhs(x, z, mu):
        zz = z[:2] + 1j * z[2:]
        M = np.array([[a(x), 1.0], [lam, 0.0]], dtype=complex)
        out = M @ zz - mu * zz
        return np.concatenate([out.real, out.imag])

    ap, am = a(X), a(-X)
    mup = (ap - np.sqrt(ap * ap + 4 * lam + 0j)) / 2.0
    mum = (am + np.sqrt(am * am + 4 * lam + 0j)) / 2.0
    zp0 = np.array([1.0, mup - ap], dtype=complex)
    zm0 = np.array([1.0, mum - am], dtype=complex)
    solp = solve_ivp(rhs, (X, 0.0), np.concatenate([zp0.real, zp0.imag]),
                     args=(mup,), rtol=1e-10, atol=1e-12)
    solm = solve_ivp(rhs, (-X, 0.0), np.concatenate([zm0.real, zm0.imag]),
                     args=(mum,), rtol=1e-10, atol=1e-12)
    zp = solp.y[:2, -1] + 1j * solp.y[2:, -1]
    zm = solm.y[:2, -1] + 1j * solm.y[2:, -1]
    return zm[0] * zp[1] - zm[1] * zp[0]


def test_evans_origin_and_nonzero(burgers_solver):
    v0 = S.evans_eval(burgers_solver, 0.0)
    v1 = S.evans_eval(burgers_solver, 1.0)
    assert v1.log10_abs > -8.0
    assert v0.log10_abs < v1.log10_abs - 6.0


def test_evans_sign_consistent_with_shooting(burgers_solver):
    # independent evaluations carry arbitrary frame signs, so the
    # convention-free content is the sign pattern along a tracked list:
    # D stays real and must not change sign on (0, inf), exactly as the
    # shooting oracle finds
    vals, _ = burgers_solver.evaluate_ordered([1.0 + 0j, 4.0 + 0j])
    mine = [v.mantissa for v in vals]
    oracle = [_oracle_burgers_D(1.0), _oracle_burgers_D(4.0)]
    for v in mine:
        assert abs(v.imag) < 1e-6 * abs(v)
        assert abs(v) > 1e-8
    assert np.sign(mine[0].real) * np.sign(mine[1].real) \
        == np.sign(oracle[0].real) * np.sign(oracle[1].real)


def test_conjugate_symmetry(burgers_solver):
    for lam in (0.5 + 0.8j, 2.0 + 3.0j):
        va, _ = burgers_solver.evaluate_ordered([lam])
        vb, _ = burgers_solver.evaluate_ordered([np.conj(lam)])
        assert va[0].mantissa == pytest.approx(np.conj(vb[0].mantissa),
                                               rel=1e-6)
        assert va[0].logmag == pytest.approx(vb[0].logmag, rel=1e-9)


def test_analyticity_cauchy_riemann(burgers_solver):
    rng = np.random.default_rng(3)
    pts = 0.5 + rng.uniform(0.1, 2.0, 20) + 1j * rng.uniform(-1.5, 1.5, 20)
    h = 1e-5
    for lam in pts:
        probes = [lam + h, lam - h, lam + 1j * h, lam - 1j * h]
        vals, _ = burgers_solver.evaluate_ordered(probes)
        ref = min(v.logmag for v in vals)
        D = [v.mantissa * np.exp(v.logmag - ref) for v in vals]
        d_dx = (D[0] - D[1]) / (2 * h)
        d_dy = (D[2] - D[3]) / (2 * h)
        dbar = 0.5 * (d_dx + 1j * d_dy)
        dD = 0.5 * (d_dx - 1j * d_dy)
        assert abs(dbar) < 1e-4 * abs(dD)


# -- winding ------------------------------------------------------------------

class _FakeSolver:
    """Analytic test function wearing the EvansSolver evaluation interface."""

    def __init__(self, fn):
        self.fn = fn

    def evaluate_ordered(self, lams, **_):
        out = [S.EvansValue(mantissa=complex(self.fn(lam)), logmag=0.0)
               for lam in lams]
        return out, None


def test_winding_constant_function():
    fake = _FakeSolver(lambda lam: 2.7 + 0.4j)
    assert S.winding_number(fake, S.origin_circle(1.0, 16)) == 0


@pytest.mark.parametrize("k", [1, 2, 3])
def test_winding_synthetic_zeros(k):
    fake = _FakeSolver(lambda lam: (lam - 0.2 - 0.1j) ** k * np.exp(lam))
    circle = [0.2 + 0.1j + z for z in S.origin_circle(0.5, 24)]
    assert S.winding_number(fake, circle) == k


def test_winding_synthetic_extra_rhp_zero():
    # a zero planted inside the excised right-half-plane contour is seen
    fake = _FakeSolver(lambda lam: (lam - 1.0) * lam)
    contour = S.rhp_contour(5.0, 1e-2)
    assert S.winding_number(fake, contour) == 1


def test_winding_refinement_invariance(burgers_solver):
    c1 = S.origin_circle(1e-3, 16)
    c2 = S.origin_circle(1e-3, 32)
    assert S.winding_number(burgers_solver, c1) == \
        S.winding_number(burgers_solver, c2) == 1


def test_winding_gauge_invariance(burgers):
    # different integration steps change the positive rescaling schedule
    m, p = burgers
    for step in (0.02, 0.05):
        solver = S.EvansSolver(m, p, step=step)
        assert S.winding_number(solver, S.origin_circle(1e-3, 16)) == 1


def test_min_modulus_guard():
    fake = _FakeSolver(lambda lam: lam)  # zero sits on every centered contour
    with pytest.raises(S.SpectralError):
        S.winding_number(fake, S.origin_circle(0.0, 8))


# -- condition D --------------------------------------------------------------

def test_condition_d_burgers(burgers):
    res = S.verify_condition_D(*burgers)
    assert res.winding == 0
    assert res.origin_winding == 1
    assert res.verdict
    assert res.origin_log10 < res.contour_max_log10 - 6.0


def test_condition_d_csv_rows(burgers):
    res = S.verify_condition_D(*burgers)
    rows = res.csv_rows()
    assert len(rows) == len(res.contour)
    # cumulative argument returns near an integer multiple of 2 pi
    total = rows[-1][4]
    assert abs(total / (2 * np.pi) - round(total / (2 * np.pi))) < 1e-2
