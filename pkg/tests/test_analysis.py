import numpy as np
import pytest
from scipy.integrate import quad

from shockstab import analysis as An
from shockstab import get_model, solve_profile
from shockstab import kernels as K
from shockstab.profile import characteristic_data, classify_shock
from shockstab.sim import SimulationConfig, run_simulation


@pytest.fixture(scope="module")
def burgers_run():
    m = get_model("burgers")
    p = solve_profile(m, [1.0], [-1.0], halfwidth=30.0, h=0.05,
                      tol_profile=1e-6)
    cd = characteristic_data(m, p)
    st = classify_shock(cd)
    cfg = SimulationConfig(halfwidth=30.0, h=0.05, T=20.0,
                           probe_stations=(0.0, 2.0, -2.0),
                           perturbation={"shape": "gaussian",
                                         "amplitude": 1e-2,
                                         "center": 5.0, "width": 1.0})
    run = run_simulation(m, p, cfg, shock_type=st)
    ker = K.build_kernel(p, cd, normalization="calibrated")
    return m, p, cd, run, ker


@pytest.fixture(scope="module")
def zero_run():
    m = get_model("burgers")
    p = solve_profile(m, [1.0], [-1.0], halfwidth=20.0, h=0.05,
                      tol_profile=1e-6)
    cd = characteristic_data(m, p)
    st = classify_shock(cd)
    cfg = SimulationConfig(halfwidth=20.0, h=0.05, T=4.0,
                           probe_stations=(0.0,),
                           perturbation={"shape": "gaussian",
                                         "amplitude": 0.0,
                                         "center": 0.0, "width": 1.0})
    run = run_simulation(m, p, cfg, shock_type=st)
    ker = K.build_kernel(p, cd, normalization="calibrated")
    return m, run, ker


# -- norms --------------------------------------------------------------------

def test_lp_norms_constant():
    h = 0.01
    w = np.full(2001, 0.7)   # on [0, 20]
    assert An.lp_norms(w, h, p=1) == pytest.approx(0.7 * 20.0, rel=1e-12)
    assert An.lp_norms(w, h, p=np.inf) == 0.7


def test_lp_norms_gaussian_oracle():
    x = np.linspace(-40, 40, 16001)
    w = np.exp(-x * x)
    h = x[1] - x[0]
    assert An.lp_norms(w, h, p=2) == pytest.approx((np.pi / 2) ** 0.25,
                                                   abs=1e-6)


def test_lp_norms_sign_invariance():
    rng = np.random.default_rng(0)
    w = rng.standard_normal((101, 2))
    for p in (1, 2, 4, np.inf):
        assert An.lp_norms(w, 0.1, p=p) == An.lp_norms(-w, 0.1, p=p)


def test_sobolev_norm_reduces_to_l2():
    x = np.linspace(-20, 20, 4001)
    w = np.exp(-x * x)
    h = x[1] - x[0]
    assert An.sobolev_norm(w, h, s=0) == pytest.approx(
        An.lp_norms(w, h, p=2), rel=1e-12)
    assert An.sobolev_norm(w, h, s=2) > An.sobolev_norm(w, h, s=1)


# -- least-squares phase ------------------------------------------------------

def test_lsq_phase_recovers_shift(burgers_run):
    _, p, _, run, _ = burgers_run
    ref = run.steady
    from scipy.interpolate import CubicSpline
    spl = CubicSpline(run.x, ref, axis=0)
    shifted = spl(np.clip(run.x - 0.3, run.x[0], run.x[-1]))
    d = An.phase_extract_lsq(shifted, ref, run.h)
    assert d == pytest.approx(0.3, abs=1e-4)
    assert An.phase_extract_lsq(ref, ref, run.h) == pytest.approx(0.0, abs=1e-6)


def test_lsq_phase_quadratic_in_odd_perturbation(burgers_run):
    # perturbations orthogonal to the wave derivative shift the fit by O(eps^2)
    _, p, _, run, _ = burgers_run
    ref = run.steady
    bump = np.sin(run.x)[:, None] * np.exp(-run.x[:, None] ** 2)
    bump -= (np.sum(bump * run.steady_prime)
             / np.sum(run.steady_prime ** 2)) * run.steady_prime
    eps = 2e-3
    d = abs(An.phase_extract_lsq(ref + eps * bump, ref, run.h))
    assert d < eps ** 2  # quadratic response, no linear leak


# -- kernel phase -------------------------------------------------------------

def test_zero_run_has_zero_phase(zero_run):
    m, run, ker = zero_run
    ph = An.phase_extract_kernel(m, run, ker)
    assert np.max(np.abs(ph.delta_kernel)) < 1e-9
    assert np.max(np.abs(ph.deltadot_kernel)) < 1e-9


def test_linear_term_matches_quadrature_oracle(burgers_run):
    # -int e(y,t) w0(y) dy: module quadrature against adaptive quadrature
    m, p, cd, run, ker = burgers_run
    w0 = run.snapshots[0] - run.steady
    from scipy.interpolate import CubicSpline
    w0s = CubicSpline(run.x, w0[:, 0])
    t = 12.0

    def integrand(y):
        return ker.e(np.array([y]), t)[0, 0] * w0s(y)

    oracle = -quad(integrand, run.x[0], run.x[-1], limit=400)[0]
    wq = np.full(run.x.size, run.h)
    wq[0] = wq[-1] = run.h / 2
    mine = -float(np.sum(ker.e(run.x, t)[:, 0] * w0[:, 0] * wq))
    assert mine == pytest.approx(oracle, abs=1e-8)


def test_kernel_phase_tracks_mass_absorption(burgers_run):
    m, p, cd, run, ker = burgers_run
    ph = An.phase_extract_kernel(m, run, ker)
    # the asymptotic shift of a fully absorbed unit of mass is mass/2
    mass = 1e-2 * np.sqrt(np.pi)
    assert ph.delta_kernel[-1] == pytest.approx(mass / 2, rel=2e-2)
    assert ph.delta_lsq[-1] == pytest.approx(mass / 2, rel=2e-2)
    assert ph.delta_kernel[0] == 0.0
    assert ph.picard_iters <= 20


# -- functionals --------------------------------------------------------------

def test_zeta_exact_cancellation():
    # |w|_L2 = (1+s)^(-1/4) with everything else zero gives zeta == 1
    t = np.linspace(0.0, 50.0, 101)

    class _Ph:
        times = t
        delta_kernel = np.zeros(t.size)
        deltadot_kernel = np.zeros(t.size)

    norms = {"L2": (1 + t) ** -0.25, "dL2": np.zeros(t.size),
             "L4": np.zeros(t.size), "dL4": np.zeros(t.size),
             "Linf": np.zeros(t.size), "dLinf": np.zeros(t.size)}
    zeta, _, _ = An.zeta_functional(None, _Ph(), norms,
                                    {0.0: (t, np.zeros(t.size))})
    assert np.allclose(zeta, 1.0, atol=1e-12)


def test_vertical_integral_oracles():
    t = np.linspace(0.0, 1e5, 400001)
    # |w| = (1+s)^(-3/4): integral -> 4 (analytic antiderivative)
    v = An.vertical_integral(t, (1 + t) ** -0.75)
    assert v[-1] == pytest.approx(4.0 * (1 - (1 + t[-1]) ** -0.25), rel=5e-3)
    assert np.all(np.diff(v) >= 0)
    # additivity over partitions is exact for the cumulative rule
    k = 200000
    v2 = An.vertical_integral(t[k:], (1 + t[k:]) ** -0.75)
    assert v[k] + v2[-1] == pytest.approx(v[-1], rel=1e-12)
    # |w| = (1+s)^(-1/2) grows like log t (failure mode detected)
    g = An.vertical_integral(t, (1 + t) ** -0.5)
    assert g[-1] / np.interp(t[-1] / 2, t, g) > 1.05


def test_fit_decay_exponent_exact_power():
    t = np.linspace(1.0, 200.0, 500)
    v = 3.0 * (1 + t) ** -0.25
    exp, ci = An.fit_decay_exponent(t, v)
    assert exp == pytest.approx(-0.25, abs=1e-10)
    # invariance under positive scaling
    exp2, _ = An.fit_decay_exponent(t, 7.3 * v)
    assert exp2 == pytest.approx(exp, abs=1e-12)


def test_fit_decay_exponent_with_wobble():
    t = np.linspace(1.0, 500.0, 2000)
    v = (1 + t) ** -0.5 * (1 + 0.1 * np.sin(np.log(1 + t)))
    exp, ci = An.fit_decay_exponent(t, v, window=(1.0, 500.0))
    assert exp == pytest.approx(-0.5, abs=0.05)


def test_fit_decay_exponent_rejects_nonpositive():
    t = np.linspace(1.0, 100.0, 50)
    v = np.ones(50)
    v[30] = -1.0
    with pytest.raises(An.AnalysisError):
        An.fit_decay_exponent(t, v)


def test_damping_monitor_trivial_and_falsified():
    t = np.linspace(0.0, 100.0, 201)
    zero = np.zeros(t.size)
    rep = An.damping_monitor(t, zero + 1e-15, zero, zero)
    assert rep["verdict"]
    # growing top norm with no drivers cannot satisfy the inequality
    # with a T-stable constant
    grow = np.exp(t / 10.0)
    rep = An.damping_monitor(t, grow, zero, zero)
    assert rep["drift"] > 0.5


def test_damping_monitor_on_run(burgers_run):
    m, p, cd, run, ker = burgers_run
    diag = An.analyze_run(m, run, ker)
    assert diag.damping["verdict"]
    assert np.isfinite(diag.damping["C"])
    assert np.all(np.diff(diag.zeta) >= 0)
    assert np.all(np.diff(diag.vertical_sup) >= -1e-15)
