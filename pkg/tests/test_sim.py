import numpy as np
import pytest

from shockstab import get_model, solve_profile
from shockstab.models import psystem_shock
from shockstab.profile import ShockType, characteristic_data, classify_shock
from shockstab.sim import (
    BlowupError,
    SimulationConfig,
    SimulationError,
    discrete_steady_state,
    make_perturbation,
    run_simulation,
)


@pytest.fixture(scope="module")
def burgers_setup():
    m = get_model("burgers")
    p = solve_profile(m, [1.0], [-1.0], halfwidth=30.0, h=0.05,
                      tol_profile=1e-6)
    st = classify_shock(characteristic_data(m, p))
    return m, p, st


def _cfg(**kw):
    pert = kw.pop("perturbation", {"shape": "gaussian", "amplitude": 1e-2,
                                   "center": 5.0, "width": 1.0})
    base = dict(halfwidth=30.0, h=0.05, T=10.0, probe_stations=(0.0, 2.0),
                perturbation=pert)
    base.update(kw)
    return SimulationConfig(**base)


def test_unperturbed_run_is_stationary(burgers_setup):
    m, p, st = burgers_setup
    run = run_simulation(m, p, _cfg(perturbation={
        "shape": "gaussian", "amplitude": 0.0, "center": 5.0, "width": 1.0}),
        shock_type=st)
    assert np.max(np.abs(run.snapshots[-1] - run.snapshots[0])) < 1e-8


def test_conservation_ledger(burgers_setup):
    m, p, st = burgers_setup
    run = run_simulation(m, p, _cfg(), shock_type=st)
    assert max(run.ledger["residual_per_time"]) < 1e-8


def test_snapshots_uniform_and_reach_T(burgers_setup):
    m, p, st = burgers_setup
    run = run_simulation(m, p, _cfg(T=7.3), shock_type=st)
    dts = np.diff(run.times)
    assert np.allclose(dts, dts[0], rtol=1e-12)
    assert run.times[-1] == pytest.approx(7.3, rel=1e-12)


def test_domain_insensitivity(burgers_setup):
    # before signals reach the boundary, doubling the domain changes
    # nothing appreciably
    m, p, st = burgers_setup
    runs = {}
    for X in (30.0, 60.0):
        runs[X] = run_simulation(m, p, _cfg(halfwidth=X), shock_type=st)
    n1 = runs[30.0].norms_raw["L2"]
    n2 = runs[60.0].norms_raw["L2"]
    k = min(n1.size, n2.size)
    assert np.max(np.abs(n1[:k] - n2[:k])) < 0.01 * np.max(n1[:k])


def test_smallness_gate(burgers_setup):
    m, p, st = burgers_setup
    with pytest.raises(SimulationError, match="smallness"):
        run_simulation(m, p, _cfg(perturbation={
            "shape": "gaussian", "amplitude": 5.0, "center": 0.0,
            "width": 1.0}), shock_type=st)


def test_blowup_detection(burgers_setup):
    m, p, st = burgers_setup
    with pytest.raises(BlowupError):
        run_simulation(m, p, _cfg(blowup_factor=0.9), shock_type=st)


def test_cfl_violation_rejected(burgers_setup):
    m, p, st = burgers_setup
    with pytest.raises(SimulationError, match="CFL"):
        run_simulation(m, p, _cfg(dt=0.5), shock_type=st)


def test_overcompressive_rejected(burgers_setup):
    m, p, _ = burgers_setup
    with pytest.raises(SimulationError, match="[Oo]vercompressive"):
        run_simulation(m, p, _cfg(), shock_type=ShockType.OVERCOMPRESSIVE)


def test_psystem_run_keeps_positivity():
    m, Um, Up = psystem_shock(0.7, 1.0)
    p = solve_profile(m, Um, Up, halfwidth=None, h=0.05, tol_profile=1e-6)
    st = classify_shock(characteristic_data(m, p))
    cfg = _cfg(halfwidth=40.0, T=5.0, perturbation={
        "shape": "gaussian", "amplitude": 5e-3, "center": 3.0, "width": 1.0})
    run = run_simulation(m, p, cfg, shock_type=st)
    assert np.min(run.snapshots[:, :, 0]) > 0.0
    assert max(run.ledger["residual_per_time"]) < 1e-8


def test_perturbation_shapes(burgers_setup):
    m, p, _ = burgers_setup
    x = np.linspace(-10, 10, 201)
    g = make_perturbation({"shape": "gaussian", "amplitude": 1e-2,
                           "center": 0.0, "width": 2.0}, x, p, 1)
    assert g[100, 0] == pytest.approx(1e-2)
    b = make_perturbation({"shape": "compact-bump", "amplitude": 1e-2,
                           "center": 0.0, "width": 2.0}, x, p, 1)
    assert np.all(b[np.abs(x) >= 2.0] == 0.0)
    s = make_perturbation({"shape": "shifted-profile", "amplitude": 1e-2},
                          x, p, 1)
    assert np.max(np.abs(s + 1e-2 * p.derivative_at(x))) < 1e-3 * 1e-2 + 5e-7
    r1 = make_perturbation({"shape": "random-bumps", "amplitude": 1e-2},
                           x, p, 1, seed=7)
    r2 = make_perturbation({"shape": "random-bumps", "amplitude": 1e-2},
                           x, p, 1, seed=7)
    assert np.array_equal(r1, r2)
    with pytest.raises(SimulationError):
        make_perturbation({"shape": "nope"}, x, p, 1)
    with pytest.raises(SimulationError):
        make_perturbation({"shape": "gaussian", "components": [1, 2, 3]},
                          x, p, 1)


def test_steady_projection_fixed_point(burgers_setup):
    m, p, st = burgers_setup
    from shockstab.sim import _Discretization
    disc = _Discretization(m, p, _cfg(), st)
    W = discrete_steady_state(disc, p(disc.x))
    assert np.max(np.abs(disc.full_rhs(W))) < 1e-8
    # one time step keeps it fixed (exercised end to end above)
    # the discrete steady family is translation-degenerate up to O(h^2)
    # breaking, so the projection may land on a nearby translate
    assert np.max(np.abs(W - p(disc.x))) < 0.1


def test_determinism(burgers_setup):
    m, p, st = burgers_setup
    r1 = run_simulation(m, p, _cfg(T=2.0), shock_type=st)
    r2 = run_simulation(m, p, _cfg(T=2.0), shock_type=st)
    assert np.array_equal(r1.snapshots, r2.snapshots)
