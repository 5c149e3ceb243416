"""Hyperbolic-parabolic conservation-law models and structural checks.

Systems have the form

    F0(U)_t + F1(U)_x = (B(U) U_x)_x,    U in R^n,

where the viscosity matrix B is degenerate: its first n-r rows vanish
and its lower-right r x r block b has spectrum in the open right
half-plane.  Structural assumptions checked here:

  A1: dF1 symmetric at the endstates, the hyperbolic block dF1_11
      symmetric, dF0 symmetric positive definite;
  A2: no eigenvector of dF1 (dF0)^-1 lies in ker(B (dF0)^-1) at the
      endstates (genuine coupling);
  A3: spectrum of b has positive real part.

Four models ship built in: `burgers`, `psystem` (isentropic gas dynamics
in Lagrangian coordinates, frame-shifted to make shocks stationary),
`cubic` (rotationally invariant cubic flux, identity viscosity), and
`ucquad` (a quadratically coupled Burgers/transport system whose standing
shock between (1,0) and (-1,0) is undercompressive).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "FluxViscositySystem",
    "AssumptionReport",
    "ModelError",
    "evaluate_system",
    "check_assumptions",
    "fd_jacobian",
    "get_model",
    "register_model",
    "available_models",
    "burgers",
    "psystem",
    "psystem_shock",
    "cubic",
    "ucquad",
]

_EPS = np.finfo(float).eps


class ModelError(ValueError):
    """Invalid model data or evaluation outside the model's domain."""


def fd_jacobian(f: Callable, U: np.ndarray) -> np.ndarray:
    """Central finite-difference Jacobian of f at U, step eps^(1/3)*max(1,|U|)."""
    U = np.asarray(U, dtype=float)
    h = _EPS ** (1.0 / 3.0) * max(1.0, float(np.max(np.abs(U))))
    cols = []
    for k in range(U.size):
        dU = np.zeros_like(U)
        dU[k] = h
        cols.append((np.asarray(f(U + dU), dtype=float)
                     - np.asarray(f(U - dU), dtype=float)) / (2.0 * h))
    return np.stack(cols, axis=-1)


@dataclass
class FluxViscositySystem:
    """A conservation-law model (F0, F1, B) with dimensions (n, r).

    Jacobians df0/df1 may be omitted; central finite differences are
    used as a fallback.  `visc` must return the full n x n viscosity
    matrix with its first n-r rows identically zero.
    """

    name: str
    n: int
    r: int
    f0: Callable[[np.ndarray], np.ndarray]
    f1: Callable[[np.ndarray], np.ndarray]
    visc: Callable[[np.ndarray], np.ndarray]
    df0: Callable[[np.ndarray], np.ndarray] | None = None
    df1: Callable[[np.ndarray], np.ndarray] | None = None
    params: dict = field(default_factory=dict)
    # optional vectorized evaluators over (N, n) state arrays; generic
    # per-point loops are used when absent
    f1_batch: Callable[[np.ndarray], np.ndarray] | None = None
    bdiag_batch: Callable[[np.ndarray], np.ndarray] | None = None
    alpha_batch: Callable[[np.ndarray], np.ndarray] | None = None

    def flux_batch(self, U: np.ndarray) -> np.ndarray:
        if self.f1_batch is not None:
            return self.f1_batch(U)
        return np.array([self.f1(u) for u in U])

    def bdiag(self, U: np.ndarray) -> np.ndarray:
        """Diagonal of the viscosity matrix over a state array.

        The stepper's implicit solver requires a diagonal viscosity
        block; models with off-diagonal b are rejected there.
        """
        if self.bdiag_batch is not None:
            return self.bdiag_batch(U)
        out = np.empty_like(U)
        for i, u in enumerate(U):
            B = np.asarray(self.visc(u), dtype=float)
            if np.any(B != np.diag(np.diag(B))):
                raise ModelError("time stepping requires a diagonal "
                                 "viscosity matrix")
            out[i] = np.diag(B)
        return out

    def wavespeed_batch(self, U: np.ndarray) -> np.ndarray:
        if self.alpha_batch is not None:
            return self.alpha_batch(U)
        return np.array([self.wavespeed(u) for u in U])

    def __post_init__(self):
        if not (0 < self.r <= self.n):
            raise ModelError(f"need 0 < r <= n, got n={self.n}, r={self.r}")

    # -- pointwise evaluation -----------------------------------------------

    def _check_state(self, U) -> np.ndarray:
        U = np.atleast_1d(np.asarray(U, dtype=float))
        if U.shape != (self.n,):
            raise ModelError(f"state has shape {U.shape}, expected ({self.n},)")
        if not np.all(np.isfinite(U)):
            raise ModelError(f"non-finite state {U!r}")
        return U

    def jac_f0(self, U) -> np.ndarray:
        U = self._check_state(U)
        if self.df0 is not None:
            return np.asarray(self.df0(U), dtype=float)
        return fd_jacobian(self.f0, U)

    def jac_f1(self, U) -> np.ndarray:
        U = self._check_state(U)
        if self.df1 is not None:
            return np.asarray(self.df1(U), dtype=float)
        return fd_jacobian(self.f1, U)

    def b_block(self, U) -> np.ndarray:
        """Lower-right r x r viscosity block b(U)."""
        B = np.asarray(self.visc(self._check_state(U)), dtype=float)
        return B[self.n - self.r:, self.n - self.r:]

    def convection(self, U) -> np.ndarray:
        """dF1 (dF0)^-1 at U; its eigenvalues are the characteristic speeds."""
        U = self._check_state(U)
        return self.jac_f1(U) @ np.linalg.inv(self.jac_f0(U))

    def wavespeed(self, U) -> float:
        """Spectral radius of the convection matrix (CFL bound)."""
        return float(np.max(np.abs(np.linalg.eigvals(self.convection(U)))))

    @property
    def f0_is_identity(self) -> bool:
        if "_f0_id" not in self.params:
            probe = np.linspace(-0.7, 0.9, self.n)
            self.params["_f0_id"] = bool(
                np.allclose(self.f0(probe), probe, atol=1e-13))
        return self.params["_f0_id"]

    def u_from_w(self, W) -> np.ndarray:
        """Invert W = F0(U) (Newton; identity fast path)."""
        W = np.atleast_1d(np.asarray(W, dtype=float))
        if self.f0_is_identity:
            return W.copy()
        U = W.copy()
        for _ in range(50):
            res = np.asarray(self.f0(U)) - W
            if np.max(np.abs(res)) < 1e-14 * max(1.0, np.max(np.abs(W))):
                return U
            U = U - np.linalg.solve(self.jac_f0(U), res)
        raise ModelError("F0 inversion did not converge")


@dataclass
class EvalBundle:
    """Pointwise model data at a single state."""

    f0: np.ndarray
    f1: np.ndarray
    B: np.ndarray
    df0: np.ndarray
    df1: np.ndarray


def evaluate_system(model: FluxViscositySystem, U) -> EvalBundle:
    """Evaluate (F0, F1, B, dF0, dF1) at U, validating the block structure.

    The first n-r rows of B must vanish exactly and the b block must have
    spectrum with positive real part (A3) at the evaluated state.
    """
    U = model._check_state(U)
    B = np.asarray(model.visc(U), dtype=float)
    if B.shape != (model.n, model.n):
        raise ModelError(f"B has shape {B.shape}, expected square of size {model.n}")
    nh = model.n - model.r
    if nh and np.any(B[:nh, :] != 0.0):
        raise ModelError("viscosity matrix must have exactly zero first n-r rows")
    if nh and np.any(B[nh:, :nh] != 0.0):
        raise ModelError("viscosity matrix must have zero lower-left block")
    return EvalBundle(
        f0=np.asarray(model.f0(U), dtype=float),
        f1=np.asarray(model.f1(U), dtype=float),
        B=B,
        df0=model.jac_f0(U),
        df1=model.jac_f1(U),
    )


# ---------------------------------------------------------------------------
# structural assumptions
# ---------------------------------------------------------------------------

def _symmetric(M, tol):
    scale = max(1.0, float(np.max(np.abs(M))))
    return bool(np.max(np.abs(M - M.T)) <= tol * scale)


def _check_endstate(model, U, tol):
    """Assumption verdicts at one endstate.  a2 may be None (indeterminate)."""
    bundle = evaluate_system(model, U)
    nh = model.n - model.r
    out = {
        "a1_df1_sym": _symmetric(bundle.df1, tol),
        "a1_df1_11_sym": _symmetric(bundle.df1[:nh, :nh], tol) if nh > 1 else True,
        "a1_df0_sym": _symmetric(bundle.df0, tol),
    }
    df0_eigs = np.linalg.eigvalsh(0.5 * (bundle.df0 + bundle.df0.T))
    out["a1_df0_pos"] = bool(np.min(df0_eigs) > tol)
    out["a1_ok"] = all(out[k] for k in
                       ("a1_df1_sym", "a1_df1_11_sym", "a1_df0_sym", "a1_df0_pos"))

    b = bundle.B[nh:, nh:]
    b_eigs = np.linalg.eigvals(b)
    out["a3_ok"] = bool(np.min(b_eigs.real) > tol)
    out["b_eigs"] = b_eigs

    # A2: test every eigenvector of dF1 (dF0)^-1 against ker(B (dF0)^-1)
    df0_inv = np.linalg.inv(bundle.df0)
    A = bundle.df1 @ df0_inv
    evals, evecs = np.linalg.eig(A)
    # indeterminate if the eigenbasis is numerically defective
    cond = np.linalg.cond(evecs)
    if cond > 1.0 / np.sqrt(tol):
        out["a2_ok"] = None
        out["a2_min_ratio"] = np.nan
    else:
        K = bundle.B @ df0_inv
        ratios = [np.linalg.norm(K @ v) / np.linalg.norm(v) for v in evecs.T]
        out["a2_min_ratio"] = float(np.min(ratios))
        out["a2_ok"] = bool(out["a2_min_ratio"] >= tol)
    out["speeds"] = np.sort(evals.real)
    return out


@dataclass
class AssumptionReport:
    """Per-endstate verdicts for A1-A3 plus the strictly parabolic flag."""

    minus: dict
    plus: dict
    strictly_parabolic: bool
    tol: float

    @property
    def a1_ok(self):
        return self.minus["a1_ok"] and self.plus["a1_ok"]

    @property
    def a2_ok(self):
        if self.minus["a2_ok"] is None or self.plus["a2_ok"] is None:
            return None
        return self.minus["a2_ok"] and self.plus["a2_ok"]

    @property
    def a3_ok(self):
        return self.minus["a3_ok"] and self.plus["a3_ok"]

    @property
    def structurally_ok(self):
        """The verdicts the profile/simulation pipeline actually gates on.

        Literal endstate symmetry of dF1 (part of A1) fails for genuine
        gas-dynamical shocks even though those systems are symmetrizable,
        so a1 is reported but not gating; dF0 > 0, A2 and A3 are.
        """
        return bool(
            self.minus["a1_df0_pos"] and self.plus["a1_df0_pos"]
            and self.a2_ok and self.a3_ok
        )

    def summary(self) -> dict:
        return {
            "a1_ok": self.a1_ok,
            "a2_ok": self.a2_ok,
            "a3_ok": self.a3_ok,
            "strictly_parabolic": self.strictly_parabolic,
            "structurally_ok": self.structurally_ok,
            "tol": self.tol,
        }


def check_assumptions(model: FluxViscositySystem, U_minus, U_plus,
                      tol: float = 1e-8) -> AssumptionReport:
    """Check A1-A3 at both endstates.  Deterministic in its inputs."""
    minus = _check_endstate(model, U_minus, tol)
    plus = _check_endstate(model, U_plus, tol)
    strict = bool(
        model.r == model.n
        and model.f0_is_identity
        and np.allclose(model.jac_f0(np.asarray(U_minus, dtype=float)),
                        np.eye(model.n), atol=tol)
    )
    return AssumptionReport(minus=minus, plus=plus,
                            strictly_parabolic=strict, tol=tol)


# ---------------------------------------------------------------------------
# built-in models
# ---------------------------------------------------------------------------

def burgers() -> FluxViscositySystem:
    """Scalar Burgers equation u_t + (u^2/2)_x = u_xx."""
    return FluxViscositySystem(
        name="burgers", n=1, r=1,
        f0=lambda u: u.copy(),
        f1=lambda u: 0.5 * u * u,
        visc=lambda u: np.ones((1, 1)),
        df0=lambda u: np.ones((1, 1)),
        df1=lambda u: u.reshape(1, 1).copy(),
        f1_batch=lambda U: 0.5 * U * U,
        bdiag_batch=lambda U: np.ones_like(U),
        alpha_batch=lambda U: np.abs(U[:, 0]),
    )


def psystem(gamma: float = 1.4, a0: float | None = None, mu: float = 1.0,
            speed: float = 0.0) -> FluxViscositySystem:
    """Isentropic Navier-Stokes in Lagrangian coordinates, U = (v, u).

        v_t - u_x = 0,
        u_t + p(v)_x = (mu u_x / v)_x,      p(v) = a0 v^(-gamma).

    `speed` shifts the flux by -speed*F0 so that a shock of that speed
    becomes a standing wave.  Default a0 = 1/gamma makes dF1 symmetric
    at (v,u) = (1,0) in the unshifted frame.
    """
    if a0 is None:
        a0 = 1.0 / gamma
    s = speed

    def f1(U):
        v, u = U
        if v <= 0:
            raise ModelError(f"nonphysical specific volume v={v}")
        return np.array([-u - s * v, a0 * v ** (-gamma) - s * u])

    def df1(U):
        v, u = U
        return np.array([[-s, -1.0], [-a0 * gamma * v ** (-gamma - 1.0), -s]])

    def visc(U):
        v = U[0]
        if v <= 0:
            raise ModelError(f"nonphysical specific volume v={v}")
        B = np.zeros((2, 2))
        B[1, 1] = mu / v
        return B

    def f1_batch(U):
        v, u = U[:, 0], U[:, 1]
        if np.any(v <= 0):
            raise ModelError("nonphysical specific volume in state array")
        return np.column_stack([-u - s * v, a0 * v ** -gamma - s * u])

    def bdiag_batch(U):
        out = np.zeros_like(U)
        out[:, 1] = mu / U[:, 0]
        return out

    def alpha_batch(U):
        c = np.sqrt(a0 * gamma * U[:, 0] ** (-gamma - 1.0))
        return np.abs(s) + c

    return FluxViscositySystem(
        name="psystem", n=2, r=1,
        f0=lambda U: U.copy(), f1=f1, visc=visc,
        df0=lambda U: np.eye(2), df1=df1,
        params={"gamma": gamma, "a0": a0, "mu": mu, "speed": speed},
        f1_batch=f1_batch, bdiag_batch=bdiag_batch, alpha_batch=alpha_batch,
    )


def psystem_shock(v_minus: float, v_plus: float, gamma: float = 1.4,
                  a0: float | None = None, mu: float = 1.0):
    """Build a frame-shifted p-system together with standing-shock endstates.

    Solves the jump conditions for the speed s = +sqrt(-[p]/[v]) and
    returns (model, U_minus, U_plus) with u_minus = 0.  For v_minus <
    v_plus this is a Lax 2-shock of the shifted system.
    """
    if a0 is None:
        a0 = 1.0 / gamma
    if v_minus <= 0 or v_plus <= 0 or v_minus == v_plus:
        raise ModelError("need distinct positive specific volumes")
    p = lambda v: a0 * v ** (-gamma)
    s2 = -(p(v_plus) - p(v_minus)) / (v_plus - v_minus)
    if s2 <= 0:
        raise ModelError("jump conditions give imaginary shock speed")
    s = np.sqrt(s2)
    u_minus = 0.0
    u_plus = u_minus - s * (v_plus - v_minus)
    model = psystem(gamma=gamma, a0=a0, mu=mu, speed=s)
    return model, np.array([v_minus, u_minus]), np.array([v_plus, u_plus])


def cubic(speed: float = 0.0) -> FluxViscositySystem:
    """Rotationally invariant cubic system u_t + (|u|^2 u)_x = u_xx, u in R^2.

    `speed` shifts the flux by -speed*u.  Collinear shocks of this model
    are Lax or overcompressive depending on the endstate ratio; it has
    no noncharacteristic undercompressive shocks (the profile field is a
    gradient flow whose endstate Morse indices exclude them).
    """
    s = speed

    def f1(u):
        return (u @ u) * u - s * u

    def df1(u):
        return (u @ u - s) * np.eye(2) + 2.0 * np.outer(u, u)

    def alpha_batch(U):
        q2 = np.sum(U * U, axis=1)
        return np.maximum(np.abs(q2 - s), np.abs(3.0 * q2 - s))

    return FluxViscositySystem(
        name="cubic", n=2, r=2,
        f0=lambda u: u.copy(), f1=f1, visc=lambda u: np.eye(2),
        df0=lambda u: np.eye(2), df1=df1,
        params={"speed": speed},
        f1_batch=lambda U: np.sum(U * U, axis=1)[:, None] * U - s * U,
        bdiag_batch=lambda U: np.ones_like(U),
        alpha_batch=alpha_batch,
    )


def cubic_shock(u_left: float = 1.0, u_right: float = 0.4):
    """Frame-shifted cubic model plus endstates for a collinear shock.

    Endstates (u_left, 0) and (u_right, 0); the jump conditions give
    speed s = uL^2 + uL*uR + uR^2.  Ratios u_right/u_left in (0, 1) give
    Lax shocks, in (-1/2, 0] overcompressive ones.
    """
    if u_left == u_right:
        raise ModelError("endstates coincide")
    s = u_left ** 2 + u_left * u_right + u_right ** 2
    model = cubic(speed=s)
    return model, np.array([u_left, 0.0]), np.array([u_right, 0.0])


def ucquad(coupling: float = -1.0) -> FluxViscositySystem:
    """Coupled Burgers/transport system with undercompressive standing shocks.

        (u1)_t + (u1^2 + c u2^2)_x = (u1)_xx,
        (u2)_t + (-u1 u2)_x        = (u2)_xx.

    The standing profile between (1,0) and (-1,0) is (-tanh x, 0); both
    endstates carry one incoming and one outgoing characteristic
    (i+ = i- = 1), the undercompressive configuration.  The c u2^2 flux
    term feeds transverse radiation back into the phase dynamics without
    altering the profile or the linearized operator.
    """
    c = coupling

    def f1(u):
        return np.array([u[0] ** 2 + c * u[1] ** 2, -u[0] * u[1]])

    def df1(u):
        return np.array([[2.0 * u[0], 2.0 * c * u[1]], [-u[1], -u[0]]])

    def f1_batch(U):
        return np.column_stack([U[:, 0] ** 2 + c * U[:, 1] ** 2,
                                -U[:, 0] * U[:, 1]])

    def alpha_batch(U):
        disc = np.sqrt(9.0 * U[:, 0] ** 2 - 8.0 * c * U[:, 1] ** 2)
        return 0.5 * (np.abs(U[:, 0]) + disc)

    return FluxViscositySystem(
        name="ucquad", n=2, r=2,
        f0=lambda u: u.copy(), f1=f1, visc=lambda u: np.eye(2),
        df0=lambda u: np.eye(2), df1=df1,
        params={"coupling": c},
        f1_batch=f1_batch,
        bdiag_batch=lambda U: np.ones_like(U),
        alpha_batch=alpha_batch,
    )


# ---------------------------------------------------------------------------
# conserved (W) coordinates: W = F0(U)
# ---------------------------------------------------------------------------

def ftilde(model: FluxViscositySystem, W) -> np.ndarray:
    """Flux in conserved coordinates, F~(W) = F1(F0^-1(W))."""
    return np.asarray(model.f1(model.u_from_w(W)), dtype=float)


def dftilde(model: FluxViscositySystem, W) -> np.ndarray:
    """Convection matrix dF~(W) = dF1 (dF0)^-1 at U = F0^-1(W)."""
    U = model.u_from_w(W)
    return model.jac_f1(U) @ np.linalg.inv(model.jac_f0(U))


def btilde(model: FluxViscositySystem, W) -> np.ndarray:
    """Viscosity in conserved coordinates, B~(W) = B(U) (dF0(U))^-1."""
    U = model.u_from_w(W)
    return np.asarray(model.visc(U), dtype=float) @ np.linalg.inv(model.jac_f0(U))


def dbtilde_apply(model: FluxViscositySystem, W, w) -> np.ndarray:
    """Directional derivative (dB~(W) w) as an n x n matrix, by central FD."""
    W = np.asarray(W, dtype=float)
    w = np.asarray(w, dtype=float)
    nw = np.linalg.norm(w)
    if nw == 0.0:
        return np.zeros((model.n, model.n))
    h = _EPS ** (1.0 / 3.0) * max(1.0, float(np.max(np.abs(W))))
    step = (h / nw) * w
    return (btilde(model, W + step) - btilde(model, W - step)) / (2.0 * h / nw)


_REGISTRY: dict[str, Callable[..., FluxViscositySystem]] = {
    "burgers": burgers,
    "psystem": psystem,
    "cubic": cubic,
    "ucquad": ucquad,
}


def register_model(name: str, factory: Callable[..., FluxViscositySystem]):
    _REGISTRY[name] = factory


def available_models():
    return sorted(_REGISTRY)


def get_model(name: str, **params) -> FluxViscositySystem:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise ModelError(
            f"unknown model {name!r}; available: {', '.join(available_models())}"
        ) from None
    return factory(**params)
