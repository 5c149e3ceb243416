"""Standing viscous shock profiles and their characteristic data.

A profile solves the traveling-wave system

    B(U) U' = F1(U) - F1(U-),

a saddle connection between the endstates (the wave speed is normalized
to zero, so F1 already contains any frame shift).  When B is degenerate
the first n-r equations are algebraic and are eliminated before
integrating the remaining r-dimensional dynamic block.

The solver shoots along the one-dimensional unstable manifold of the
left endstate (restricting to an invariant sign-symmetry subspace when
the manifold is higher dimensional) and then polishes on the requested
grid with a damped Newton iteration on the collocated system.
Translation is pinned by requiring the largest-jump component to equal
the endstate average at x = 0.
"""

from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse
import scipy.sparse.linalg
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from shockstab import models as _models
from shockstab.models import FluxViscositySystem, ModelError, check_assumptions

__all__ = [
    "ShockProfile",
    "CharacteristicData",
    "ShockType",
    "ProfileError",
    "solve_profile",
    "characteristic_data",
    "classify_shock",
    "profile_to_csv",
    "profile_metadata",
]

TOL_PROFILE = 1e-8
TOL_ENDSTATE = 1e-6
TOL_RH = 1e-10


class ProfileError(RuntimeError):
    """Profile solve failed or produced an inadmissible wave."""


class ShockType(Enum):
    LAX = "Lax"
    UNDERCOMPRESSIVE = "Undercompressive"
    OVERCOMPRESSIVE = "Overcompressive"

    @property
    def gamma(self) -> int:
        """Kernel degradation flag: 1 for undercompressive waves, else 0."""
        return 1 if self is ShockType.UNDERCOMPRESSIVE else 0


# ---------------------------------------------------------------------------
# reduced traveling-wave system
# ---------------------------------------------------------------------------

class _ReducedTW:
    """Traveling-wave ODE with the algebraic block eliminated.

    Dynamic variables are the last r components of U; for r < n the
    leading components solve F1_1(U) = F1_1(U-) by warm-started Newton.
    """

    def __init__(self, model: FluxViscositySystem, U_minus):
        self.model = model
        self.U_minus = np.asarray(U_minus, dtype=float)
        self.c = np.asarray(model.f1(self.U_minus), dtype=float)
        self.nh = model.n - model.r
        self._warm = self.U_minus[:self.nh].copy()

    def to_full(self, y):
        """Lift dynamic variables to the full state."""
        m = self.model
        if self.nh == 0:
            return np.asarray(y, dtype=float)
        U1 = self._warm.copy()
        for _ in range(60):
            U = np.concatenate([U1, y])
            res = np.asarray(m.f1(U))[:self.nh] - self.c[:self.nh]
            if np.max(np.abs(res)) < 1e-13 * max(1.0, np.max(np.abs(self.c)) ):
                self._warm = U1.copy()
                return U
            J11 = m.jac_f1(U)[:self.nh, :self.nh]
            U1 = U1 - np.linalg.solve(J11, res)
        raise ProfileError("algebraic block solve did not converge")

    def rhs(self, x, y):
        m = self.model
        U = self.to_full(np.asarray(y, dtype=float))
        flux = np.asarray(m.f1(U)) - self.c
        b = m.b_block(U)
        return np.linalg.solve(b, flux[self.nh:])

    def jac_at_equilibrium(self, U_eq):
        """Linearization of the dynamic block at an endstate."""
        m = self.model
        U_eq = np.asarray(U_eq, dtype=float)
        dF = m.jac_f1(U_eq)
        b = m.b_block(U_eq)
        if self.nh == 0:
            return np.linalg.solve(b, dF)
        # implicit function theorem on the algebraic block
        dg = -np.linalg.solve(dF[:self.nh, :self.nh], dF[:self.nh, self.nh:])
        eff = dF[self.nh:, :self.nh] @ dg + dF[self.nh:, self.nh:]
        return np.linalg.solve(b, eff)

    def project(self, U):
        return np.asarray(U, dtype=float)[self.nh:]


def _sign_symmetries(model, U_minus, U_plus, rng):
    """Coordinate sign-flip symmetries fixing both endstates.

    Returns diagonal +-1 matrices S (excluding identity) with
    f1(S u) = S f1(u) and B(S u) = S B(u) S on sampled states.
    """
    n = model.n
    samples = rng.uniform(-1.2, 1.2, size=(8, n))
    out = []
    for signs in itertools.product((1.0, -1.0), repeat=n):
        s = np.array(signs)
        if np.all(s == 1.0):
            continue
        if not (np.allclose(s * U_minus, U_minus) and np.allclose(s * U_plus, U_plus)):
            continue
        S = np.diag(s)
        ok = True
        for u in samples:
            try:
                if not np.allclose(model.f1(s * u), s * np.asarray(model.f1(u)),
                                   atol=1e-12, rtol=1e-10):
                    ok = False
                    break
                if not np.allclose(model.visc(s * u), S @ model.visc(u) @ S,
                                   atol=1e-12, rtol=1e-10):
                    ok = False
                    break
            except ModelError:
                ok = False
                break
        if ok:
            out.append(s)
    return out


def _unstable_direction(red: _ReducedTW, U_minus, U_plus):
    """One-dimensional unstable direction at U-, in dynamic coordinates.

    If the unstable manifold has higher dimension, restrict to an
    invariant sign-symmetry subspace and retry there.
    """
    J = red.jac_at_equilibrium(U_minus)
    evals, evecs = np.linalg.eig(J)
    unstable = np.where(evals.real > 1e-10)[0]
    if len(unstable) == 0:
        raise ProfileError("left endstate has no unstable direction; "
                           "no connecting orbit can leave it")
    if len(unstable) == 1:
        k = unstable[0]
        if abs(evals[k].imag) > 1e-10:
            raise ProfileError("complex unstable eigenvalue at left endstate")
        v = evecs[:, k].real
        return v / np.linalg.norm(v), float(evals[k].real), None

    rng = np.random.default_rng(0)
    for s in _sign_symmetries(red.model, U_minus, U_plus, rng):
        mask = red.project(s) > 0  # fixed coordinates of the flip
        if mask.all():
            continue
        P = np.eye(len(mask))[:, mask]
        Jr = P.T @ J @ P
        ev, evec = np.linalg.eig(Jr)
        uns = np.where(ev.real > 1e-10)[0]
        if len(uns) == 1 and abs(ev[uns[0]].imag) < 1e-10:
            v = P @ evec[:, uns[0]].real
            return v / np.linalg.norm(v), float(ev[uns[0]].real), mask
    raise ProfileError(
        f"unstable manifold at U- has dimension {len(unstable)} and no "
        "symmetry reduction applies; shooting is not well posed")


@dataclass
class ShockProfile:
    """Discretized standing wave on a uniform grid."""

    model: FluxViscositySystem
    grid: np.ndarray                 # x_i on [-X, X]
    values: np.ndarray               # U(x_i), shape (N, n)
    derivative: np.ndarray           # U'(x_i) from the traveling-wave ODE
    U_minus: np.ndarray
    U_plus: np.ndarray
    residual: float
    shift_convention: str
    pin_component: int
    halfwidth: float
    w_values: np.ndarray = field(default=None, repr=False)    # F0(U)
    w_derivative: np.ndarray = field(default=None, repr=False) # dF0(U) U'
    _dense: object = field(default=None, repr=False)

    @property
    def h(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def __call__(self, x):
        """Profile values at arbitrary x (dense representation)."""
        return self._dense(x)

    def derivative_at(self, x):
        U = np.atleast_2d(self._dense(x))
        red = _ReducedTW(self.model, self.U_minus)
        out = np.empty_like(U)
        for i, u in enumerate(U):
            flux = np.asarray(self.model.f1(u)) - red.c
            dyn = np.linalg.solve(self.model.b_block(u), flux[red.nh:])
            if red.nh:
                J = self.model.jac_f1(u)
                u1p = np.linalg.solve(J[:red.nh, :red.nh],
                                      -J[:red.nh, red.nh:] @ dyn)
                out[i] = np.concatenate([u1p, dyn])
            else:
                out[i] = dyn
        return out[0] if np.isscalar(x) or np.ndim(x) == 0 else out


class _DenseProfile:
    """Piecewise representation: linear saddle tail, ODE dense output, clamp."""

    def __init__(self, red, sol, x_shift, U_minus, U_plus, v_full, rate, U0):
        self.red = red
        self.sol = sol
        self.x_shift = x_shift       # trajectory parameter of grid x = 0
        self.U_minus = U_minus
        self.U_plus = U_plus
        self.v_full = v_full         # departure direction in full coordinates
        self.rate = rate
        self.U0 = U0                 # full state at trajectory start
        self.amp = np.linalg.norm(U0 - U_minus)
        self.x_end = sol.t[-1]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xi = np.atleast_1d(x) + self.x_shift
        n = self.U_minus.size
        out = np.empty((xi.size, n))
        left = xi < self.sol.t[0]
        right = xi > self.x_end
        mid = ~(left | right)
        if left.any():
            decay = np.exp(self.rate * (xi[left] - self.sol.t[0]))
            out[left] = self.U_minus + self.amp * decay[:, None] * self.v_full
        if right.any():
            out[right] = self.U_plus
        if mid.any():
            ys = np.atleast_2d(self.sol.sol(xi[mid]).T)
            for j, y in zip(np.where(mid)[0], ys):
                out[j] = self.red.to_full(y)
        return out[0] if scalar else out


def _newton_polish(model, red, grid, U, U_minus, pin, pin_target, max_iter=6):
    """Damped Newton on the collocated first-order system U' = RHS(U).

    Fourth-order interior stencils, second-order next to the ends,
    Dirichlet rows at the two boundary points.  The pin-component
    equation at x = 0 is replaced by the translation pin; without it the
    Jacobian is nearly singular along the translation mode and Newton
    drifts the wave.  Only used when B has full rank.
    """
    N, n = U.shape
    h = grid[1] - grid[0]
    i_pin = int(np.argmin(np.abs(grid)))

    def rhs_all(V):
        out = np.empty_like(V)
        for i in range(N):
            flux = np.asarray(model.f1(V[i])) - red.c
            out[i] = np.linalg.solve(model.b_block(V[i]), flux)
        return out

    def residual(V):
        R = np.zeros_like(V)
        F = rhs_all(V)
        R[2:-2] = (V[:-4] - 8 * V[1:-3] + 8 * V[3:-1] - V[4:]) / (12 * h) - F[2:-2]
        R[1] = (V[2] - V[0]) / (2 * h) - F[1]
        R[-2] = (V[-1] - V[-3]) / (2 * h) - F[-2]
        R[0] = 0.0
        R[-1] = 0.0
        R[i_pin, pin] = V[i_pin, pin] - pin_target
        return R

    V = U.copy()
    best = np.max(np.abs(residual(V)))
    for _ in range(max_iter):
        if best < 1e-13:
            break
        rows, cols, vals = [], [], []
        idx = lambda i, c: i * n + c

        def add_block(i, j, M, skip_pin_row):
            for a in range(n):
                if skip_pin_row and i == i_pin and a == pin:
                    continue
                for b in range(n):
                    if M[a, b] != 0.0:
                        rows.append(idx(i, a))
                        cols.append(idx(j, b))
                        vals.append(M[a, b])

        eye = np.eye(n)
        for i in range(N):
            if i == 0 or i == N - 1:
                add_block(i, i, eye, False)
                continue
            skip = i == i_pin
            dF = _models.fd_jacobian(
                lambda u: np.linalg.solve(model.b_block(u),
                                          np.asarray(model.f1(u)) - red.c),
                V[i])
            add_block(i, i, -dF, skip)
            if 2 <= i <= N - 3:
                for j, w in ((i - 2, 1.0), (i - 1, -8.0), (i + 1, 8.0), (i + 2, -1.0)):
                    add_block(i, j, (w / (12 * h)) * eye, skip)
            else:
                add_block(i, i - 1, (-1.0 / (2 * h)) * eye, skip)
                add_block(i, i + 1, (1.0 / (2 * h)) * eye, skip)
        rows.append(idx(i_pin, pin))
        cols.append(idx(i_pin, pin))
        vals.append(1.0)

        J = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(N * n, N * n))
        step = scipy.sparse.linalg.spsolve(J, -residual(V).ravel()).reshape(N, n)
        lam = 1.0
        for _ in range(8):
            trial = V + lam * step
            r_trial = np.max(np.abs(residual(trial)))
            if r_trial < best:
                V, best = trial, r_trial
                break
            lam *= 0.5
        else:
            break  # no improvement; keep current iterate
    return V


def _profile_residual(model, red, grid, U):
    """Max traveling-wave residual using 6th-order differences of grid values."""
    h = grid[1] - grid[0]
    N = U.shape[0]
    if N < 9:
        raise ProfileError("grid too coarse for the residual stencil")
    w = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / (60.0 * h)
    dU = sum(w[k] * U[k:N - 6 + k] for k in range(7))
    worst = 0.0
    for i, up in enumerate(dU):
        j = i + 3
        lhs = np.asarray(model.visc(U[j])) @ up
        rhs = np.asarray(model.f1(U[j])) - red.c
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def solve_profile(model: FluxViscositySystem, U_minus, U_plus,
                  halfwidth: float | None = None, h: float = 0.01,
                  polish: bool = True,
                  tol_profile: float = TOL_PROFILE,
                  tol_endstate: float = TOL_ENDSTATE) -> ShockProfile:
    """Compute the standing shock profile connecting U- to U+.

    Requires the zero-speed jump condition F1(U-) = F1(U+) and the
    structural assumptions at both endstates.  If `halfwidth` is None it
    starts at 20 and doubles until the profile reaches its endstates to
    `tol_endstate`.
    """
    U_minus = np.atleast_1d(np.asarray(U_minus, dtype=float))
    U_plus = np.atleast_1d(np.asarray(U_plus, dtype=float))
    if np.allclose(U_minus, U_plus, atol=1e-12):
        raise ProfileError("endstates coincide: not a shock")
    jump_flux = np.max(np.abs(np.asarray(model.f1(U_minus))
                              - np.asarray(model.f1(U_plus))))
    if jump_flux > TOL_RH * max(1.0, float(np.max(np.abs(model.f1(U_minus))))):
        raise ProfileError(
            f"jump condition violated for a standing wave: |[F1]| = {jump_flux:.3e}")
    report = check_assumptions(model, U_minus, U_plus)
    if not report.structurally_ok:
        raise ProfileError(f"endstate assumptions fail: {report.summary()}")

    red = _ReducedTW(model, U_minus)
    v_dyn, rate, mask = _unstable_direction(red, U_minus, U_plus)
    y_minus = red.project(U_minus)
    y_plus = red.project(U_plus)

    # orient the departure toward U+ when the geometry decides it
    orient = float(np.dot(v_dyn, y_plus - y_minus))
    if orient < 0:
        v_dyn = -v_dyn

    eps0 = 1e-8 * max(1.0, float(np.linalg.norm(y_plus - y_minus)))
    y0 = y_minus + eps0 * v_dyn
    U0 = red.to_full(y0)
    v_full = (U0 - U_minus) / np.linalg.norm(U0 - U_minus)

    span = 60.0 * max(1.0, 1.0 / rate) + 4.0 * (halfwidth or 20.0)
    scale = max(1.0, float(np.linalg.norm(y_plus - y_minus)))

    def close_event(x, y):
        return float(np.linalg.norm(y - y_plus)) - 1e-13 * scale
    close_event.terminal = True

    def escape_event(x, y):
        return float(np.linalg.norm(y - y_minus)) - 6.0 * scale
    escape_event.terminal = True

    sol = solve_ivp(red.rhs, (0.0, span), y0, method="DOP853",
                    rtol=1e-12, atol=1e-14 * scale, dense_output=True,
                    events=(close_event, escape_event))
    if not sol.success:
        raise ProfileError(f"trajectory integration failed: {sol.message}")
    if sol.t_events[1].size:
        raise ProfileError("trajectory escaped: no connecting orbit found")
    y_end = sol.y[:, -1]
    if np.linalg.norm(y_end - y_plus) > 1e-7 * scale:
        raise ProfileError(
            "trajectory does not reach U+: no connecting orbit found "
            f"(final distance {np.linalg.norm(y_end - y_plus):.3e})")

    # pin translation: largest-jump component equals the endstate average at x=0
    pin = int(np.argmax(np.abs(U_plus - U_minus)))
    target = 0.5 * (U_plus[pin] + U_minus[pin])

    def pin_gap(xi):
        return red.to_full(sol.sol(xi))[pin] - target

    ts = np.linspace(sol.t[0], sol.t[-1], 4096)
    gaps = np.array([pin_gap(t) for t in ts])
    crossings = np.where(np.sign(gaps[:-1]) * np.sign(gaps[1:]) < 0)[0]
    if crossings.size == 0:
        raise ProfileError("pin component never crosses the endstate average")
    k = crossings[0]
    x_pin = brentq(pin_gap, ts[k], ts[k + 1], xtol=1e-14)

    dense = _DenseProfile(red, sol, x_pin, U_minus, U_plus, v_full, rate, U0)

    X = halfwidth if halfwidth is not None else 20.0
    while True:
        tail = max(np.max(np.abs(dense(X) - U_plus)),
                   np.max(np.abs(dense(-X) - U_minus)))
        if tail < tol_endstate or halfwidth is not None:
            break
        X *= 2.0
        if X > 5000.0:
            raise ProfileError("profile tails decay too slowly")
    if tail >= tol_endstate:
        raise ProfileError(
            f"profile misses endstates at +-{X:g} by {tail:.3e} "
            f"(tolerance {tol_endstate:g})")

    N = int(round(2.0 * X / h)) + 1
    grid = -X + h * np.arange(N)
    U = dense(grid)

    if polish and red.nh == 0:
        # overcompressive waves come in multi-parameter families; keep the
        # polish only when it actually improves the collocation residual
        raw_res = _profile_residual(model, red, grid, U)
        polished = _newton_polish(model, red, grid, U, U_minus, pin, target)
        if _profile_residual(model, red, grid, polished) < raw_res:
            U = polished

    residual = _profile_residual(model, red, grid, U)
    if residual > tol_profile:
        raise ProfileError(
            f"profile residual {residual:.3e} exceeds tolerance {tol_profile:g}")

    deriv = np.empty_like(U)
    for i in range(N):
        flux = np.asarray(model.f1(U[i])) - red.c
        dyn = np.linalg.solve(model.b_block(U[i]), flux[red.nh:])
        if red.nh:
            J = model.jac_f1(U[i])
            u1p = np.linalg.solve(J[:red.nh, :red.nh], -J[:red.nh, red.nh:] @ dyn)
            deriv[i] = np.concatenate([u1p, dyn])
        else:
            deriv[i] = dyn

    w_vals = np.array([model.f0(u) for u in U])
    w_der = np.array([model.jac_f0(u) @ d for u, d in zip(U, deriv)])
    if np.max(np.abs(w_der)) <= 0.0:
        raise ProfileError("degenerate wave: W' vanishes identically")

    return ShockProfile(
        model=model, grid=grid, values=U, derivative=deriv,
        U_minus=U_minus, U_plus=U_plus, residual=residual,
        shift_convention="max-jump component at x=0 equals endstate average",
        pin_component=pin, halfwidth=X,
        w_values=w_vals, w_derivative=w_der, _dense=dense,
    )


# ---------------------------------------------------------------------------
# characteristic data along the profile
# ---------------------------------------------------------------------------

def _eig_sorted(A):
    evals, evecs = np.linalg.eig(A)
    if np.max(np.abs(evals.imag)) > 1e-10 * max(1.0, np.max(np.abs(evals.real))):
        raise ProfileError("complex characteristic speeds at an endstate")
    order = np.argsort(evals.real)
    return evals.real[order], evecs.real[:, order]


def _eigpairs_point(A, prev_r):
    """Eigenpairs of one profile point, labeled by overlap with prev_r."""
    n = A.shape[0]
    if np.max(np.abs(A)) < 1e-13 and prev_r is not None:
        # characteristic crossing where A degenerates; carry labels through
        return np.zeros(n), prev_r.copy()
    evals, evecs = np.linalg.eig(A)
    if np.max(np.abs(evals.imag)) > 1e-9 * max(1.0, np.max(np.abs(evals.real))):
        raise ProfileError("complex characteristic speeds along the profile")
    evals = evals.real
    evecs = evecs.real
    evecs /= np.linalg.norm(evecs, axis=0, keepdims=True)
    if prev_r is None:
        order = np.argsort(evals)
        return evals[order], evecs[:, order]
    overlap = np.abs(prev_r.T @ evecs)  # (mode, candidate)
    assign = [-1] * n
    used = set()
    for _ in range(n):
        k, j = np.unravel_index(np.argmax(overlap), overlap.shape)
        assign[k] = j
        used.add(j)
        overlap[k, :] = -1.0
        overlap[:, j] = -1.0
    vals = evals[assign]
    vecs = evecs[:, assign]
    signs = np.sign(np.sum(prev_r * vecs, axis=0))
    signs[signs == 0] = 1.0
    return vals, vecs * signs


@dataclass
class CharacteristicData:
    """Speeds, eigenvector fields and diffusion rates along a profile."""

    grid: np.ndarray
    a_minus: np.ndarray            # sorted speeds at -inf
    a_plus: np.ndarray             # sorted speeds at +inf
    i_minus: int
    i_plus: int
    a_fields: np.ndarray           # (N, n), mode-continuous speeds
    r_fields: np.ndarray           # (N, n, n): r_fields[i, :, k] is r_k(x_i)
    l_fields: np.ndarray           # (N, n, n): l_fields[i, k, :] is l_k(x_i)
    beta_minus: np.ndarray         # diffusion rates per sorted index at -inf
    beta_plus: np.ndarray
    sorted_to_field_minus: np.ndarray  # field label of each sorted -inf speed
    sorted_to_field_plus: np.ndarray

    def l_field_of_sorted_minus(self, k):
        return self.l_fields[:, self.sorted_to_field_minus[k], :]

    def l_field_of_sorted_plus(self, k):
        return self.l_fields[:, self.sorted_to_field_plus[k], :]

    def l_prime_fields(self):
        """d/dx of the left eigenvector fields (4th-order differences)."""
        h = self.grid[1] - self.grid[0]
        lf = self.l_fields
        out = np.gradient(lf, h, axis=0, edge_order=2)
        inner = (lf[:-4] - 8 * lf[1:-3] + 8 * lf[3:-1] - lf[4:]) / (12 * h)
        out[2:-2] = inner
        return out


def characteristic_data(model: FluxViscositySystem,
                        profile: ShockProfile) -> CharacteristicData:
    """Endstate speeds, continuous eigenvector fields, and diffusion rates."""
    n = model.n
    W_minus = np.asarray(model.f0(profile.U_minus), dtype=float)
    W_plus = np.asarray(model.f0(profile.U_plus), dtype=float)

    A_minus = _models.dftilde(model, W_minus)
    A_plus = _models.dftilde(model, W_plus)
    am, vm = _eig_sorted(A_minus)
    ap, vp = _eig_sorted(A_plus)

    gap = min(np.min(np.diff(am)) if n > 1 else np.inf,
              np.min(np.diff(ap)) if n > 1 else np.inf)
    if n > 1 and gap < 1e-8:
        raise ProfileError("repeated characteristic speed at an endstate")
    if min(np.min(np.abs(am)), np.min(np.abs(ap))) < 1e-8:
        raise ProfileError("characteristic shock: an endstate speed vanishes")

    i_minus = int(np.sum(am < 0))
    i_plus = int(np.sum(ap < 0))

    N = profile.grid.size
    a_fields = np.empty((N, n))
    r_fields = np.empty((N, n, n))
    l_fields = np.empty((N, n, n))
    prev_r = None
    for i in range(N):
        A = _models.dftilde(model, profile.w_values[i])
        vals, vecs = _eigpairs_point(A, prev_r)
        a_fields[i] = vals
        r_fields[i] = vecs
        l_fields[i] = np.linalg.inv(vecs)   # biorthonormal rows
        prev_r = vecs

    def beta_at(W, a_sorted):
        A = _models.dftilde(model, W)
        Bt = _models.btilde(model, W)
        vals, vecs = _eig_sorted(A)
        lmat = np.linalg.inv(vecs)
        return np.array([float(lmat[k] @ Bt @ vecs[:, k]) for k in range(n)])

    beta_minus = beta_at(W_minus, am)
    beta_plus = beta_at(W_plus, ap)

    # map sorted endstate indices to the continuous field labels
    s2f_minus = np.array([int(np.argmin(np.abs(a_fields[0] - a))) for a in am])
    s2f_plus = np.array([int(np.argmin(np.abs(a_fields[-1] - a))) for a in ap])

    return CharacteristicData(
        grid=profile.grid.copy(), a_minus=am, a_plus=ap,
        i_minus=i_minus, i_plus=i_plus,
        a_fields=a_fields, r_fields=r_fields, l_fields=l_fields,
        beta_minus=beta_minus, beta_plus=beta_plus,
        sorted_to_field_minus=s2f_minus, sorted_to_field_plus=s2f_plus,
    )


def classify_shock(cd: CharacteristicData) -> ShockType:
    """Shock type from the signed characteristic counts (pure function)."""
    if cd.i_plus == cd.i_minus + 1:
        return ShockType.LAX
    if cd.i_plus <= cd.i_minus:
        return ShockType.UNDERCOMPRESSIVE
    return ShockType.OVERCOMPRESSIVE


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def profile_to_csv(profile: ShockProfile, path):
    n = profile.values.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x"] + [f"U_{k+1}" for k in range(n)]
                        + [f"dU_{k+1}" for k in range(n)])
        for i, x in enumerate(profile.grid):
            writer.writerow([f"{x:.17g}"]
                            + [f"{v:.17g}" for v in profile.values[i]]
                            + [f"{v:.17g}" for v in profile.derivative[i]])


def profile_metadata(profile: ShockProfile,
                     cd: CharacteristicData | None = None) -> dict:
    meta = {
        "model": profile.model.name,
        "U_minus": profile.U_minus.tolist(),
        "U_plus": profile.U_plus.tolist(),
        "halfwidth": profile.halfwidth,
        "h": profile.h,
        "residual": profile.residual,
        "shift_convention": profile.shift_convention,
        "pin_component": profile.pin_component,
    }
    if cd is not None:
        st = classify_shock(cd)
        meta.update({
            "shock_type": st.value,
            "gamma": st.gamma,
            "i_minus": cd.i_minus,
            "i_plus": cd.i_plus,
            "speeds_minus": cd.a_minus.tolist(),
            "speeds_plus": cd.a_plus.tolist(),
            "beta_minus": cd.beta_minus.tolist(),
            "beta_plus": cd.beta_plus.tolist(),
        })
    return meta


def save_profile_metadata(profile: ShockProfile, path,
                          cd: CharacteristicData | None = None):
    with open(path, "w") as fh:
        json.dump(profile_metadata(profile, cd), fh, indent=2, sort_keys=True)
        fh.write("\n")
