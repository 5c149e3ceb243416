"""Evans function evaluation and spectral stability verification.

The eigenvalue problem lambda w = L w for the linearized operator

    L w = -(A(x) w)' + (B~(x) w')',   A w := dF~(W)w - (dB~(W)w) W',

is written as a first-order system z' = M(x; lambda) z.  When B~ has
full rank, z = (w, B~w' - Aw) and the system has size 2n; for a
degenerate viscosity block, the hyperbolic components carry first-order
dynamics and z = (w1, w2, b1 w1' + b2 w2' - A21 w1 - A22 w2) with size
n + r.  In both cases M is affine in lambda.

The Evans function is computed with the compound-matrix method: the
induced flow on the k-th exterior power transports the Plucker
coordinates of the subspace decaying at +inf (integrated from +X toward
the shock) and of the one decaying at -inf (from -X).  Their pairing at
x = 0 is the Evans determinant, reconstructed up to a positive factor
(per-step norm rescaling; the logged magnitude is retained so values on
a contour stay comparable).  Winding numbers come from the argument
principle with adaptive contour refinement; eigenvalue branches are
tracked by continuity along the contour so the computation extends
analytically through Re(lambda) <= 0 near the origin.
"""

from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass, field

import numpy as np

from shockstab import models as _models
from shockstab.profile import ShockProfile

__all__ = [
    "EvansSolver",
    "EvansContourResult",
    "EigenvalueODE",
    "SpectralError",
    "eigenvalue_system",
    "evans_eval",
    "winding_number",
    "verify_condition_D",
    "operator_residual_translate",
    "exterior_tables",
    "exterior_generator",
    "wedge_from_columns",
]

MAX_ARG_STEP = np.pi / 4.0


class SpectralError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# exterior powers
# ---------------------------------------------------------------------------

class ExteriorTables:
    """Index bookkeeping for the k-th exterior power of R^N."""

    def __init__(self, N: int, k: int):
        self.N = N
        self.k = k
        self.combos = list(itertools.combinations(range(N), k))
        self.index = {c: i for i, c in enumerate(self.combos)}
        self.dim = len(self.combos)
        # transitions: (row, col, i, j, sign) with col = row with i -> j
        trans = []
        for row, I in enumerate(self.combos):
            Iset = set(I)
            for pos, i in enumerate(I):
                for j in range(N):
                    if j in Iset and j != i:
                        continue
                    J = tuple(sorted(Iset - {i} | {j}))
                    col = self.index[J]
                    sign = (-1) ** (pos + J.index(j))
                    trans.append((row, col, i, j, sign))
        self._rows = np.array([t[0] for t in trans])
        self._cols = np.array([t[1] for t in trans])
        self._is = np.array([t[2] for t in trans])
        self._js = np.array([t[3] for t in trans])
        self._signs = np.array([t[4] for t in trans], dtype=float)


_TABLES: dict[tuple[int, int], ExteriorTables] = {}


def exterior_tables(N: int, k: int) -> ExteriorTables:
    if (N, k) not in _TABLES:
        _TABLES[(N, k)] = ExteriorTables(N, k)
    return _TABLES[(N, k)]


def exterior_generator(M: np.ndarray, tables: ExteriorTables) -> np.ndarray:
    """Induced generator on the exterior power (linear in M).

    Rows/columns indexed by k-subsets; the diagonal holds partial traces
    and off-diagonal entries are signed single-index replacements.
    """
    G = np.zeros((tables.dim, tables.dim), dtype=M.dtype)
    np.add.at(G, (tables._rows, tables._cols),
              tables._signs * M[tables._is, tables._js])
    return G


def wedge_from_columns(V: np.ndarray, tables: ExteriorTables) -> np.ndarray:
    """Plucker coordinates (k x k minors) of an N x k column frame."""
    out = np.empty(tables.dim, dtype=V.dtype)
    for idx, I in enumerate(tables.combos):
        out[idx] = np.linalg.det(V[list(I), :])
    return out


def compound_matrix(M: np.ndarray, tables: ExteriorTables) -> np.ndarray:
    """k-th compound (all k x k minors) of M, the matrix of its exterior power."""
    C = np.empty((tables.dim, tables.dim), dtype=M.dtype)
    for a, I in enumerate(tables.combos):
        rows = list(I)
        for b, J in enumerate(tables.combos):
            C[a, b] = np.linalg.det(M[np.ix_(rows, list(J))])
    return C


def _pairing_signs(tables_a: ExteriorTables, tables_b: ExteriorTables):
    """Signs epsilon(I, I^c) for the Laplace pairing to the top power."""
    N = tables_a.N
    signs = np.empty(tables_a.dim)
    comp = np.empty(tables_a.dim, dtype=int)
    for idx, I in enumerate(tables_a.combos):
        Ic = tuple(sorted(set(range(N)) - set(I)))
        comp[idx] = tables_b.index[Ic]
        perm = list(I) + list(Ic)
        # parity of the permutation sending (0..N-1) to perm
        seen = [False] * N
        sign = 1
        for s in range(N):
            if seen[s]:
                continue
            length = 0
            t = s
            while not seen[t]:
                seen[t] = True
                t = perm.index(t)
                length += 1
            if length % 2 == 0:
                sign = -sign
        signs[idx] = sign
    return signs, comp


# ---------------------------------------------------------------------------
# first-order eigenvalue system
# ---------------------------------------------------------------------------

@dataclass
class EigenvalueODE:
    """First-order form of the eigenvalue problem at one lambda."""

    lam: complex
    size: int
    M_minus: np.ndarray
    M_plus: np.ndarray
    stable_dim_plus: int
    unstable_dim_minus: int

    def consistent_splitting(self) -> bool:
        return self.stable_dim_plus + self.unstable_dim_minus == self.size


class _Coefficients:
    """Profile coefficient fields sampled on the integration nodes.

    Nodes are spaced h/2 apart so that the classical RK4 stages on steps
    of size h read exact samples.
    """

    def __init__(self, model, profile: ShockProfile, X: float, h: float):
        self.model = model
        self.n = model.n
        self.r = model.r
        self.nh = model.n - model.r
        n_steps = int(round(2.0 * X / h))
        if n_steps % 2:
            n_steps += 1
        self.h = 2.0 * X / n_steps
        self.x = -X + 0.5 * self.h * np.arange(2 * n_steps + 1)
        self.X = X
        self.n_steps = n_steps

        U = profile(self.x)
        W = np.array([model.f0(u) for u in U])
        Up = profile.derivative_at(self.x)
        Wx = np.array([model.jac_f0(u) @ du for u, du in zip(U, Up)])

        nn = self.x.size
        n = self.n
        self.A = np.empty((nn, n, n))
        self.Bt = np.empty((nn, n, n))
        eye = np.eye(n)
        for i in range(nn):
            Amat = _models.dftilde(model, W[i])
            corr = np.empty((n, n))
            for j in range(n):
                corr[:, j] = _models.dbtilde_apply(model, W[i], eye[j]) @ Wx[i]
            self.A[i] = Amat - corr
            self.Bt[i] = _models.btilde(model, W[i])

        if self.nh:
            # x-derivative of the upper blocks of A (4th order interior)
            d = self.x[1] - self.x[0]
            Ad = np.gradient(self.A, d, axis=0, edge_order=2)
            Ad[2:-2] = (self.A[:-4] - 8 * self.A[1:-3]
                        + 8 * self.A[3:-1] - self.A[4:]) / (12 * d)
            self.A_prime = Ad
        else:
            self.A_prime = None

    @property
    def size(self):
        return 2 * self.n if self.nh == 0 else self.n + self.r

    def system_parts(self, i: int):
        """(M_A, M_B) at node i: M(x; lam) = M_A + lam * M_B."""
        n, r, nh = self.n, self.r, self.nh
        if nh == 0:
            N = 2 * n
            MA = np.zeros((N, N))
            Binv = np.linalg.inv(self.Bt[i])
            MA[:n, :n] = Binv @ self.A[i]
            MA[:n, n:] = Binv
            MB = np.zeros((N, N))
            MB[n:, :n] = np.eye(n)
            return MA, MB
        N = n + r
        A = self.A[i]
        Ap = self.A_prime[i]
        Bt = self.Bt[i]
        K = np.zeros((n, n))
        K[:nh, :] = A[:nh, :]
        K[nh:, :nh] = Bt[nh:, :nh]
        K[nh:, nh:] = Bt[nh:, nh:]
        try:
            Kinv = np.linalg.inv(K)
        except np.linalg.LinAlgError:
            raise SpectralError("noncharacteristic reduction failed: the "
                                "flux/viscosity block matrix is singular")
        MA = np.zeros((N, N))
        MB = np.zeros((N, N))
        # rows for (w1', w2') = Kinv [(-A11' w1 - A12' w2 - lam w1);
        #                             (A21 w1 + A22 w2 + phi)]
        rhsA = np.zeros((n, N))
        rhsA[:nh, :nh] = -Ap[:nh, :nh]
        rhsA[:nh, nh:n] = -Ap[:nh, nh:]
        rhsA[nh:, :nh] = A[nh:, :nh]
        rhsA[nh:, nh:n] = A[nh:, nh:]
        rhsA[nh:, n:] = np.eye(r)
        MA[:n, :] = Kinv @ rhsA
        rhsB = np.zeros((n, N))
        rhsB[:nh, :nh] = -np.eye(nh)
        MB[:n, :] = Kinv @ rhsB
        # phi' = lam w2
        MB[n:, nh:n] = np.eye(r)
        return MA, MB


def eigenvalue_system(model, profile: ShockProfile, lam: complex,
                      halfwidth: float | None = None) -> EigenvalueODE:
    """Endstate matrices and splitting dimensions at one spectral point."""
    solver = EvansSolver(model, profile, halfwidth=halfwidth)
    Mm = solver.M_at_end(lam, "minus")
    Mp = solver.M_at_end(lam, "plus")
    ks = solver.splitting(lam)
    return EigenvalueODE(lam=lam, size=solver.size, M_minus=Mm, M_plus=Mp,
                         stable_dim_plus=ks[1], unstable_dim_minus=ks[0])


# ---------------------------------------------------------------------------
# Evans solver
# ---------------------------------------------------------------------------

@dataclass
class EvansValue:
    mantissa: complex
    logmag: float

    @property
    def value(self):
        return self.mantissa * np.exp(min(self.logmag, 700.0))

    @property
    def log10_abs(self):
        m = abs(self.mantissa)
        return -np.inf if m == 0.0 else np.log10(m) + self.logmag / np.log(10.0)

    @property
    def arg(self):
        return cmath.phase(self.mantissa)


class EvansSolver:
    """Compound-matrix Evans function for one profile."""

    def __init__(self, model, profile: ShockProfile,
                 halfwidth: float | None = None, step: float | None = None):
        X = halfwidth if halfwidth is not None else profile.halfwidth
        h = step if step is not None else max(2.0 * profile.h, 1e-3)
        self.coeffs = _Coefficients(model, profile, X, h)
        self.size = self.coeffs.size
        self.model = model
        self.profile = profile
        self._gen_cache: dict[int, tuple] = {}

    # -- endstate data -----------------------------------------------------

    def M_at_end(self, lam, side):
        i = 0 if side == "minus" else self.coeffs.x.size - 1
        MA, MB = self.coeffs.system_parts(i)
        return MA + lam * MB

    def splitting(self, lam):
        """(unstable dim at -inf, stable dim at +inf) by real-part counts."""
        mu_m = np.linalg.eigvals(self.M_at_end(lam, "minus"))
        mu_p = np.linalg.eigvals(self.M_at_end(lam, "plus"))
        k_minus = int(np.sum(mu_m.real > 0))
        k_plus = int(np.sum(mu_p.real < 0))
        return k_minus, k_plus

    def reference_splitting(self, lam_ref=None):
        if lam_ref is None:
            lam_ref = 1.0 + 0.0j
        k_minus, k_plus = self.splitting(lam_ref)
        if k_minus + k_plus != self.size:
            raise SpectralError(
                f"consistent splitting fails at lambda={lam_ref}: "
                f"{k_minus} + {k_plus} != {self.size}")
        return k_minus, k_plus

    # -- generator assembly --------------------------------------------------

    def _generators(self, k):
        """Exterior-power generators (G_A, G_B) at every node, cached per k."""
        if k in self._gen_cache:
            return self._gen_cache[k]
        tables = exterior_tables(self.size, k)
        nn = self.coeffs.x.size
        GA = np.empty((nn, tables.dim, tables.dim))
        GB = np.empty((nn, tables.dim, tables.dim))
        for i in range(nn):
            MA, MB = self.coeffs.system_parts(i)
            GA[i] = exterior_generator(MA, tables)
            GB[i] = exterior_generator(MB, tables)
        self._gen_cache[k] = (tables, GA, GB)
        return self._gen_cache[k]

    # -- frames and integration ----------------------------------------------

    def _select_indices(self, M, prev, side, k):
        """prev is None (select by extreme real parts) or (mus, vecs) from
        the previous point; ties in eigenvalue distance (e.g. colliding
        slow modes at the origin) are broken by eigenvector overlap."""
        mu, V = np.linalg.eig(M)
        if prev is None:
            order = np.argsort(mu.real)
            sel = order[-k:] if side == "minus" else order[:k]
        else:
            prev_mu, prev_V = prev
            scale = max(1.0, float(np.max(np.abs(mu))))
            sel = []
            used = set()
            for p, pv in zip(prev_mu, prev_V.T):
                dist = np.abs(mu - p)
                for j in used:
                    dist[j] = np.inf
                d0 = float(np.min(dist))
                cands = np.where(dist <= max(2.0 * d0, d0 + 1e-9 * scale))[0]
                if cands.size == 1:
                    j = int(cands[0])
                else:
                    ov = [abs(np.vdot(pv, V[:, c]))
                          / np.linalg.norm(V[:, c]) for c in cands]
                    j = int(cands[int(np.argmax(ov))])
                sel.append(j)
                used.add(j)
            sel = np.array(sel)
        return mu, V, np.asarray(sel)

    def _initial_wedge(self, lam, side, k, prev_mu, omega_ref=None):
        """Analytic initialization of the subspace wedge.

        The wedge is obtained by applying the exterior power of the
        spectral projection onto the selected eigenvalue branch to a
        fixed reference wedge: eigenvector scalings cancel inside the
        projection, so the result is single-valued and analytic in
        lambda (no spurious winding from frame choices).
        """
        M = self.M_at_end(lam, side)
        mu, V, sel = self._select_eigs_checked(M, prev_mu, side, k)
        P = V[:, sel] @ np.linalg.inv(V)[sel, :]
        tables = exterior_tables(self.size, k)
        CP = compound_matrix(P.astype(complex), tables)
        if omega_ref is None:
            omega = wedge_from_columns(V[:, sel].astype(complex), tables)
        else:
            omega = CP @ omega_ref
        nrm = np.linalg.norm(omega)
        if omega_ref is not None and nrm < 1e-6:
            raise SpectralError("reference wedge became orthogonal to the "
                                "subspace; restart with a closer reference")
        if nrm == 0.0:
            raise SpectralError("degenerate eigenvector frame")
        mu_hat = complex(np.sum(mu[sel]))
        return (mu[sel], V[:, sel] / np.linalg.norm(V[:, sel], axis=0)), \
            omega, mu_hat

    def _select_eigs_checked(self, M, prev, side, k):
        mu, V, sel = self._select_indices(M, prev, side, k)
        if len(set(sel.tolist())) != k:
            raise SpectralError("eigenvalue branch tracking collided")
        return mu, V, sel

    def _integrate_batch(self, lams, omegas, shifts, side, k):
        """March the exterior-power frames to x = 0 (classical RK4).

        `shifts` holds the sum of the selected endstate eigenvalues per
        lambda; evolving with generator G - shift*I removes the bulk
        propagation factor (an analytic nonvanishing function, so
        windings are unchanged) and keeps the frames O(1).  Positive
        norm rescalings are logged.  Returns (frames at 0, log mag).
        """
        tables, GA, GB = self._generators(k)
        nb = len(lams)
        lam_arr = np.asarray(lams, dtype=complex)[:, None]
        shift_arr = np.asarray(shifts, dtype=complex)[:, None]
        Om = np.array(omegas, dtype=complex)          # (nb, dim)
        nrm = np.linalg.norm(Om, axis=1)
        Om /= nrm[:, None]
        logmag = np.log(nrm)
        S = self.coeffs.n_steps // 2                  # steps per half domain
        h = self.coeffs.h * (1.0 if side == "minus" else -1.0)
        nn = self.coeffs.x.size

        def rhs(node, O):
            out = np.einsum("ij,bj->bi", GA[node], O) \
                + lam_arr * np.einsum("ij,bj->bi", GB[node], O)
            return out - shift_arr * O

        for s in range(S):
            if side == "minus":
                i0 = 2 * s
                im, i1 = i0 + 1, i0 + 2
            else:
                i0 = nn - 1 - 2 * s
                im, i1 = i0 - 1, i0 - 2
            k1 = rhs(i0, Om)
            k2 = rhs(im, Om + 0.5 * h * k1)
            k3 = rhs(im, Om + 0.5 * h * k2)
            k4 = rhs(i1, Om + h * k3)
            Om = Om + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            nrm = np.linalg.norm(Om, axis=1)
            if np.any(nrm == 0.0) or not np.all(np.isfinite(nrm)):
                raise SpectralError("exterior-power integration failed")
            Om /= nrm[:, None]
            logmag += np.log(nrm)
        return Om, logmag

    # -- public evaluation -----------------------------------------------------

    def evaluate_ordered(self, lams, k_minus=None, k_plus=None,
                         seed_mu=None):
        """Evans values along an ordered list of lambdas.

        Eigenvalue branches are selected by extreme real parts at the
        first point (or continued from seed_mu) and tracked by proximity
        afterwards, so the list may cross into Re(lambda) < 0.  Frames
        are chained projectively point-to-point, which keeps D continuous
        along the list up to positive factors.
        """
        if k_minus is None or k_plus is None:
            k_minus, k_plus = self.reference_splitting(lams[0])
        t_m = exterior_tables(self.size, k_minus)
        t_p = exterior_tables(self.size, k_plus)
        signs, comp = _pairing_signs(t_m, t_p)

        mus_m = seed_mu[0] if seed_mu else None
        mus_p = seed_mu[1] if seed_mu else None
        inits_m, inits_p = [], []
        shifts_m, shifts_p = [], []
        ref_m = ref_p = None
        for lam in lams:
            mus_m, om_m, mh_m = self._initial_wedge(lam, "minus", k_minus,
                                                    mus_m, ref_m)
            mus_p, om_p, mh_p = self._initial_wedge(lam, "plus", k_plus,
                                                    mus_p, ref_p)
            if ref_m is None:
                # fix the reference wedges at the first point; projecting
                # them at later points is analytic in lambda
                ref_m = om_m / np.linalg.norm(om_m)
                ref_p = om_p / np.linalg.norm(om_p)
                om_m, om_p = ref_m, ref_p
            inits_m.append(om_m)
            inits_p.append(om_p)
            shifts_m.append(mh_m)
            shifts_p.append(mh_p)

        Om_m, log_m = self._integrate_batch(lams, inits_m, shifts_m,
                                            "minus", k_minus)
        Om_p, log_p = self._integrate_batch(lams, inits_p, shifts_p,
                                            "plus", k_plus)
        pair = np.einsum("bi,bi->b", Om_m * signs[None, :], Om_p[:, comp])
        out = []
        for i in range(len(lams)):
            out.append(EvansValue(mantissa=complex(pair[i]),
                                  logmag=float(log_m[i] + log_p[i])))
        return out, (mus_m, mus_p)


def evans_eval(solver: EvansSolver, lam: complex) -> EvansValue:
    """Evans value at a single spectral point (Re lam > 0 recommended)."""
    vals, _ = solver.evaluate_ordered([complex(lam)])
    return vals[0]


# ---------------------------------------------------------------------------
# contours and winding numbers
# ---------------------------------------------------------------------------

def _refine(solver, lams, closed, max_points=4000):
    """Adaptive refinement until consecutive argument steps are < pi/4."""
    lams = list(lams)
    vals, _ = solver.evaluate_ordered(lams)
    while True:
        args = np.array([v.arg for v in vals])
        nxt = np.roll(args, -1) if closed else args[1:]
        cur = args if closed else args[:-1]
        dargs = np.angle(np.exp(1j * (nxt - cur)))
        bad = np.where(np.abs(dargs) >= MAX_ARG_STEP)[0]
        if bad.size == 0:
            return lams, vals, dargs
        if len(lams) + bad.size > max_points:
            raise SpectralError("contour refinement did not converge; "
                                "a zero may lie on or near the contour")
        new_lams = []
        for i in range(len(lams)):
            new_lams.append(lams[i])
            if i in bad:
                j = (i + 1) % len(lams)
                new_lams.append(0.5 * (lams[i] + lams[j]))
        if not closed and (len(lams) - 1) in bad:
            pass  # open chains never bisect past the end
        lams = new_lams
        vals, _ = solver.evaluate_ordered(lams)


def winding_number(solver: EvansSolver, contour, return_data=False):
    """Integer winding of the Evans function along a closed contour.

    The accumulated argument must agree with 2 pi n to 1e-3; adaptive
    bisection enforces argument steps below pi/4.
    """
    lams, vals, dargs = _refine(solver, list(contour), closed=True)
    total = float(np.sum(dargs))
    n = int(round(total / (2.0 * np.pi)))
    if abs(total - 2.0 * np.pi * n) > 1e-3:
        raise SpectralError(
            f"accumulated argument {total:.6f} is not an integer multiple "
            "of 2 pi; winding is unreliable")
    if return_data:
        return n, lams, vals
    return n


def rhp_contour(R: float, rho: float, n_arc: int = 48, n_seg: int = 24,
                n_small: int = 16):
    """Boundary of {Re >= 0, rho <= |lambda| <= R}, positively oriented.

    Starts at lambda = R (unambiguous splitting).
    """
    pts = []
    # outer arc R -> iR
    pts.extend(R * np.exp(1j * np.linspace(0.0, np.pi / 2.0, n_arc,
                                           endpoint=False)))
    # imaginary axis iR -> i rho
    pts.extend(1j * np.geomspace(R, rho, n_seg, endpoint=False))
    # small arc i rho -> -i rho through +rho (clockwise)
    pts.extend(rho * np.exp(1j * np.linspace(np.pi / 2.0, -np.pi / 2.0,
                                             n_small, endpoint=False)))
    # imaginary axis -i rho -> -iR
    pts.extend(1j * -np.geomspace(rho, R, n_seg, endpoint=False))
    # outer arc -iR -> R
    pts.extend(R * np.exp(1j * np.linspace(-np.pi / 2.0, 0.0, n_arc,
                                           endpoint=False)))
    return [complex(z) for z in pts]


def origin_circle(rho: float, n: int = 32):
    """Full circle |lambda| = rho, counterclockwise from +rho."""
    return [complex(rho * np.exp(1j * t))
            for t in np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)]


@dataclass
class EvansContourResult:
    contour: list
    values: list
    winding: int
    origin_winding: int
    origin_log10: float
    contour_max_log10: float
    verdict: bool
    R: float
    rho: float
    details: dict = field(default_factory=dict)

    def csv_rows(self):
        """Rows (Re lam, Im lam, Re D, Im D, cumulative argument).

        D is reported relative to the contour maximum (the compound
        integration fixes D only up to a positive factor).
        """
        rows = []
        cum = 0.0
        prev = None
        for lam, v in zip(self.contour, self.values):
            rel = v.mantissa * 10.0 ** min(v.log10_abs - self.contour_max_log10,
                                           300.0) / abs(v.mantissa)
            if prev is not None:
                cum += float(np.angle(np.exp(1j * (v.arg - prev))))
            prev = v.arg
            rows.append((lam.real, lam.imag, rel.real, rel.imag, cum))
        return rows


def verify_condition_D(model, profile: ShockProfile, R: float | None = None,
                       rho: float = 1e-3,
                       halfwidth: float | None = None) -> EvansContourResult:
    """Check that the only right-half-plane Evans zero is a simple one at 0.

    Passes iff the winding on the origin-excised boundary of the
    right-half disk of radius R is 0, the winding on the small circle of
    radius rho is 1, and |D(0)| is negligible against the contour.  The
    radius default 10*max|a|^2 is a parabolic-scaling heuristic for the
    high-frequency cutoff and is reported, not proven.
    """
    solver = EvansSolver(model, profile, halfwidth=halfwidth)
    if R is None:
        speeds = np.concatenate([
            np.linalg.eigvals(_models.dftilde(model, profile.w_values[0])),
            np.linalg.eigvals(_models.dftilde(model, profile.w_values[-1]))])
        R = 10.0 * float(np.max(np.abs(speeds))) ** 2
    solver.reference_splitting(complex(R))

    w_excised, lams, vals = winding_number(solver, rhp_contour(R, rho),
                                           return_data=True)
    w_origin = winding_number(solver, origin_circle(rho))

    # |D(0)| via branch continuation from +rho
    k_m, k_p = solver.reference_splitting(complex(rho))
    chain, _ = solver.evaluate_ordered(
        [complex(rho), complex(rho / 2), complex(0.0)],
        k_minus=k_m, k_plus=k_p)
    d0 = chain[-1].log10_abs
    cmax = max(v.log10_abs for v in vals)
    origin_ok = d0 < cmax - 6.0

    verdict = (w_excised == 0) and (w_origin == 1) and origin_ok
    return EvansContourResult(
        contour=lams, values=vals, winding=w_excised,
        origin_winding=w_origin, origin_log10=d0, contour_max_log10=cmax,
        verdict=bool(verdict), R=float(R), rho=float(rho),
        details={"splitting": solver.reference_splitting(complex(R)),
                 "n_points": len(lams)})


# ---------------------------------------------------------------------------
# discrete operator residual (translational mode check)
# ---------------------------------------------------------------------------

def _d4(F, h):
    """Fourth-order first derivative along axis 0 (second order at edges)."""
    out = np.gradient(F, h, axis=0, edge_order=2)
    out[2:-2] = (F[:-4] - 8 * F[1:-3] + 8 * F[3:-1] - F[4:]) / (12.0 * h)
    return out


def apply_linearized_operator(model, profile: ShockProfile,
                              w: np.ndarray) -> np.ndarray:
    """L w = -(Aw)' + (B~ w')' on the profile grid (4th-order stencils)."""
    N = profile.grid.size
    n = model.n
    h = profile.h
    A = np.empty((N, n, n))
    Bt = np.empty((N, n, n))
    eye = np.eye(n)
    for i in range(N):
        W = profile.w_values[i]
        Amat = _models.dftilde(model, W)
        corr = np.empty((n, n))
        for j in range(n):
            corr[:, j] = _models.dbtilde_apply(model, W, eye[j]) \
                @ profile.w_derivative[i]
        A[i] = Amat - corr
        Bt[i] = _models.btilde(model, W)
    Aw = np.einsum("xij,xj->xi", A, w)
    wx = _d4(w, h)
    Bwx = np.einsum("xij,xj->xi", Bt, wx)
    return -_d4(Aw, h) + _d4(Bwx, h)


def operator_residual_translate(model, profile: ShockProfile) -> float:
    """Discrete L2 norm of L applied to the profile derivative.

    The derivative of the wave is a stationary solution of the
    linearized flow, so this measures pure discretization error.
    """
    res = apply_linearized_operator(model, profile, profile.w_derivative)
    trim = slice(4, -4)
    return float(np.sqrt(profile.h * np.sum(res[trim] ** 2)))
