"""Stability diagnostics extracted from simulation histories.

Everything the quantitative stability statement tracks is computed
here: the phase shift delta(t) both from the excited-kernel integral
formula (with the per-step fixed-point closure of the delta-dot feedback
term) and from a least-squares fit, rate-weighted norms and their fitted
decay exponents, the running supremum functional zeta(t), the
time-integrated pointwise ("vertical") estimates at probe stations, and
the exponential-memory damping inequality for the top Sobolev norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

from shockstab import models as _models
from shockstab.kernels import KernelE
from shockstab.sim import SimulationRun

__all__ = [
    "AnalysisError",
    "PhaseSeries",
    "DiagnosticsSeries",
    "lp_norms",
    "sobolev_norm",
    "phase_extract_lsq",
    "phase_extract_kernel",
    "zeta_functional",
    "vertical_integral",
    "fit_decay_exponent",
    "damping_monitor",
    "analyze_run",
]


class AnalysisError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def _pointwise_abs(w):
    w = np.asarray(w, dtype=float)
    if w.ndim == 1:
        return np.abs(w)
    return np.sqrt(np.sum(w * w, axis=1))


def lp_norms(w, h, p=2, deriv=0):
    """L^p norm of a grid function (componentwise euclidean pointwise).

    Composite trapezoid for finite p, grid maximum for p = inf;
    derivatives by second-order centered differences.
    """
    w = np.asarray(w, dtype=float)
    for _ in range(deriv):
        w = np.gradient(w, h, axis=0, edge_order=2)
    a = _pointwise_abs(w)
    if p == np.inf or p == "inf":
        return float(np.max(a))
    if p <= 0:
        raise AnalysisError("p must be positive or inf")
    v = a ** p
    return float((h * (np.sum(v) - 0.5 * (v[0] + v[-1]))) ** (1.0 / p))


def sobolev_norm(w, h, s=4):
    """Discrete H^s norm: sum of squared L2 norms of derivatives 0..s."""
    w = np.asarray(w, dtype=float)
    total = 0.0
    cur = w
    for k in range(s + 1):
        a = _pointwise_abs(cur)
        total += h * (np.sum(a * a) - 0.5 * (a[0] ** 2 + a[-1] ** 2))
        if k < s:
            cur = np.gradient(cur, h, axis=0, edge_order=2)
    return float(np.sqrt(total))


# ---------------------------------------------------------------------------
# phase extraction
# ---------------------------------------------------------------------------

def phase_extract_lsq(snapshot, reference, h, guess=0.0, bracket=2.0,
                      tol_factor=1e-6):
    """Shift minimizing |snapshot(. + delta) - reference|_L2.

    Golden-section/parabolic search (bounded Brent) inside
    [guess - bracket, guess + bracket]; tolerance 1e-6 h.
    """
    snapshot = np.atleast_2d(np.asarray(snapshot, dtype=float).T).T
    reference = np.atleast_2d(np.asarray(reference, dtype=float).T).T
    N = snapshot.shape[0]
    x = h * np.arange(N)
    spline = CubicSpline(x, snapshot, axis=0)
    interior = slice(4, -4)

    def misfit(delta):
        xs = np.clip(x[interior] + delta, x[0], x[-1])
        d = spline(xs) - reference[interior]
        return float(np.sum(d * d))

    res = minimize_scalar(misfit, bounds=(guess - bracket, guess + bracket),
                          method="bounded",
                          options={"xatol": tol_factor * h})
    if not res.success:
        raise AnalysisError(f"phase search failed: {res.message}")
    d = float(res.x)
    if abs(d - (guess - bracket)) < 1e-12 or abs(d - (guess + bracket)) < 1e-12:
        raise AnalysisError("phase search hit the bracket boundary; "
                            "the wave may have been lost")
    return d


@dataclass
class PhaseSeries:
    times: np.ndarray
    delta_kernel: np.ndarray
    deltadot_kernel: np.ndarray
    delta_lsq: np.ndarray
    discrepancy: np.ndarray = field(default=None)
    picard_iters: int = 0

    def __post_init__(self):
        if self.discrepancy is None:
            self.discrepancy = np.abs(self.delta_kernel - self.delta_lsq)


def _taylor_remainder_source(model, W_bar, W_bar_x, A_bar, w, w_x):
    """Exact quadratic source Q(w, w_x) of the centered perturbation.

        Q = -[F~(Wb+w) - F~(Wb) - dF~(Wb) w]
            + [B~(Wb+w) - B~(Wb) - dB~(Wb) w] Wb_x
            + [B~(Wb+w) - B~(Wb)] w_x

    Only diagonal viscosity dependence is supported (built-in models);
    constant-viscosity models reduce to the flux remainder.
    """
    Q = -(model.flux_batch(W_bar + w) - model.flux_batch(W_bar)
          - np.einsum("xij,xj->xi", A_bar, w))
    bd = model.bdiag(W_bar)
    bd_pert = model.bdiag(W_bar + w)
    if np.max(np.abs(bd_pert - bd)) > 1e-14:
        dB = bd_pert - bd                              # (N, n) diagonal
        eps = 1e-7
        dB_lin = (model.bdiag(W_bar + eps * w)
                  - model.bdiag(W_bar - eps * w)) / (2.0 * eps)
        Q += (dB - dB_lin) * W_bar_x + dB * w_x
    return Q


def phase_extract_kernel(model, run: SimulationRun, kernel: KernelE,
                         picard_tol=1e-10, picard_max=20,
                         keep_history=False):
    """Phase shift and its rate from the excited-kernel integral formula.

        delta(t) = -int e(y,t) w0(y) dy
                   + int_0^t int e_y(y,t-s) (Q + delta-dot w)(y,s) dy ds

    marched forward in snapshot time: the shift recenters each snapshot,
    the recentred snapshot feeds the source, and the delta-dot appearing
    inside the source is closed by Picard iteration (its kernel weight
    vanishes at zero lag, so the map is strongly contracting).  The
    time-derivative series uses the exact lag-antiderivative of the
    kernel (product integration), which absorbs the integrable
    singularity of e_yt at zero lag.
    """
    times = run.times
    K = times.size
    dts = np.diff(times)
    if K < 3:
        raise AnalysisError("history too short for phase extraction")
    if np.max(np.abs(dts - dts[0])) > 1e-9 * dts[0]:
        raise AnalysisError("snapshots must be uniformly spaced in time")
    delta_t = float(dts[0])
    x = run.x
    h = run.h
    N, n = run.steady.shape
    W_bar = run.steady
    W_bar_x = run.steady_prime
    A_bar = np.empty((N, n, n))
    for i in range(N):
        A_bar[i] = _models.dftilde(model, W_bar[i])

    # spatial trapezoid weights
    wx_q = np.full(N, h)
    wx_q[0] = wx_q[-1] = 0.5 * h

    # kernel arrays per lag (the zero-lag kernel vanishes identically)
    EY = np.zeros((K, N, n))
    for m in range(1, K):
        EY[m] = kernel.e_y(x, m * delta_t)

    DG = np.zeros((K, K))        # DG[m, j] = int e_y(., tau_m) g_j
    delta = np.zeros(K)
    deltadot = np.zeros(K)
    delta_lsq = np.zeros(K)
    w_hist = np.zeros((K, N, n)) if keep_history else None
    g_prev = None
    max_picard = 0

    w0 = run.snapshots[0] - W_bar
    w0_q = w0 * wx_q[:, None]

    def direct_terms(k):
        t = times[k]
        if t <= 0.0:
            tau0 = max(delta_t / 4.0, 4.0 * h * h)
            return 0.0, -float(np.sum(kernel.e_t(x, tau0) * w0_q))
        d = -float(np.sum(kernel.e(x, t) * w0_q))
        dd = -float(np.sum(kernel.e_t(x, t) * w0_q))
        return d, dd

    g_store = np.zeros((K, N, n))
    spline_cache = {}

    def centered(k, dk):
        snap = run.snapshots[k]
        if dk == 0.0:
            return snap - W_bar
        if k not in spline_cache:
            spline_cache[k] = CubicSpline(x, snap, axis=0)
        xs = np.clip(x + dk, x[0], x[-1])
        return spline_cache[k](xs) - W_bar

    lsq_prev = 0.0
    for k in range(K):
        d_dir, dd_dir = direct_terms(k)
        # Duhamel trapezoid over stored sources (zero weight at lag 0)
        duh = 0.0
        for j in range(k):
            wt = 0.5 if j == 0 else 1.0
            duh += wt * DG[k - j, j]
        delta[k] = d_dir + delta_t * duh

        wk = centered(k, delta[k])
        if keep_history:
            w_hist[k] = wk
        wk_x = np.gradient(wk, h, axis=0, edge_order=2)
        Qk = _taylor_remainder_source(model, W_bar, W_bar_x, A_bar, wk, wk_x)
        Qk_q = Qk * wx_q[:, None]
        wk_q = wk * wx_q[:, None]
        lim = min(k + 2, K)
        DGQ_k = np.einsum("mxc,xc->m", EY[:lim], Qk_q)
        DW_k = np.einsum("mxc,xc->m", EY[:lim], wk_q)

        # delta-dot at t_k: product integration of the mixed kernel
        dd = deltadot[k - 1] if k else 0.0
        iters = 0
        for _ in range(picard_max):
            iters += 1
            DG_col = DGQ_k + dd * DW_k
            s = 0.0
            for m in range(k):
                ghalf_lo = DG[m + 1, k - m - 1] - DG[m, k - m - 1]
                j_hi = k - m
                if j_hi == k:
                    hi_lo = DG_col[m + 1] - DG_col[m]
                else:
                    hi_lo = DG[m + 1, j_hi] - DG[m, j_hi]
                s += 0.5 * (ghalf_lo + hi_lo)
            new_dd = dd_dir + s
            if abs(new_dd - dd) < picard_tol * max(1.0, abs(new_dd)):
                dd = new_dd
                break
            dd = new_dd
        else:
            raise AnalysisError("delta-dot fixed point did not converge")
        max_picard = max(max_picard, iters)
        deltadot[k] = dd

        gk = Qk + dd * wk
        g_store[k] = gk
        gk_q = gk * wx_q[:, None]
        DG[:, k] = np.einsum("mxc,xc->m", EY, gk_q)

        # least-squares cross-check
        delta_lsq[k] = phase_extract_lsq(run.snapshots[k], W_bar, h,
                                         guess=lsq_prev, bracket=2.0)
        lsq_prev = delta_lsq[k]
        spline_cache.clear()

    out = PhaseSeries(times=times.copy(), delta_kernel=delta,
                      deltadot_kernel=deltadot, delta_lsq=delta_lsq,
                      picard_iters=max_picard)
    if keep_history:
        return out, w_hist
    return out


# ---------------------------------------------------------------------------
# derived series
# ---------------------------------------------------------------------------

def centered_norm_series(model, run: SimulationRun, phase: PhaseSeries,
                         ps=(1, 2, 4, np.inf), smax=4):
    """Norms of the recentred perturbation at snapshot times."""
    x, h = run.x, run.h
    K = run.times.size
    out = {f"L{p}": np.zeros(K) for p in ps}
    out.update({f"dL{p}": np.zeros(K) for p in ps})
    out[f"H{smax}"] = np.zeros(K)
    for k in range(K):
        snap = run.snapshots[k]
        dk = phase.delta_kernel[k]
        if dk != 0.0:
            xs = np.clip(x + dk, x[0], x[-1])
            snap = CubicSpline(x, snap, axis=0)(xs)
        w = snap - run.steady
        wx = np.gradient(w, h, axis=0, edge_order=2)
        for p in ps:
            out[f"L{p}"][k] = lp_norms(w, h, p=p)
            out[f"dL{p}"][k] = lp_norms(wx, h, p=p)
        out[f"H{smax}"][k] = sobolev_norm(w, h, smax)
    return out


def station_series(run: SimulationRun, phase: PhaseSeries):
    """|w(x*, t)| at probe stations, at full step resolution.

    The per-step probe windows are interpolated at x* + delta(t) and the
    reference value at x* is subtracted; delta is interpolated from the
    snapshot series.
    """
    hw = run.stations["halfwindow"]
    idx = run.stations["index"]
    series = run.stations["series"]
    t_fine = run.diag_times
    dk = np.interp(t_fine, phase.times, phase.delta_kernel)
    out = {}
    for xs, i in idx.items():
        window = series[xs]                       # (steps, 2hw+1, n)
        xloc = run.x[i - hw:i + hw + 1]
        ref = run.steady[i]
        vals = np.empty(t_fine.size)
        for k in range(t_fine.size):
            target = np.clip(run.x[i] + dk[k], xloc[0], xloc[-1])
            w = np.empty(window.shape[2])
            for c in range(window.shape[2]):
                w[c] = np.interp(target, xloc, window[k, :, c]) - ref[c]
            vals[k] = np.sqrt(np.sum(w * w))
        out[xs] = (t_fine, vals)
    return out


def vertical_integral(t, station_values):
    """Cumulative trapezoid of (1+s)^(-1/2) |w(x*, s)|."""
    f = (1.0 + np.asarray(t)) ** -0.5 * np.asarray(station_values)
    inc = 0.5 * (f[1:] + f[:-1]) * np.diff(t)
    return np.concatenate([[0.0], np.cumsum(inc)])


@dataclass
class DiagnosticsSeries:
    times: np.ndarray
    zeta: np.ndarray
    vertical: dict                  # station -> (t, cumulative integral)
    vertical_sup: np.ndarray        # grid-sup variant at snapshot times
    exponents: dict
    damping: dict
    norms: dict
    zeta_parts: dict


def zeta_functional(run: SimulationRun, phase: PhaseSeries, norms: dict,
                    stations: dict):
    """Running supremum of the rate-weighted stability functional.

    p is sampled at {2, 4, inf}: the weighted norm is log-convex in 1/p
    so the endpoints and one midpoint control the family.  The vertical
    term is evaluated at the probe stations (their max) and the grid-sup
    variant is reported separately.
    """
    t = phase.times
    weights = {2: (1 + t) ** (0.5 * (1 - 0.5)),
               4: (1 + t) ** (0.5 * (1 - 0.25)),
               np.inf: (1 + t) ** 0.5}
    norm_part = np.zeros(t.size)
    for p, wgt in weights.items():
        norm_part = np.maximum(norm_part,
                               (norms[f"L{p}"] + norms[f"dL{p}"]) * wgt)

    vert_stations = {}
    vert_at_t = np.zeros(t.size)
    for xs, (tf, vals) in stations.items():
        vint = vertical_integral(tf, vals)
        vert_stations[xs] = (tf, vint)
        vert_at_t = np.maximum(vert_at_t, np.interp(t, tf, vint))

    instant = (norm_part + np.abs(phase.delta_kernel)
               + np.abs(phase.deltadot_kernel) * (1 + t) ** 0.5
               + vert_at_t)
    zeta = np.maximum.accumulate(instant)
    parts = {"norm": norm_part,
             "delta": np.abs(phase.delta_kernel),
             "deltadot_weighted": np.abs(phase.deltadot_kernel) * (1 + t) ** 0.5,
             "vertical": vert_at_t}
    return zeta, vert_stations, parts


def grid_sup_vertical(model, run: SimulationRun, phase: PhaseSeries):
    """sup_y of the vertical integrand accumulated at snapshot resolution."""
    t = phase.times
    vals = np.zeros(t.size)
    x, h = run.x, run.h
    for k in range(t.size):
        snap = run.snapshots[k]
        dk = phase.delta_kernel[k]
        if dk != 0.0:
            xs = np.clip(x + dk, x[0], x[-1])
            snap = CubicSpline(x, snap, axis=0)(xs)
        vals[k] = np.max(_pointwise_abs(snap - run.steady))
    f = (1.0 + t) ** -0.5 * vals
    inc = 0.5 * (f[1:] + f[:-1]) * np.diff(t)
    return np.concatenate([[0.0], np.cumsum(inc)])


# ---------------------------------------------------------------------------
# decay fits and the damping inequality
# ---------------------------------------------------------------------------

def fit_decay_exponent(t, v, window=None):
    """Least-squares slope of log v against log(1+t).

    window = (t_lo, t_hi); default is the last 7/8 of the series.
    Returns (exponent, ci) with the confidence halfwidth from fits over
    dyadic subwindows.
    """
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    if window is None:
        window = (t[-1] / 8.0, t[-1])
    lo, hi = window
    mask = (t >= lo) & (t <= hi)
    if np.sum(mask) < 4:
        raise AnalysisError("fit window contains too few samples")
    if np.any(v[mask] <= 0.0):
        raise AnalysisError("series must be positive inside the fit window")
    X = np.log1p(t[mask])
    Y = np.log(v[mask])
    slope, _ = np.polyfit(X, Y, 1)

    subs = []
    idx = np.where(mask)[0]
    for parts in (2, 4):
        for q in range(parts):
            seg = idx[q * len(idx) // parts:(q + 1) * len(idx) // parts]
            if len(seg) >= 4:
                s, _ = np.polyfit(np.log1p(t[seg]), np.log(v[seg]), 1)
                subs.append(s)
    ci = float(np.max(np.abs(np.array(subs) - slope))) if subs else 0.0
    return float(slope), ci


def damping_monitor(times, h4_series, l2_series, deltadot,
                    nus=None, t_subset=None):
    """Fit (C, nu) in the exponential-memory high-norm inequality

        |w(t)|_{H4}^2 <= C |w0|_{H4}^2 e^{-nu t}
                         + C int_0^t e^{-nu (t-s)} (|w|_{L2}^2 + dd^2) ds.

    Scans nu over a grid in (0, 1]; returns the best constant, its nu,
    the per-nu table, and a stability diagnostic comparing the constant
    fitted on the first half of the series.
    """
    t = np.asarray(times, dtype=float)
    num = np.asarray(h4_series, dtype=float) ** 2
    drive = (np.asarray(l2_series, dtype=float) ** 2
             + np.asarray(deltadot, dtype=float) ** 2)
    if nus is None:
        nus = np.geomspace(1e-3, 1.0, 25)
    out = {}

    def fit(upto):
        best = (np.inf, None)
        for nu in nus:
            mem = np.zeros(upto)
            for k in range(1, upto):
                dt = t[k] - t[k - 1]
                mem[k] = mem[k - 1] * np.exp(-nu * dt) \
                    + 0.5 * dt * (drive[k] + drive[k - 1] * np.exp(-nu * dt))
            den = num[0] * np.exp(-nu * t[:upto]) + mem
            C = float(np.max(num[:upto] / np.maximum(den, 1e-300)))
            if C < best[0]:
                best = (C, float(nu))
        return best

    C_full, nu_full = fit(t.size)
    C_half, _ = fit(max(4, t.size // 2))
    drift = abs(C_full - C_half) / max(C_half, 1e-300)
    out = {"C": C_full, "nu": nu_full, "C_half": C_half, "drift": drift,
           "verdict": bool(np.isfinite(C_full))}
    return out


# ---------------------------------------------------------------------------
# orchestration
# ---------------------------------------------------------------------------

def analyze_run(model, run: SimulationRun, kernel: KernelE,
                fit_window=None, theory=None) -> DiagnosticsSeries:
    """Full diagnostics for one simulation history."""
    phase = phase_extract_kernel(model, run, kernel)
    norms = centered_norm_series(model, run, phase)
    stations = station_series(run, phase)
    zeta, vert, parts = zeta_functional(run, phase, norms, stations)
    vert_sup = grid_sup_vertical(model, run, phase)

    t = phase.times
    if fit_window is None:
        fit_window = (t[-1] / 8.0, t[-1])
    exps = {}
    for key, series in (("L2", norms["L2"]), ("Linf", norms[f"L{np.inf}"]),
                        ("H4", norms["H4"])):
        try:
            exps[key] = fit_decay_exponent(t, series, fit_window)
        except AnalysisError as exc:
            exps[key] = (np.nan, np.nan)
    try:
        exps["deltadot"] = fit_decay_exponent(
            t[1:], np.abs(phase.deltadot_kernel[1:]) + 1e-300, fit_window)
    except AnalysisError:
        exps["deltadot"] = (np.nan, np.nan)

    damping = damping_monitor(t, norms["H4"], norms["L2"],
                              phase.deltadot_kernel)

    diag = DiagnosticsSeries(
        times=t, zeta=zeta, vertical=vert, vertical_sup=vert_sup,
        exponents=exps, damping=damping, norms=norms,
        zeta_parts=parts)
    diag.phase = phase
    return diag
