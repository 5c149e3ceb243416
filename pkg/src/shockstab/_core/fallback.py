"""Pure-numpy stepper kernels (fallback lane).

Array convention: state arrays carry two ghost cells per side, so an
interior grid of N points arrives as shape (N+4, n).  Interface m
(m = 0..N) sits between extended indices m+1 and m+2.
"""

import numpy as np
from scipy.linalg import solve_banded


def hyperbolic_rhs(flux_ext, w_ext, alpha_ext, h, kappa, out):
    """Conservative central flux with fourth-difference dissipation.

        Fhat_m = (F_l + F_r)/2 + kappa * max(alpha_l, alpha_r)
                 * (W_{m+3} - 3 W_{m+2} + 3 W_{m+1} - W_m)
        out_i  = -(Fhat_{i+1} - Fhat_i) / h
    """
    N = out.shape[0]
    a_if = np.maximum(alpha_ext[1:N + 2], alpha_ext[2:N + 3])[:, None]
    fhat = 0.5 * (flux_ext[1:N + 2] + flux_ext[2:N + 3]) \
        + kappa * a_if * (w_ext[3:N + 4] - 3.0 * w_ext[2:N + 3]
                          + 3.0 * w_ext[1:N + 2] - w_ext[0:N + 1])
    out[:] = -(fhat[1:] - fhat[:-1]) / h
    return out


def diffusion_rhs(w_ext, b_iface, h, out):
    """Divergence of the diagonal viscous flux: D(b Dw) per component.

    b_iface has shape (N+1, n) with zeros in inviscid components.
    """
    N = out.shape[0]
    dWr = w_ext[3:N + 3] - w_ext[2:N + 2]
    dWl = w_ext[2:N + 2] - w_ext[1:N + 1]
    out[:] = (b_iface[1:N + 1] * dWr - b_iface[0:N] * dWl) / (h * h)
    return out


def thomas_batch(dl, d, du, rhs):
    """Solve a batch of independent tridiagonal systems in place.

    All arguments have shape (m, N); dl[:,0] and du[:,-1] are ignored.
    Returns rhs overwritten with the solutions.
    """
    m, N = d.shape
    ab = np.zeros((3, N))
    for k in range(m):
        ab[0, 1:] = du[k, :-1]
        ab[1] = d[k]
        ab[2, :-1] = dl[k, 1:]
        rhs[k] = solve_banded((1, 1), ab, rhs[k],
                              overwrite_ab=False, check_finite=False)
    return rhs
