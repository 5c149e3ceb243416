"""Stepper kernel lane selection.

The hot per-step kernels (interface fluxes, viscous divergence,
tridiagonal solves) exist twice: a compiled extension and a pure-numpy
fallback with identical signatures.  The compiled lane is used when the
extension built successfully; set SHOCKSTAB_PURE_PYTHON=1 to force the
fallback (used by the parity tests and the benchmark).
"""

import os

from shockstab._core import fallback

if os.environ.get("SHOCKSTAB_PURE_PYTHON", "") == "1":
    _impl = fallback
    BACKEND = "python"
else:
    try:
        from shockstab._core import _stepper as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = fallback
        BACKEND = "python"

hyperbolic_rhs = _impl.hyperbolic_rhs
diffusion_rhs = _impl.diffusion_rhs
thomas_batch = _impl.thomas_batch

__all__ = ["BACKEND", "hyperbolic_rhs", "diffusion_rhs", "thomas_batch",
           "fallback"]
