"""Kernel selection: compiled extension when available, numpy otherwise.

Set BUBBLETOWER_FORCE_FALLBACK=1 to force the numpy path (used by tests and
the benchmark).  Custom models always run through the fallback because their
nonlinearity is a Python callback.
"""

import os

from . import fallback

_forced = os.environ.get("BUBBLETOWER_FORCE_FALLBACK", "") not in ("", "0")

try:
    from . import kernels as _compiled

    HAVE_COMPILED = True
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None
    HAVE_COMPILED = False

USING_COMPILED = HAVE_COMPILED and not _forced
_active = _compiled if USING_COMPILED else fallback


def compute_accel(psi, accel, cm, cp, inv_r2, model_code, kk, f_custom=None):
    if model_code == 3 or f_custom is not None:
        return fallback.compute_accel(psi, accel, cm, cp, inv_r2, model_code, kk, f_custom)
    return _active.compute_accel(psi, accel, cm, cp, inv_r2, model_code, kk)


def leapfrog_run(psi, psit, accel, cm, cp, inv_r2, dt, nsteps, model_code, kk, f_custom=None):
    if model_code == 3 or f_custom is not None:
        return fallback.leapfrog_run(psi, psit, accel, cm, cp, inv_r2, dt, nsteps, model_code, kk, f_custom)
    return _active.leapfrog_run(psi, psit, accel, cm, cp, inv_r2, dt, nsteps, model_code, kk)
