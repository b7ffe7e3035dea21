"""Pure-numpy twin of the compiled leapfrog kernel.

Same contract as ``kernels``: acceleration consistent with psi on entry and
exit, boundary nodes pinned.  Also carries the only path for custom models,
whose nonlinearity is a Python callback (``f_custom``).
"""

from __future__ import annotations

import numpy as np


def _f_eval(model_code: int, kk: float, p: np.ndarray, f_custom=None) -> np.ndarray:
    if model_code == 0:
        return 0.5 * kk * kk * np.sin(2.0 * p)
    if model_code == 1:
        return -2.0 * p * (1.0 - p * p)
    if model_code == 2:
        return 4.0 * p - np.abs(p) * p
    return f_custom(p)


def compute_accel(psi, accel, cm, cp, inv_r2, model_code, kk, f_custom=None):
    p = psi[1:-1]
    accel[1:-1] = (
        cm[1:-1] * (psi[:-2] - p)
        + cp[1:-1] * (psi[2:] - p)
        - _f_eval(model_code, kk, p, f_custom) * inv_r2[1:-1]
    )
    accel[0] = accel[-1] = 0.0


def leapfrog_run(psi, psit, accel, cm, cp, inv_r2, dt, nsteps, model_code, kk, f_custom=None):
    half = 0.5 * dt
    for _ in range(nsteps):
        psit[1:-1] += half * accel[1:-1]
        psi[1:-1] += dt * psit[1:-1]
        p = psi[1:-1]
        accel[1:-1] = (
            cm[1:-1] * (psi[:-2] - p)
            + cp[1:-1] * (psi[2:] - p)
            - _f_eval(model_code, kk, p, f_custom) * inv_r2[1:-1]
        )
        psit[1:-1] += half * accel[1:-1]
