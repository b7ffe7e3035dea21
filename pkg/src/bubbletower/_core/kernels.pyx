# cython: boundscheck=False, wraparound=False, cdivision=True
"""Hot leapfrog kernel for the radial wave stepper.

Velocity-Verlet form of leapfrog: the acceleration array must be consistent
with psi on entry and is left consistent on exit, so calls chain across
monitoring chunks without recomputation.  Boundary nodes are Dirichlet-pinned
(their acceleration and velocity stay zero).

Model nonlinearities are inlined by code: 0 = sphere (parameter k),
1 = yang-mills, 2 = semilinear 6d in the psi variable.
"""

from libc.math cimport sin, fabs


cdef inline double _f_eval(int code, double kk, double p) nogil:
    if code == 0:
        return 0.5 * kk * kk * sin(2.0 * p)
    elif code == 1:
        return -2.0 * p * (1.0 - p * p)
    return 4.0 * p - fabs(p) * p


def compute_accel(double[::1] psi, double[::1] accel,
                  double[::1] cm, double[::1] cp, double[::1] inv_r2,
                  int model_code, double kk):
    cdef Py_ssize_t n = psi.shape[0]
    cdef Py_ssize_t i
    accel[0] = 0.0
    accel[n - 1] = 0.0
    with nogil:
        for i in range(1, n - 1):
            accel[i] = (cm[i] * (psi[i - 1] - psi[i])
                        + cp[i] * (psi[i + 1] - psi[i])
                        - _f_eval(model_code, kk, psi[i]) * inv_r2[i])


def leapfrog_run(double[::1] psi, double[::1] psit, double[::1] accel,
                 double[::1] cm, double[::1] cp, double[::1] inv_r2,
                 double dt, Py_ssize_t nsteps, int model_code, double kk):
    cdef Py_ssize_t n = psi.shape[0]
    cdef Py_ssize_t i, s
    cdef double half = 0.5 * dt
    with nogil:
        for s in range(nsteps):
            for i in range(1, n - 1):
                psit[i] = psit[i] + half * accel[i]
                psi[i] = psi[i] + dt * psit[i]
            for i in range(1, n - 1):
                accel[i] = (cm[i] * (psi[i - 1] - psi[i])
                            + cp[i] * (psi[i + 1] - psi[i])
                            - _f_eval(model_code, kk, psi[i]) * inv_r2[i])
            for i in range(1, n - 1):
                psit[i] = psit[i] + half * accel[i]
