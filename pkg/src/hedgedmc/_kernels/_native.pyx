# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled GARCH(1,1) recursion kernels (see _fallback for the reference)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport log, sqrt

cnp.import_array()

cdef double _LOG_2PI = log(2.0 * 3.14159265358979323846)


def garch_filter(returns, double mu, double omega, double alpha,
                 double beta, double sigma0_sq):
    """Conditional variances sigma_t^2 along an observed return series."""
    cdef double[::1] r = np.ascontiguousarray(returns, dtype=np.float64)
    cdef Py_ssize_t n = r.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t t
    cdef double var = sigma0_sq
    cdef double eps
    with nogil:
        out[0] = var
        for t in range(1, n):
            eps = r[t - 1] - mu
            var = omega + alpha * eps * eps + beta * var
            out[t] = var
    return out_arr


def garch_neg_loglik(returns, double mu, double omega, double alpha,
                     double beta, double sigma0_sq):
    """Negative Gaussian quasi-log-likelihood of a GARCH(1,1) fit."""
    cdef double[::1] r = np.ascontiguousarray(returns, dtype=np.float64)
    cdef Py_ssize_t n = r.shape[0]
    cdef Py_ssize_t t
    cdef double var = sigma0_sq
    cdef double eps
    cdef double acc = 0.0
    cdef bint bad = 0
    with nogil:
        for t in range(n):
            if var <= 0.0:
                bad = 1
                break
            eps = r[t] - mu
            acc += _LOG_2PI + log(var) + eps * eps / var
            var = omega + alpha * eps * eps + beta * var
    if bad:
        return float("inf")
    return 0.5 * acc


def garch_simulate(shocks, double mu, double omega, double alpha,
                   double beta, double sigma0_sq):
    """Log returns from standardized shocks (n_paths, n_steps)."""
    z_arr = np.ascontiguousarray(shocks, dtype=np.float64)
    if z_arr.ndim != 2:
        raise ValueError(f"shocks must be 2-d (n_paths, n_steps), got shape {z_arr.shape}")
    cdef double[:, ::1] z = z_arr
    cdef Py_ssize_t n_paths = z.shape[0]
    cdef Py_ssize_t n_steps = z.shape[1]
    out_arr = np.empty((n_paths, n_steps), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, t
    cdef double var, eps
    with nogil:
        for i in range(n_paths):
            var = sigma0_sq
            for t in range(n_steps):
                eps = sqrt(var) * z[i, t]
                out[i, t] = mu + eps
                var = omega + alpha * eps * eps + beta * var
    return out_arr
