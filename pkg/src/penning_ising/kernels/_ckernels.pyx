# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pairwise Coulomb kernels (dimensionless units, pair energy 1/d)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()


def coulomb_energy_gradient(x_in):
    cdef const double[:, ::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], dim = x.shape[1]
    grad_arr = np.zeros((n, dim), dtype=np.float64)
    cdef double[:, ::1] g = grad_arr
    cdef double energy = 0.0, d2, inv, inv3, r
    cdef Py_ssize_t i, j, k
    for i in range(n):
        for j in range(i + 1, n):
            d2 = 0.0
            for k in range(dim):
                r = x[i, k] - x[j, k]
                d2 += r * r
            inv = 1.0 / sqrt(d2)
            energy += inv
            inv3 = inv * inv * inv
            for k in range(dim):
                r = (x[i, k] - x[j, k]) * inv3
                g[i, k] -= r
                g[j, k] += r
    return energy, grad_arr


def coulomb_hessian(x_in):
    cdef const double[:, ::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], dim = x.shape[1]
    hess_arr = np.zeros((n * dim, n * dim), dtype=np.float64)
    cdef double[:, ::1] h = hess_arr
    cdef double d2, inv, inv3, inv5, val
    cdef double r[3]
    cdef Py_ssize_t i, j, a, b
    if dim > 3:
        raise ValueError("at most 3 spatial dimensions supported")
    for i in range(n):
        for j in range(i + 1, n):
            d2 = 0.0
            for a in range(dim):
                r[a] = x[i, a] - x[j, a]
                d2 += r[a] * r[a]
            inv = 1.0 / sqrt(d2)
            inv3 = inv * inv * inv
            inv5 = inv3 * inv * inv
            for a in range(dim):
                for b in range(dim):
                    val = 3.0 * inv5 * r[a] * r[b]
                    if a == b:
                        val -= inv3
                    h[i * dim + a, j * dim + b] = -val
                    h[j * dim + a, i * dim + b] = -val
                    h[i * dim + a, i * dim + b] += val
                    h[j * dim + a, j * dim + b] += val
    return hess_arr


def inverse_cube_matrix(x_in):
    cdef const double[:, ::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], dim = x.shape[1]
    out_arr = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double d2, r, w
    cdef Py_ssize_t i, j, k
    for i in range(n):
        for j in range(i + 1, n):
            d2 = 0.0
            for k in range(dim):
                r = x[i, k] - x[j, k]
                d2 += r * r
            w = 1.0 / (d2 * sqrt(d2))
            out[i, j] = w
            out[j, i] = w
    return out_arr


def min_separation(x_in):
    cdef const double[:, ::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], dim = x.shape[1]
    cdef double best = INFINITY, d2, r
    cdef Py_ssize_t i, j, k
    for i in range(n):
        for j in range(i + 1, n):
            d2 = 0.0
            for k in range(dim):
                r = x[i, k] - x[j, k]
                d2 += r * r
            if d2 < best:
                best = d2
    return sqrt(best)
