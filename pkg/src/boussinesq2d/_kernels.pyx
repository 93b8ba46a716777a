# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled off-grid evaluation kernels (same contracts as ``_kernels_py``)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, fmod, cos, sin, M_PI

cnp.import_array()


cdef inline void _weights(double f, double* w) noexcept nogil:
    w[0] = -f * (f - 1.0) * (f - 2.0) / 6.0
    w[1] = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0
    w[2] = -(f + 1.0) * f * (f - 2.0) / 2.0
    w[3] = (f + 1.0) * f * (f - 1.0) / 6.0


def interp_periodic(values, points):
    cdef const double[:, ::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef const double[:, ::1] p = np.ascontiguousarray(
        np.asarray(points, dtype=np.float64).reshape(-1, 2))
    cdef Py_ssize_t m = v.shape[0], npts = p.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_arr = np.empty(npts)
    cdef double[::1] out = out_arr
    cdef double two_pi = 2.0 * M_PI, scale = m / (2.0 * M_PI)
    cdef double s1, s2, f1, f2, acc, row
    cdef double w1[4]
    cdef double w2[4]
    cdef Py_ssize_t q, a, b, b1, b2, ia, ib
    with nogil:
        for q in range(npts):
            s1 = fmod(p[q, 0], two_pi)
            if s1 < 0:
                s1 += two_pi
            s2 = fmod(p[q, 1], two_pi)
            if s2 < 0:
                s2 += two_pi
            s1 *= scale
            s2 *= scale
            b1 = <Py_ssize_t>floor(s1)
            b2 = <Py_ssize_t>floor(s2)
            f1 = s1 - b1
            f2 = s2 - b2
            _weights(f1, w1)
            _weights(f2, w2)
            acc = 0.0
            for a in range(4):
                ia = (b1 + a - 1 + m) % m
                row = 0.0
                for b in range(4):
                    ib = (b2 + b - 1 + m) % m
                    row = row + w2[b] * v[ia, ib]
                acc = acc + w1[a] * row
            out[q] = acc
    return out_arr


def fourier_eval(coeffs, wavenumbers, points):
    cdef const double[:, ::1] cr = np.ascontiguousarray(np.real(coeffs), dtype=np.float64)
    cdef const double[:, ::1] ci = np.ascontiguousarray(np.imag(coeffs), dtype=np.float64)
    cdef const double[::1] k = np.ascontiguousarray(wavenumbers, dtype=np.float64)
    cdef const double[:, ::1] p = np.ascontiguousarray(
        np.asarray(points, dtype=np.float64).reshape(-1, 2))
    cdef Py_ssize_t n = k.shape[0], npts = p.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_arr = np.empty(npts)
    cdef double[::1] out = out_arr
    cdef cnp.ndarray[cnp.float64_t, ndim=1] c2_arr = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] s2_arr = np.empty(n)
    cdef double[::1] c2 = c2_arr
    cdef double[::1] s2 = s2_arr
    cdef Py_ssize_t q, a, b
    cdef double x, y, re, im, acc, ca, sa
    with nogil:
        for q in range(npts):
            x = p[q, 0]
            y = p[q, 1]
            for b in range(n):
                c2[b] = cos(k[b] * y)
                s2[b] = sin(k[b] * y)
            acc = 0.0
            for a in range(n):
                re = 0.0
                im = 0.0
                for b in range(n):
                    re = re + cr[a, b] * c2[b] - ci[a, b] * s2[b]
                    im = im + cr[a, b] * s2[b] + ci[a, b] * c2[b]
                ca = cos(k[a] * x)
                sa = sin(k[a] * x)
                acc = acc + re * ca - im * sa
            out[q] = acc
    return out_arr
