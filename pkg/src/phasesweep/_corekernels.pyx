# cython: language_level=3
"""Cython implementation of the acquisition hot kernels.

Same operations as phasesweep._corekernels_np; see that module for the
reference semantics.  Expressions are kept identical so both backends
agree to rounding.
"""

import numpy as np

cimport cython
from libc.math cimport floor

BACKEND_NAME = "cython"


cdef inline double _eval_one(const double[::1] samples, double inv_spacing,
                             double origin_index, Py_ssize_t n,
                             double inv_n, double lag) nogil:
    cdef double u = lag * inv_spacing + origin_index
    u = u - floor(u * inv_n) * n
    cdef Py_ssize_t i0 = <Py_ssize_t>floor(u)
    if i0 >= n:
        i0 = 0
    cdef double w = u - i0
    cdef Py_ssize_t i1 = i0 + 1
    if i1 >= n:
        i1 = 0
    cdef double s0 = samples[i0]
    return s0 + (samples[i1] - s0) * w


def eval_kernel_periodic(samples, double spacing, origin_index, lags):
    """Evaluate a periodically extended, piecewise-linear kernel."""
    cdef double[::1] s = np.ascontiguousarray(samples, dtype=np.float64)
    lags_arr = np.ascontiguousarray(
        np.asarray(lags, dtype=np.float64).ravel())
    cdef double[::1] x = lags_arr
    out_arr = np.empty(lags_arr.shape[0])
    cdef double[::1] out = out_arr
    cdef Py_ssize_t n = s.shape[0]
    cdef double oi = origin_index
    cdef double inv_spacing = 1.0 / spacing
    cdef double inv_n = 1.0 / n
    cdef Py_ssize_t k
    with nogil:
        for k in range(x.shape[0]):
            out[k] = _eval_one(s, inv_spacing, oi, n, inv_n, x[k])
    return out_arr.reshape(np.shape(lags))


def accumulate_paths(samples, double spacing, origin_index, phases,
                     double offset, delays, amplitudes, indptr):
    """Correlation samples for every pixel of a sparse-path scene."""
    cdef double[::1] s = np.ascontiguousarray(samples, dtype=np.float64)
    cdef double[::1] ph = np.ascontiguousarray(phases, dtype=np.float64)
    cdef double[::1] d = np.ascontiguousarray(delays, dtype=np.float64)
    cdef double[::1] a = np.ascontiguousarray(amplitudes, dtype=np.float64)
    cdef long long[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef Py_ssize_t num_pixels = ip.shape[0] - 1
    cdef Py_ssize_t num_phases = ph.shape[0]
    out_arr = np.zeros((num_pixels, num_phases))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t n = s.shape[0]
    cdef double oi = origin_index
    cdef double inv_spacing = 1.0 / spacing
    cdef double inv_n = 1.0 / n
    cdef Py_ssize_t p, i, j
    cdef double amp, delay
    with nogil:
        for p in range(num_pixels):
            for i in range(ip[p], ip[p + 1]):
                amp = a[i]
                delay = d[i]
                for j in range(num_phases):
                    out[p, j] = out[p, j] + amp * _eval_one(
                        s, inv_spacing, oi, n, inv_n,
                        (ph[j] + offset) - delay)
    return out_arr
