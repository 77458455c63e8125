# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled orthant-sum kernel.

Each output entry is reduced sequentially by a single thread, so results do
not depend on the thread count.
"""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange

cnp.import_array()


def orthant_sum(const double[:, ::1] points, const double[:, ::1] atoms,
                const double[::1] weights, bint strict, int num_threads=1):
    cdef Py_ssize_t m = points.shape[0]
    cdef Py_ssize_t k = atoms.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    cdef Py_ssize_t i, j, a
    cdef double s
    cdef bint inside
    out = np.zeros(m, dtype=np.float64)
    cdef double[::1] res = out
    if num_threads < 1:
        num_threads = 1
    for i in prange(m, nogil=True, num_threads=num_threads, schedule="static"):
        s = 0.0
        for a in range(k):
            inside = True
            for j in range(d):
                if strict:
                    if not atoms[a, j] < points[i, j]:
                        inside = False
                        break
                else:
                    if not atoms[a, j] <= points[i, j]:
                        inside = False
                        break
            if inside:
                s = s + weights[a]
        res[i] = s
    return out
