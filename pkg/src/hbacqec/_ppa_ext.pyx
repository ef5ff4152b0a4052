# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled diagonal partner-pairing kernels; see ``_ppa_py`` for the reference."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"
TIE_TOL = 1e-14

cdef double _TIE_TOL = TIE_TOL


cdef void _sort_order(const double[::1] d, long long[::1] order) noexcept nogil:
    cdef Py_ssize_t size = d.shape[0]
    cdef Py_ssize_t i, j
    cdef long long key
    for i in range(size):
        order[i] = i
    # insertion sort, descending; an entry only overtakes one smaller by more than _TIE_TOL
    for i in range(1, size):
        key = order[i]
        j = i - 1
        while j >= 0 and d[order[j]] + _TIE_TOL < d[key]:
            order[j + 1] = order[j]
            j -= 1
        order[j + 1] = key


cdef void _exchange(const double[::1] d, double[::1] out, int n_qubits, int target,
                    double eps) noexcept nogil:
    cdef Py_ssize_t size = d.shape[0]
    cdef Py_ssize_t mask = (<Py_ssize_t>1) << (n_qubits - 1 - target)
    cdef Py_ssize_t i
    cdef double up = (1.0 + eps) / 2.0
    cdef double down = (1.0 - eps) / 2.0
    cdef double s
    for i in range(size):
        if i & mask:
            continue
        s = d[i] + d[i | mask]
        out[i] = s * up
        out[i | mask] = s * down


cdef void _depolarize(double[::1] d, double[::1] tmp, int n_qubits, double c) noexcept nogil:
    cdef Py_ssize_t size = d.shape[0]
    cdef Py_ssize_t i, mask
    cdef int k
    cdef double keep = 1.0 - c / 2.0
    cdef double flip = c / 2.0
    for k in range(n_qubits):
        mask = (<Py_ssize_t>1) << (n_qubits - 1 - k)
        for i in range(size):
            tmp[i] = keep * d[i] + flip * d[i ^ mask]
        for i in range(size):
            d[i] = tmp[i]


def sort_order(diag):
    cdef const double[::1] d = np.ascontiguousarray(diag, dtype=np.float64)
    order = np.empty(d.shape[0], dtype=np.int64)
    cdef long long[::1] o = order
    with nogil:
        _sort_order(d, o)
    return order


def exchange_diag(diag, int n_qubits, int target, double eps):
    cdef const double[::1] d = np.ascontiguousarray(diag, dtype=np.float64)
    out = np.empty(d.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        _exchange(d, o, n_qubits, target, eps)
    return out


def depolarize_diag(diag, int n_qubits, double c):
    out = np.array(diag, dtype=np.float64, copy=True, order="C")
    tmp = np.empty_like(out)
    cdef double[::1] o = out
    cdef double[::1] t = tmp
    with nogil:
        _depolarize(o, t, n_qubits, c)
    return out


def ppa_diag(diag, int n_qubits, int iterations, double eps, int target, double c,
             bint exchange_first):
    cdef double[::1] d = np.array(diag, dtype=np.float64, copy=True, order="C")
    cdef Py_ssize_t size = d.shape[0]
    snaps_arr = np.empty((2 * iterations + 1, size), dtype=np.float64)
    orders_arr = np.empty((iterations, size), dtype=np.int64)
    cdef double[:, ::1] snaps = snaps_arr
    cdef long long[:, ::1] orders = orders_arr
    cdef double[::1] work = np.empty(size, dtype=np.float64)
    cdef double[::1] tmp = np.empty(size, dtype=np.float64)
    cdef Py_ssize_t it, i, row = 1
    with nogil:
        snaps[0, :] = d
        for it in range(iterations):
            if exchange_first:
                _exchange(d, work, n_qubits, target, eps)
                d[:] = work
                snaps[row, :] = d
                row += 1
            _sort_order(d, orders[it])
            for i in range(size):
                work[i] = d[orders[it, i]]
            d[:] = work
            if c != 0.0:
                _depolarize(d, tmp, n_qubits, c)
            snaps[row, :] = d
            row += 1
            if not exchange_first:
                _exchange(d, work, n_qubits, target, eps)
                d[:] = work
                snaps[row, :] = d
                row += 1
    return snaps_arr, orders_arr
