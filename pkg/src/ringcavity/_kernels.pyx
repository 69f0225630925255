# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_kernels_py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt
from scipy.linalg.cython_blas cimport zgemv

# below this size a plain loop beats the BLAS call overhead
DEF BLAS_MIN_DIM = 16

cnp.import_array()


def fock_hamiltonian(int n_spins, int cutoff, g_cw, g_ccw, double omega_c, spin_energy):
    cdef int n = n_spins
    cdef Py_ssize_t levels = cutoff + 1
    cdef Py_ssize_t dim = (levels * levels) << n
    cdef Py_ssize_t nbits = 1 << n
    cdef const double complex[:] gcw = np.ascontiguousarray(g_cw, dtype=np.complex128)
    cdef const double complex[:] gccw = np.ascontiguousarray(g_ccw, dtype=np.complex128)
    cdef const double[:] eps = np.ascontiguousarray(spin_energy, dtype=np.float64)
    H_arr = np.zeros((dim, dim), dtype=np.complex128)
    cdef double complex[:, ::1] H = H_arr
    cdef Py_ssize_t i, j, photons, ncw, nccw, bits, flag
    cdef int m
    cdef double e
    cdef double complex amp
    for i in range(dim):
        photons = i >> n
        ncw = photons // levels
        nccw = photons % levels
        bits = i & (nbits - 1)
        e = omega_c * (ncw + nccw)
        for m in range(n):
            flag = (<Py_ssize_t>1) << (n - 1 - m)
            if bits & flag:
                e += eps[m]
                if ncw < cutoff:
                    j = i + (levels << n) - flag
                    amp = gcw[m] * sqrt(ncw + 1.0)
                    H[j, i] += amp
                    H[i, j] += amp.conjugate()
                if nccw < cutoff:
                    j = i + nbits - flag
                    amp = gccw[m] * sqrt(nccw + 1.0)
                    H[j, i] += amp
                    H[i, j] += amp.conjugate()
        H[i, i] += e
    return H_arr


def propagate(unitaries, psi0, record):
    cdef const double complex[:, :, ::1] U = np.ascontiguousarray(unitaries, dtype=np.complex128)
    cdef const cnp.uint8_t[:] rec = np.ascontiguousarray(record, dtype=np.uint8)
    cdef Py_ssize_t K = U.shape[0]
    cdef Py_ssize_t d = U.shape[1]
    cdef Py_ssize_t n_out = 0
    cdef Py_ssize_t k, i, j, r = 0
    for k in range(K):
        if rec[k]:
            n_out += 1
    out_arr = np.empty((n_out, d), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef double complex[::1] psi = np.array(psi0, dtype=np.complex128)
    cdef double complex[::1] tmp = np.empty(d, dtype=np.complex128)
    cdef double complex acc
    cdef double complex one = 1.0, zero = 0.0
    cdef int nd = <int>d, inc = 1
    cdef char trans = b"T"  # row-major U read as column-major U^T
    for k in range(K):
        if d >= BLAS_MIN_DIM:
            zgemv(&trans, &nd, &nd, &one, <double complex*>&U[k, 0, 0], &nd,
                  &psi[0], &inc, &zero, &tmp[0], &inc)
        else:
            for i in range(d):
                acc = 0
                for j in range(d):
                    acc = acc + U[k, i, j] * psi[j]
                tmp[i] = acc
        psi[:] = tmp
        if rec[k]:
            out[r, :] = psi
            r += 1
    return out_arr
