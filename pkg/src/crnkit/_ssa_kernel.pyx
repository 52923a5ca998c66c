# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Gillespie direct-method loop.

Must stay step-for-step identical to ``crnkit._ssa_py``: same random draws in
the same order, same floating-point expression order.
"""
import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport INFINITY, log
from numpy.random cimport bitgen_t

cnp.import_array()


cdef Py_ssize_t _simulate(
    const cnp.int64_t[:, ::1] reactants,
    const cnp.int64_t[:, ::1] jumps,
    const double[::1] kt,
    cnp.int64_t[::1] k,
    const double[::1] times,
    cnp.int64_t[:, ::1] samples,
    double[::1] prop,
    bint record,
    double[::1] rec_t,
    cnp.int64_t[:, ::1] rec_k,
    bitgen_t *rng,
) noexcept nogil:
    cdef Py_ssize_t r = reactants.shape[0]
    cdef Py_ssize_t n = reactants.shape[1]
    cdef Py_ssize_t nt = times.shape[0]
    cdef Py_ssize_t cap = rec_t.shape[0]
    cdef Py_ssize_t q = 0, nev = 0, i, j, c, sel
    cdef cnp.int64_t a
    cdef double t = 0.0, t_next, a0, v, x, u, target, cum

    if record:
        rec_t[0] = 0.0
        for i in range(n):
            rec_k[0, i] = k[i]
    while True:
        a0 = 0.0
        for j in range(r):
            v = kt[j]
            for i in range(n):
                a = reactants[j, i]
                if a:
                    if k[i] < a:
                        v = 0.0
                        break
                    x = <double>k[i]
                    for c in range(a):
                        v *= (x - c)
            prop[j] = v
            a0 += v
        if a0 <= 0.0:
            t_next = INFINITY
        else:
            u = rng.next_double(rng.state)
            t_next = t - log(1.0 - u) / a0
        while q < nt and times[q] < t_next:
            for i in range(n):
                samples[q, i] = k[i]
            q += 1
        if q == nt:
            break
        u = rng.next_double(rng.state)
        target = u * a0
        cum = 0.0
        sel = -1
        for j in range(r):
            if prop[j] > 0.0:
                cum += prop[j]
                sel = j
                if cum > target:
                    break
        for i in range(n):
            k[i] += jumps[sel, i]
        t = t_next
        nev += 1
        if record:
            if nev >= cap:
                return -1
            rec_t[nev] = t
            for i in range(n):
                rec_k[nev, i] = k[i]
    return nev


def run_direct(reactants, jumps, kt, k0, times, bit_generator, bint record=False):
    """Simulate one trajectory; see ``crnkit._ssa_py.run_direct`` for the contract."""
    cdef cnp.int64_t[:, ::1] R = np.ascontiguousarray(reactants, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] J = np.ascontiguousarray(jumps, dtype=np.int64)
    cdef double[::1] K = np.ascontiguousarray(kt, dtype=np.float64)
    cdef double[::1] T = np.ascontiguousarray(times, dtype=np.float64)
    cdef Py_ssize_t n = R.shape[1]
    cdef Py_ssize_t cap = 1024 if record else 1
    cdef Py_ssize_t nev
    cdef bitgen_t *rng = <bitgen_t *> PyCapsule_GetPointer(bit_generator.capsule, "BitGenerator")

    samples = np.zeros((T.shape[0], n), dtype=np.int64)
    prop = np.zeros(R.shape[0], dtype=np.float64)
    cdef cnp.int64_t[:, ::1] S = samples
    cdef double[::1] P = prop
    cdef cnp.int64_t[::1] k
    cdef double[::1] rt
    cdef cnp.int64_t[:, ::1] rk

    saved = bit_generator.state if record else None
    while True:
        state = np.array(k0, dtype=np.int64)
        k = state
        rec_t = np.zeros(cap, dtype=np.float64)
        rec_k = np.zeros((cap, n), dtype=np.int64)
        rt = rec_t
        rk = rec_k
        with bit_generator.lock, nogil:
            nev = _simulate(R, J, K, k, T, S, P, record, rt, rk, rng)
        if nev >= 0:
            break
        bit_generator.state = saved
        cap *= 4
    if record:
        return samples, nev, rec_t[: nev + 1], rec_k[: nev + 1]
    return samples, nev, None, None
