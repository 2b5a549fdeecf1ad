# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled split-scan kernel; see _split_py for the contract.

The scan keeps the same accumulation order, gain expression, and
feature-major strictly-greater tie-breaking as the numpy fallback so
both backends produce bit-identical trees.
"""

from libc.math cimport INFINITY


def best_split(const double[::1, :] vals, const double[::1, :] grads):
    cdef Py_ssize_t m = vals.shape[0]
    cdef Py_ssize_t nf = vals.shape[1]
    cdef Py_ssize_t f, p
    cdef Py_ssize_t best_f = -1, best_p = -1
    cdef double best_gain = -INFINITY
    cdef double gt, acc, gl, gr, gain, base
    cdef double dm = <double> m

    if m < 2 or nf == 0:
        return -1, -1, 0.0

    for f in range(nf):
        gt = 0.0
        for p in range(m):
            gt += grads[p, f]
        base = gt * gt / dm
        acc = 0.0
        for p in range(m - 1):
            acc += grads[p, f]
            if vals[p + 1, f] <= vals[p, f]:
                continue
            gl = acc
            gr = gt - gl
            gain = gl * gl / (<double> (p + 1)) + gr * gr / (<double> (m - p - 1)) - base
            if gain > best_gain:
                best_gain = gain
                best_f = f
                best_p = p

    if best_f < 0:
        return -1, -1, 0.0
    return best_f, best_p, best_gain
