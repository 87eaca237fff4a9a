# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled integer kernels; semantics identical to ``_pykernels``."""

from libc.stdint cimport uint64_t

from preimdyn import _pykernels

cdef uint64_t _U64_MAX = 18446744073709551615ULL


cdef list _trial_u64(uint64_t n, uint64_t bound, uint64_t* rest):
    cdef list factors = []
    cdef uint64_t p, step
    cdef int k
    for p in (2, 3):
        if n % p == 0:
            k = 0
            while n % p == 0:
                n //= p
                k += 1
            factors.append((int(p), k))
    p = 5
    step = 2
    while p <= bound and p <= n // p:
        if n % p == 0:
            k = 0
            while n % p == 0:
                n //= p
                k += 1
            factors.append((int(p), k))
        p += step
        step = 6 - step
    if n > 1 and p > n // p:
        factors.append((int(n), 1))
        n = 1
    rest[0] = n
    return factors


def trial_factor(n, bound):
    cdef uint64_t rest
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor 0")
    if n <= _U64_MAX and bound <= 4294967295:
        factors = _trial_u64(<uint64_t>n, <uint64_t>bound, &rest)
        return factors, int(rest)
    return _pykernels.trial_factor(n, bound)


def homog_eval(list coeffs, p, q):
    cdef Py_ssize_t i, n = len(coeffs) - 1
    cdef object acc = 0
    cdef object qpow = 1
    for i in range(n, -1, -1):
        acc = acc * p + coeffs[i] * qpow
        qpow = qpow * q
    return acc


def exact_isqrt(n):
    return _pykernels.exact_isqrt(n)
