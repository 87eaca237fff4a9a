"""Pure-Python versions of the hot integer kernels.

These are the reference implementations; ``_ckernels.pyx`` must agree with
them bit for bit (see ``tests/test_kernels.py``).
"""

from math import isqrt


def trial_factor(n, bound):
    """Strip prime factors ``p <= bound`` from ``|n|``.

    Returns ``(factors, cofactor)`` with ``factors`` a list of
    ``(prime, exponent)`` pairs in increasing order.  ``cofactor`` has no
    prime factor ``<= bound``.
    """
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor 0")
    factors = []
    for p in (2, 3):
        if n % p == 0:
            k = 0
            while n % p == 0:
                n //= p
                k += 1
            factors.append((p, k))
    p = 5
    step = 2
    while p <= bound and p * p <= n:
        if n % p == 0:
            k = 0
            while n % p == 0:
                n //= p
                k += 1
            factors.append((p, k))
        p += step
        step = 6 - step
    if n > 1 and p * p > n:
        # every prime below p was tried, so n is prime
        factors.append((n, 1))
        n = 1
    return factors, n


def homog_eval(coeffs, p, q):
    """Evaluate ``sum(c_i * p**i * q**(n-i))`` for integer ``coeffs`` (lowest first)."""
    n = len(coeffs) - 1
    acc = 0
    qpow = 1
    # Horner in p with running powers of q
    for i in range(n, -1, -1):
        acc = acc * p + coeffs[i] * qpow
        qpow *= q
    return acc


def exact_isqrt(n):
    """Return ``r`` with ``r*r == n`` or ``-1`` when ``n`` is not a perfect square."""
    if n < 0:
        return -1
    r = isqrt(n)
    return r if r * r == n else -1
