"""Truncated Laurent/Puiseux series in a local uniformizer at a place over t = oo.

A series is ``sum_k c_k u^k`` for ``k >= val`` known below the absolute
exponent ``prec`` (``math.inf`` for an exact, finite series).  At a place of
ramification ``e`` we have ``ord_u(t) = -e``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from preimdyn.arith import scalar_is_zero, scalar_sqrt
from preimdyn.errors import NeedsExtension
from preimdyn.poly import Poly, RatFunc, sqrt_binomial_coeffs

#: Relative precision used when an exact multi-term series must be inverted
#: or square-rooted.
DEFAULT_TERMS = 8


class PuiseuxSeries:
    __slots__ = ("e", "val", "coeffs", "prec")

    def __init__(self, coeffs: Sequence = (), val: int = 0, prec=math.inf, e: int = 1):
        cs = [Fraction(c) if isinstance(c, int) else c for c in coeffs]
        if prec != math.inf:
            cs = cs[: max(0, int(prec) - val)]
        # strip leading zeros
        k = 0
        while k < len(cs) and scalar_is_zero(cs[k]):
            k += 1
        cs = cs[k:]
        val += k
        if prec == math.inf:
            while cs and scalar_is_zero(cs[-1]):
                cs.pop()
            if not cs:
                val = 0
        self.e = e
        self.val = val
        self.coeffs = cs
        self.prec = prec

    # -- construction -----------------------------------------------------

    @classmethod
    def monomial(cls, c, k: int, e: int = 1) -> "PuiseuxSeries":
        return cls([c], k, math.inf, e)

    @classmethod
    def const(cls, c, e: int = 1) -> "PuiseuxSeries":
        return cls([c], 0, math.inf, e)

    @classmethod
    def from_poly_in_u(cls, p: Poly, prec=math.inf, e: int = 1) -> "PuiseuxSeries":
        return cls(list(p.coeffs), 0, prec, e)

    # -- queries ----------------------------------------------------------

    @property
    def exact(self) -> bool:
        return self.prec == math.inf

    def is_exact_zero(self) -> bool:
        return self.exact and not self.coeffs

    @property
    def resolved(self) -> bool:
        """True when the leading term is known (nonzero) or the series is exactly 0."""
        return bool(self.coeffs) or self.exact

    @property
    def lc(self):
        if not self.coeffs:
            raise ValueError("leading coefficient of an unresolved or zero series")
        return self.coeffs[0]

    @property
    def rel_prec(self):
        return self.prec - self.val if not self.exact else math.inf

    def coeff(self, k: int):
        i = k - self.val
        if self.prec != math.inf and k >= self.prec:
            raise ValueError(f"coefficient u^{k} beyond precision {self.prec}")
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return Fraction(0)

    def with_e(self, e: int) -> "PuiseuxSeries":
        return PuiseuxSeries(self.coeffs, self.val, self.prec, e)

    def truncate(self, prec) -> "PuiseuxSeries":
        return PuiseuxSeries(self.coeffs, self.val, min(self.prec, prec), self.e)

    def t_order(self) -> Fraction:
        """Leading exponent expressed as an order in t (so ``ord t = -1``)."""
        return Fraction(self.val, self.e)

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> "PuiseuxSeries":
        if isinstance(other, PuiseuxSeries):
            return other
        return PuiseuxSeries.const(other, self.e)

    def __add__(self, other):
        o = self._coerce(other)
        prec = min(self.prec, o.prec)
        if not self.coeffs:
            return PuiseuxSeries(o.coeffs, o.val, prec, self.e)
        if not o.coeffs:
            return PuiseuxSeries(self.coeffs, self.val, prec, self.e)
        lo = min(self.val, o.val)
        hi = max(self.val + len(self.coeffs), o.val + len(o.coeffs))
        if prec != math.inf:
            hi = min(hi, int(prec))
        out = [Fraction(0)] * max(0, hi - lo)
        for i, c in enumerate(self.coeffs):
            k = self.val + i - lo
            if k < len(out):
                out[k] = out[k] + c
        for i, c in enumerate(o.coeffs):
            k = o.val + i - lo
            if k < len(out):
                out[k] = out[k] + c
        return PuiseuxSeries(out, lo, prec, self.e)

    __radd__ = __add__

    def __neg__(self):
        return PuiseuxSeries([-c for c in self.coeffs], self.val, self.prec, self.e)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PuiseuxSeries):
            return PuiseuxSeries([c * other for c in self.coeffs], self.val, self.prec, self.e)
        o = other
        if self.is_exact_zero() or o.is_exact_zero():
            return PuiseuxSeries([], 0, math.inf, self.e)
        if not self.coeffs or not o.coeffs:
            # unresolved factor: only a lower bound on the valuation survives
            prec = self._unresolved_product_prec(o)
            return PuiseuxSeries([], int(prec), prec, self.e)
        prec = min(self.val + o.prec, o.val + self.prec)
        val = self.val + o.val
        n = len(self.coeffs) + len(o.coeffs) - 1
        if prec != math.inf:
            n = min(n, int(prec) - val)
        out = [Fraction(0)] * max(0, n)
        for i, a in enumerate(self.coeffs):
            if i >= n:
                break
            if scalar_is_zero(a):
                continue
            for j in range(min(len(o.coeffs), n - i)):
                out[i + j] = out[i + j] + a * o.coeffs[j]
        return PuiseuxSeries(out, val, prec, self.e)

    def _unresolved_product_prec(self, o):
        a_lo = self.val if self.coeffs else self.prec
        b_lo = o.val if o.coeffs else o.prec
        return min(a_lo + o.prec, b_lo + self.prec)

    __rmul__ = __mul__

    def inverse(self, terms: int = DEFAULT_TERMS) -> "PuiseuxSeries":
        if not self.coeffs:
            raise ZeroDivisionError("inverse of a zero or unresolved series")
        if self.exact and len(self.coeffs) == 1:
            return PuiseuxSeries([1 / self.coeffs[0]], -self.val, math.inf, self.e)
        n = int(min(self.rel_prec, terms))
        a = self.coeffs
        inv0 = 1 / a[0]
        b = [inv0]
        for k in range(1, n):
            s = Fraction(0)
            for i in range(1, min(k, len(a) - 1) + 1):
                s = s + a[i] * b[k - i]
            b.append(-s * inv0)
        return PuiseuxSeries(b, -self.val, -self.val + n, self.e)

    def __truediv__(self, other):
        if isinstance(other, PuiseuxSeries):
            return self * other.inverse(self._terms_hint())
        return self * (1 / other)

    def __rtruediv__(self, other):
        return self.inverse() * other

    def _terms_hint(self) -> int:
        return int(min(self.rel_prec, DEFAULT_TERMS)) if not self.exact else DEFAULT_TERMS

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = PuiseuxSeries.const(1, self.e)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def substitute_ramified(self, c, m: int = 2) -> "PuiseuxSeries":
        """Rewrite in a new uniformizer ``w`` with ``u = c * w^m``.

        Exponents scale by ``m`` and the ramification index by ``m``.
        """
        out = []
        for i, a in enumerate(self.coeffs):
            out.append(a * _ipow(c, self.val + i))
        # interleave zeros
        spread = []
        for a in out:
            spread.append(a)
            spread.extend([Fraction(0)] * (m - 1))
        if spread:
            spread = spread[: len(spread) - (m - 1)]
        prec = self.prec * m if self.prec != math.inf else math.inf
        return PuiseuxSeries(spread, self.val * m, prec, self.e * m)

    def __eq__(self, other):
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        return (self.e, self.val, self.coeffs, self.prec) == (other.e, other.val, other.coeffs, other.prec)

    def agrees_with(self, other: "PuiseuxSeries") -> bool:
        """Equal on the common known window."""
        d = self - other
        return not d.coeffs

    def evaluate_numeric(self, u: complex) -> complex:
        total = 0j
        for i, c in enumerate(self.coeffs):
            cv = c.to_complex() if hasattr(c, "to_complex") else complex(float(c))
            total += cv * u ** (self.val + i)
        return total

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if not scalar_is_zero(c):
                terms.append(f"({c})*u^{self.val + i}")
        tail = "" if self.exact else f" + O(u^{self.prec})"
        return f"PuiseuxSeries[e={self.e}](" + (" + ".join(terms) or "0") + tail + ")"


def _ipow(c, k: int):
    if k >= 0:
        return c**k
    return (1 / c) ** (-k)


def series_sqrt(s: PuiseuxSeries, terms: int = DEFAULT_TERMS) -> PuiseuxSeries:
    """Square root ``r`` with ``r * r == s`` through the precision of ``s``.

    The root's leading coefficient is the canonical root from
    :func:`~preimdyn.arith.scalar_sqrt`.  Raises :class:`NeedsExtension`
    with ``kind="odd"`` or ``kind="nonsquare"`` when the root does not
    exist in the current uniformizer and scalar field.
    """
    if s.is_exact_zero():
        return s
    if not s.coeffs:
        raise ValueError("square root of an unresolved series")
    if s.val % 2:
        raise NeedsExtension("odd", s.coeffs[0])
    r0 = scalar_sqrt(s.coeffs[0])
    if r0 is None:
        raise NeedsExtension("nonsquare", s.coeffs[0])
    n = int(min(s.rel_prec, terms)) if not (s.exact and len(s.coeffs) == 1) else 1
    if s.exact and len(s.coeffs) == 1:
        return PuiseuxSeries([r0], s.val // 2, math.inf, s.e)
    a = s.coeffs
    inv2r0 = 1 / (2 * r0)
    r = [r0]
    for k in range(1, n):
        acc = a[k] if k < len(a) else Fraction(0)
        for i in range(1, k):
            acc = acc - r[i] * r[k - i]
        r.append(acc * inv2r0)
    return PuiseuxSeries(r, s.val // 2, s.val // 2 + n, s.e)


def truncated_sqrt_poly(n: int) -> Poly:
    """``F_n(x) = sum_{i<=n} binom(1/2, i) x^i``."""
    return Poly(sqrt_binomial_coeffs(n))


def eval_poly_series(p: Poly, s: PuiseuxSeries) -> PuiseuxSeries:
    acc = PuiseuxSeries([], 0, math.inf, s.e)
    for c in reversed(p.coeffs):
        acc = acc * s + c
    return acc


def eval_ratfunc_series(f: RatFunc, s: PuiseuxSeries, terms: int = DEFAULT_TERMS) -> PuiseuxSeries:
    num = eval_poly_series(f.num, s)
    if f.is_poly():
        return num * f.den.coeffs[0] ** -1 if f.den.coeffs[0] != 1 else num
    return num * eval_poly_series(f.den, s).inverse(terms)
