"""Exact univariate/bivariate polynomials, rational functions, resultants, rational roots.

Coefficients are ``Fraction`` by default but any exact field element with
``+ - * /`` works (notably :class:`~preimdyn.arith.TowerScalar`).
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from preimdyn import kernels
from preimdyn.arith import factorize, scalar_is_zero
from preimdyn.errors import Undefined


def _coerce(c):
    if isinstance(c, int):
        return Fraction(c)
    return c


class Poly:
    """Univariate polynomial, coefficients lowest degree first, no trailing zeros."""

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs: Iterable = ()):
        cs = [_coerce(c) for c in coeffs]
        while cs and scalar_is_zero(cs[-1]):
            cs.pop()
        self.coeffs = tuple(cs)
        self._hash = None

    @classmethod
    def const(cls, c) -> "Poly":
        return cls([c])

    @classmethod
    def x(cls) -> "Poly":
        return cls([0, 1])

    @classmethod
    def monomial(cls, n: int, c=1) -> "Poly":
        return cls([0] * n + [c])

    @property
    def degree(self) -> int:
        """Degree; ``-1`` for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    @property
    def lc(self):
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def coeff(self, i: int):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == Poly([other]).coeffs
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.coeffs)
        return self._hash

    def _lift(self, other):
        if isinstance(other, Poly):
            return other
        if isinstance(other, (RatFunc, BiPoly)):
            return None
        return Poly([other])

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        a, b = self.coeffs, o.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly([-c for c in self.coeffs])

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if not self.coeffs or not o.coeffs:
            return Poly()
        if len(o.coeffs) == 1:
            c = o.coeffs[0]
            return Poly([a * c for a in self.coeffs])
        if len(self.coeffs) == 1:
            c = self.coeffs[0]
            return Poly([c * b for b in o.coeffs])
        out = [Fraction(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if scalar_is_zero(a):
                continue
            for j, b in enumerate(o.coeffs):
                out[i + j] = out[i + j] + a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        out = Poly([1])
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def scale(self, c) -> "Poly":
        return Poly([a * c for a in self.coeffs])

    def divmod(self, other: "Poly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.coeffs)
        dq = other.degree
        inv_lc = 1 / other.lc
        q = [Fraction(0)] * max(0, len(r) - dq)
        for k in range(len(r) - 1, dq - 1, -1):
            c = r[k]
            if scalar_is_zero(c):
                continue
            f = c * inv_lc
            q[k - dq] = f
            for j, b in enumerate(other.coeffs):
                r[k - dq + j] = r[k - dq + j] - f * b
        return Poly(q), Poly(r[:dq])

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def exact_div(self, other: "Poly") -> "Poly":
        q, r = self.divmod(other)
        if not r.is_zero():
            raise ValueError("polynomial division is not exact")
        return q

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        return self.scale(1 / self.lc)

    def __call__(self, x):
        acc = Fraction(0) * x
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "Poly":
        return Poly([i * c for i, c in enumerate(self.coeffs)][1:])

    def map_coeffs(self, fn) -> "Poly":
        return Poly([fn(c) for c in self.coeffs])

    def content_free(self) -> "Poly":
        """Integer coefficients with gcd 1 and positive leading coefficient (rational input)."""
        ints = clear_denominators(self.coeffs)
        g = 0
        for c in ints:
            g = gcd(g, c)
        if g == 0:
            return Poly()
        if ints[-1] < 0:
            g = -g
        return Poly([Fraction(c // g) for c in ints])

    def int_coeffs(self) -> list[int]:
        return [int(c) for c in self.content_free().coeffs]

    def is_rational(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.coeffs)

    def to_str(self, var: str = "x") -> str:
        if not self.coeffs:
            return "0"
        out = ""
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if scalar_is_zero(c):
                continue
            mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
            if isinstance(c, Fraction):
                sign = "-" if c < 0 else "+"
                a = abs(c)
                body = mono if (mono and a == 1) else (f"{a}*{mono}" if mono else str(a))
            else:
                sign = "+"
                body = f"({c})*{mono}" if mono else f"({c})"
            if not out:
                out = body if sign == "+" else "-" + body
            else:
                out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"Poly({self.to_str()})"


def clear_denominators(coeffs: Sequence[Fraction]) -> list[int]:
    l = 1
    for c in coeffs:
        c = Fraction(c)
        l = l * c.denominator // gcd(l, c.denominator)
    return [int(Fraction(c) * l) for c in coeffs]


def poly_gcd(f: Poly, g: Poly) -> Poly:
    """Monic gcd over the coefficient field (zero if both are zero)."""
    a, b = f, g
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def determinant(rows: list[list]):
    """Exact determinant by Gaussian elimination over a field."""
    m = [list(r) for r in rows]
    n = len(m)
    if n == 0:
        return Fraction(1)
    det = Fraction(1)
    for col in range(n):
        piv = None
        for r in range(col, n):
            if not scalar_is_zero(m[r][col]):
                piv = r
                break
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        p = m[col][col]
        det = det * p
        inv = 1 / p
        for r in range(col + 1, n):
            f = m[r][col]
            if scalar_is_zero(f):
                continue
            f = f * inv
            row_r, row_c = m[r], m[col]
            for k in range(col, n):
                row_r[k] = row_r[k] - f * row_c[k]
    return det


def solve_linear(rows: list[list], rhs: list):
    """Exact solution of a nonsingular square system ``rows * x = rhs``."""
    n = len(rows)
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not scalar_is_zero(m[r][col])), None)
        if piv is None:
            raise ZeroDivisionError("singular linear system")
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for r in range(n):
            if r != col and not scalar_is_zero(m[r][col]):
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return [m[r][n] for r in range(n)]


def sylvester_matrix(f: Poly, g: Poly, df: int, dg: int) -> list[list]:
    fc = [f.coeff(i) for i in range(df, -1, -1)]
    gc = [g.coeff(i) for i in range(dg, -1, -1)]
    n = df + dg
    rows = []
    for i in range(dg):
        rows.append([Fraction(0)] * i + fc + [Fraction(0)] * (n - i - len(fc)))
    for i in range(df):
        rows.append([Fraction(0)] * i + gc + [Fraction(0)] * (n - i - len(gc)))
    return rows


def resultant(f: Poly, g: Poly, df: int | None = None, dg: int | None = None):
    """Sylvester resultant with respect to declared degrees ``df``, ``dg``.

    Defaults to the actual degrees.  Zero iff ``f``, ``g`` share a root over
    the algebraic closure or both declared leading coefficients vanish.
    """
    if f.is_zero() and g.is_zero():
        raise Undefined("resultant of two zero polynomials")
    df = max(f.degree, 0) if df is None else df
    dg = max(g.degree, 0) if dg is None else dg
    if f.degree > df or g.degree > dg:
        raise ValueError("declared degree below actual degree")
    return determinant(sylvester_matrix(f, g, df, dg))


# --------------------------------------------------------------------------
# rational roots


def _divisors(n: int) -> list[int]:
    n = abs(n)
    if n == 1:
        return [1]
    divs = [1]
    for p, k in factorize(n).items():
        divs = [d * p**e for d in divs for e in range(k + 1)]
    return sorted(divs)


def _int_roots_deg2(c0: int, c1: int, c2: int) -> list[Fraction]:
    disc = c1 * c1 - 4 * c2 * c0
    s = kernels.exact_isqrt(disc)
    if s < 0:
        return []
    if s == 0:
        r = Fraction(-c1, 2 * c2)
        return [r, r]
    return sorted([Fraction(-c1 - s, 2 * c2), Fraction(-c1 + s, 2 * c2)])


def _synthetic_div(ints: list[int], p: int, q: int) -> list[int]:
    """Divide an integer polynomial by ``q x - p`` (exact division assumed)."""
    n = len(ints) - 1
    out = [0] * n
    rem = ints[n]
    for k in range(n - 1, -1, -1):
        # out[k] = coefficient of x^k in quotient
        if rem % q:
            raise ArithmeticError("non-exact synthetic division")
        out[k] = rem // q
        rem = ints[k] + p * out[k]
    if rem != 0:
        raise ArithmeticError("non-exact synthetic division")
    return out


def rational_roots(f: Poly) -> list[Fraction]:
    """All rational roots with multiplicity, sorted.

    Clears denominators and searches ``p/q`` with ``p | a_0`` and ``q | a_n``
    (after removing the root 0); every candidate is checked by exact
    homogeneous evaluation.  Degree <= 2 parts use the exact discriminant.
    """
    if f.is_zero():
        raise Undefined("rational roots of the zero polynomial")
    ints = clear_denominators(f.coeffs)
    roots: list[Fraction] = []
    k = 0
    while ints[k] == 0:
        k += 1
    roots.extend([Fraction(0)] * k)
    ints = ints[k:]
    roots.extend(_int_poly_roots(ints))
    return sorted(roots)


def _int_poly_roots(ints: list[int]) -> list[Fraction]:
    n = len(ints) - 1
    if n <= 0:
        return []
    if n == 1:
        return [Fraction(-ints[0], ints[1])]
    if n == 2:
        return _int_roots_deg2(*ints)
    g = 0
    for c in ints:
        g = gcd(g, c)
    ints = [c // g for c in ints]
    a0, an = ints[0], ints[-1]
    # Cauchy bound on |root|
    bound = 1 + max(Fraction(abs(c), abs(an)) for c in ints[:-1])
    found: list[Fraction] = []
    for q in _divisors(an):
        for p in _divisors(a0):
            if gcd(p, q) != 1 or Fraction(p, q) > bound:
                continue
            for sp in (p, -p):
                while len(ints) > 1 and kernels.homog_eval(ints, sp, q) == 0:
                    found.append(Fraction(sp, q))
                    ints = _synthetic_div(ints, sp, q)
                    if len(ints) - 1 <= 2:
                        return found + _int_poly_roots(ints)
    return found


# --------------------------------------------------------------------------
# rational functions


class RatFunc:
    """Quotient ``num/den`` of polynomials, reduced with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, *, reduced=False):
        num = num if isinstance(num, Poly) else Poly([num])
        den = Poly([1]) if den is None else (den if isinstance(den, Poly) else Poly([den]))
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if not reduced:
            if num.is_zero():
                den = Poly([1])
            elif den.degree > 0:
                g = poly_gcd(num, den)
                if g.degree > 0:
                    num = num.exact_div(g)
                    den = den.exact_div(g)
            lc = den.lc
            if not (isinstance(lc, Fraction) and lc == 1):
                inv = 1 / lc
                num = num.scale(inv)
                den = den.scale(inv)
        self.num = num
        self.den = den

    @classmethod
    def lift(cls, x) -> "RatFunc":
        if isinstance(x, RatFunc):
            return x
        if isinstance(x, Poly):
            return cls(x, None, reduced=True)
        return cls(Poly([x]), None, reduced=True)

    def is_poly(self) -> bool:
        return self.den.degree == 0

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __eq__(self, other):
        if isinstance(other, (RatFunc, Poly, int, Fraction)):
            o = RatFunc.lift(other)
            return self.num == o.num and self.den == o.den
        return NotImplemented

    def __hash__(self):
        return hash((self.num, self.den))

    def __add__(self, other):
        o = RatFunc.lift(other) if not isinstance(other, BiPoly) else None
        if o is None:
            return NotImplemented
        if self.is_poly() and o.is_poly():
            return RatFunc(self.num + o.num, None, reduced=True)
        if self.den == o.den:
            return RatFunc(self.num + o.num, self.den)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, reduced=True)

    def __sub__(self, other):
        return self + (-RatFunc.lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, BiPoly):
            return NotImplemented
        o = RatFunc.lift(other)
        if self.is_poly() and o.is_poly():
            return RatFunc(self.num * o.num, None, reduced=True)
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RatFunc(self.den, self.num)

    def __truediv__(self, other):
        return self * RatFunc.lift(other).inverse()

    def __rtruediv__(self, other):
        return RatFunc.lift(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return RatFunc(self.num**n, self.den**n, reduced=True)

    def __call__(self, x):
        return self.num(x) / self.den(x)

    def degree(self) -> int:
        """max(deg num, deg den)."""
        return max(self.num.degree, self.den.degree)

    def __repr__(self):
        if self.is_poly():
            return f"RatFunc({self.num.to_str()})"
        return f"RatFunc(({self.num.to_str()})/({self.den.to_str()}))"


def compose(f, g):
    """Exact composition ``f o g``.

    Polynomials compose by Horner.  For rational functions, pass
    ``(num, den)`` pairs or :class:`RatFunc`; the result is homogenized at
    ``max(deg num, deg den)`` and returned as a content-free
    ``(num, den)`` pair (rational coefficients) or reduced pair.
    """
    if isinstance(f, Poly) and isinstance(g, Poly):
        return f(g)
    fn, fd = _as_pair(f)
    gn, gd = _as_pair(g)
    d = max(fn.degree, fd.degree)
    num = Poly()
    den = Poly()
    gn_pows = [Poly([1])]
    gd_pows = [Poly([1])]
    for _ in range(d):
        gn_pows.append(gn_pows[-1] * gn)
        gd_pows.append(gd_pows[-1] * gd)
    for i in range(d + 1):
        term = gn_pows[i] * gd_pows[d - i]
        if not scalar_is_zero(fn.coeff(i)):
            num = num + term.scale(fn.coeff(i))
        if not scalar_is_zero(fd.coeff(i)):
            den = den + term.scale(fd.coeff(i))
    return normalize_pair(num, den)


def _as_pair(f):
    if isinstance(f, RatFunc):
        return f.num, f.den
    if isinstance(f, Poly):
        return f, Poly([1])
    num, den = f
    return num, den


def normalize_pair(num: Poly, den: Poly):
    """Cancel a common polynomial factor and the joint content."""
    g = poly_gcd(num, den)
    if g.degree > 0:
        num = num.exact_div(g)
        den = den.exact_div(g)
    if num.is_rational() and den.is_rational():
        ints = clear_denominators(list(num.coeffs) + list(den.coeffs))
        c = 0
        for v in ints:
            c = gcd(c, v)
        n = len(num.coeffs)
        lead = den.lc if not den.is_zero() else num.lc
        sign = -1 if lead < 0 else 1
        c = c * sign
        num = Poly([Fraction(v, c) for v in ints[:n]])
        den = Poly([Fraction(v, c) for v in ints[n:]])
    return num, den


def sqrt_binomial_coeffs(n: int) -> list[Fraction]:
    """Coefficients ``binom(1/2, i)`` for ``i = 0..n`` of the series of sqrt(1 + x)."""
    out = [Fraction(1)]
    c = Fraction(1)
    half = Fraction(1, 2)
    for i in range(1, n + 1):
        c = c * (half - (i - 1)) / i
        out.append(c)
    return out


# --------------------------------------------------------------------------
# bivariate


class BiPoly:
    """Sparse polynomial in ``x`` and ``t``: ``{(deg_x, deg_t): coefficient}``."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {k: _coerce(v) for k, v in (terms or {}).items() if not scalar_is_zero(v)}

    @classmethod
    def x(cls):
        return cls({(1, 0): 1})

    @classmethod
    def t(cls):
        return cls({(0, 1): 1})

    @classmethod
    def const(cls, c):
        return cls({(0, 0): c})

    @classmethod
    def from_t_poly(cls, p: Poly) -> "BiPoly":
        return cls({(0, j): c for j, c in enumerate(p.coeffs)})

    def _lift(self, other):
        if isinstance(other, BiPoly):
            return other
        if isinstance(other, Poly):
            return None
        return BiPoly.const(other)

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        out = dict(self.terms)
        for k, v in o.terms.items():
            out[k] = out.get(k, 0) + v
        return BiPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return BiPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        out: dict = {}
        for (i, j), a in self.terms.items():
            for (k, l), b in o.terms.items():
                key = (i + k, j + l)
                out[key] = out.get(key, 0) + a * b
        return BiPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = BiPoly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, BiPoly):
            return self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def deg_x(self) -> int:
        return max((i for i, _ in self.terms), default=-1)

    def deg_t(self) -> int:
        return max((j for _, j in self.terms), default=-1)

    def specialize_t(self, t0) -> Poly:
        """Univariate polynomial in ``x`` at ``t = t0``."""
        out = [Fraction(0)] * (self.deg_x() + 1)
        for (i, j), c in self.terms.items():
            out[i] = out[i] + c * t0**j
        return Poly(out)

    def x_coeff(self, i: int) -> Poly:
        """Coefficient of ``x^i`` as a polynomial in ``t``."""
        cs = [Fraction(0)] * (self.deg_t() + 1)
        for (k, j), c in self.terms.items():
            if k == i:
                cs[j] = cs[j] + c
        return Poly(cs)

    def x_coeffs(self) -> list[Poly]:
        return [self.x_coeff(i) for i in range(self.deg_x() + 1)]

    def compose_x(self, g: "BiPoly") -> "BiPoly":
        """Substitute ``x -> g(x, t)``."""
        out = BiPoly()
        for i, ci in reversed(list(enumerate(self.x_coeffs()))):
            out = out * g + BiPoly.from_t_poly(ci)
        return out

    def __repr__(self):
        parts = []
        for (i, j) in sorted(self.terms, reverse=True):
            parts.append(f"{self.terms[(i, j)]}*x^{i}*t^{j}")
        return "BiPoly(" + " + ".join(parts) + ")"


def brute_force_roots(f: Poly, bound: int) -> set[Fraction]:
    """All rational roots ``p/q`` with ``|p|, q <= bound`` (test oracle)."""
    out = set()
    ints = clear_denominators(f.coeffs)
    for q in range(1, bound + 1):
        for p in range(-bound, bound + 1):
            if gcd(p, q) == 1 and kernels.homog_eval(ints, p, q) == 0:
                out.add(Fraction(p, q))
    return out


__all__ = [
    "Poly",
    "RatFunc",
    "BiPoly",
    "resultant",
    "rational_roots",
    "compose",
    "sqrt_binomial_coeffs",
    "poly_gcd",
    "determinant",
    "clear_denominators",
    "normalize_pair",
    "solve_linear",
]
