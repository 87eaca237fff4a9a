"""Rational self-maps of P^1 over Q: evaluation, iteration, conjugation,
the monic normal form, preperiodicity and canonical heights.

A map is stored as a homogeneous pair (F, G) of degree ``d``.  For rational
coefficients the pair is content-free with integer coefficients, which is
what the height estimates below rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Optional, Union

import mpmath
import sympy

from preimdyn import kernels
from preimdyn.arith import (
    INF,
    QuadTower,
    TowerScalar,
    as_point,
    factorize,
    format_point,
    scalar_is_zero,
    scalar_sqrt,
    weil_height,
)
from preimdyn.errors import DegreeDrop, ExtensionUnsupported
from preimdyn.poly import Poly, RatFunc, compose, normalize_pair, resultant, solve_linear


class RatMap:
    """phi = num/den of degree ``d = max(deg num, deg den)``.

    Build through :func:`new_ratmap`, which certifies the resultant.  The
    plain constructor trusts its input (used for iterates and conjugates).
    """

    __slots__ = ("num", "den", "degree", "__dict__")

    def __init__(self, num: Poly, den: Poly, degree: Optional[int] = None):
        self.num = num
        self.den = den
        self.degree = max(num.degree, den.degree) if degree is None else degree

    @property
    def is_rational(self) -> bool:
        return self.num.is_rational() and self.den.is_rational()

    @cached_property
    def is_integral(self) -> bool:
        """Rational with integer coefficients (true after canonicalization)."""
        return all(
            isinstance(c, Fraction) and c.denominator == 1 for c in self.num.coeffs + self.den.coeffs
        )

    @cached_property
    def _int_coeffs(self):
        d = self.degree
        return (
            [int(self.num.coeff(i)) for i in range(d + 1)],
            [int(self.den.coeff(i)) for i in range(d + 1)],
        )

    def homog(self, p: int, q: int) -> tuple[int, int]:
        """(F(p, q), G(p, q)) for integer p, q."""
        fa, fb = self._int_coeffs
        return kernels.homog_eval(fa, p, q), kernels.homog_eval(fb, p, q)

    def __call__(self, P):
        return evaluate(self, P)

    def __eq__(self, other):
        if not isinstance(other, RatMap):
            return NotImplemented
        return self.degree == other.degree and self.num * other.den == other.num * self.den

    def __hash__(self):
        n, dn = normalize_pair(self.num, self.den) if self.is_rational else (self.num, self.den)
        return hash((n, dn))

    def to_str(self, var: str = "x") -> str:
        if self.den.degree == 0 and self.den.coeffs[0] == 1:
            return self.num.to_str(var)
        return f"({self.num.to_str(var)})/({self.den.to_str(var)})"

    def __repr__(self):
        return f"RatMap({self.to_str()})"


def new_ratmap(num, den=None) -> RatMap:
    """Canonical map from a numerator/denominator (or a :class:`RatFunc`).

    Raises :class:`DegreeDrop` if the pair has degree 0 or a vanishing
    resultant at the declared degree.
    """
    if isinstance(num, RatFunc) and den is None:
        num, den = num.num, num.den
    num = num if isinstance(num, Poly) else Poly([num])
    den = Poly([1]) if den is None else (den if isinstance(den, Poly) else Poly([den]))
    if num.is_zero() and den.is_zero():
        raise DegreeDrop("both numerator and denominator vanish")
    d = max(num.degree, den.degree)
    if d < 1:
        raise DegreeDrop("constant map")
    if resultant(num, den, d, d) == 0:
        raise DegreeDrop("resultant vanishes: common factor or degree collapse")
    if num.is_rational() and den.is_rational():
        num, den = _content_free(num, den)
    return RatMap(num, den, d)


def _content_free(num: Poly, den: Poly):
    from preimdyn.poly import clear_denominators
    from math import gcd

    ints = clear_denominators(list(num.coeffs) + list(den.coeffs))
    g = 0
    for v in ints:
        g = gcd(g, v)
    lead = den.lc if not den.is_zero() else num.lc
    if lead < 0:
        g = -g
    n = len(num.coeffs)
    return Poly([Fraction(v // g) for v in ints[:n]]), Poly([Fraction(v // g) for v in ints[n:]])


def integral_model(phi: RatMap) -> RatMap:
    """The content-free integer pair of a rational map."""
    if phi.is_integral:
        return phi
    if not phi.is_rational:
        raise ValueError("height estimates need rational coefficients")
    num, den = _content_free(phi.num, phi.den)
    return RatMap(num, den, phi.degree)


def evaluate(phi: RatMap, P):
    """phi(P) on P^1; a vanishing denominator maps to :data:`INF`."""
    d = phi.degree
    if P is INF:
        a, b = phi.num.coeff(d), phi.den.coeff(d)
        if scalar_is_zero(b):
            return INF
        return a / b
    if isinstance(P, Fraction) and phi.is_integral:
        F, G = phi.homog(P.numerator, P.denominator)
        if G == 0:
            return INF
        return Fraction(F, G)
    if isinstance(P, int):
        return evaluate(phi, Fraction(P))
    G = phi.den(P)
    if scalar_is_zero(G):
        return INF
    return phi.num(P) / G


def iterate(phi: RatMap, N: int) -> RatMap:
    """phi^N, degree d^N."""
    if N < 1:
        raise ValueError("iterate needs N >= 1")
    out = phi
    for _ in range(N - 1):
        num, den = compose((phi.num, phi.den), (out.num, out.den))
        out = RatMap(num, den, out.degree * phi.degree)
    return out


# --------------------------------------------------------------------------
# Moebius transformations


@dataclass(frozen=True)
class Moebius:
    """x -> (a x + b) / (c x + d)."""

    a: object
    b: object
    c: object
    d: object

    def __post_init__(self):
        if scalar_is_zero(self.a * self.d - self.b * self.c):
            raise ValueError("singular Moebius transformation")

    @classmethod
    def identity(cls) -> "Moebius":
        return cls(Fraction(1), Fraction(0), Fraction(0), Fraction(1))

    @classmethod
    def translation(cls, s) -> "Moebius":
        return cls(Fraction(1), Fraction(s), Fraction(0), Fraction(1))

    def inverse(self) -> "Moebius":
        return Moebius(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other: "Moebius") -> "Moebius":
        """Composition ``self o other``."""
        a, b, c, d = self.a, self.b, self.c, self.d
        e, f, g, h = other.a, other.b, other.c, other.d
        return Moebius(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def __call__(self, P):
        if P is INF:
            return INF if scalar_is_zero(self.c) else self.a / self.c
        den = self.c * P + self.d
        if scalar_is_zero(den):
            return INF
        return (self.a * P + self.b) / den

    def pair(self) -> tuple[Poly, Poly]:
        return Poly([self.b, self.a]), Poly([self.d, self.c])

    def is_identity(self) -> bool:
        return (
            scalar_is_zero(self.b)
            and scalar_is_zero(self.c)
            and scalar_is_zero(self.a - self.d)
        )

    def __repr__(self):
        return f"Moebius(({self.a})x + ({self.b}))/(({self.c})x + ({self.d})))"


def conjugate(phi: RatMap, L: Moebius) -> RatMap:
    """L o phi o L^-1, canonicalized when the coefficients are rational."""
    inner = compose((phi.num, phi.den), L.inverse().pair())
    num, den = compose(L.pair(), inner)
    if num.is_rational() and den.is_rational():
        num, den = _content_free(num, den)
    return RatMap(num, den, phi.degree)


# --------------------------------------------------------------------------
# normal form  phi = (x^d + ... + a_1 x) / (b_{d-1} x^{d-1} + ... + 1)


def is_monic_normal_form(phi: RatMap) -> bool:
    """Numerator monic of degree d with zero constant term, denominator of
    degree < d with constant term 1, up to a common scalar."""
    d = phi.degree
    e0 = phi.den.coeff(0)
    return (
        phi.num.degree == d
        and phi.den.degree < d
        and not scalar_is_zero(e0)
        and scalar_is_zero(phi.num.coeff(0))
        and scalar_is_zero(phi.num.coeff(d) - e0)
    )


@dataclass
class NormalForm:
    L: Moebius
    map: RatMap
    target: object
    tower: QuadTower

    @property
    def extended(self) -> bool:
        return self.tower.level > 0

    def certificate_ok(self, phi: RatMap, a) -> bool:
        """Form check, L(a) off {0, oo} and psi o L == L o phi on sample points."""
        if not is_monic_normal_form(self.map):
            return False
        La = self.L(a)
        if La is INF or scalar_is_zero(La):
            return False
        if La != self.target:
            return False
        for x in (Fraction(2, 7), Fraction(-5, 3), Fraction(11), Fraction(1, 13)):
            lhs = evaluate(self.map, self.L(x))
            rhs = self.L(evaluate(phi, x))
            if (lhs is INF) != (rhs is INF):
                return False
            if lhs is not INF and not scalar_is_zero(lhs - rhs):
                return False
        return True


def _fixed_point_data(phi: RatMap):
    """Rational fixed points and quadratic fixed-point fields."""
    d = phi.degree
    X = sympy.Symbol("X")
    # fixed points are roots of  num(x) - x den(x)  (projectively of degree d+1)
    P = phi.num - Poly.x() * phi.den
    rational = []
    quadratic = []  # (A, B, C) with A x^2 + B x + C irreducible
    if P.degree < d + 1:
        rational.append(INF)
    expr = sum(sympy.Rational(c.numerator, c.denominator) * X**i for i, c in enumerate(P.coeffs))
    _, factors = sympy.factor_list(sympy.Poly(expr, X))
    for fac, _mult in factors:
        cs = [Fraction(int(c.p), int(c.q)) for c in reversed(fac.all_coeffs())]
        if len(cs) == 2:
            rational.append(-cs[0] / cs[1])
        elif len(cs) == 3:
            quadratic.append((cs[2], cs[1], cs[0]))
    return rational, quadratic


def _height_key(P) -> tuple:
    return (weil_height(P) if P is not INF else -1.0, str(P))


def _root_of_unity_free_nth_root(c: Fraction, m: int) -> Optional[Fraction]:
    if m == 1:
        return c
    if c < 0 and m % 2 == 0:
        return None
    sign = -1 if c < 0 else 1
    n, ok1 = sympy.integer_nthroot(abs(c.numerator), m)
    q, ok2 = sympy.integer_nthroot(c.denominator, m)
    if ok1 and ok2:
        return sign * Fraction(int(n), int(q))
    return None


def _scale_root(c, d: int, tower: QuadTower):
    """lambda with lambda^(d-1) = c, adjoining square roots as needed."""
    k = d - 1
    twos = 0
    while k % 2 == 0:
        k //= 2
        twos += 1
    val = c
    if k > 1:
        if isinstance(val, TowerScalar):
            r = val.as_rational()
            if r is None:
                raise ExtensionUnsupported(f"odd root of a non-rational leading coefficient (d={d})")
            val = r
        root = _root_of_unity_free_nth_root(Fraction(val), k)
        if root is None:
            raise ExtensionUnsupported(f"{k}-th root of {val} is not rational (d={d})")
        val = root
    for _ in range(twos):
        v = tower.coerce(val)
        r = scalar_sqrt(v)
        if r is None:
            tower = tower.adjoin(v)
            r = scalar_sqrt(tower.coerce(v))
        val = r
    if isinstance(val, TowerScalar):
        r = val.as_rational()
        if r is not None and tower.level == 0:
            val = r
    return val, tower


def to_normal_form(phi: RatMap, a) -> NormalForm:
    """Conjugate phi to the monic form with L(a) not in {0, oo}.

    Two distinct fixed points p, q (neither equal to ``a``) are moved to 0 and
    oo; rational fixed points are preferred over quadratic ones, then the
    point at infinity as the oo-target, then smaller height.
    """
    a = as_point(a)
    d = phi.degree
    if d < 2:
        raise ValueError("normal form needs degree >= 2")
    rational, quadratic = _fixed_point_data(phi)
    Q = QuadTower.rationals()

    candidates = []
    rat = sorted((P for P in rational if P != a), key=_height_key)
    for q in rat:
        for p in rat:
            if p != q:
                candidates.append((0, q is not INF, _height_key(q), _height_key(p), p, q, Q))
    # quadratic fixed points: conjugate pair, or one of them with a rational partner
    for A, B, C in quadratic:
        disc = B * B - 4 * A * C
        tw = Q.adjoin(Fraction(disc))
        s = scalar_sqrt(tw.coerce(disc))
        r1 = (tw.coerce(-B) + s) / (2 * A)
        r2 = (tw.coerce(-B) - s) / (2 * A)
        h = (float(abs(disc)), str(disc))
        candidates.append((2, True, h, h, r1, r2, tw))
        for q in rat:
            candidates.append((1, q is not INF, _height_key(q), h, r1, q, tw))
    if not candidates:
        raise ExtensionUnsupported("no pair of fixed points over a quadratic extension avoids a")
    candidates.sort(key=lambda c: c[:4])
    _, _, _, _, p, q, tower = candidates[0]

    if q is INF:
        L = Moebius(Fraction(1), -p, Fraction(0), Fraction(1))
    elif p is INF:
        L = Moebius(Fraction(0), Fraction(1), Fraction(1), -q)
    else:
        L = Moebius(Fraction(1), -p, Fraction(1), -q)
    if tower.level:
        L = Moebius(*(tower.coerce(v) for v in (L.a, L.b, L.c, L.d)))
    psi0 = conjugate(phi, L)
    e0 = psi0.den.coeff(0)
    num = psi0.num.scale(1 / e0)
    den = psi0.den.scale(1 / e0)
    lam, tower = _scale_root(num.coeff(d), d, tower)
    inv = 1 / lam
    num = Poly([c * inv ** (i - 1) for i, c in enumerate(num.coeffs)])
    den = Poly([c * inv**i for i, c in enumerate(den.coeffs)])
    if tower.level:
        L = Moebius(*(tower.coerce(v) for v in (L.a, L.b, L.c, L.d)))
        lam = tower.coerce(lam)
    M = Moebius(lam, lam * 0, lam * 0, lam * 0 + 1)  # x -> lam x
    LL = M @ L
    return NormalForm(LL, RatMap(num, den, d), LL(a), tower)


# --------------------------------------------------------------------------
# heights


def _homog_forms(phi: RatMap):
    d = phi.degree
    return [phi.num.coeff(i) for i in range(d + 1)], [phi.den.coeff(i) for i in range(d + 1)]


def nullstellensatz_forms(phi: RatMap):
    """Forms G1..G4 of degree d-1 with G1 F + G2 G = R X^(2d-1) and
    G3 F + G4 G = R Z^(2d-1), R the resultant at degree (d, d).

    Returned as coefficient lists indexed by the power of X, plus R.
    """
    d = phi.degree
    fa, fb = _homog_forms(phi)
    R = resultant(phi.num, phi.den, d, d)
    n = 2 * d
    # unknowns: g1_0..g1_{d-1}, g2_0..g2_{d-1}; equation k: coefficient of X^k, k = 0..2d-1
    rows = []
    for k in range(n):
        row = []
        for j in range(d):
            row.append(fa[k - j] if 0 <= k - j <= d else Fraction(0))
        for j in range(d):
            row.append(fb[k - j] if 0 <= k - j <= d else Fraction(0))
        rows.append(row)
    top = [Fraction(0)] * n
    top[n - 1] = R
    bot = [Fraction(0)] * n
    bot[0] = R
    s1 = solve_linear(rows, top)
    s2 = solve_linear(rows, bot)
    return (s1[:d], s1[d:], s2[:d], s2[d:]), R


def distortion_constant(phi: RatMap) -> float:
    """C with |h(phi(Q)) - d h(Q)| <= C for all Q in P^1(Q).

    Upper side: log max(sum|a_i|, sum|b_i|) for the content-free integer pair.
    Lower side: log Gamma, Gamma = max(sum|G1|+sum|G2|, sum|G3|+sum|G4|) from
    :func:`nullstellensatz_forms`; the gcd of (F, G) at a primitive point
    divides R, and the archimedean loss is at most Gamma/|R|, so the two
    log|R| terms cancel.
    """
    phi = integral_model(phi)
    if "_C" in phi.__dict__:
        return phi.__dict__["_C"]
    fa, fb = _homog_forms(phi)
    A = max(sum(abs(c) for c in fa), sum(abs(c) for c in fb))
    (g1, g2, g3, g4), _R = nullstellensatz_forms(phi)
    gam = max(sum(abs(c) for c in g1) + sum(abs(c) for c in g2), sum(abs(c) for c in g3) + sum(abs(c) for c in g4))
    C = max(_log_frac(A), _log_frac(gam), 0.0)
    phi.__dict__["_C"] = C
    return C


def _log_frac(x) -> float:
    x = Fraction(x)
    if x <= 0:
        return 0.0
    return math.log(x.numerator) - math.log(x.denominator)


@dataclass(frozen=True)
class Preperiodic:
    tail: int
    cycle_length: int


@dataclass(frozen=True)
class Wandering:
    escape_index: int


@dataclass
class OrbitResult:
    verdict: Union[Preperiodic, Wandering]
    orbit_prefix: list = field(default_factory=list)

    @property
    def preperiodic(self) -> bool:
        return isinstance(self.verdict, Preperiodic)

    def describe(self) -> str:
        pts = ", ".join(format_point(P) for P in self.orbit_prefix)
        v = self.verdict
        if isinstance(v, Preperiodic):
            return f"preperiodic tail={v.tail} cycle={v.cycle_length}: {pts}"
        return f"wandering (escaped at index {v.escape_index}): {pts}"


def escape_height(phi: RatMap) -> float:
    return distortion_constant(phi) / (phi.degree - 1) + 1.0


def is_preperiodic(phi: RatMap, P) -> OrbitResult:
    """Iterate until an exact repeat or the height passes C/(d-1) + 1."""
    if phi.degree < 2:
        raise ValueError("preperiodicity needs degree >= 2")
    P = as_point(P)
    bound = escape_height(phi)
    seen = {}
    orbit = []
    while True:
        if P in seen:
            j = seen[P]
            return OrbitResult(Preperiodic(j, len(orbit) - j), orbit + [P])
        if weil_height(P) > bound:
            return OrbitResult(Wandering(len(orbit)), orbit + [P])
        seen[P] = len(orbit)
        orbit.append(P)
        P = evaluate(phi, P)


@dataclass(frozen=True)
class HeightInterval:
    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return (self.lo + self.hi) / 2

    def __contains__(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def scale(self, k: float) -> "HeightInterval":
        return HeightInterval(self.lo * k, self.hi * k)

    def overlaps(self, other: "HeightInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi


def canonical_height(phi: RatMap, P, eps: float = 1e-9) -> HeightInterval:
    """An interval of width <= eps containing the canonical height of P.

    Uses h_hat(P) = h(P) + sum_n eps_n / d^(n+1) with
    eps_n = h(phi(P_n)) - d h(P_n), |eps_n| <= C.  Each eps_n splits into an
    archimedean part read off the real direction of P_n (tracked in mpmath)
    and the log of the gcd cancelled at the primes dividing the resultant
    (tracked p-adically), so no huge integers are formed.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    P = as_point(P)
    phi = integral_model(phi)
    orb = is_preperiodic(phi, P)
    if orb.preperiodic:
        return HeightInterval(0.0, 0.0)
    d = phi.degree
    C = distortion_constant(phi)
    pad = min(1e-12, eps / 8)
    n_terms = 0
    while C / (d**n_terms * (d - 1)) > eps / 4:
        n_terms += 1
    h0 = weil_height(P)
    if n_terms == 0:
        return HeightInterval(max(0.0, h0 - pad), h0 + pad)

    if P is INF:
        x, y = 1, 0
    else:
        x, y = P.numerator, P.denominator
    fa, fb = phi._int_coeffs
    R = int(resultant(phi.num, phi.den, d, d))
    bad = factorize(R) if abs(R) > 1 else {}
    A = max(sum(map(abs, fa)), sum(map(abs, fb)), 2)
    bits = 64 + n_terms * (8 + math.ceil(math.log2(d * A)) + math.ceil(C / math.log(2)))
    padic = {}
    for p, vR in bad.items():
        k = vR * (n_terms + 1) + 1
        mod = p**k
        padic[p] = [x % mod, y % mod, k]

    total = mpmath.mpf(0)
    with mpmath.workprec(bits):
        xs, ys = mpmath.mpf(x), mpmath.mpf(y)
        m = max(abs(xs), abs(ys))
        xs, ys = xs / m, ys / m
        for n in range(n_terms):
            X = _homog_mp(fa, xs, ys)
            Y = _homog_mp(fb, xs, ys)
            m = max(abs(X), abs(Y))
            a_n = mpmath.log(m)
            xs, ys = X / m, Y / m
            # p-adic gcd cancellation
            vals = {}
            for p, (px, py, k) in padic.items():
                mod = p**k
                Xp = kernels.homog_eval(fa, px, py) % mod
                Yp = kernels.homog_eval(fb, px, py) % mod
                v = min(_vp_capped(Xp, p, k), _vp_capped(Yp, p, k))
                vals[p] = (Xp, Yp, v, k)
            log_g = sum(v * math.log(p) for p, (_, _, v, _) in vals.items())
            for p, (Xp, Yp, v, k) in vals.items():
                k2 = k - v
                mod2 = p**k2
                unit = 1
                for p2, (_, _, v2, _) in vals.items():
                    if p2 != p:
                        unit *= p2**v2
                uinv = pow(unit, -1, mod2) if mod2 > 1 else 0
                pv = p**v
                padic[p] = [(Xp // pv) * uinv % mod2, (Yp // pv) * uinv % mod2, k2]
            total += (a_n - log_g) / mpmath.mpf(d) ** (n + 1)
        est = h0 + float(total)
    tail = C / (d**n_terms * (d - 1))
    return HeightInterval(max(0.0, est - tail - pad), est + tail + pad)


def _homog_mp(coeffs, x, y):
    """sum c_i x^i y^(d-i) in mpmath."""
    d = len(coeffs) - 1
    yp = [mpmath.mpf(1)]
    for _ in range(d):
        yp.append(yp[-1] * y)
    acc = mpmath.mpf(0)
    xp = mpmath.mpf(1)
    for i in range(d + 1):
        if coeffs[i]:
            acc += coeffs[i] * xp * yp[d - i]
        xp *= x
    return acc


def _vp_capped(n: int, p: int, k: int) -> int:
    if n == 0:
        return k
    v = 0
    while n % p == 0 and v < k:
        n //= p
        v += 1
    return v


__all__ = [
    "RatMap",
    "new_ratmap",
    "evaluate",
    "iterate",
    "Moebius",
    "conjugate",
    "to_normal_form",
    "NormalForm",
    "is_monic_normal_form",
    "is_preperiodic",
    "OrbitResult",
    "Preperiodic",
    "Wandering",
    "canonical_height",
    "HeightInterval",
    "distortion_constant",
    "nullstellensatz_forms",
]
