"""Exact rationals, p-adic valuations, heights, S-units and square-root towers over Q.

Rationals are :class:`fractions.Fraction` (always stored in lowest terms, so
structural equality and hashing are exact).  Points of the projective line
are either a ``Fraction`` or the singleton :data:`INF`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

import sympy

from preimdyn import kernels
from preimdyn._quadext import QuadArith
from preimdyn.errors import InvalidPrime

#: Trial-division bound used before handing a cofactor to sympy.
TRIAL_BOUND = 10**6

#: Sentinel returned by :func:`padic_ord` for zero; never an integer.
PLUS_INF = math.inf


class Infinity:
    """The point at infinity of P^1.  Use the :data:`INF` singleton."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __reduce__(self):
        return (Infinity, ())


INF = Infinity()

ProjPoint = Union[Fraction, Infinity]


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("refusing to convert a float to an exact rational")
    return Fraction(x)


def as_point(x) -> ProjPoint:
    if x is INF or isinstance(x, Infinity):
        return INF
    if isinstance(x, str) and x.strip().lower() in ("inf", "infinity", "oo"):
        return INF
    return as_rational(x)


def parse_rational(s: str) -> Fraction:
    return Fraction(s.strip())


def format_point(P: ProjPoint) -> str:
    return "inf" if P is INF else str(P)


def is_prime(p: int) -> bool:
    return isinstance(p, int) and p >= 2 and bool(sympy.isprime(p))


def factorize(n: int, bound: int = TRIAL_BOUND) -> dict[int, int]:
    """Prime factorization of ``|n|`` (``n != 0``).

    Trial division up to ``bound`` runs in the kernel backend; a remaining
    composite cofactor is finished by :func:`sympy.factorint`.
    """
    factors, rest = kernels.trial_factor(n, bound)
    out = dict(factors)
    if rest > 1:
        for p, k in sympy.factorint(rest).items():
            out[int(p)] = out.get(int(p), 0) + k
    return out


def padic_ord(x, p: int):
    """Exponent of the prime ``p`` in ``x``; :data:`PLUS_INF` for ``x = 0``."""
    if not is_prime(p):
        raise InvalidPrime(f"{p!r} is not prime")
    x = as_rational(x)
    if x == 0:
        return PLUS_INF
    return _vp(x.numerator, p) - _vp(x.denominator, p)


def _vp(n: int, p: int) -> int:
    n = abs(n)
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


@dataclass(frozen=True)
class PrimeSet:
    """A finite set of rational primes, optionally with the archimedean place."""

    primes: tuple[int, ...] = ()
    includes_archimedean: bool = True

    def __post_init__(self):
        ps = tuple(sorted(set(int(p) for p in self.primes)))
        for p in ps:
            if not is_prime(p):
                raise InvalidPrime(f"{p!r} is not prime")
        object.__setattr__(self, "primes", ps)

    @classmethod
    def of(cls, primes: Iterable[int] = (), includes_archimedean: bool = True) -> "PrimeSet":
        return cls(tuple(primes), includes_archimedean)

    def __len__(self):
        return len(self.primes) + (1 if self.includes_archimedean else 0)

    def __contains__(self, p):
        return p in self.primes

    def __iter__(self):
        return iter(self.primes)


def denominator_primes(x) -> PrimeSet:
    """Primes at which ``x`` is non-integral; ``len(...primes)`` is s(x)."""
    x = as_rational(x)
    return PrimeSet(tuple(factorize(x.denominator)) if x.denominator > 1 else (), False)


def s_of(x) -> int:
    return len(denominator_primes(x).primes)


def weil_height(P) -> float:
    """Absolute logarithmic height ``log max(|p|, q)``; 0 at infinity."""
    if P is INF:
        return 0.0
    x = as_rational(P)
    return _log_int(max(abs(x.numerator), x.denominator))


def _log_int(n: int) -> float:
    # math.log handles big ints exactly enough; guard the trivial case
    return 0.0 if n <= 1 else math.log(n)


def _strip(n: int, S: PrimeSet) -> int:
    n = abs(n)
    for p in S.primes:
        while n % p == 0:
            n //= p
    return n


def is_s_unit(x, S: PrimeSet) -> bool:
    x = as_rational(x)
    if x == 0:
        return False
    return _strip(x.numerator, S) == 1 and _strip(x.denominator, S) == 1


def is_s_integral(x, S: PrimeSet) -> bool:
    x = as_rational(x)
    return _strip(x.denominator, S) == 1


def rational_sqrt(x) -> Optional[Fraction]:
    """The nonnegative rational square root of ``x`` or ``None``."""
    x = as_rational(x)
    if x < 0:
        return None
    a = kernels.exact_isqrt(x.numerator)
    if a < 0:
        return None
    b = kernels.exact_isqrt(x.denominator)
    if b < 0:
        return None
    return Fraction(a, b)


# --------------------------------------------------------------------------
# square-root towers over Q


class _QQ:
    zero = Fraction(0)
    one = Fraction(1)

    @staticmethod
    def add(a, b):
        return a + b

    @staticmethod
    def sub(a, b):
        return a - b

    @staticmethod
    def neg(a):
        return -a

    @staticmethod
    def mul(a, b):
        return a * b

    @staticmethod
    def inv(a):
        return 1 / a

    @staticmethod
    def is_zero(a):
        return a == 0

    @staticmethod
    def sqrt(a):
        return rational_sqrt(a)


QQ_OPS = _QQ()


class QuadTower:
    """An append-only tower Q(sqrt r_1)(sqrt r_2)...; each node is one level.

    Build with :meth:`QuadTower.rationals` and :meth:`adjoin`.  Elements from
    a node are valid in every node extending it.
    """

    def __init__(self, parent: Optional["QuadTower"], radicand: Optional["TowerScalar"]):
        self.parent = parent
        self.radicand = radicand
        self.level = 0 if parent is None else parent.level + 1
        raws = [] if parent is None else parent.arith.radicands + [radicand.raw]
        self.arith = QuadArith(QQ_OPS, raws)

    _QQ_NODE: "QuadTower" = None  # set below

    @classmethod
    def rationals(cls) -> "QuadTower":
        return cls._QQ_NODE

    def adjoin(self, radicand) -> "QuadTower":
        r = self.coerce(radicand)
        if r.is_zero():
            raise ValueError("cannot adjoin sqrt(0)")
        if scalar_is_square(r) is not None:
            raise ValueError(f"radicand {r} is already a square at level {self.level}")
        return QuadTower(self, r)

    def ancestors(self):
        node = self
        while node is not None:
            yield node
            node = node.parent

    def extends(self, other: "QuadTower") -> bool:
        """True if ``other`` is this node or one of its ancestors."""
        if other.level > self.level:
            return False
        node = self
        while node.level > other.level:
            node = node.parent
        return node is other

    def radicands(self) -> list["TowerScalar"]:
        return [n.radicand for n in reversed(list(self.ancestors())) if n.radicand is not None]

    def coerce(self, x) -> "TowerScalar":
        if isinstance(x, TowerScalar):
            if not self.extends(x.tower):
                raise ValueError("scalar belongs to an incompatible tower")
            return x.lift_to(self)
        return TowerScalar(self, self.arith.from_base(as_rational(x), self.level))

    def degree(self) -> int:
        return 2**self.level

    def __repr__(self):
        return f"QuadTower({[str(r) for r in self.radicands()]})"


QuadTower._QQ_NODE = QuadTower(None, None)


def common_tower(a: QuadTower, b: QuadTower) -> QuadTower:
    if a.extends(b):
        return a
    if b.extends(a):
        return b
    raise ValueError("incompatible towers")


class TowerScalar:
    """An element of a :class:`QuadTower` node (immutable value)."""

    __slots__ = ("tower", "raw")

    def __init__(self, tower: QuadTower, raw):
        self.tower = tower
        self.raw = raw

    @classmethod
    def rational(cls, x) -> "TowerScalar":
        return QuadTower.rationals().coerce(x)

    @property
    def level(self):
        return self.tower.level

    def lift_to(self, tower: QuadTower) -> "TowerScalar":
        if tower is self.tower:
            return self
        return TowerScalar(tower, tower.arith.lift(self.raw, self.level, tower.level))

    def _pair(self, other):
        if isinstance(other, TowerScalar):
            t = common_tower(self.tower, other.tower)
            return t, self.lift_to(t).raw, other.lift_to(t).raw
        if isinstance(other, (int, Fraction)):
            t = self.tower
            return t, self.raw, t.arith.from_base(Fraction(other), t.level)
        return None

    def __add__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        t, a, b = p
        return TowerScalar(t, t.arith.add(a, b, t.level))

    __radd__ = __add__

    def __sub__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        t, a, b = p
        return TowerScalar(t, t.arith.sub(a, b, t.level))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return TowerScalar(self.tower, self.tower.arith.neg(self.raw, self.level))

    def __mul__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        t, a, b = p
        if isinstance(other, (int, Fraction)):
            return TowerScalar(t, t.arith.mul_base(a, Fraction(other), t.level))
        return TowerScalar(t, t.arith.mul(a, b, t.level))

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero tower scalar")
        return TowerScalar(self.tower, self.tower.arith.inv(self.raw, self.level))

    def __truediv__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        t, a, b = p
        if t.arith.is_zero(b, t.level):
            raise ZeroDivisionError("division by zero tower scalar")
        return TowerScalar(t, t.arith.div(a, b, t.level))

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = self.tower.coerce(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def is_zero(self) -> bool:
        return self.tower.arith.is_zero(self.raw, self.level)

    def __bool__(self):
        return not self.is_zero()

    def canonical(self):
        """Raw value trimmed to the lowest level where it lives (for hashing)."""
        raw, level = self.raw, self.level
        ar = self.tower.arith
        while level > 0 and ar.is_zero(raw[1], level - 1):
            raw, level = raw[0], level - 1
        return level, raw

    def as_rational(self) -> Optional[Fraction]:
        level, raw = self.canonical()
        return raw if level == 0 else None

    def __eq__(self, other):
        p = self._pair(other) if isinstance(other, (TowerScalar, int, Fraction)) else None
        if p is None:
            return NotImplemented
        t, a, b = p
        return t.arith.is_zero(t.arith.sub(a, b, t.level), t.level)

    def __hash__(self):
        level, raw = self.canonical()
        return hash(raw) if level == 0 else hash((level, raw))

    def coefficients(self) -> dict[int, Fraction]:
        """Map bitmask of adjoined roots -> rational coefficient (nonzero only)."""
        out = {}

        def walk(raw, level, mask):
            if level == 0:
                if raw != 0:
                    out[mask] = raw
                return
            walk(raw[0], level - 1, mask)
            walk(raw[1], level - 1, mask | (1 << (level - 1)))

        walk(self.raw, self.level, 0)
        return out

    def __float__(self):
        return float(self.to_complex().real)

    def to_complex(self) -> complex:
        """Numeric value using principal square roots of each radicand."""
        roots = []
        for r in self.tower.radicands():
            roots.append(complex(r.to_complex()) ** 0.5)
        total = 0j
        for mask, c in self.coefficients().items():
            term = complex(float(c))
            for i, s in enumerate(roots):
                if mask >> i & 1:
                    term *= s
            total += term
        return total

    def __repr__(self):
        coeffs = self.coefficients()
        if not coeffs:
            return "0"
        parts = []
        for mask in sorted(coeffs):
            c = coeffs[mask]
            if mask == 0:
                parts.append(str(c))
            else:
                roots = "*".join(f"s{i + 1}" for i in range(self.level) if mask >> i & 1)
                parts.append(roots if c == 1 else f"{c}*{roots}")
        return " + ".join(parts)


def scalar_sqrt(x):
    """Square root of a rational or tower scalar, or ``None``; see :func:`scalar_is_square`."""
    if isinstance(x, TowerScalar):
        return scalar_is_square(x)
    return rational_sqrt(x)


def scalar_is_square(x: TowerScalar) -> Optional[TowerScalar]:
    """A root ``r`` with ``r * r == x`` at the same tower level, or ``None``."""
    if not isinstance(x, TowerScalar):
        x = TowerScalar.rational(x)
    raw = x.tower.arith.sqrt(x.raw, x.level)
    if raw is None:
        return None
    return TowerScalar(x.tower, raw)


def scalar_is_zero(x) -> bool:
    return x.is_zero() if isinstance(x, TowerScalar) else x == 0
