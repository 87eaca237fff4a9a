"""Quadratic towers over K'(t), K' itself a square-root tower over Q.

Level-0 elements are :class:`~preimdyn.poly.RatFunc` in t whose
coefficients are rationals or :class:`~preimdyn.arith.TowerScalar`.  Square
roots are decided over an algebraic closure of the constants: a non-square
leading constant is adjoined to K' on the fly, and the enlarged K' is kept
only when the whole root succeeds.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from preimdyn._quadext import QuadArith
from preimdyn.arith import QuadTower, TowerScalar, scalar_is_zero, scalar_sqrt
from preimdyn.errors import ZeroElement
from preimdyn.poly import Poly, RatFunc

_ZERO = RatFunc(Poly())
_ONE = RatFunc(Poly([1]))


def poly_sqrt_monic(p: Poly) -> Optional[Poly]:
    """Monic h with h*h == p for monic p, else None."""
    if p.is_zero():
        return Poly()
    n = p.degree
    if n % 2:
        return None
    m = n // 2
    # reversed series: P(s) = s^n p(1/s) = 1 + c_{n-1} s + ...
    rev = [p.coeff(n - k) for k in range(n + 1)]
    r = [Fraction(1)]
    for k in range(1, m + 1):
        acc = rev[k]
        for i in range(1, k):
            acc = acc - r[i] * r[k - i]
        r.append(acc / 2)
    h = Poly([r[m - i] for i in range(m + 1)])
    return h if h * h == p else None


class _FuncOps:
    """Base-field protocol for QuadArith; ``ctower`` may grow during sqrt."""

    zero = _ZERO
    one = _ONE

    def __init__(self, ctower: QuadTower):
        self.ctower = ctower

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
        return a.inverse()

    @staticmethod
    def is_zero(a):
        return a.is_zero()

    def sqrt(self, f: RatFunc):
        if f.is_zero():
            return f
        p = f.num * f.den
        if p.degree % 2:
            return None
        lc = p.lc
        h = poly_sqrt_monic(p.scale(1 / lc))
        if h is None:
            return None
        c = self.ctower.coerce(lc)
        s = scalar_sqrt(c)
        if s is None:
            self.ctower = self.ctower.adjoin(c)
            s = scalar_sqrt(self.ctower.coerce(c))
        s = _demote(s)
        return RatFunc(h.scale(s), f.den)


def _demote(x):
    if isinstance(x, TowerScalar):
        r = x.as_rational()
        if r is not None:
            return r
    return x


class FunctionTower:
    """K'(t)(y_1, ..., y_k) with y_i^2 = radicands[i-1]."""

    __slots__ = ("radicands", "ctower", "arith")

    def __init__(self, radicands=(), ctower: QuadTower | None = None):
        self.radicands = tuple(radicands)
        self.ctower = ctower or QuadTower.rationals()
        self.arith = QuadArith(_FuncOps(self.ctower), self.radicands)

    @property
    def level(self) -> int:
        return len(self.radicands)

    @property
    def degree(self) -> int:
        return 2 ** self.level

    def adjoin(self, g_raw) -> "FunctionTower":
        return FunctionTower(self.radicands + (g_raw,), self.ctower)

    def with_constants(self, ctower: QuadTower) -> "FunctionTower":
        return FunctionTower(self.radicands, ctower)

    def element(self, raw, level: Optional[int] = None) -> "TowerElement":
        level = self.level if level is None else level
        return TowerElement(self, self.arith.lift(raw, level, self.level))

    def const(self, f) -> "TowerElement":
        return TowerElement(self, self.arith.from_base(RatFunc.lift(f), self.level))

    def gen(self, i: int) -> "TowerElement":
        """The generator y_i (1-based) of this tower."""
        raw = self.arith.one(0)
        raw = self.arith.lift(raw, 0, i - 1)
        raw = (self.arith.zero(i - 1), raw)
        return TowerElement(self, self.arith.lift(raw, i, self.level))

    def sqrt(self, raw):
        """(root_raw, ctower) or None; the root lives in ``with_constants(ctower)``."""
        ops = _FuncOps(self.ctower)
        ar = QuadArith(ops, self.radicands)
        r = ar.sqrt(raw, self.level)
        if r is None:
            return None
        return r, ops.ctower

    def __repr__(self):
        return f"FunctionTower(level={self.level}, constants={self.ctower})"


class TowerElement:
    """Value in a :class:`FunctionTower` (nested pairs over RatFunc)."""

    __slots__ = ("field", "raw")

    def __init__(self, field: FunctionTower, raw):
        self.field = field
        self.raw = raw

    @property
    def level(self) -> int:
        return self.field.level

    def _other(self, o):
        if isinstance(o, TowerElement):
            if o.field.level > self.field.level:
                raise ValueError("element from a larger tower")
            return self.field.arith.lift(o.raw, o.field.level, self.level)
        return self.field.arith.from_base(RatFunc.lift(o), self.level)

    def lift_to(self, field: FunctionTower) -> "TowerElement":
        return TowerElement(field, field.arith.lift(self.raw, self.level, field.level))

    def __add__(self, o):
        return TowerElement(self.field, self.field.arith.add(self.raw, self._other(o), self.level))

    __radd__ = __add__

    def __sub__(self, o):
        return TowerElement(self.field, self.field.arith.sub(self.raw, self._other(o), self.level))

    def __rsub__(self, o):
        return TowerElement(self.field, self.field.arith.sub(self._other(o), self.raw, self.level))

    def __neg__(self):
        return TowerElement(self.field, self.field.arith.neg(self.raw, self.level))

    def __mul__(self, o):
        return TowerElement(self.field, self.field.arith.mul(self.raw, self._other(o), self.level))

    __rmul__ = __mul__

    def __truediv__(self, o):
        ob = self._other(o)
        if self.field.arith.is_zero(ob, self.level):
            raise ZeroDivisionError("division by zero in function tower")
        return TowerElement(self.field, self.field.arith.div(self.raw, ob, self.level))

    def __pow__(self, n: int):
        out = self.field.element(self.field.arith.one(self.level))
        for _ in range(n):
            out = out * self
        return out

    def is_zero(self) -> bool:
        return self.field.arith.is_zero(self.raw, self.level)

    def __eq__(self, o):
        if isinstance(o, (TowerElement, RatFunc, Poly, int, Fraction)):
            return (self - o).is_zero()
        return NotImplemented

    def __hash__(self):
        return hash(self.level)

    def conj(self, i: int) -> "TowerElement":
        """Apply y_i -> -y_i."""
        ar = self.field.arith

        def walk(raw, level):
            if level < i:
                return raw
            lo, hi = raw
            if level == i:
                return (lo, ar.neg(hi, level - 1))
            return (walk(lo, level - 1), walk(hi, level - 1))

        return TowerElement(self.field, walk(self.raw, self.level))

    def terms(self) -> list[tuple[int, RatFunc]]:
        """[(mask, coefficient)] with mask bit i-1 for y_i; nonzero terms only."""
        out = []

        def walk(raw, level, mask):
            if level == 0:
                if not raw.is_zero():
                    out.append((mask, raw))
                return
            walk(raw[0], level - 1, mask)
            walk(raw[1], level - 1, mask | (1 << (level - 1)))

        walk(self.raw, self.level, 0)
        return sorted(out, key=lambda mc: mc[0])

    def as_base(self) -> Optional[RatFunc]:
        ts = self.terms()
        if not ts:
            return _ZERO
        if len(ts) == 1 and ts[0][0] == 0:
            return ts[0][1]
        return None

    def __repr__(self):
        parts = []
        for mask, c in self.terms():
            gens = "*".join(f"y{i + 1}" for i in range(self.level) if mask >> i & 1)
            parts.append(f"({_rf_str(c)})" + (f"*{gens}" if gens else ""))
        return " + ".join(parts) or "0"


def _rf_str(f: RatFunc) -> str:
    if f.is_poly():
        return f.num.to_str("t")
    return f"({f.num.to_str('t')})/({f.den.to_str('t')})"


def tower_is_square(g: TowerElement) -> Optional[TowerElement]:
    """A certified root of ``g`` (over a possibly enlarged constant field) or None.

    Raises :class:`ZeroElement` for ``g = 0``.
    """
    if g.is_zero():
        raise ZeroElement("squareness of the zero element")
    res = g.field.sqrt(g.raw)
    if res is None:
        return None
    raw, ctower = res
    field = g.field.with_constants(ctower)
    root = TowerElement(field, raw)
    if not (root * root - g.lift_to(field)).is_zero():
        raise AssertionError("square-root certificate failed")
    return root


def char_poly(x: TowerElement) -> list[RatFunc]:
    """Coefficients (low first) of prod over sign changes of (X - sigma(x))."""
    ar = x.field.arith
    level = x.level
    P = [ar.neg(x.raw, level), ar.one(level)]
    for lv in range(level, 0, -1):
        # P has coefficients at level lv; multiply by its y_lv-conjugate
        Q = [ar.conj(c, lv) for c in P]
        prod = [ar.zero(lv)] * (len(P) + len(Q) - 1)
        for i, a in enumerate(P):
            if ar.is_zero(a, lv):
                continue
            for j, b in enumerate(Q):
                prod[i + j] = ar.add(prod[i + j], ar.mul(a, b, lv), lv)
        for c in prod:
            if not ar.is_zero(c[1], lv - 1):
                raise AssertionError("norm coefficient escaped the subfield")
        P = [c[0] for c in prod]
    return P
