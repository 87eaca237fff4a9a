"""Preimage curves of one-parameter quadratic families.

Two kinds of family are supported::

    PolyQuad   phi_t(x) = x^2 + b(t) x + c(t)
    RatQuad    phi_t(x) = (x^2 + b(t) x) / (c(t) x + 1)

with target a(t).  The curve of level N is ``phi_t^N(x) = a(t)``.  Its
components are found by walking the quadratic tower
``x_0 = a, phi_t(x_i) = x_{i-1}``: each level either splits (the discriminant
is a square, two branches) or adjoins a new square root.  Squareness is
decided geometrically, i.e. over an algebraic closure of Q; constants that
have to be adjoined are tracked in the component's constant field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from preimdyn._functower import FunctionTower, TowerElement, char_poly, tower_is_square
from preimdyn.arith import INF, QuadTower, TowerScalar, as_point, as_rational
from preimdyn.dynamics import new_ratmap
from preimdyn.errors import CapExceeded, HypothesisViolated, InvariantFailure
from preimdyn.poly import BiPoly, Poly, RatFunc

POLY_QUAD = "PolyQuad"
RAT_QUAD = "RatQuad"


def _as_tpoly(p) -> Poly:
    if isinstance(p, Poly):
        return p
    if isinstance(p, (list, tuple)):
        return Poly(p)
    return Poly.const(p)


@dataclass(frozen=True)
class QuadFamily:
    """A quadratic family with target ``a``; ``a, b, c`` are polynomials in t."""

    kind: str
    a: Poly
    b: Poly
    c: Poly
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        if self.kind not in (POLY_QUAD, RAT_QUAD):
            raise ValueError(f"unknown family kind {self.kind!r}")
        for name in "abc":
            object.__setattr__(self, name, _as_tpoly(getattr(self, name)))
        if self.check:
            problem = self.hypothesis_problem()
            if problem:
                raise HypothesisViolated(problem)

    @classmethod
    def poly(cls, b, c, a=0, check=True) -> "QuadFamily":
        return cls(POLY_QUAD, _as_tpoly(a), _as_tpoly(b), _as_tpoly(c), check)

    @classmethod
    def rat(cls, b, c, a=0, check=True) -> "QuadFamily":
        return cls(RAT_QUAD, _as_tpoly(a), _as_tpoly(b), _as_tpoly(c), check)

    def hypothesis_problem(self) -> Optional[str]:
        a, b, c = self.a, self.b, self.c
        if self.kind == POLY_QUAD:
            if (b * b - c.scale(4) - b.scale(2)).is_constant():
                return (
                    "b^2 - 4c - 2b is constant, so every phi_t is conjugate by a "
                    "t-dependent translation to one fixed map; such families have "
                    "unbounded rational preimage counts (x^2 + 2tx + t^2 - t is the "
                    "map x^2 moved by x -> x + t)"
                )
            return None
        if (b * c).is_constant():
            return "b*c must be nonconstant"
        if c.is_constant() and not a.is_constant():
            return "when c is constant the target a must be constant too"
        return None

    @property
    def hypotheses_ok(self) -> bool:
        return self.hypothesis_problem() is None

    def at(self, t0):
        """(a, b, c) evaluated at ``t0``."""
        t0 = as_rational(t0)
        return self.a(t0), self.b(t0), self.c(t0)

    def map_at(self, t0):
        """The specialized map as a :class:`~preimdyn.dynamics.RatMap`."""
        _, b, c = self.at(t0)
        if self.kind == POLY_QUAD:
            return new_ratmap(Poly([c, b, 1]), Poly([1]))
        return new_ratmap(Poly([0, b, 1]), Poly([1, c]))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "a": [str(x) for x in self.a.coeffs],
            "b": [str(x) for x in self.b.coeffs],
            "c": [str(x) for x in self.c.coeffs],
        }

    @classmethod
    def from_dict(cls, d: dict, check=True) -> "QuadFamily":
        def P(v):
            return Poly([Fraction(x) for x in v])

        return cls(d["kind"], P(d["a"]), P(d["b"]), P(d["c"]), check)

    def __str__(self):
        b, c = self.b.to_str("t"), self.c.to_str("t")
        if self.kind == POLY_QUAD:
            body = f"x^2 + ({b})x + ({c})"
        else:
            body = f"(x^2 + ({b})x)/(({c})x + 1)"
        return f"{self.kind}[{body}, a = {self.a.to_str('t')}]"


# --------------------------------------------------------------------------
# defining polynomial and the map delta


def preimage_curve_poly(fam: QuadFamily, N: int) -> BiPoly:
    """F_N(x, t): numerator of phi_t^N(x) - a(t) built homogeneously."""
    if N < 1:
        raise ValueError("N must be >= 1")
    B, C = BiPoly.from_t_poly(fam.b), BiPoly.from_t_poly(fam.c)
    X, Z = BiPoly.x(), BiPoly.const(1)
    for _ in range(N):
        if fam.kind == POLY_QUAD:
            X, Z = X * X + B * X * Z + C * Z * Z, Z * Z
        else:
            X, Z = X * X + B * X * Z, C * X * Z + Z * Z
    return X - BiPoly.from_t_poly(fam.a) * Z


def delta_map(fam: QuadFamily, P):
    """(x, t) -> (phi_t(x), t); a vanishing denominator sends x to infinity."""
    x, t = P
    x = as_point(x)
    t = as_rational(t)
    _, b, c = fam.at(t)
    if x is INF:
        return INF, t
    if fam.kind == POLY_QUAD:
        return x * x + b * x + c, t
    den = c * x + 1
    if den == 0:
        return INF, t
    return (x * x + b * x) / den, t


def specialize(fam: QuadFamily, N: int, t0) -> Poly:
    """F_N(x, t0); the map at ``t0`` must keep degree 2."""
    t0 = as_rational(t0)
    _, b, c = fam.at(t0)
    if fam.kind == RAT_QUAD and b * c == 1:
        raise HypothesisViolated(f"b(t0) c(t0) = 1 at t0 = {t0}")
    fam.map_at(t0)  # raises DegreeDrop
    return preimage_curve_poly(fam, N).specialize_t(t0)


# --------------------------------------------------------------------------
# components


@dataclass
class LevelStep:
    """One level of the tower walk.

    ``kind`` is ``"+"``/``"-"`` for a split (root sign), ``"e"`` for a new
    square root and ``"d"`` for a vanishing discriminant (double branch).
    """

    kind: str
    g: TowerElement
    root: Optional[TowerElement] = None

    @property
    def split(self) -> bool:
        return self.kind in "+-d"


@dataclass(eq=False)
class Component:
    family: QuadFamily
    steps: list
    field: FunctionTower
    xs: list  # x_0 .. x_N, each a TowerElement of the field current at its level
    multiplicity: int = 1

    @property
    def level(self) -> int:
        return len(self.steps)

    @property
    def deg_x(self) -> int:
        return self.field.degree

    @property
    def x(self) -> TowerElement:
        return self.xs[-1].lift_to(self.field)

    @property
    def relations(self) -> list:
        return [s.g for s in self.steps if s.kind == "e"]

    @property
    def split_choices(self) -> list:
        return [(s.kind, s.root) for s in self.steps if s.split]

    @property
    def signature(self) -> str:
        return "".join(s.kind for s in self.steps)

    @property
    def component_id(self) -> str:
        return f"N{self.level}:{self.signature}"

    @property
    def constants(self) -> QuadTower:
        return self.field.ctower

    @property
    def over_rationals(self) -> bool:
        return self.field.ctower.degree() == 1

    @property
    def is_zero_chain(self) -> bool:
        """The line x = 0, which reproduces itself at every level."""
        return self.x.is_zero()

    def degree_factors(self) -> list[int]:
        """deg of each delta step: 1 at split levels, 2 at extensions."""
        return [2 if s.kind == "e" else 1 for s in self.steps]

    def min_poly(self) -> list[RatFunc]:
        """Monic minimal polynomial of x_N over K'(t), low coefficient first."""
        mp = getattr(self, "_mp", None)
        if mp is None:
            mp = char_poly(self.x)
            self._mp = mp
        return mp

    def curve_key(self) -> tuple:
        """Hashable identity of the curve in the (x, t)-plane."""
        return tuple(_ratfunc_key(c) for c in self.min_poly())

    def curve_poly(self) -> BiPoly:
        """The minimal polynomial with denominators cleared (K' coefficients)."""
        mp = self.min_poly()
        den = Poly([1])
        for c in mp:
            den = _lcm(den, c.den)
        out = BiPoly()
        for i, c in enumerate(mp):
            q = c.num * den.exact_div(c.den)
            for j, v in enumerate(q.coeffs):
                if v != 0:
                    out = out + BiPoly({(i, j): v})
        return out

    def specialize_min_poly(self, t0) -> Optional[list]:
        """Coefficients of the minimal polynomial at ``t0`` (None at a pole)."""
        t0 = as_rational(t0)
        out = []
        for c in self.min_poly():
            dv = c.den(t0)
            if dv == 0:
                return None
            out.append(c.num(t0) / dv)
        return out

    def __repr__(self):
        return (
            f"Component({self.component_id}, deg_x={self.deg_x}, x_N={self.x!r}"
            + (f", mult={self.multiplicity}" if self.multiplicity > 1 else "")
            + ")"
        )


def _lcm(p: Poly, q: Poly) -> Poly:
    from preimdyn.poly import poly_gcd

    g = poly_gcd(p, q)
    return (p * q).exact_div(g).monic()


def _scalar_key(c):
    if isinstance(c, TowerScalar):
        r = c.as_rational()
        if r is not None:
            return ("q", r)
        level, raw = c.canonical()
        sub = TowerScalar(_nth_tower(c.tower, level), raw)
        return ("k", tuple(_scalar_key(r) for r in sub.tower.radicands()), tuple(sorted(sub.coefficients().items())))
    return ("q", Fraction(c))


def _nth_tower(tw: QuadTower, level: int) -> QuadTower:
    while tw.level > level:
        tw = tw.parent
    return tw


def _ratfunc_key(f: RatFunc) -> tuple:
    return (tuple(_scalar_key(c) for c in f.num.coeffs), tuple(_scalar_key(c) for c in f.den.coeffs))


def _relation(fam: QuadFamily, field: FunctionTower, x_prev: TowerElement):
    """(g, beta) with x = (-beta + y)/2 and y^2 = g."""
    x_prev = x_prev.lift_to(field)
    B = RatFunc(fam.b)
    if fam.kind == POLY_QUAD:
        beta = field.const(B)
        g = beta * beta - RatFunc(fam.c.scale(4)) + x_prev * 4
    else:
        beta = x_prev * (-RatFunc(fam.c)) + B
        g = beta * beta + x_prev * 4
    return g, beta


def _root_component(fam: QuadFamily) -> Component:
    F = FunctionTower()
    return Component(fam, [], F, [F.const(RatFunc(fam.a))])


def children(comp: Component) -> list[Component]:
    """The components one level above ``comp`` ('+' before '-')."""
    fam, F = comp.family, comp.field
    g, beta = _relation(fam, F, comp.xs[-1])
    if g.is_zero():
        x = -beta / 2
        return [Component(fam, comp.steps + [LevelStep("d", g, g)], F, comp.xs + [x], comp.multiplicity * 2)]
    r = tower_is_square(g)
    if r is not None:
        F2 = r.field
        beta2 = beta.lift_to(F2)
        out = []
        for sign in "+-":
            y = r if sign == "+" else -r
            x = (y - beta2) / 2
            steps = comp.steps + [LevelStep(sign, g, y)]
            out.append(Component(fam, steps, F2, comp.xs + [x], comp.multiplicity))
        return out
    F2 = F.adjoin(g.raw)
    x = (F2.gen(F2.level) - beta.lift_to(F2)) / 2
    return [Component(fam, comp.steps + [LevelStep("e", g)], F2, comp.xs + [x], comp.multiplicity)]


def components(fam: QuadFamily, N: int) -> list[Component]:
    """All components of the level-N preimage curve (with multiplicity)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    level = [_root_component(fam)]
    for _ in range(N):
        level = [ch for comp in level for ch in children(comp)]
    total = sum(c.deg_x * c.multiplicity for c in level)
    if total != 2**N:
        raise InvariantFailure(f"component degrees sum to {total}, expected {2 ** N}")
    return level


@dataclass
class StableSet:
    components: list
    level: int  # first level M at which nothing new appeared

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)


def enumerate_until_stable(fam: QuadFamily, delta: int, cap: int = 12) -> StableSet:
    """Distinct component curves of x-degree <= delta over all levels.

    Components with deg_x > delta or whose curve was already seen are not
    expanded further: their descendants are either too large or repeats.
    """
    found: dict = {}
    frontier = [_root_component(fam)]
    for N in range(1, cap + 1):
        new = []
        for comp in frontier:
            for ch in children(comp):
                if ch.deg_x > delta:
                    continue
                key = ch.curve_key()
                if key in found:
                    continue
                found[key] = ch
                new.append(ch)
        if not new:
            return StableSet(list(found.values()), N)
        frontier = new
    raise CapExceeded(f"no stabilization within {cap} levels", partial=list(found.values()))


def degree_multiset_refines(parts: list[int], wholes: list[int]) -> bool:
    """Can ``parts`` be grouped into bins with sums exactly ``wholes``?"""
    parts = sorted(parts, reverse=True)
    if sum(parts) != sum(wholes):
        return False
    bins = sorted(wholes, reverse=True)

    def place(i, free):
        if i == len(parts):
            return True
        seen = set()
        for j, f in enumerate(free):
            if f >= parts[i] and f not in seen:
                seen.add(f)
                free[j] -= parts[i]
                if place(i + 1, free):
                    return True
                free[j] += parts[i]
        return False

    return place(0, bins)


# --------------------------------------------------------------------------
# JSON


def _enc_scalar(c, ctower: QuadTower):
    if isinstance(c, TowerScalar):
        r = c.as_rational()
        if r is None:
            return {str(m): str(v) for m, v in sorted(ctower.coerce(c).coefficients().items())}
        c = r
    return str(Fraction(c))


def _dec_scalar(v, ctower: QuadTower):
    if isinstance(v, str):
        return Fraction(v)
    coeffs = {int(m): Fraction(x) for m, x in v.items()}
    raw = _raw_from_masks(coeffs, ctower.level, lambda: Fraction(0))
    return TowerScalar(ctower, raw)


def _raw_from_masks(terms: dict, level: int, zero):
    if level == 0:
        return terms.get(0, zero())
    bit = 1 << (level - 1)
    lo = {m: v for m, v in terms.items() if not m & bit}
    hi = {m & ~bit: v for m, v in terms.items() if m & bit}
    return (_raw_from_masks(lo, level - 1, zero), _raw_from_masks(hi, level - 1, zero))


def _enc_element(el: TowerElement, ctower: QuadTower) -> list:
    return [
        {
            "mask": m,
            "num": [_enc_scalar(x, ctower) for x in f.num.coeffs],
            "den": [_enc_scalar(x, ctower) for x in f.den.coeffs],
        }
        for m, f in el.terms()
    ]


def _dec_element(terms: list, field: FunctionTower) -> TowerElement:
    ct = field.ctower
    d = {}
    for tm in terms:
        num = Poly([_dec_scalar(x, ct) for x in tm["num"]])
        den = Poly([_dec_scalar(x, ct) for x in tm["den"]])
        d[int(tm["mask"])] = RatFunc(num, den)
    raw = _raw_from_masks(d, field.level, lambda: RatFunc(Poly()))
    return TowerElement(field, raw)


def component_to_json(comp: Component) -> str:
    ct = comp.field.ctower
    levels = []
    for s in comp.steps:
        entry = {"split": s.split, "kind": s.kind, "g": _enc_element(s.g, ct)}
        if s.root is not None:
            entry["root"] = _enc_element(s.root, ct)
        levels.append(entry)
    doc = dict(comp.family.to_dict())
    doc["constants"] = [_enc_scalar(r, _nth_tower(ct, i)) for i, r in enumerate(ct.radicands())]
    doc["deg_x"] = comp.deg_x
    doc["levels"] = levels
    return json.dumps(doc, sort_keys=False)


def component_from_json(text: str) -> Component:
    """Rebuild a component, re-deriving every relation and re-checking every root."""
    doc = json.loads(text)
    fam = QuadFamily.from_dict(doc, check=False)
    ct = QuadTower.rationals()
    for v in doc.get("constants", []):
        ct = ct.adjoin(_dec_scalar(v, ct))
    comp = _root_component(fam)
    comp.field = comp.field.with_constants(ct)
    comp.xs = [comp.field.const(RatFunc(fam.a))]
    for entry in doc["levels"]:
        F = comp.field
        g, beta = _relation(fam, F, comp.xs[-1])
        stored = _dec_element(entry["g"], F)
        if not (stored - g).is_zero():
            raise InvariantFailure("stored relation does not match the family")
        kind = entry["kind"]
        if kind == "e":
            F2 = F.adjoin(g.raw)
            x = (F2.gen(F2.level) - beta.lift_to(F2)) / 2
            comp = Component(fam, comp.steps + [LevelStep("e", g)], F2, comp.xs + [x], comp.multiplicity)
            continue
        r = _dec_element(entry["root"], F)
        if not (r * r - g).is_zero():
            raise InvariantFailure("square-root certificate failed on load")
        x = (r - beta) / 2
        mult = comp.multiplicity * (2 if kind == "d" else 1)
        comp = Component(fam, comp.steps + [LevelStep(kind, g, r)], F, comp.xs + [x], mult)
    if comp.deg_x != doc.get("deg_x", comp.deg_x):
        raise InvariantFailure("stored deg_x does not match the tower")
    return comp


__all__ = [
    "POLY_QUAD",
    "RAT_QUAD",
    "QuadFamily",
    "TowerElement",
    "FunctionTower",
    "tower_is_square",
    "LevelStep",
    "Component",
    "StableSet",
    "preimage_curve_poly",
    "delta_map",
    "specialize",
    "children",
    "components",
    "enumerate_until_stable",
    "degree_multiset_refines",
    "component_to_json",
    "component_from_json",
]
