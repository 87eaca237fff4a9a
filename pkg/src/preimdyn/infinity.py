"""Places at infinity of preimage-curve components.

Starting from the place t = oo of K'(t) (uniformizer u, t = 1/u), each
non-split tower level ``y^2 = g`` is resolved from the leading term
``c u^k`` of the expansion of ``g``:

* k odd: ramified, substitute ``u = c w^2`` (e doubles, one place);
* k even, c a square: two places ``y = +-sqrt(g)``;
* k even, c not a square: one place whose residue field adjoins sqrt(c).

Expansions are recomputed from scratch with doubled precision whenever a
leading term cannot be resolved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from preimdyn.arith import PrimeSet, QuadTower, TowerScalar, is_s_integral, scalar_sqrt
from preimdyn.curves import POLY_QUAD, RAT_QUAD, Component, QuadFamily, components
from preimdyn.errors import DegenerateRelation, InvariantFailure, NotApplicable, PrecisionExhausted
from preimdyn.poly import Poly, RatFunc, rational_roots, poly_gcd
from preimdyn.series import PuiseuxSeries, eval_ratfunc_series, series_sqrt

START_TERMS = 4


class _Unresolved(Exception):
    pass


@dataclass
class InfinityPlace:
    e: int
    f: int
    tower: QuadTower
    expansions: dict  # "t", "y1", ... -> PuiseuxSeries
    decisions: list = field(default_factory=list)  # (generator, kind, leading exponent)
    orders: dict = field(default_factory=dict)  # "x1".. -> ord in uniformizer units

    @property
    def ramification(self) -> int:
        return self.e

    @property
    def residue_degree(self) -> int:
        return self.f

    @property
    def ord_t(self) -> int:
        return self.expansions["t"].val

    def gen_series(self) -> list:
        k = sum(1 for n in self.expansions if n.startswith("y"))
        return [self.expansions[f"y{i}"] for i in range(1, k + 1)]

    def field_radicands(self) -> list[str]:
        return [str(r) for r in self.tower.radicands()]


def _ramify(place: InfinityPlace, c) -> InfinityPlace:
    ex = {k: s.substitute_ramified(c, 2) for k, s in place.expansions.items()}
    return InfinityPlace(place.e * 2, place.f, place.tower, ex, list(place.decisions))


def _with_lead(s: PuiseuxSeries, tower: QuadTower) -> PuiseuxSeries:
    cs = list(s.coeffs)
    cs[0] = tower.coerce(cs[0])
    return PuiseuxSeries(cs, s.val, s.prec, s.e)


def split_or_ramify(place: InfinityPlace, beta: PuiseuxSeries, alpha: PuiseuxSeries, terms: int = 8, name: Optional[str] = None) -> list:
    """Places above ``place`` for the new generator y with y^2 = beta^2 + alpha."""
    s = beta * beta + alpha
    if s.is_exact_zero():
        raise DegenerateRelation("beta^2 + alpha vanishes identically")
    if not s.coeffs:
        raise PrecisionExhausted("leading term of beta^2 + alpha not resolved")
    name = name or f"y{len(place.gen_series()) + 1}"
    # an unresolved alpha is only known to have ord >= its precision
    ord_alpha = alpha.val if alpha.coeffs else alpha.prec
    lemma_split = bool(beta.coeffs) and 2 * beta.val < ord_alpha
    k, c = s.val, place.tower.coerce(s.lc)
    if k % 2:
        new = _ramify(place, c)
        s2 = s.substitute_ramified(c, 2)
        y = series_sqrt(_with_lead(s2, new.tower), terms)
        new.expansions[name] = y
        new.decisions.append((name, "ramified", k))
        out = [new]
    elif scalar_sqrt(c) is not None:
        y = series_sqrt(_with_lead(s, place.tower), terms)
        out = []
        for sign in (1, -1):
            ex = dict(place.expansions)
            ex[name] = y if sign > 0 else -y
            out.append(InfinityPlace(place.e, place.f, place.tower, ex, place.decisions + [(name, "split", k)]))
    else:
        tw = place.tower.adjoin(c)
        y = series_sqrt(_with_lead(s, tw), terms)
        ex = dict(place.expansions)
        ex[name] = y
        out = [InfinityPlace(place.e, place.f * 2, tw, ex, place.decisions + [(name, "inert", k)])]
    if lemma_split and len(out) != 2:
        raise InvariantFailure("2 ord(beta) < ord(alpha) but the place did not split")
    return out


def _eval_raw(raw, level: int, place: InfinityPlace, terms: int) -> PuiseuxSeries:
    if level == 0:
        return eval_ratfunc_series(raw, place.expansions["t"], terms)
    lo = _eval_raw(raw[0], level - 1, place, terms)
    hi_raw = raw[1]
    hi = _eval_raw(hi_raw, level - 1, place, terms)
    if hi.is_exact_zero():
        return lo
    return lo + hi * place.expansions[f"y{level}"]


def _dominant_split(s: PuiseuxSeries, tower: QuadTower):
    """(beta, alpha) with beta the root of the leading term when it is a square."""
    if s.coeffs and s.val % 2 == 0:
        r = scalar_sqrt(tower.coerce(s.lc))
        if r is not None:
            beta = PuiseuxSeries.monomial(r, s.val // 2, s.e)
            return beta, s - beta * beta
    return PuiseuxSeries([], 0, math.inf, s.e), s


def _expand(comp: Component, terms: int) -> list[InfinityPlace]:
    ct = comp.field.ctower
    places = [InfinityPlace(1, 1, ct, {"t": PuiseuxSeries.monomial(Fraction(1), -1)})]
    for j, g_raw in enumerate(comp.field.radicands, start=1):
        nxt = []
        for P in places:
            s = _eval_raw(g_raw, j - 1, P, terms)
            if not s.coeffs:
                if s.is_exact_zero():
                    raise InvariantFailure("nonzero radicand expands to zero")
                raise _Unresolved
            beta, alpha = _dominant_split(s, P.tower)
            nxt.extend(split_or_ramify(P, beta, alpha, terms, f"y{j}"))
        places = nxt
    for P in places:
        for name, y in P.expansions.items():
            if name.startswith("y"):
                j = int(name[1:])
                g = _eval_raw(comp.field.radicands[j - 1], j - 1, P, terms)
                if (y * y - g).coeffs:
                    raise InvariantFailure(f"expansion of {name} does not square to its relation")
        for i, x in enumerate(comp.xs[1:], start=1):
            if x.is_zero():
                P.orders[f"x{i}"] = math.inf
                continue
            sx = _eval_raw(x.raw, x.level, P, terms)
            if not sx.coeffs:
                raise _Unresolved
            P.orders[f"x{i}"] = sx.val
        for name in list(P.expansions):
            if name.startswith("y"):
                P.orders[name] = P.expansions[name].val
    return places


@dataclass
class PlaceReport:
    component: Component
    places: list

    @property
    def deg_x(self) -> int:
        return self.component.deg_x

    @property
    def rational_count(self) -> int:
        """Places whose residue field is the component's constant field."""
        return sum(1 for P in self.places if P.f == 1)

    @property
    def orbit_count(self) -> int:
        """Closed points at infinity over the component's constant field."""
        return len(self.places)

    @property
    def geometric_count(self) -> int:
        """Points at infinity over an algebraic closure (sum of residue degrees)."""
        return sum(P.f for P in self.places)

    @property
    def ramification_profile(self) -> list[int]:
        """Multiset of e over geometric points, sorted."""
        return sorted(P.e for P in self.places for _ in range(P.f))

    @property
    def runge_r(self) -> int:
        return runge_threshold(self)

    def to_dict(self) -> dict:
        return {
            "component_id": self.component.component_id,
            "deg_x": self.deg_x,
            "places": [
                {
                    "e": P.e,
                    "f": P.f,
                    "ord_t": P.ord_t,
                    "ord_generators": {k: (None if v == math.inf else v) for k, v in P.orders.items()},
                    "field_radicands": P.field_radicands(),
                }
                for P in self.places
            ],
            "rational_count": self.rational_count,
            "orbit_count": self.orbit_count,
            "runge_r": self.runge_r,
        }


def places_at_infinity(comp: Component, max_terms: Optional[int] = None) -> PlaceReport:
    """All places over t = oo, with sum of e*f checked against deg_x."""
    if max_terms is None:
        tdeg = sum(_raw_tdegree(g, i) for i, g in enumerate(comp.field.radicands))
        max_terms = 2 * tdeg + 16
    terms = START_TERMS
    while True:
        try:
            places = _expand(comp, terms)
            break
        except _Unresolved:
            if terms >= max_terms:
                raise PrecisionExhausted(f"leading terms unresolved at {terms} terms")
            terms = min(2 * terms, max_terms)
    total = sum(P.e * P.f for P in places)
    if total != comp.deg_x:
        raise InvariantFailure(f"sum of e*f = {total} != deg_x = {comp.deg_x}")
    return PlaceReport(comp, places)


def _raw_tdegree(raw, level: int) -> int:
    if level == 0:
        return max(raw.num.degree, raw.den.degree, 0)
    return max(_raw_tdegree(raw[0], level - 1), _raw_tdegree(raw[1], level - 1))


def runge_threshold(report: PlaceReport) -> int:
    """r of the Runge criterion; integral points are finite when |S| < r."""
    return report.orbit_count


def runge_gate(report: PlaceReport, S: PrimeSet) -> bool:
    return len(S) < runge_threshold(report)


# --------------------------------------------------------------------------
# counting theorems


@dataclass
class BoundCheck:
    component_id: str
    theorem: str
    bound: float
    measured: int
    measure: str
    passed: bool
    over_rationals: bool
    exceptional_levels: Optional[int] = None  # recorded for rat-quad-bc, never asserted

    def describe(self) -> str:
        status = "ok" if self.passed else "FAIL"
        note = "" if self.over_rationals else " (constructed field)"
        if self.exceptional_levels is not None:
            note += f", non-splitting levels {self.exceptional_levels}"
        return f"{self.component_id}: {self.theorem} bound {self.bound:g}, {self.measure} {self.measured}{note} [{status}]"


def exceptional_levels(rep: PlaceReport) -> int:
    """Tower levels at which some place over infinity fails to split in two."""
    names = {name for P in rep.places for name, kind, _ in P.decisions if kind != "split"}
    return len(names)


def applicable_theorem(fam: QuadFamily) -> str:
    """Which counting theorem covers the family (raises NotApplicable)."""
    a, b, c = fam.a, fam.b, fam.c
    if fam.kind == POLY_QUAD:
        if (b * b - c.scale(4) - b.scale(2)).is_constant():
            raise NotApplicable("b^2 - 4c - 2b is constant")
        return "poly-quad"
    if not b.is_constant() and not c.is_constant():
        return "rat-quad-bc"
    if b.is_constant() and not c.is_constant():
        return "rat-quad-b-const"
    if a.is_constant() and c.is_constant() and b.degree == 1:
        return "rat-quad-ac-const"
    raise NotApplicable("no counting theorem covers this family")


def _deg0(p: Poly) -> int:
    return max(p.degree, 0)


def theorem_bound_check(fam: QuadFamily, N: int, strict: bool = True) -> list[BoundCheck]:
    """Measured point counts at infinity against the proved lower bounds."""
    thm = applicable_theorem(fam)
    a, b, c = fam.a, fam.b, fam.c
    out = []
    for comp in components(fam, N):
        rep = places_at_infinity(comp)
        d = comp.deg_x
        if thm == "poly-quad":
            bound = d / (4 * (1 + _deg0(b * b - c.scale(4) + a.scale(4))))
            measured, what = rep.geometric_count, "points over constructed K'"
            _check_poly_recursion(fam, comp, rep)
        elif thm == "rat-quad-bc":
            if _deg0(a) + _deg0(c) != _deg0(b):
                bound = d
                measured = rep.rational_count if comp.over_rationals else 0
                what = "K-rational points"
                _check_rat_dichotomy(fam, comp, rep)
            else:
                bound, measured, what = d / 2, rep.geometric_count, "points over constructed K'"
        elif thm == "rat-quad-b-const":
            bound, measured, what = 1 + math.log2(d), rep.orbit_count, "orbits"
        else:
            bound, measured, what = math.log2(d), rep.orbit_count, "orbits"
        ok = measured >= bound - 1e-12
        exc = exceptional_levels(rep) if thm == "rat-quad-bc" else None
        chk = BoundCheck(comp.component_id, thm, bound, measured, what, ok, comp.over_rationals, exc)
        if strict and not ok:
            raise InvariantFailure(chk.describe())
        out.append(chk)
    return out


def _series_of(el, place, terms=16):
    return _eval_raw(el.raw, el.level, place, terms)


def _check_poly_recursion(fam: QuadFamily, comp: Component, rep: PlaceReport):
    C = _deg0(fam.b * fam.b - fam.c.scale(4) + fam.a.scale(4))
    D = _deg0(fam.b * fam.b - fam.c.scale(4) - fam.b.scale(2))
    B = RatFunc(fam.b)
    for P in rep.places:
        ord_t = P.ord_t
        for j, x in enumerate(comp.xs[1:], start=1):
            y = x * 2 + B
            if y.is_zero():
                continue
            s = _series_of(y, P)
            if not s.coeffs:
                continue
            lower = min(Fraction(D, 2) * ord_t, Fraction(C, 2**j) * ord_t)
            if s.val < lower:
                raise InvariantFailure(f"ord y{j} = {s.val} below {lower} at a place of {comp.component_id}")


def _check_rat_dichotomy(fam: QuadFamily, comp: Component, rep: PlaceReport):
    for P in rep.places:
        ob = -_deg0(fam.b) * P.e
        oc = -_deg0(fam.c) * P.e
        prev = -_deg0(fam.a) * P.e if not fam.a.is_zero() else math.inf
        for i in range(1, comp.level + 1):
            cur = P.orders[f"x{i}"]
            if prev == math.inf or cur == math.inf:
                prev = cur
                continue
            m = min(ob, prev + oc)
            if cur not in (m, prev - m):
                raise InvariantFailure(f"ord x{i} = {cur} not in {{{m}, {prev - m}}}")
            prev = cur


# --------------------------------------------------------------------------
# integral points


@dataclass
class ProbeResult:
    points: set
    last_new_height: int
    runge_gate: bool
    heights_scanned: int


def _s_integers(cap: int, S: PrimeSet):
    if cap < 1:
        return
    dens = [1]
    for p in sorted(S.primes):
        more = []
        for m in dens:
            q = m * p
            while q <= cap:
                more.append(q)
                q *= p
        dens += more
    for m in sorted(set(dens)):
        for n in range(-cap, cap + 1):
            if math.gcd(n, m) == 1 or (n == 0 and m == 1):
                yield Fraction(n, m)


def _rational_roots_over(coeffs: list) -> list[Fraction]:
    """Rational roots of a polynomial with coefficients in a square-root tower."""
    parts: dict[int, list] = {}
    n = len(coeffs)
    for i, c in enumerate(coeffs):
        terms = c.coefficients() if isinstance(c, TowerScalar) else ({0: Fraction(c)} if c != 0 else {})
        for m, v in terms.items():
            parts.setdefault(m, [Fraction(0)] * n)[i] = v
    if not parts:
        return []
    g = None
    for row in parts.values():
        p = Poly(row)
        g = p if g is None else poly_gcd(g, p)
    return rational_roots(g) if g.degree > 0 else []


def integral_point_probe(comp: Component, t_height_cap: int, S: PrimeSet) -> ProbeResult:
    """S-integral (x, t) on the component with H(t) <= cap, by sweeping t."""
    found: set = set()
    last = 0
    for t0 in _s_integers(t_height_cap, S):
        cs = comp.specialize_min_poly(t0)
        if cs is None:
            continue
        for x in _rational_roots_over(cs):
            if is_s_integral(x, S) and (x, t0) not in found:
                found.add((x, t0))
                last = max(last, abs(t0.numerator), t0.denominator)
    rep = places_at_infinity(comp)
    return ProbeResult(found, last, runge_gate(rep, S), t_height_cap)


# --------------------------------------------------------------------------
# floating-point monodromy oracle


def _complex_curve(comp: Component):
    """Coefficient matrix M[i][j] of x^i t^j as complex numbers."""
    bp = comp.curve_poly()
    dx = max(k[0] for k in bp.terms)
    dt = max(k[1] for k in bp.terms)
    M = [[0j] * (dt + 1) for _ in range(dx + 1)]
    for (i, j), v in bp.terms.items():
        M[i][j] = v.to_complex() if isinstance(v, TowerScalar) else complex(float(v))
    return M


def _branch_radius(fam: QuadFamily, N: int) -> float:
    import numpy as np
    import sympy

    from preimdyn.curves import preimage_curve_poly

    X, T = sympy.symbols("x t")
    F = preimage_curve_poly(fam, N)
    expr = sum(sympy.Rational(v.numerator, v.denominator) * X**i * T**j for (i, j), v in F.terms.items())
    disc = sympy.Poly(sympy.discriminant(expr, X), T)
    lc = sympy.Poly(sympy.Poly(expr, X).LC(), T)
    rad = 1.0
    for p in (disc, lc):
        if p.degree() > 0:
            cs = [complex(c) for c in p.all_coeffs()]
            rad = max(rad, max(abs(r) for r in np.roots(cs)))
    return 2.0 * rad + 1.0


def numeric_monodromy(comp: Component, radius: Optional[float] = None, tol: float = 1e-6):
    """(number of points at infinity, sorted e multiset) from root tracking.

    The roots in x of the component are followed once around |t| = R; the
    cycles of the resulting permutation are the points over t = oo and
    their lengths are the ramification indices.
    """
    import numpy as np
    from scipy.optimize import linear_sum_assignment

    M = _complex_curve(comp)
    dx = len(M) - 1
    if dx == 1:
        return 1, [1]
    R = radius if radius is not None else _branch_radius(comp.family, comp.level)

    def roots_at(theta):
        tv = R * np.exp(1j * theta)
        coeffs = [np.polyval(list(reversed(M[i])), tv) for i in range(dx, -1, -1)]
        return np.roots(coeffs)

    start = roots_at(0.0)
    cur = start.copy()
    theta, step = 0.0, 2 * math.pi / 256
    while theta < 2 * math.pi - 1e-15:
        h = min(step, 2 * math.pi - theta)
        nxt = roots_at(theta + h)
        cost = np.abs(cur[:, None] - nxt[None, :])
        ri, ci = linear_sum_assignment(cost)
        gaps = np.abs(cur[:, None] - cur[None, :]) + np.diag(np.full(dx, np.inf))
        ratio = (cost[ri, ci] / gaps.min(axis=1)[ri]).max()
        if ratio > 0.2 and h > 1e-9:
            step = h / 2
            continue
        cur = nxt[ci[np.argsort(ri)]]
        theta += h
        if ratio < 0.05:
            step = min(step * 2, 2 * math.pi / 64)
    # final roots coincide with the starting set: cluster them
    cost = np.abs(cur[:, None] - start[None, :])
    ri, ci = linear_sum_assignment(cost)
    scale = max(1.0, float(np.abs(start).max()))
    if cost[ri, ci].max() > tol * scale:
        raise PrecisionExhausted("tracked roots did not close up")
    # the root that started at start[k] ended at start[sigma[k]]
    sigma = {int(r): int(c) for r, c in zip(ri, ci)}
    seen, lengths = set(), []
    for s in range(dx):
        if s in seen:
            continue
        n, x = 0, s
        while x not in seen:
            seen.add(x)
            x = sigma[x]
            n += 1
        lengths.append(n)
    return len(lengths), sorted(lengths)


__all__ = [
    "InfinityPlace",
    "PlaceReport",
    "split_or_ramify",
    "places_at_infinity",
    "runge_threshold",
    "runge_gate",
    "BoundCheck",
    "applicable_theorem",
    "theorem_bound_check",
    "exceptional_levels",
    "ProbeResult",
    "integral_point_probe",
    "numeric_monodromy",
]
