import math
from fractions import Fraction

import pytest

from preimdyn.arith import PrimeSet, QuadTower
from preimdyn.curves import QuadFamily, components
from preimdyn.errors import DegenerateRelation, NotApplicable
from preimdyn.harness import unbounded_family
from preimdyn.infinity import (
    InfinityPlace,
    _eval_raw,
    applicable_theorem,
    integral_point_probe,
    numeric_monodromy,
    places_at_infinity,
    runge_gate,
    runge_threshold,
    split_or_ramify,
    theorem_bound_check,
)
from preimdyn.poly import Poly
from preimdyn.series import PuiseuxSeries, eval_poly_series, series_sqrt, truncated_sqrt_poly

t = Poly.x()
INF_S = PrimeSet.of([])


def _base_place():
    return InfinityPlace(1, 1, QuadTower.rationals(), {"t": PuiseuxSeries.monomial(Fraction(1), -1)})


def _series(coeffs, val):
    return PuiseuxSeries([Fraction(c) for c in coeffs], val, math.inf)


def test_split_when_beta_dominates():
    # beta = t, alpha = -2t + 5 in u = 1/t: 2 ord beta = -2 < -1 = ord alpha
    out = split_or_ramify(_base_place(), _series([1], -1), _series([-2, 5], -1))
    assert len(out) == 2 and all(P.e == 1 and P.f == 1 for P in out)


def test_ramify_on_odd_order():
    out = split_or_ramify(_base_place(), PuiseuxSeries([], 0, math.inf), _series([-4], -1))
    assert len(out) == 1 and out[0].e == 2 and out[0].f == 1


def test_even_order_nonsquare_is_inert():
    out = split_or_ramify(_base_place(), PuiseuxSeries([], 0, math.inf), _series([-1], -2))
    assert len(out) == 1 and out[0].e == 1 and out[0].f == 2


def test_identically_zero_radicand():
    with pytest.raises(DegenerateRelation):
        split_or_ramify(_base_place(), _series([1], -1), _series([-1], -2))


def test_lemma_branch_identities():
    beta, alpha = _series([1], -1), _series([-2, 5], -1)
    for n in range(1, 8):
        z = alpha * beta.inverse(terms=n + 6) * beta.inverse(terms=n + 6)
        F = beta * eval_poly_series(truncated_sqrt_poly(n), z.truncate(n + 4))
        y = series_sqrt(beta * beta + alpha, terms=n + 4)
        plus, minus = F + y, F - y
        assert (plus + minus - F * 2).truncate(n).coeffs == []
        # psi_+ psi_- = beta^2 O((alpha/beta^2)^(n+1)) = O(u^(n-1))
        prod = (plus * minus).truncate(n - 1)
        assert prod.coeffs == []


def test_places_examples():
    fam = QuadFamily.poly(0, t)
    (c1,) = components(fam, 1)
    r1 = places_at_infinity(c1)
    assert [(P.e, P.f) for P in r1.places] == [(2, 1)] and r1.rational_count == 1
    (c2,) = components(fam, 2)
    r2 = places_at_infinity(c2)
    assert [(P.e, P.f) for P in r2.places] == [(2, 1), (2, 1)]
    for line in components(QuadFamily.poly(0, t, t + 1), 1):
        rep = places_at_infinity(line)
        assert rep.rational_count == 1 and rep.runge_r == 1


DESK = [
    QuadFamily.poly(0, t),
    QuadFamily.poly(0, t, t + 1),
    QuadFamily.poly(t, t * t + 1),
    QuadFamily.poly(0, t * t.scale(-2)),
    QuadFamily.rat(1, t, 1),
    QuadFamily.rat(t, 1, 0),
    QuadFamily.rat(t, t, 1),
    QuadFamily.rat(t * t, t, 1),
]


@pytest.mark.parametrize("fam", DESK, ids=str)
def test_degree_conservation_and_soundness(fam):
    for N in range(1, 6):
        for comp in components(fam, N):
            rep = places_at_infinity(comp)
            assert sum(P.e * P.f for P in rep.places) == comp.deg_x
            for P in rep.places:
                for j, g in enumerate(comp.field.radicands, start=1):
                    y = P.expansions[f"y{j}"]
                    s = _eval_raw(g, j - 1, P, 8)
                    assert (y * y - s).coeffs == []
                    assert y.val * 2 == s.val


def test_report_json_fields():
    (c2,) = components(QuadFamily.poly(0, t), 2)
    d = places_at_infinity(c2).to_dict()
    assert list(d) == ["component_id", "deg_x", "places", "rational_count", "orbit_count", "runge_r"]
    assert set(d["places"][0]) == {"e", "f", "ord_t", "ord_generators", "field_radicands"}
    assert d["places"][0]["ord_t"] == -2


def test_bound_examples():
    for N in range(1, 6):
        for chk in theorem_bound_check(QuadFamily.poly(0, t), N):
            assert chk.bound == 2**N / 8 and chk.passed
    (chk,) = theorem_bound_check(QuadFamily.rat(1, t, 1), 1)
    assert (chk.bound, chk.measured) == (2, 2)
    above = [c for c in theorem_bound_check(QuadFamily.rat(t, 1, 0), 2) if c.component_id == "N2:-e"]
    assert [(c.bound, c.measured) for c in above] == [(1, 2)]


@pytest.mark.parametrize("fam", DESK, ids=str)
def test_bounds_hold_with_internal_recursions(fam):
    for N in range(1, 5):
        for chk in theorem_bound_check(fam, N):
            assert chk.passed, chk.describe()


def test_theorem_selection():
    assert applicable_theorem(QuadFamily.poly(0, t)) == "poly-quad"
    assert applicable_theorem(QuadFamily.rat(t, t, 1)) == "rat-quad-bc"
    assert applicable_theorem(QuadFamily.rat(1, t, 1)) == "rat-quad-b-const"
    assert applicable_theorem(QuadFamily.rat(t, 1, 0)) == "rat-quad-ac-const"
    with pytest.raises(NotApplicable):
        applicable_theorem(unbounded_family())
    with pytest.raises(NotApplicable):
        applicable_theorem(QuadFamily.rat(t * t, 1, 0))


def test_runge_threshold():
    (c1,) = components(QuadFamily.poly(0, t), 1)
    (c2,) = components(QuadFamily.poly(0, t), 2)
    r1, r2 = places_at_infinity(c1), places_at_infinity(c2)
    assert runge_threshold(r1) == 1 and not runge_gate(r1, INF_S)
    assert runge_threshold(r2) == 2 and runge_gate(r2, INF_S)
    assert not runge_gate(r2, PrimeSet.of([2]))


def test_probe_on_a_parametrized_curve():
    (c1,) = components(QuadFamily.poly(0, t), 1)
    res = integral_point_probe(c1, 10**4, INF_S)
    assert res.points == {(Fraction(n), Fraction(-n * n)) for n in range(-100, 101)}
    assert not res.runge_gate


def test_probe_stabilizes_when_runge_applies():
    (c2,) = components(QuadFamily.poly(0, t), 2)
    res = integral_point_probe(c2, 2000, INF_S)
    assert res.runge_gate
    assert res.points == {(Fraction(0), Fraction(0)), (Fraction(0), Fraction(-1))}
    assert res.last_new_height <= 1


def test_probe_empty_range():
    (c1,) = components(QuadFamily.poly(0, t), 1)
    assert integral_point_probe(c1, 0, INF_S).points == set()


def test_numeric_oracle_on_deeper_level():
    (c,) = components(QuadFamily.poly(0, t), 4)
    rep = places_at_infinity(c)
    assert numeric_monodromy(c) == (rep.geometric_count, rep.ramification_profile)


def test_non_splitting_levels_are_recorded():
    checks = theorem_bound_check(QuadFamily.rat(t, t, 1), 3)
    assert all(c.exceptional_levels is not None and 0 <= c.exceptional_levels <= 3 for c in checks)
    assert all(c.exceptional_levels is None for c in theorem_bound_check(QuadFamily.poly(0, t), 2))
