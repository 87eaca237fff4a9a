import json
import random
from fractions import Fraction

import pytest
import sympy

from preimdyn._functower import FunctionTower, char_poly, tower_is_square
from preimdyn.arith import INF
from preimdyn.curves import (
    QuadFamily,
    component_from_json,
    component_to_json,
    components,
    degree_multiset_refines,
    delta_map,
    enumerate_until_stable,
    preimage_curve_poly,
    specialize,
)
from preimdyn.errors import CapExceeded, DegreeDrop, HypothesisViolated, InvariantFailure, ZeroElement
from preimdyn.poly import BiPoly, Poly, RatFunc
from preimdyn.preimage import preimage_set

t = Poly.x()
x = Poly.x()
X, T = BiPoly.x(), BiPoly.t()

FAMILIES = [
    QuadFamily.poly(0, t),
    QuadFamily.poly(0, t, t + 1),
    QuadFamily.poly(t, t * t + 1),
    QuadFamily.poly(0, t * t.scale(-2)),
    QuadFamily.rat(1, t, 1),
    QuadFamily.rat(t, 1, 0),
    QuadFamily.rat(t, t, 1),
    QuadFamily.rat(t * t, t, 1),
]


def test_curve_poly_examples():
    assert preimage_curve_poly(QuadFamily.poly(0, t), 1) == X * X + T
    assert preimage_curve_poly(QuadFamily.poly(0, t), 2) == (X * X + T) ** 2 + T
    assert preimage_curve_poly(QuadFamily.rat(0, t, check=False), 1) == X * X


def test_curve_poly_matches_iterated_specialization():
    for fam in FAMILIES:
        for t0 in (Fraction(3), Fraction(-2, 5)):
            phi = fam.map_at(t0)
            a = fam.a(t0)
            F2 = preimage_curve_poly(fam, 2).specialize_t(t0)
            for x0 in (Fraction(1, 3), Fraction(-7, 2)):
                y = phi(phi(x0))
                if y is INF:
                    continue
                # F_2 is the numerator of phi^2 - a up to the homogenizing denominator
                assert (F2(x0) == 0) == (y == a)


def test_delta_map_examples():
    fam = QuadFamily.poly(0, t)
    assert delta_map(fam, (1, -1)) == (0, -1)
    assert delta_map(QuadFamily.rat(0, t, check=False), (1, -1)) == (INF, -1)
    phi = fam.map_at(-1)
    tree = preimage_set(phi, 0)
    for node in tree.nodes:
        if tree.depth(node) == 2:
            assert tree.depth(delta_map(fam, (node, -1))[0]) == 1


def test_tower_square_examples():
    F = FunctionTower()
    r = tower_is_square(F.const(RatFunc(Poly([1, 2, 1]))))
    assert r is not None and r.as_base() in (RatFunc(t + 1), RatFunc(-t - 1))
    g1 = F.const(RatFunc(t.scale(-4)))
    assert tower_is_square(g1) is None
    F1 = F.adjoin(g1.raw)
    assert tower_is_square(F1.const(RatFunc(t.scale(-4))) + F1.gen(1) * 2) is None
    with pytest.raises(ZeroElement):
        tower_is_square(F.const(RatFunc(Poly())))


def test_tower_square_certificates_on_random_squares():
    rng = random.Random(30)
    F = FunctionTower().adjoin(RatFunc(t * t * t + 1))
    y = F.gen(1)
    for _ in range(20):
        s = F.const(RatFunc(Poly([rng.randint(-3, 3) for _ in range(3)]))) + y * rng.randint(1, 3)
        r = tower_is_square(s * s)
        assert r is not None and (r * r - s * s).is_zero()


def test_tower_square_adjoins_constants():
    F = FunctionTower()
    r = tower_is_square(F.const(RatFunc(Poly([0, 0, 8]))))
    assert r is not None and r.field.ctower.level == 1


def test_component_examples():
    (c1,) = components(QuadFamily.poly(0, t), 1)
    (c2,) = components(QuadFamily.poly(0, t), 2)
    assert (c1.deg_x, c2.deg_x) == (2, 4)
    lines = components(QuadFamily.poly(0, t, t + 1), 1)
    assert sorted(c.x.as_base().num.coeff(0) for c in lines) == [-1, 1]
    low = components(QuadFamily.rat(t, 1, 0), 1)
    assert sorted(str(c.x.as_base().num.to_str("t")) for c in low) == ["-t", "0"]
    above = [c for c in components(QuadFamily.rat(t, 1, 0), 2) if c.deg_x == 2]
    assert len(above) == 1
    mp = above[0].min_poly()
    assert [f.num for f in mp] == [t, t.scale(2), Poly([1])]


@pytest.mark.parametrize("fam", FAMILIES, ids=str)
def test_degree_laws(fam):
    for N in range(1, 5):
        comps = components(fam, N)
        assert sum(c.deg_x * c.multiplicity for c in comps) == 2**N
        for c in comps:
            prod = 1
            for f in c.degree_factors():
                assert f in (1, 2)
                prod *= f
            assert prod == c.deg_x and 2**N % c.deg_x == 0
            for kind, root in c.split_choices:
                g = [s.g for s in c.steps if s.root is root][0]
                assert (root * root - g.lift_to(root.field)).is_zero()


@pytest.mark.parametrize("fam", FAMILIES, ids=str)
def test_min_polys_multiply_to_the_curve(fam):
    for N in range(1, 4):
        prod = BiPoly.const(1)
        for c in components(fam, N):
            prod = prod * c.curve_poly() ** c.multiplicity
        F = preimage_curve_poly(fam, N)
        # equal up to a nonzero polynomial factor in t
        lead = F.x_coeff(2**N)
        plead = prod.x_coeff(2**N)
        assert prod * BiPoly.from_t_poly(lead) == F * BiPoly.from_t_poly(plead)


def _sympy_degrees(F: Poly, radicands):
    xs = sympy.Symbol("x")
    expr = sum(sympy.Rational(c.numerator, c.denominator) * xs**i for i, c in enumerate(F.coeffs))
    ext = [sympy.sqrt(sympy.Rational(r.numerator, r.denominator)) for r in radicands]
    _, facs = sympy.factor_list(expr, xs, extension=ext or None)
    return [sympy.degree(f, xs) for f, m in facs for _ in range(m)]


@pytest.mark.parametrize("fam", FAMILIES, ids=str)
def test_specialization_refines_components(fam):
    rng = random.Random(hash(str(fam)) & 0xFFFF)
    N = 2
    comps = components(fam, N)
    wholes = [c.deg_x for c in comps for _ in range(c.multiplicity)]
    radicands = {r.as_rational() for c in comps for r in c.constants.radicands()}
    done = 0
    while done < 100 // len(FAMILIES) + 1:
        t0 = Fraction(rng.randint(-40, 40), rng.randint(1, 9))
        try:
            F = specialize(fam, N, t0)
        except (DegreeDrop, HypothesisViolated):
            continue
        if F.degree != 2**N:
            continue
        assert degree_multiset_refines(_sympy_degrees(F, radicands), wholes)
        done += 1


def test_refinement_helper():
    assert degree_multiset_refines([1, 1, 2], [2, 2])
    assert not degree_multiset_refines([3, 1], [2, 2])
    assert degree_multiset_refines([4], [4])


def test_specialize_examples():
    assert specialize(QuadFamily.poly(0, t), 1, -1) == x * x - 1
    with pytest.raises(HypothesisViolated):
        specialize(QuadFamily.rat(1, 1, check=False), 1, 5)
    # for (x^2 + bx)/(cx + 1) the resultant is 1 - bc, so only bc = 1 drops the degree
    with pytest.raises(DegreeDrop):
        QuadFamily.rat(t, t, 1).map_at(1)
    with pytest.raises(HypothesisViolated):
        specialize(QuadFamily.rat(t, t, 1), 1, -1)


def test_non_simple_family_is_rejected():
    with pytest.raises(HypothesisViolated, match=r"x\^2 \+ 2tx \+ t\^2 - t"):
        QuadFamily.poly(t.scale(2), t * t - t)
    with pytest.raises(HypothesisViolated):
        QuadFamily.rat(1, 1)
    with pytest.raises(HypothesisViolated):
        QuadFamily.rat(t, 1, t)


def test_stabilization_examples():
    st = enumerate_until_stable(QuadFamily.poly(0, t), 2)
    assert st.level == 2 and len(st) == 1
    st = enumerate_until_stable(QuadFamily.rat(t, 1, 0), 1)
    assert sorted(c.x.as_base().num.to_str("t") for c in st) == ["-t", "0"]
    assert len(enumerate_until_stable(QuadFamily.poly(0, t), 0)) == 0


def test_stabilization_cap():
    with pytest.raises(CapExceeded) as ei:
        enumerate_until_stable(QuadFamily.poly(0, t), 64, cap=3)
    assert len(ei.value.partial) == 3


@pytest.mark.parametrize("fam", FAMILIES, ids=str)
def test_json_round_trip(fam):
    for c in components(fam, 3):
        text = component_to_json(c)
        back = component_from_json(text)
        assert back.component_id == c.component_id and back.deg_x == c.deg_x
        assert back.curve_key() == c.curve_key()
        assert component_to_json(back) == text


def test_json_tampering_is_detected():
    c = [c for c in components(QuadFamily.poly(0, t, t + 1), 2) if c.signature.startswith("+")][0]
    doc = json.loads(component_to_json(c))
    doc["levels"][0]["root"] = [{"mask": 0, "num": ["3"], "den": ["1"]}]
    with pytest.raises(InvariantFailure, match="certificate"):
        component_from_json(json.dumps(doc))
    doc = json.loads(component_to_json(c))
    doc["b"] = ["1"]
    with pytest.raises(InvariantFailure):
        component_from_json(json.dumps(doc))


def test_char_poly_of_generator():
    F = FunctionTower().adjoin(RatFunc(t.scale(-4)))
    cp = char_poly(F.gen(1))
    assert [f.num for f in cp] == [t.scale(4), Poly(), Poly([1])]
