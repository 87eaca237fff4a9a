"""The twelve acceptance criteria, each at its stated tolerance and time limit."""

import math
import random
import time
from fractions import Fraction

import pytest
import sympy

from preimdyn.arith import INF, PrimeSet, is_s_unit
from preimdyn.curves import QuadFamily, components, enumerate_until_stable, preimage_curve_poly
from preimdyn.dynamics import canonical_height, is_preperiodic, iterate, new_ratmap
from preimdyn.errors import DegreeDrop
from preimdyn.harness import SweepSpec, example21_check, summarize, swap_identity_check, sweep
from preimdyn.infinity import numeric_monodromy, places_at_infinity, theorem_bound_check
from preimdyn.poly import Poly
from preimdyn.preimage import (
    chain_matrix_det,
    evertse_bound,
    forward_chain,
    kappa_prime_loglog,
    mu_bound,
    preimage_set,
    verify_s_unit_chain,
)
from preimdyn.series import truncated_sqrt_poly

t = Poly.x()
X = Poly.x()


def _sympy_coeffs(b):
    """{(i, j): c} of a BiPoly, for comparison with a sympy expansion."""
    return {k: sympy.Rational(v.numerator, v.denominator) for k, v in b.terms.items()}


def test_c01_iterate_identities(record):
    t0 = time.perf_counter()
    ok = example21_check(4)
    # independent oracle: expand the composition with sympy
    xs, ts = sympy.symbols("x t")
    fam = QuadFamily.poly(2 * t, t * t - t, 0, check=False)
    expr = xs
    for N in range(1, 5):
        expr = sympy.expand(expr**2 + 2 * ts * expr + ts**2 - ts)
        want = sympy.Poly(sympy.expand((xs + ts) ** (2**N) - ts), xs, ts).as_dict()
        got = _sympy_coeffs(preimage_curve_poly(fam, N))
        ok &= got == {k: v for k, v in want.items()} == sympy.Poly(expr, xs, ts).as_dict()
        t_val = 2 ** (2**N)
        phiN = iterate(fam.map_at(t_val), N)
        ok &= phiN.num(Fraction(2 - t_val)) == 0
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 5
    assert record(1, ok, f"iterate identity and explicit zero for N=1..4 ({elapsed:.2f}s < 5s)")


def test_c02_preimages_of_zero_under_x2_minus_1(record):
    t0 = time.perf_counter()
    phi = new_ratmap(X * X - 1)
    got = preimage_set(phi, 0).preimages
    # hand BFS: 0 <- {1, -1};  -1 <- {0};  1 <- x^2 = 2, nothing rational
    want = {Fraction(0), Fraction(1), Fraction(-1)}
    elapsed = time.perf_counter() - t0
    ok = got == want and elapsed < 1
    assert record(2, ok, f"Preim(x^2-1, 0) = {{{', '.join(str(x) for x in sorted(got))}}} ({elapsed:.3f}s < 1s)")


@pytest.fixture(scope="module")
def sweep50():
    t0 = time.perf_counter()
    recs = sweep(SweepSpec(QuadFamily.poly(0, t), 50, workers=4))
    return recs, time.perf_counter() - t0


def test_c03_no_record_exceeds_six(sweep50):
    recs, _ = sweep50
    assert all(r.preim_count is None or r.preim_count <= 6 for r in recs)


@pytest.mark.xfail(strict=True, reason="the largest count on the height-50 grid is 4; 6 first occurs at t = -1/64")
def test_c03_sweep_maximum_six(sweep50, record):
    recs, elapsed = sweep50
    s = summarize(recs)
    ok = s.maximum == 6 and all(r.preim_count is None or r.preim_count <= 6 for r in recs) and elapsed < 600
    record(3, ok, f"H=50 sweep of x^2+t: max {s.maximum} at {[str(x) for x in s.argmax]} ({elapsed:.1f}s); required 6")
    assert ok


def test_c03_six_reached_just_past_the_grid():
    s = summarize(sweep(SweepSpec(QuadFamily.poly(0, t), 64)))
    assert s.maximum == 6
    assert Fraction(-1, 64) in s.argmax


def _random_form1(rng, d, coeff):
    while True:
        num = Poly([0] + [coeff() for _ in range(d - 1)] + [1])
        den = Poly([1] + [coeff() for _ in range(d - 1)])
        try:
            return new_ratmap(num, den)
        except DegreeDrop:
            continue


def test_c04_chain_determinant_vanishes(record):
    t0 = time.perf_counter()
    rng = random.Random(2024)
    done = 0
    ok = True
    while done < 200:
        d = 2 + done % 2
        phi = _random_form1(rng, d, lambda: Fraction(rng.randint(-5, 5), rng.randint(1, 3)))
        chain = forward_chain(phi, Fraction(rng.randint(-9, 9), rng.randint(1, 4)), 2 * d)
        if any(x is INF for x in chain):
            continue
        ok &= chain_matrix_det(d, chain) == 0
        done += 1
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 10
    assert record(4, ok, f"det A = 0 on {done} forward chains, d in {{2, 3}} ({elapsed:.2f}s < 10s)")


def _s_unit(rng, primes):
    v = Fraction(rng.choice((1, -1)))
    for p in primes:
        v *= Fraction(p) ** rng.randint(-3, 3)
    return v


def _s_integer(rng, primes):
    den = 1
    for p in primes:
        den *= p ** rng.randint(0, 2)
    return Fraction(rng.randint(-6, 6), den)


def test_c05_s_unit_closure(record):
    rng = random.Random(7)
    sets = [(2,), (2, 3), (2, 3, 5)]
    ok, maps, nodes = True, 0, 0
    while maps < 50:
        primes = sets[maps % 3]
        S = PrimeSet.of(primes)
        d = 2 + rng.randint(0, 1)
        a, x1 = _s_unit(rng, primes), _s_unit(rng, primes)
        hi = [_s_integer(rng, primes) for _ in range(d - 2)]
        den = [Fraction(1)] + [_s_integer(rng, primes) for _ in range(d - 1)]
        # choose the linear coefficient so that x1 is a preimage of a
        rest = x1**d + sum(c * x1 ** (j + 2) for j, c in enumerate(hi))
        a1 = (a * Poly(den)(x1) - rest) / x1
        try:
            phi = new_ratmap(Poly([0, a1] + hi + [1]), Poly(den))
        except DegreeDrop:
            continue
        tree = preimage_set(phi, a)
        wholly_units = all(verify_s_unit_chain(phi, S, a, tree.chain(x)) for x in tree.nodes)
        ok &= wholly_units and x1 in tree.nodes
        nodes += len(tree.nodes)
        maps += 1
    assert record(5, ok, f"every node is an S-unit over {maps} maps ({nodes} nodes), S in {sets}")


def test_c06_truncated_root_series(record):
    ok = True
    for n in range(17):
        sq = truncated_sqrt_poly(n) ** 2 - Poly([1, 1])
        ok &= all(sq.coeff(i) == 0 for i in range(n + 1))
        # oracle: sympy's series of sqrt(1+x)
        xs = sympy.Symbol("x")
        ser = sympy.series(sympy.sqrt(1 + xs), xs, 0, n + 1).removeO()
        ok &= all(
            sympy.Rational(truncated_sqrt_poly(n).coeff(i)) == ser.coeff(xs, i) for i in range(n + 1)
        )
    assert record(6, ok, "F_n(x)^2 = 1 + x + O(x^(n+1)) for n <= 16")


def test_c07_places_desk_suite(record):
    t0 = time.perf_counter()
    ok = True
    notes = []
    fam = QuadFamily.poly(0, t)
    for N in range(1, 6):
        for comp in components(fam, N):
            rep = places_at_infinity(comp)
            ok &= sum(P.e * P.f for P in rep.places) == 2**N == comp.deg_x
        for chk in theorem_bound_check(fam, N):
            ok &= chk.passed and chk.bound == 2**N / 8
            if N == 2:
                ok &= chk.measured == 2
                notes.append(f"N=2 {chk.measured} >= {chk.bound}")
    # rational map with constant b: bound 1 + log2 deg_x
    fam6 = QuadFamily.rat(1, t, 1)
    for N in range(1, 4):
        for chk in theorem_bound_check(fam6, N):
            ok &= chk.passed and chk.theorem == "rat-quad-b-const"
    # b = t, c = 1, a = 0: bound log2 deg_x and the level-2 relation above x = -t
    fam7 = QuadFamily.rat(t, 1, 0)
    for N in range(1, 4):
        for chk in theorem_bound_check(fam7, N):
            ok &= chk.passed and chk.theorem == "rat-quad-ac-const"
    level2 = [c.min_poly() for c in components(fam7, 2) if c.deg_x == 2]
    want = [Poly([0, 1]), Poly([0, 2]), Poly([1])]
    ok &= any(len(m) == 3 and all(f.is_poly() and f.num == w for f, w in zip(m, want)) for m in level2)
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    assert record(7, ok, f"places desk suite: {'; '.join(notes)}; x2^2 + 2t x2 + t found ({elapsed:.1f}s < 60s)")


CROSS_FAMILIES = [
    QuadFamily.poly(0, t),
    QuadFamily.poly(0, t, t + 1),
    QuadFamily.poly(t, t * t + 1),
    QuadFamily.rat(1, t, 1),
    QuadFamily.rat(t, 1, 0),
    QuadFamily.rat(t, t, 1),
]


def test_c08_numeric_cross_oracle(record):
    ok, n = True, 0
    for fam in CROSS_FAMILIES:
        for N in range(1, 4):
            for comp in components(fam, N):
                rep = places_at_infinity(comp)
                count, profile = numeric_monodromy(comp, tol=1e-6)
                ok &= count == rep.geometric_count and profile == rep.ramification_profile
                n += 1
    assert record(8, ok, f"exact place data agrees with root tracking on {n} components, N <= 3")


def test_c09_swap_identity(record):
    res = swap_identity_check(t, Poly([1]), range(-20, 21))
    checked = {k: v for k, v in res.items() if v is not None}
    skipped = sorted(k for k, v in res.items() if v is None)
    ok = all(u == v for u, v in checked.values()) and skipped == [1]
    assert record(9, ok, f"swap identity on {len(checked)} values of t, skipped {[str(x) for x in skipped]} (bc = 1)")


PREPERIODIC = [
    ("x^2", X * X, [0, 1, -1, INF]),
    ("x^2-1", X * X - 1, [0, 1, -1]),
    ("x^2-2", X * X - 2, [0, 2, -2, 1, -1]),
    ("x^2-3/4", X * X - Fraction(3, 4), [Fraction(3, 2), Fraction(-3, 2), Fraction(1, 2), Fraction(-1, 2)]),
    ("x^2+x", X * X + X, [0, -1]),
    ("x^3-x", X**3 - X, [1, -1]),
]


def test_c10_canonical_height(record):
    phi = new_ratmap(X * X)
    iv = canonical_height(phi, 2, 1e-9)
    ok = math.log(2) - 1e-9 <= iv.lo <= iv.hi <= math.log(2) + 1e-9
    zeros = 0
    for _, f, pts in PREPERIODIC:
        psi = new_ratmap(f)
        for P in pts:
            assert is_preperiodic(psi, P).preperiodic
            z = canonical_height(psi, P, 1e-9)
            ok &= z.lo <= 0 <= z.hi and z.width <= 1e-9
            zeros += 1
    h2 = canonical_height(phi, 2, 1e-10)
    h16 = canonical_height(phi, 16, 1e-10)
    gap = abs(4 * h2.mid - h16.mid)
    ok &= gap <= 2e-9 and zeros == 20
    assert record(10, ok, f"h(2) in [{iv.lo:.12f}, {iv.hi:.12f}]; {zeros} zero intervals; |4h(2) - h(16)| = {gap:.1e}")


def test_c11_bounds_calculators(record):
    ok = evertse_bound(2, 1) == 2**296 and mu_bound(2) == (1536, 4096)
    vals = {(d, s): kappa_prime_loglog(d, s).log_loglog_kappa for d in range(2, 8) for s in range(1, 6)}
    ok &= all(vals[d, s] < vals[d + 1, s] for d in range(2, 7) for s in range(1, 6))
    ok &= all(vals[d, s] < vals[d, s + 1] for d in range(2, 8) for s in range(1, 5))
    ok &= math.isclose(vals[2, 1], 40 * math.log(2))
    assert record(11, ok, "Evertse 2^296, mu (1536, 4096), log log kappa' monotone in d and s")


def test_c12_stabilization(record):
    st = enumerate_until_stable(QuadFamily.poly(0, t), 2)
    ok = st.level == 2 and len(st) == 1 and st.components[0].deg_x == 2
    assert record(12, ok, f"stable at level {st.level} with {len(st)} curve of deg_x <= 2")
