from fractions import Fraction

import pytest

from cubicaut.fields import GF, QQ, FieldExtensionNeeded
from cubicaut.polyring import (
    ParseError,
    Poly,
    Ring,
    RingMismatch,
    WeightVector,
    binary_form_roots,
    parse_poly,
)
from cubicaut.quadfield import MINUS_INFINITY, QuadNum

R3 = Ring(3, QQ)
X, Y, Z = R3.gens()


def P(text, ring=R3):
    return parse_poly(text, ring)


def test_mul_basic():
    assert Y * (X + Z * Z) == P("x*y + y*z^2")
    sq = (Z * X + Y ** 2) ** 2
    assert sq == P("z^2*x^2 + 2*z*x*y^2 + y^4")


def test_mul_char2_cube():
    R = Ring(3, GF(2))
    x, y, z = R.gens()
    assert (x - y) ** 3 == parse_poly("x^3+x^2*y+x*y^2+y^3", R)
    # the cross term of (zx + y^2)^2 vanishes in characteristic 2
    assert (z * x + y * y) ** 2 == parse_poly("z^2*x^2 + y^4", R)


def test_subst():
    p = P("x + y*z")
    assert p.subst([X, Y, Z]) == p
    q = P("x*y + z")
    assert q.subst([Y, X, Z]) == q
    r = Ring(3, QQ)
    p2 = parse_poly("x + y^2", Ring(3, QQ))
    images = [P("z + x*y"), P("y + x"), X]
    assert p2.subst(images) == P("z + x*y + (y+x)^2")


def test_homogeneous_part():
    f = P("x*y^2 + y*(z^2 + 2*z + 3) + z")
    assert f.homogeneous_part(3) == P("x*y^2 + y*z^2")
    assert P("x + y*z + z*x^2").homogeneous_part(2) == P("y*z")
    assert R3.const(5).homogeneous_part(0) == R3.const(5)
    parts = f.homogeneous_parts()
    total = R3.zero()
    for p in parts.values():
        total = total + p
    assert total == f


def test_partial_derivative():
    R2c = Ring(3, GF(2))
    x = R2c.var(0)
    assert (x * x).partial_derivative(0).is_zero()
    f = P("x*y^2 + y*z^2 + z")
    assert f.partial_derivative(1) == P("2*x*y + z^2")
    assert R3.const(4).partial_derivative(2).is_zero()


def test_mu_degree_examples():
    theta = QuadNum(1, 1, 2)  # 1 + sqrt(2)
    mu = WeightVector([QuadNum(1), QuadNum(3), theta])
    f = P("x*z^2")
    assert f.mu_degree(mu) == QuadNum(3, 2, 2)  # 3 + 2 sqrt(2) = 1 + 2 theta
    assert P("y*z").mu_degree(mu) == QuadNum(4, 1, 2)
    assert R3.zero().mu_degree(mu) == MINUS_INFINITY


def test_mu_part():
    theta = QuadNum(1, 1, 2)
    mu = WeightVector([QuadNum(1), QuadNum(3), theta])
    f = P("x + y*z + x*z^2")
    assert f.mu_part(mu, QuadNum(3, 2, 2)) == P("x*z^2")
    d = f.mu_degree(mu)
    assert not f.mu_part(mu, d).is_zero()
    mu11 = WeightVector([1, 1, 1])
    assert P("x + y").mu_part(mu11, QuadNum(2)).is_zero()


def test_mu_degree_matches_total_degree_for_unit_weights():
    mu = WeightVector([1, 1, 1])
    f = P("x*y^2 + z + 7")
    assert f.mu_degree(mu) == QuadNum(f.degree())


def test_binary_form_roots_trivial():
    f = P("y*z^2")
    roots, (u, v), field = binary_form_roots(f)
    assert (u, v) == (1, 2)
    as_set = {(str(r[0]), str(r[1]), m) for r, m in roots}
    assert as_set == {("0", "1", 1), ("1", "0", 2)}


def test_binary_form_roots_cube():
    # y^3 defines the single point [0:1] with multiplicity 3
    f = P("y^3")
    roots, (u, v), _ = binary_form_roots(f)
    assert roots == [((Fraction(0), Fraction(1)), 3)]


def test_binary_form_roots_extension():
    R = Ring(3, GF(2))
    f = parse_poly("y^2 + y*z + z^2", R)
    roots, (u, v), field = binary_form_roots(f)
    assert field.order == 4
    assert len(roots) == 2
    assert all(m == 1 for _, m in roots)
    # roots are conjugate: both satisfy the form
    for (r0, r1), _ in roots:
        assert r0 * r0 + r0 * r1 + r1 * r1 == field.zero


def test_binary_form_roots_needs_extension_over_Q():
    with pytest.raises(FieldExtensionNeeded):
        binary_form_roots(P("y^2 - 2*z^2"))


def test_roots_multiplicities_sum():
    f = P("y^2*z + y^3")
    roots, _, _ = binary_form_roots(f)
    assert sum(m for _, m in roots) == 3


def test_ring_mismatch():
    other = Ring(2, QQ)
    with pytest.raises(RingMismatch):
        X + other.var(0)


def test_parse_errors():
    with pytest.raises(ParseError) as e:
        P("(x+, y)")
    assert e.value.position == 3
    with pytest.raises(ParseError):
        P("x y")  # implicit multiplication forbidden
    with pytest.raises(ParseError):
        P("w + 1")


def test_print_parse_roundtrip():
    polys = ["x*y^2 - 2*x + 1/2", "x^3 + x^2*y + x*y^2 + y^3", "0", "-x + y", "7"]
    for s in polys:
        p = P(s)
        assert P(str(p)) == p


def test_canonical_print_graded_lex():
    f = P("z + x*y^2 + x^2 + y^3")
    assert str(f) == "x*y^2 + y^3 + x^2 + z"


def test_divide_exact():
    f = P("x^2*y + x*y^2")
    g = P("x*y")
    assert f.divide_exact(g) == P("x + y")
    assert f.divide_exact(P("x + y")) == P("x*y")
    assert P("x^2 + y").divide_exact(P("x + 1")) is None


def test_multiplicativity_of_mu_degree_random():
    import random

    rng = random.Random(3)
    theta = QuadNum(1, 1, 5, 2)
    mu = WeightVector([QuadNum(1), theta, QuadNum(2)])
    for _ in range(30):
        p = R3.zero()
        q = R3.zero()
        for _ in range(rng.randint(1, 4)):
            e = tuple(rng.randint(0, 2) for _ in range(3))
            p = p + R3.monomial(e, rng.randint(1, 5))
        for _ in range(rng.randint(1, 4)):
            e = tuple(rng.randint(0, 2) for _ in range(3))
            q = q + R3.monomial(e, rng.randint(1, 5))
        if p.is_zero() or q.is_zero():
            continue
        assert (p * q).mu_degree(mu) == p.mu_degree(mu) + q.mu_degree(mu)
