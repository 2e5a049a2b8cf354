import pytest

from cubicaut.fields import GF, QQ
from cubicaut.polymaps import (
    AffineMap,
    BudgetExceeded,
    DimensionMismatch,
    PolyMap,
    TameWord,
    TriangularMap,
    apply_equivalence,
    compose,
    eval_tame_word,
    invert_affine,
    invert_triangular,
    iterate_degrees,
    jacobian_det,
)
from cubicaut.polyring import Ring, parse_poly

R3 = Ring(3, QQ)


def M(text, ring=R3):
    return PolyMap.parse(text, ring)


NAGATA = M("(x - 2*y*(z*x+y^2) - z*(z*x+y^2)^2, y + z*(z*x+y^2), z)")


def test_compose_involution():
    iota = M("(y, x, z)")
    assert compose(iota, iota).is_identity()


def test_compose_star_family():
    # h1 o iota o h2 o iota = (x + yz + za(x,z), y + a(x,z) + r(z), z)
    h1 = M("(x + y*z, y + z^3, z)")
    h2 = M("(x + y^2 + y*z, y, z)")  # a(y,z) = y^2 + yz
    iota = M("(y, x, z)")
    w = compose(h1, compose(iota, compose(h2, iota)))
    expected = M("(x + y*z + z*(x^2 + x*z), y + x^2 + x*z + z^3, z)")
    assert w == expected


def test_nagata_degree_and_jacobian():
    assert NAGATA.degree() == 5
    assert jacobian_det(NAGATA) == R3.one()


def test_jacobian_unitriangular():
    f = M("(x + y^2 + y*z^2, y + z^2, z)")
    assert jacobian_det(f) == R3.one()
    g = M("(x^2, y, z)")
    assert jacobian_det(g) == parse_poly("2*x", R3)
    Rc2 = Ring(3, GF(2))
    g2 = PolyMap.parse("(x^2, y, z)", Rc2)
    with pytest.raises(ValueError):
        # x^2 is not invertible; jacobian vanishes in char 2
        AffineMap.from_components(list(g2.components))
    assert jacobian_det(g2).is_zero()


def test_iterate_degrees_identity():
    ident = PolyMap.identity(R3)
    assert iterate_degrees(ident, 5) == [1, 1, 1, 1, 1]


def test_iterate_degrees_growth():
    f = M("(z, y + x*z + z^3, x + y*z + x*z^2)")
    degs = iterate_degrees(f, 4)
    assert degs[0] == 3
    # ratios approach 1 + sqrt(2) ~ 2.414; exact degrees are deterministic
    assert degs == iterate_degrees(f, 4)
    assert all(degs[i + 1] <= 3 * degs[i] for i in range(3))


def test_iterate_budget():
    f = M("(y + x*z, z, x + y*z + x*z^2)")
    with pytest.raises(BudgetExceeded) as e:
        iterate_degrees(f, 12, budget=2000)
    assert len(e.value.degrees) >= 2
    assert e.value.degrees[0] == 3


def test_invert_triangular():
    t = TriangularMap.from_components(
        [parse_poly("2*x + y^2", R3), parse_poly("y", R3), parse_poly("z", R3)]
    )
    ti = invert_triangular(t)
    assert compose(t.to_polymap(), ti.to_polymap()).is_identity()
    assert compose(ti.to_polymap(), t.to_polymap()).is_identity()
    assert ti.to_polymap() == M("(1/2*x - 1/2*y^2, y, z)")


def test_invert_affine_translation():
    a = AffineMap.translation_by(R3, [1, 2, 3])
    ai = invert_affine(a)
    assert compose(a.to_polymap(), ai.to_polymap()).is_identity()


def test_eval_tame_word_star():
    h1 = TriangularMap.from_components(list(M("(x + y*z, y + z^3, z)").components))
    h2 = TriangularMap.from_components(list(M("(x + y^2 + y*z, y, z)").components))
    iota = AffineMap.permutation(R3, [1, 0, 2])
    word = TameWord(
        [("triangular", h1), ("affine", iota), ("triangular", h2), ("affine", iota)]
    )
    assert eval_tame_word(word) == M(
        "(x + y*z + z*(x^2 + x*z), y + x^2 + x*z + z^3, z)"
    )
    inv = word.inverse()
    assert compose(eval_tame_word(word), eval_tame_word(inv)).is_identity()


def test_apply_equivalence():
    f = M("(x + y^2, y, z)")
    ident = AffineMap.identity(R3)
    assert apply_equivalence(ident, f, ident) == f
    perm = AffineMap.permutation(R3, [1, 0, 2])
    g = apply_equivalence(perm, f, perm)
    assert g == M("(x, y + x^2, z)")


def test_conjugated_shift_map_degree3():
    # conjugating (z+y, y+x^2, x) by (x, y+z^3, z) gives a degree-3 map
    f012 = M("(z + y, y + x^2, x)")
    c = M("(x, y + z^3, z)")
    cinv = M("(x, y - z^3, z)")
    conj = compose(c, compose(f012, cinv))
    assert conj.degree() == 3


def test_compose_associative():
    f = M("(x + y*z, y, z)")
    g = M("(x, y + z^2, z)")
    h = M("(y, x, z)")
    assert compose(compose(f, g), h) == compose(f, compose(g, h))


def test_jacobian_chain_rule():
    f = M("(x + y^2, y + z^2, z)")
    g = M("(x, y + x*z, z)")
    lhs = jacobian_det(compose(f, g))
    rhs = jacobian_det(f).subst(list(g.components)) * jacobian_det(g)
    assert lhs == rhs


def test_degree_submultiplicative():
    f = M("(x + y^2, y + z^2, z)")
    g = M("(x + z^3, y, z)")
    assert compose(f, g).degree() <= f.degree() * g.degree()


def test_dimension_mismatch():
    f2 = PolyMap.parse("(x, y)", Ring(2, QQ))
    with pytest.raises(DimensionMismatch):
        compose(M("(x, y, z)"), f2)
