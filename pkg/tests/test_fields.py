from fractions import Fraction

import pytest

from cubicaut.fields import GF, QQ, FieldSpec


def test_prime_field_arithmetic():
    F = GF(5)
    a, b = F(3), F(4)
    assert a + b == F(2)
    assert a * b == F(2)
    assert a - b == F(4)
    assert (a / b) * b == a
    assert a ** 4 == F.one


def test_extension_field():
    F4 = GF(2, 2)
    els = list(F4.elements())
    assert len(els) == 4
    t = F4.generator_element()
    # t satisfies the defining polynomial t^2 + t + 1 over F_2
    assert t * t + t + F4.one == F4.zero
    for e in els:
        if e:
            assert e * e.inverse() == F4.one


def test_defining_polynomial_deterministic():
    assert GF(2, 2).defining == GF(2, 2).defining
    assert GF(5, 2) == GF(5, 2)


def test_embedding():
    F5 = GF(5)
    F25 = GF(5, 2)
    x = F5(3)
    y = F25.embed(x)
    assert y + y == F25.embed(F5(1))
    # embedding is a ring hom on a sample
    a, b = F5(2), F5(4)
    assert F25.embed(a * b) == F25.embed(a) * F25.embed(b)
    assert F25.embed(a + b) == F25.embed(a) + F25.embed(b)


def test_sqrt_char2_and_odd():
    F8 = GF(2, 3)
    for e in F8.elements():
        s = F8.sqrt(e)
        assert s * s == e
    F7 = GF(7)
    assert F7.sqrt(F7(2)) * F7.sqrt(F7(2)) == F7(2)
    assert F7.sqrt(F7(3)) is None  # 3 is not a QR mod 7


def test_coerce_fraction():
    F5 = GF(5)
    assert F5.coerce(Fraction(1, 2)) == F5(3)
    with pytest.raises(ZeroDivisionError):
        F5.coerce(Fraction(1, 5))


def test_field_spec():
    assert FieldSpec(0).build() is QQ
    assert FieldSpec(5, 2).build() == GF(5, 2)
