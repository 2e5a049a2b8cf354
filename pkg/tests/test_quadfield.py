import random

import pytest

from cubicaut.quadfield import MINUS_INFINITY, MixedField, QuadNum, qn_add, qn_cmp, qn_mul


def Q(a, b=0, d=0, c=1):
    return QuadNum(a, b, d, c)


def test_normalization():
    assert Q(2, 4, 2, 6) == Q(1, 2, 2, 3)
    assert Q(0, 1, 4) == Q(2)          # sqrt(4) = 2
    assert Q(0, 2, 8) == Q(0, 4, 2)    # sqrt(8) = 2 sqrt(2)
    assert Q(1, 0, 7).d == 0           # b = 0 forces d = 0
    assert Q(3, 0, 0, -6) == Q(-1, 0, 0, 2)


def test_add_examples():
    one_plus_rt2 = Q(1, 1, 2)
    assert qn_add(one_plus_rt2, one_plus_rt2) == Q(2, 2, 2)
    golden = Q(1, 1, 5, 2)
    conj = Q(1, -1, 5, 2)
    assert qn_add(golden, conj) == Q(1)
    theta = Q(3, 1, 5, 2)
    assert qn_add(theta, Q(0)) == theta


def test_mul_paper_identities():
    # theta = 1 + sqrt(2): theta^2 = 2 theta + 1
    t = Q(1, 1, 2)
    assert qn_mul(t, t) == Q(3, 2, 2)
    assert t * t == 2 * t + 1
    # theta = (3 + sqrt(5))/2: theta^2 = 3 theta - 1
    t = Q(3, 1, 5, 2)
    assert t * t == Q(7, 3, 5, 2)
    assert t * t == 3 * t - 1
    # theta = (1 + sqrt(17))/2: theta^2 = theta + 4
    t = Q(1, 1, 17, 2)
    assert t * t == Q(9, 1, 17, 2)
    assert t * t == t + 4


def test_twelve_lambda_minimal_polynomials():
    cases = [
        (Q(1), 1, 0), (Q(0, 1, 2), 0, 2), (Q(1, 1, 5, 2), 1, 1),
        (Q(0, 1, 3), 0, 3), (Q(2), 2, 0), (Q(1, 1, 13, 2), 1, 3),
        (Q(1, 1, 2), 2, 1), (Q(0, 1, 6), 0, 6), (Q(1, 1, 17, 2), 1, 4),
        (Q(3, 1, 5, 2), 3, -1), (Q(1, 1, 3), 2, 2), (Q(3), 3, 0),
    ]
    for lam, a, b in cases:
        assert lam * lam == a * lam + b


def test_cmp_examples():
    assert qn_cmp(Q(0, 1, 2), Q(1, 1, 5, 2)) == -1
    assert qn_cmp(Q(3), Q(1, 1, 3)) == 1
    assert qn_cmp(Q(2), Q(2)) == 0


def test_cross_field_cmp_is_total_order():
    rng = random.Random(7)
    ds = [0, 2, 3, 5, 13, 17]
    vals = [QuadNum(rng.randint(-9, 9), rng.randint(-9, 9), rng.choice(ds),
                    rng.randint(1, 9)) for _ in range(60)]
    svals = sorted(vals)
    floats = [float(v) for v in svals]
    assert floats == sorted(floats)
    # exact antisymmetry
    for i in range(0, 50, 7):
        for j in range(0, 50, 11):
            assert qn_cmp(svals[i], svals[j]) == -qn_cmp(svals[j], svals[i])


def test_order_translation_invariant():
    rng = random.Random(11)
    for _ in range(40):
        d = rng.choice([2, 3, 5])
        x = QuadNum(rng.randint(-5, 5), rng.randint(-5, 5), d, rng.randint(1, 4))
        y = QuadNum(rng.randint(-5, 5), rng.randint(-5, 5), d, rng.randint(1, 4))
        z = QuadNum(rng.randint(-5, 5), rng.randint(-5, 5), d, rng.randint(1, 4))
        if qn_cmp(x, y) == -1:
            assert qn_cmp(x + z, y + z) == -1


def test_mixed_field_errors():
    rt2, rt3 = Q(0, 1, 2), Q(0, 1, 3)
    with pytest.raises(MixedField):
        rt2 + rt3
    with pytest.raises(MixedField):
        rt2 * rt3
    # comparison across fields is allowed
    assert rt2 < rt3


def test_division_and_inverse():
    t = Q(3, 1, 5, 2)
    assert t * t.inverse() == Q(1)
    assert (t / t) == Q(1)
    assert Q(1) / Q(0, 1, 2) == Q(0, 1, 2, 2)


def test_minus_infinity():
    assert MINUS_INFINITY < Q(-100)
    assert not (MINUS_INFINITY > Q(3))
    assert Q(3) > MINUS_INFINITY
    assert MINUS_INFINITY == MINUS_INFINITY


def test_str_parse_roundtrip():
    values = [Q(3), Q(-7, 0, 0, 2), Q(1, 1, 2), Q(3, 1, 5, 2), Q(0, 1, 2),
              Q(0, -1, 2), Q(1, -2, 3, 4), Q(0, 2, 7, 3), Q(-1, 1, 13, 2)]
    for v in values:
        assert QuadNum.parse(str(v)) == v
    assert QuadNum.parse("(1+sqrt(5))/2") == Q(1, 1, 5, 2)
    assert QuadNum.parse("7") == Q(7)
    assert QuadNum.parse("-3/4") == Q(-3, 0, 0, 4)


def test_powers():
    t = Q(1, 1, 2)
    assert t ** 0 == Q(1)
    assert t ** 3 == t * t * t
    assert t ** -1 == t.inverse()
