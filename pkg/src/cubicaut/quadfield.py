"""Exact arithmetic on real quadratic irrationals (a + b*sqrt(d)) / c.

Every value lives in Q or in a single real quadratic field Q(sqrt(d)) with d
squarefree.  Operations that would leave such a field (for instance multiplying
sqrt(2) by sqrt(3)) raise :class:`MixedField` instead of approximating.
Comparison is decided exactly by clearing one radical at a time; no floating
point enters the trust path.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt

__all__ = ["MixedField", "QuadNum", "MINUS_INFINITY", "qn_add", "qn_mul", "qn_cmp"]


class MixedField(ValueError):
    """Raised when an operation would mix two distinct quadratic fields."""


def squarefree_decompose(n: int) -> tuple[int, int]:
    """Return (s, d) with n = s^2 * d and d squarefree, for n >= 0."""
    if n < 0:
        raise ValueError("negative radicand")
    s, d, p = 1, 1, 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        s *= p ** (e // 2)
        if e % 2:
            d *= p
        p += 1 if p == 2 else 2
    return s, d * n


class _MinusInfinity:
    """Degree of the zero polynomial; compares below every QuadNum."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "-Infinity"

    def __lt__(self, other):
        return not isinstance(other, _MinusInfinity)

    def __le__(self, other):
        return True

    def __gt__(self, other):
        return False

    def __ge__(self, other):
        return isinstance(other, _MinusInfinity)

    def __eq__(self, other):
        return isinstance(other, _MinusInfinity)

    def __hash__(self):
        return hash("MinusInfinity")


MINUS_INFINITY = _MinusInfinity()


class QuadNum:
    """The real number (a + b*sqrt(d)) / c with a, b, c integers, c > 0.

    Normal form: gcd(a, b, c) = 1, d squarefree, and b = 0 forces d = 0, so
    equality of values is equality of representations.
    """

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: int, b: int = 0, d: int = 0, c: int = 1):
        if c == 0:
            raise ZeroDivisionError("denominator is zero")
        s, d0 = squarefree_decompose(d)
        b *= s
        if d0 <= 1:
            # sqrt(0) = 0 and sqrt(1) = 1 are rational.
            a, b, d0 = a + b * (d0 == 1), 0, 0
        if b == 0:
            d0 = 0
        if c < 0:
            a, b, c = -a, -b, -c
        g = gcd(gcd(abs(a), abs(b)), c)
        if g > 1:
            a, b, c = a // g, b // g, c // g
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d0)

    def __setattr__(self, *_):
        raise AttributeError("QuadNum is immutable")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_rational(cls, q) -> QuadNum:
        q = Fraction(q)
        return cls(q.numerator, 0, 0, q.denominator)

    @classmethod
    def sqrt_rational(cls, q) -> QuadNum:
        """Exact square root of a non-negative rational, as a QuadNum."""
        q = Fraction(q)
        if q < 0:
            raise ValueError("square root of a negative rational")
        # sqrt(p/q) = sqrt(p*q) / q
        return cls(0, 1, q.numerator * q.denominator, q.denominator)

    # -- basic queries -----------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def as_rational(self) -> Fraction:
        if self.b != 0:
            raise ValueError(f"{self} is irrational")
        return Fraction(self.a, self.c)

    def conjugate(self) -> QuadNum:
        return QuadNum(self.a, -self.b, self.d, self.c)

    def __bool__(self) -> bool:
        return not (self.a == 0 and self.b == 0)

    def sign(self) -> int:
        """Exact sign in {-1, 0, 1}."""
        a, b = self.a, self.b
        if b == 0:
            return (a > 0) - (a < 0)
        if a >= 0 and b > 0:
            return 1
        if a <= 0 and b < 0:
            return -1
        # a and b have strictly opposite signs; compare a^2 with b^2 d.
        # a^2 = b^2 d never happens: it would force d to be a perfect square.
        if a > 0:
            return 1 if a * a > b * b * self.d else -1
        return -1 if a * a > b * b * self.d else 1

    # -- coercion ----------------------------------------------------------

    @staticmethod
    def _coerce(x):
        if isinstance(x, QuadNum):
            return x
        if isinstance(x, (int, Fraction)):
            return QuadNum.from_rational(x)
        return None

    def _common_field(self, other: QuadNum) -> int:
        if self.b == 0:
            return other.d
        if other.b == 0:
            return self.d
        if self.d != other.d:
            raise MixedField(f"cannot combine sqrt({self.d}) with sqrt({other.d})")
        return self.d

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        d = self._common_field(other)
        a = self.a * other.c + other.a * self.c
        b = self.b * other.c + other.b * self.c
        return QuadNum(a, b, d, self.c * other.c)

    __radd__ = __add__

    def __neg__(self):
        return QuadNum(-self.a, -self.b, self.d, self.c)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        d = self._common_field(other)
        a = self.a * other.a + self.b * other.b * d
        b = self.a * other.b + self.b * other.a
        return QuadNum(a, b, d, self.c * other.c)

    __rmul__ = __mul__

    def inverse(self) -> QuadNum:
        if not self:
            raise ZeroDivisionError("inverse of zero")
        n = self.a * self.a - self.b * self.b * self.d
        # n = 0 would make sqrt(d) rational, impossible for squarefree d >= 2.
        return QuadNum(self.c * self.a, -self.c * self.b, self.d, n)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        base = self if n >= 0 else self.inverse()
        result = QuadNum(1)
        for _ in range(abs(n)):
            result = result * base
        return result

    # -- order ---------------------------------------------------------------

    def cmp(self, other) -> int:
        """Exact comparison, allowed across different quadratic fields."""
        other = self._coerce(other)
        if other is None:
            raise TypeError(f"cannot compare QuadNum with {type(other)!r}")
        if self.b == 0 or other.b == 0 or self.d == other.d:
            return (self - other).sign()
        # x - y = A + B sqrt(d1) + C sqrt(d2) with B, C != 0 and d1 != d2.
        # Compare t1 = A + B sqrt(d1) against t2 = -C sqrt(d2); when both
        # sides have the same strict sign, square them (one radical remains).
        t1 = QuadNum(self.a * other.c, self.b * other.c, self.d, self.c * other.c)
        t1 = t1 - Fraction(other.a, other.c)
        t2 = QuadNum(0, other.b * self.c, other.d, other.c * self.c)
        s1, s2 = t1.sign(), t2.sign()
        if s1 != s2:
            return 1 if s1 > s2 else -1
        if s1 == 0:
            return 0
        sq_diff = (t1 * t1) - (t2 * t2).as_rational()
        # Equality of squares would entail sqrt(d1) in Q(sqrt(d2)); impossible.
        return sq_diff.sign() if s1 > 0 else -sq_diff.sign()

    def __eq__(self, other):
        if isinstance(other, _MinusInfinity):
            return False
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return (self.a, self.b, self.c, self.d) == (other.a, other.b, other.c, other.d)

    def __hash__(self):
        return hash((self.a, self.b, self.c, self.d))

    def __lt__(self, other):
        if isinstance(other, _MinusInfinity):
            return False
        return self.cmp(other) < 0

    def __le__(self, other):
        if isinstance(other, _MinusInfinity):
            return False
        return self.cmp(other) <= 0

    def __gt__(self, other):
        if isinstance(other, _MinusInfinity):
            return True
        return self.cmp(other) > 0

    def __ge__(self, other):
        if isinstance(other, _MinusInfinity):
            return True
        return self.cmp(other) >= 0

    # -- text ------------------------------------------------------------------

    def __float__(self) -> float:
        # Convenience only; never used for decisions.
        return (self.a + self.b * self.d ** 0.5) / self.c

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a) if self.c == 1 else f"{self.a}/{self.c}"
        root = f"sqrt({self.d})"
        if self.b == -1:
            core = f"-{root}"
        elif self.b == 1:
            core = root
        else:
            core = f"{self.b}*{root}"
        if self.a != 0:
            core = f"{self.a}+{core}" if self.b > 0 else f"{self.a}{core}"
        if self.c == 1:
            return core
        return f"({core})/{self.c}"

    def __repr__(self) -> str:
        return f"QuadNum({self})"

    @classmethod
    def parse(cls, text: str) -> QuadNum:
        """Parse the textual forms produced by :meth:`__str__`.

        Accepts "(a+b*sqrt(d))/c" with the shorthands used when printing, plus
        plain integers and rationals "a/b".
        """
        s = text.strip().replace(" ", "")
        c = 1
        if s.startswith("("):
            close = s.rindex(")")
            inner, rest = s[1:close], s[close + 1:]
            if rest.startswith("/"):
                c = int(rest[1:])
                s = inner
            elif rest == "":
                s = inner
            else:
                raise ValueError(f"cannot parse QuadNum {text!r}")
        if "sqrt" not in s:
            q = Fraction(s)
            return cls(q.numerator, 0, 0, q.denominator * c)
        idx = s.index("sqrt(")
        if not s.endswith(")"):
            raise ValueError(f"cannot parse QuadNum {text!r}")
        d = int(s[idx + 5:-1])
        head = s[:idx]
        if head.endswith("*"):
            head = head[:-1]
        a = 0
        b_str = head
        for k in range(len(head) - 1, 0, -1):
            if head[k] in "+-":
                a = int(head[:k])
                b_str = head[k:]
                break
        if b_str in ("", "+"):
            b = 1
        elif b_str == "-":
            b = -1
        else:
            b = int(b_str)
        return cls(a, b, d, c)


def qn_add(x: QuadNum, y: QuadNum) -> QuadNum:
    return x + y


def qn_mul(x: QuadNum, y: QuadNum) -> QuadNum:
    return x * y


def qn_cmp(x: QuadNum, y: QuadNum) -> int:
    """-1, 0 or 1 according to the exact order of the real values."""
    return x.cmp(y)
