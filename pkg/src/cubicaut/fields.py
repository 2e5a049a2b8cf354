"""Coefficient fields: the rationals and finite fields F_{p^k}.

Rational coefficients are plain :class:`fractions.Fraction` values.  Finite
field elements are :class:`FFElement` wrappers around polynomial residues
modulo a deterministic defining polynomial, so the same field object is
reconstructed identically across runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache


class FieldExtensionNeeded(ValueError):
    """A root lies outside the coefficient field.

    Over Q the offending minimal (or residual) polynomial is attached; over
    finite fields extensions are instead constructed automatically.
    """

    def __init__(self, message, minimal_polynomial=None):
        super().__init__(message)
        self.minimal_polynomial = minimal_polynomial


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    p = 2
    while p * p <= n:
        if n % p == 0:
            return False
        p += 1
    return True


def _polymulmod(u, v, defining, p):
    """Multiply coefficient tuples u, v modulo (defining, p).

    `defining` holds the k non-leading coefficients of the monic modulus.
    """
    k = len(defining)
    prod = [0] * (len(u) + len(v) - 1)
    for i, ui in enumerate(u):
        if ui:
            for j, vj in enumerate(v):
                prod[i + j] = (prod[i + j] + ui * vj) % p
    # reduce modulo the monic defining polynomial
    for i in range(len(prod) - 1, k - 1, -1):
        c = prod[i]
        if c:
            prod[i] = 0
            for j in range(k):
                prod[i - k + j] = (prod[i - k + j] - c * defining[j]) % p
    return tuple(prod[:k]) + (0,) * (k - len(prod))


class RationalField:
    """The field Q; a stateless singleton wrapper over Fraction."""

    characteristic = 0
    extension_degree = 1

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    zero = Fraction(0)
    one = Fraction(1)

    def __call__(self, x) -> Fraction:
        return Fraction(x)

    def __repr__(self):
        return "QQ"

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")

    @property
    def is_finite(self):
        return False

    def coerce(self, x):
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int):
            return Fraction(x)
        raise TypeError(f"cannot coerce {x!r} into QQ")

    def format_coeff(self, x: Fraction) -> str:
        return str(x)


QQ = RationalField()


@dataclass(frozen=True)
class FFElement:
    """An element of F_{p^k}, stored as a residue tuple of length k."""

    field: "FiniteField"
    coeffs: tuple

    def __add__(self, other):
        other = self.field.coerce(other)
        p = self.field.p
        return FFElement(self.field, tuple((a + b) % p for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        p = self.field.p
        return FFElement(self.field, tuple((-a) % p for a in self.coeffs))

    def __sub__(self, other):
        other = self.field.coerce(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self.field.coerce(other)
        f = self.field
        return FFElement(f, _polymulmod(self.coeffs, other.coeffs, f.defining, f.p))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        f = self.field
        if n < 0:
            return self.inverse() ** (-n)
        result, base = f.one, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inverse(self):
        if not self:
            raise ZeroDivisionError("inverse of zero")
        # |F*| = q - 1
        return self ** (self.field.order - 2)

    def __truediv__(self, other):
        other = self.field.coerce(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.field.coerce(other) * self.inverse()

    def __bool__(self):
        return any(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, int):
            return self == self.field.coerce(other)
        if isinstance(other, FFElement):
            return self.field == other.field and self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash((self.field.p, self.field.k, self.coeffs))

    def __repr__(self):
        return self.field.format_coeff(self)


class FiniteField:
    """F_{p^k} with the lexicographically least monic irreducible modulus."""

    def __init__(self, p: int, k: int = 1):
        if not _is_prime(p):
            raise ValueError(f"{p} is not prime")
        if k < 1:
            raise ValueError("extension degree must be >= 1")
        self.p = p
        self.k = k
        self.order = p ** k
        self.characteristic = p
        self.extension_degree = k
        # defining[0..k-1] are the non-leading coefficients of the monic modulus
        self.defining = _find_irreducible(p, k)
        self.zero = FFElement(self, (0,) * k)
        one = [0] * k
        one[0] = 1
        self.one = FFElement(self, tuple(one))

    def __repr__(self):
        return f"GF({self.p})" if self.k == 1 else f"GF({self.p}^{self.k})"

    def __eq__(self, other):
        return (
            isinstance(other, FiniteField)
            and (self.p, self.k, self.defining) == (other.p, other.k, other.defining)
        )

    def __hash__(self):
        return hash((self.p, self.k, self.defining))

    @property
    def is_finite(self):
        return True

    def __call__(self, x) -> FFElement:
        return self.coerce(x)

    def coerce(self, x):
        if isinstance(x, FFElement):
            if x.field == self:
                return x
            if x.field.p == self.p and self.k % x.field.k == 0:
                return self.embed(x)
            raise TypeError(f"cannot coerce element of {x.field} into {self}")
        if isinstance(x, int):
            coeffs = [0] * self.k
            coeffs[0] = x % self.p
            return FFElement(self, tuple(coeffs))
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise ZeroDivisionError(f"{x} has no image in {self}")
            return self.coerce(x.numerator) / self.coerce(x.denominator)
        raise TypeError(f"cannot coerce {x!r} into {self}")

    def from_tuple(self, coeffs) -> FFElement:
        coeffs = tuple(c % self.p for c in coeffs)
        if len(coeffs) != self.k:
            raise ValueError("wrong residue length")
        return FFElement(self, coeffs)

    def elements(self):
        """Iterate all q elements in a deterministic order."""
        def rec(i, acc):
            if i == self.k:
                yield FFElement(self, tuple(acc))
                return
            for c in range(self.p):
                yield from rec(i + 1, acc + [c])
        yield from rec(0, [])

    def generator_element(self) -> FFElement:
        """The class of t, a root of the defining polynomial (k >= 2)."""
        coeffs = [0] * self.k
        coeffs[1 if self.k > 1 else 0] = 1
        return FFElement(self, tuple(coeffs))

    def extension(self, m: int) -> "FiniteField":
        return FiniteField(self.p, self.k * m)

    @lru_cache(maxsize=None)
    def _embedding_image(self, target: "FiniteField") -> FFElement:
        """Image of this field's generator in the target field.

        Chosen as the deterministically first root of our defining polynomial
        in the target, so embeddings are reproducible.
        """
        if target.p != self.p or target.k % self.k != 0:
            raise ValueError("no embedding")
        if self.k == 1:
            return target.one
        for cand in target.elements():
            acc = cand ** self.k
            power = target.one
            for c in self.defining:
                if c:
                    acc = acc + power * c
                power = power * cand
            if not acc:
                return cand
        raise RuntimeError("embedding root not found")  # pragma: no cover

    def embed(self, x: FFElement) -> FFElement:
        """Embed an element of a subfield F_{p^j} into this field."""
        src = x.field
        root = src._embedding_image(self)
        acc = self.zero
        power = self.one
        for c in x.coeffs:
            if c:
                acc = acc + power * c
            power = power * root
        return acc

    def sqrt(self, x: FFElement):
        """A square root of x in this field, or None."""
        x = self.coerce(x)
        if self.p == 2:
            return x ** (self.order // 2)
        if not x:
            return self.zero
        if x ** ((self.order - 1) // 2) != self.one:
            return None
        for cand in self.elements():
            if cand * cand == x:
                return cand
        return None  # pragma: no cover

    def nth_root(self, x: FFElement, n: int):
        """Some y with y^n = x, or None; brute force (fields here are small)."""
        x = self.coerce(x)
        for cand in self.elements():
            if cand ** n == x:
                return cand
        return None

    def format_coeff(self, x: FFElement) -> str:
        if self.k == 1:
            return str(x.coeffs[0])
        terms = []
        for i, c in enumerate(x.coeffs):
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            else:
                head = "" if c == 1 else f"{c}*"
                terms.append(f"{head}t" + (f"^{i}" if i > 1 else ""))
        return "[" + ("+".join(terms) if terms else "0") + "]"


@lru_cache(maxsize=None)
def _find_irreducible(p: int, k: int) -> tuple:
    """Non-leading coefficients of the lex-least monic irreducible of degree k."""
    if k == 1:
        return (0,)

    def is_irreducible(coeffs):
        # x^q^i gcd test is overkill at this size: check for roots and for
        # divisibility by every monic polynomial of degree <= k // 2.
        def poly_eval(a):
            acc = 0
            for c in reversed(coeffs + (1,)):
                acc = (acc * a + c) % p
            return acc

        if any(poly_eval(a) == 0 for a in range(p)):
            return False
        full = list(coeffs) + [1]
        for deg in range(2, k // 2 + 1):
            for code in range(p ** deg):
                div = []
                m = code
                for _ in range(deg):
                    div.append(m % p)
                    m //= p
                div.append(1)
                # polynomial remainder of full by div
                rem = list(full)
                for i in range(len(rem) - 1, deg - 1, -1):
                    c = rem[i]
                    if c:
                        rem[i] = 0
                        for j in range(deg):
                            rem[i - deg + j] = (rem[i - deg + j] - c * div[j]) % p
                if not any(rem[:deg]):
                    return False
        return True

    for code in range(p ** k):
        coeffs = []
        m = code
        for _ in range(k):
            coeffs.append(m % p)
            m //= p
        coeffs = tuple(coeffs)
        if is_irreducible(coeffs):
            return coeffs
    raise RuntimeError("no irreducible polynomial found")  # pragma: no cover


def GF(p: int, k: int = 1) -> FiniteField:
    return _gf_cache(p, k)


@lru_cache(maxsize=None)
def _gf_cache(p: int, k: int) -> FiniteField:
    return FiniteField(p, k)


@dataclass(frozen=True)
class FieldSpec:
    """Serializable description of a coefficient field."""

    characteristic: int = 0
    extension_degree: int = 1

    def build(self):
        if self.characteristic == 0:
            return QQ
        return GF(self.characteristic, self.extension_degree)
