"""Sparse exact multivariate polynomials over Q or F_q.

A :class:`Poly` is an immutable map from exponent tuples to nonzero field
elements, tied to a :class:`Ring` (variable count + coefficient field).
Canonical printing uses graded lexicographic order so output is byte-stable.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .fields import QQ, FFElement, FieldExtensionNeeded, FiniteField, RationalField
from .quadfield import MINUS_INFINITY, MixedField, QuadNum


class RingMismatch(ValueError):
    """Operands live in different polynomial rings."""


class ParseError(ValueError):
    def __init__(self, message, position=None, expected=None):
        super().__init__(message)
        self.position = position
        self.expected = expected or set()


class Ring:
    """Context for polynomials: number of variables and coefficient field."""

    __slots__ = ("nvars", "field", "_names")

    def __init__(self, nvars: int, field=QQ):
        self.nvars = nvars
        self.field = field
        if nvars <= 3:
            self._names = ("x", "y", "z")[:nvars]
        else:
            self._names = tuple(f"x{i + 1}" for i in range(nvars))

    def __eq__(self, other):
        return (
            isinstance(other, Ring)
            and self.nvars == other.nvars
            and self.field == other.field
        )

    def __hash__(self):
        return hash((self.nvars, self.field))

    def __repr__(self):
        return f"Ring({self.nvars}, {self.field})"

    @property
    def names(self):
        return self._names

    def zero(self) -> "Poly":
        return Poly(self, {})

    def one(self) -> "Poly":
        return self.const(1)

    def const(self, c) -> "Poly":
        c = self.field.coerce(c)
        if not c:
            return Poly(self, {})
        return Poly(self, {(0,) * self.nvars: c})

    def var(self, i: int) -> "Poly":
        e = [0] * self.nvars
        e[i] = 1
        return Poly(self, {tuple(e): self.field.one})

    def gens(self) -> tuple:
        return tuple(self.var(i) for i in range(self.nvars))

    def monomial(self, exponents, coeff=1) -> "Poly":
        c = self.field.coerce(coeff)
        if not c:
            return Poly(self, {})
        return Poly(self, {tuple(exponents): c})

    def change_field(self, field) -> "Ring":
        return Ring(self.nvars, field)


def _grlex_key(e):
    return (sum(e), e)


class Poly:
    """Immutable sparse polynomial."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: Ring, terms: dict):
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "terms", terms)

    def __setattr__(self, *_):
        raise AttributeError("Poly is immutable")

    # -- ring plumbing -----------------------------------------------------

    def _coerce_other(self, other):
        if isinstance(other, Poly):
            if other.ring != self.ring:
                raise RingMismatch(f"{self.ring} vs {other.ring}")
            return other
        if isinstance(other, (int, Fraction, FFElement)):
            return self.ring.const(other)
        return None

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_coeff(self):
        return self.terms.get((0,) * self.ring.nvars, self.ring.field.zero)

    def __bool__(self):
        return bool(self.terms)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        other = self._coerce_other(other)
        if other is None:
            return NotImplemented
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e)
            s = c if s is None else s + c
            if s:
                out[e] = s
            elif e in out:
                del out[e]
        return Poly(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce_other(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce_other(other)
        if other is None:
            return NotImplemented
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        out: dict = {}
        get = out.get
        if self.ring.nvars == 3:
            for (a0, a1, a2), c1 in a.items():
                for (b0, b1, b2), c2 in b.items():
                    k = (a0 + b0, a1 + b1, a2 + b2)
                    s = get(k)
                    s = c1 * c2 if s is None else s + c1 * c2
                    if s:
                        out[k] = s
                    elif k in out:
                        del out[k]
            return Poly(self.ring, out)
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                k = tuple(map(sum, zip(e1, e2)))
                s = get(k)
                s = c1 * c2 if s is None else s + c1 * c2
                if s:
                    out[k] = s
                elif k in out:
                    del out[k]
        return Poly(self.ring, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def scale(self, c):
        c = self.ring.field.coerce(c)
        if not c:
            return self.ring.zero()
        return Poly(self.ring, {e: cc * c for e, cc in self.terms.items()})

    def __eq__(self, other):
        other = self._coerce_other(other)
        if other is None:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash((self.ring, frozenset(self.terms.items())))

    # -- structure -----------------------------------------------------------

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, i: int) -> int:
        return max((e[i] for e in self.terms), default=-1)

    def homogeneous_part(self, d: int) -> "Poly":
        return Poly(self.ring, {e: c for e, c in self.terms.items() if sum(e) == d})

    def homogeneous_parts(self) -> dict:
        out: dict = {}
        for e, c in self.terms.items():
            out.setdefault(sum(e), {})[e] = c
        return {d: Poly(self.ring, t) for d, t in sorted(out.items())}

    def is_homogeneous(self) -> bool:
        degs = {sum(e) for e in self.terms}
        return len(degs) <= 1

    def coefficient_in_var(self, i: int, power: int) -> "Poly":
        """Coefficient of x_i^power, as a polynomial in the same ring."""
        out = {}
        for e, c in self.terms.items():
            if e[i] == power:
                e2 = list(e)
                e2[i] = 0
                out[tuple(e2)] = c
        return Poly(self.ring, out)

    def coefficient_of(self, exponents) -> object:
        return self.terms.get(tuple(exponents), self.ring.field.zero)

    def variables_used(self) -> set:
        used = set()
        for e in self.terms:
            for i, ei in enumerate(e):
                if ei:
                    used.add(i)
        return used

    def partial_derivative(self, i: int) -> "Poly":
        out = {}
        field = self.ring.field
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                cc = c * field.coerce(e[i]) if isinstance(field, FiniteField) else c * e[i]
                if cc:
                    k = tuple(e2)
                    s = out.get(k)
                    out[k] = cc if s is None else s + cc
        return Poly(self.ring, {e: c for e, c in out.items() if c})

    def subst(self, images: Sequence["Poly"]) -> "Poly":
        """Substitute images[i] for variable i; exact composition."""
        if len(images) != self.ring.nvars:
            raise RingMismatch("wrong number of substitution images")
        target = images[0].ring if images else self.ring
        for g in images:
            if g.ring != target:
                raise RingMismatch("substitution images live in different rings")
        if target.field != self.ring.field:
            raise RingMismatch("substitution across different coefficient fields")
        acc = target.zero()
        cache: dict = {}
        for e, c in self.terms.items():
            term = target.const(c)
            for i, ei in enumerate(e):
                if ei:
                    key = (i, ei)
                    power = cache.get(key)
                    if power is None:
                        power = images[i] ** ei
                        cache[key] = power
                    term = term * power
            acc = acc + term
        return acc

    def eval(self, point) -> object:
        """Evaluate at a tuple of field elements."""
        field = self.ring.field
        acc = field.zero
        for e, c in self.terms.items():
            v = c
            for i, ei in enumerate(e):
                for _ in range(ei):
                    v = v * point[i]
            acc = acc + v
        return acc

    def map_field(self, new_field, convert) -> "Poly":
        """Move to a different coefficient field via `convert`."""
        ring = Ring(self.ring.nvars, new_field)
        out = {}
        for e, c in self.terms.items():
            cc = convert(c)
            if cc:
                out[e] = cc
        return Poly(ring, out)

    def leading_term_grlex(self):
        e = max(self.terms, key=_grlex_key)
        return e, self.terms[e]

    def content_normalize(self) -> "Poly":
        """Divide by the leading grlex coefficient (monic normalization)."""
        if not self.terms:
            return self
        _, c = self.leading_term_grlex()
        inv = 1 / c if not isinstance(c, Fraction) else Fraction(1) / c
        return self.scale(inv)

    # -- weighted (mu) structure ----------------------------------------------

    def mu_degree(self, mu: "WeightVector"):
        """Maximum of sum(e_j mu_j) over terms; MINUS_INFINITY when zero."""
        if not self.terms:
            return MINUS_INFINITY
        best = None
        for e in self.terms:
            w = mu.weight_of(e)
            if best is None or w > best:
                best = w
        return best

    def mu_part(self, mu: "WeightVector", r: QuadNum) -> "Poly":
        out = {e: c for e, c in self.terms.items() if mu.weight_of(e) == r}
        return Poly(self.ring, out)

    # -- division ----------------------------------------------------------

    def divide_exact(self, divisor: "Poly"):
        """Quotient q with self = q * divisor, or None when not divisible."""
        if divisor.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        rem = self
        q = self.ring.zero()
        lead_e, lead_c = divisor.leading_term_grlex()
        while rem.terms:
            re, rc = rem.leading_term_grlex()
            diff = tuple(a - b for a, b in zip(re, lead_e))
            if any(d < 0 for d in diff):
                return None
            t = self.ring.monomial(diff, rc / lead_c)
            q = q + t
            rem = rem - t * divisor
        return q

    def divides(self, other: "Poly") -> bool:
        return other.divide_exact(self) is not None

    # -- printing ----------------------------------------------------------

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        field = self.ring.field
        names = self.ring.names
        items = sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)
        pieces = []
        for e, c in items:
            mono = "*".join(
                f"{names[i]}^{ei}" if ei > 1 else names[i]
                for i, ei in enumerate(e)
                if ei
            )
            cs = field.format_coeff(c)
            neg = cs.startswith("-")
            body = cs[1:] if neg else cs
            if mono:
                if body == "1":
                    text = mono
                else:
                    text = f"{body}*{mono}"
            else:
                text = body
            if not pieces:
                pieces.append(("-" if neg else "") + text)
            else:
                pieces.append(("- " if neg else "+ ") + text)
        return " ".join(pieces)

    def __repr__(self):
        return f"Poly({self})"


class WeightVector:
    """Vector of QuadNum weights, one per variable, with exact arithmetic."""

    __slots__ = ("entries", "_cache")

    def __init__(self, entries: Iterable):
        entries = tuple(
            e if isinstance(e, QuadNum) else QuadNum.from_rational(e) for e in entries
        )
        ds = {e.d for e in entries if e.d != 0}
        if len(ds) > 1:
            raise MixedField(f"weights live in incompatible fields: {sorted(ds)}")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "_cache", {})

    def __setattr__(self, *_):
        raise AttributeError("WeightVector is immutable")

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def __repr__(self):
        return f"WeightVector({', '.join(map(str, self.entries))})"

    @property
    def all_positive(self) -> bool:
        return all(e.sign() > 0 for e in self.entries)

    @property
    def all_nonnegative(self) -> bool:
        return all(e.sign() >= 0 for e in self.entries)

    def weight_of(self, exponents) -> QuadNum:
        cached = self._cache.get(exponents)
        if cached is not None:
            return cached
        acc = QuadNum(0)
        for ei, mu in zip(exponents, self.entries):
            if ei:
                acc = acc + mu * ei
        self._cache[exponents] = acc
        return acc

    def scale(self, s) -> "WeightVector":
        s = s if isinstance(s, QuadNum) else QuadNum.from_rational(s)
        return WeightVector(tuple(e * s for e in self.entries))


# -- spec-level operation aliases ---------------------------------------------


def poly_mul(p: Poly, q: Poly) -> Poly:
    return p * q


def poly_subst(p: Poly, images: Sequence[Poly]) -> Poly:
    return p.subst(images)


def homogeneous_part(p: Poly, d: int) -> Poly:
    return p.homogeneous_part(d)


def mu_degree(p: Poly, mu: WeightVector):
    return p.mu_degree(mu)


def mu_part(p: Poly, mu: WeightVector, r: QuadNum) -> Poly:
    return p.mu_part(mu, r)


def partial_derivative(p: Poly, i: int) -> Poly:
    return p.partial_derivative(i)


# -- parsing -------------------------------------------------------------------


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def error(self, expected):
        raise ParseError(
            f"parse error at offset {self.pos} in {self.text!r}: expected {expected}",
            position=self.pos,
            expected={expected},
        )


def parse_poly(text: str, ring: Ring) -> Poly:
    """Parse the ASCII polynomial grammar into an exact Poly.

    Grammar: variables (x, y, z or x1..xn), integer and a/b rational
    literals, operators + - * ^ and parentheses.  Implicit multiplication
    is rejected.
    """
    toks = _Tokens(text)
    p = _parse_sum(toks, ring)
    toks.skip_ws()
    if toks.pos != len(text):
        toks.error("end of input")
    return p


def _parse_sum(toks: _Tokens, ring: Ring) -> Poly:
    sign = 1
    while toks.peek() in ("+", "-"):
        if toks.peek() == "-":
            sign = -sign
        toks.pos += 1
    acc = _parse_product(toks, ring)
    if sign < 0:
        acc = -acc
    while toks.peek() in ("+", "-"):
        op = toks.peek()
        toks.pos += 1
        sign = 1 if op == "+" else -1
        while toks.peek() in ("+", "-"):
            if toks.peek() == "-":
                sign = -sign
            toks.pos += 1
        term = _parse_product(toks, ring)
        acc = acc + (term if sign > 0 else -term)
    return acc


def _parse_product(toks: _Tokens, ring: Ring) -> Poly:
    acc = _parse_power(toks, ring)
    while True:
        c = toks.peek()
        if c == "*":
            toks.pos += 1
            acc = acc * _parse_power(toks, ring)
        elif c and (c.isalnum() or c == "("):
            toks.error("operator (implicit multiplication is not allowed)")
        else:
            return acc


def _parse_power(toks: _Tokens, ring: Ring) -> Poly:
    base = _parse_atom(toks, ring)
    if toks.peek() == "^":
        toks.pos += 1
        toks.skip_ws()
        start = toks.pos
        while toks.pos < len(toks.text) and toks.text[toks.pos].isdigit():
            toks.pos += 1
        if toks.pos == start:
            toks.error("non-negative integer exponent")
        return base ** int(toks.text[start:toks.pos])
    return base


def _parse_atom(toks: _Tokens, ring: Ring) -> Poly:
    c = toks.peek()
    if c == "(":
        toks.pos += 1
        inner = _parse_sum(toks, ring)
        if toks.peek() != ")":
            toks.error("')'")
        toks.pos += 1
        return inner
    if c.isdigit():
        start = toks.pos
        while toks.pos < len(toks.text) and toks.text[toks.pos].isdigit():
            toks.pos += 1
        num = int(toks.text[start:toks.pos])
        if toks.peek() == "/":
            save = toks.pos
            toks.pos += 1
            toks.skip_ws()
            start = toks.pos
            while toks.pos < len(toks.text) and toks.text[toks.pos].isdigit():
                toks.pos += 1
            if toks.pos == start:
                toks.pos = save
                return ring.const(num)
            den = int(toks.text[start:toks.pos])
            if den == 0:
                toks.error("nonzero denominator")
            return ring.const(Fraction(num, den))
        return ring.const(num)
    if c.isalpha():
        start = toks.pos
        while toks.pos < len(toks.text) and toks.text[toks.pos].isalnum():
            toks.pos += 1
        name = toks.text[start:toks.pos]
        try:
            idx = ring.names.index(name)
        except ValueError:
            toks.error(f"variable among {ring.names}")
        return ring.var(idx)
    toks.error("term")


# -- binary forms ---------------------------------------------------------------


def binary_form_roots(p: Poly, auto_extend: bool = True):
    """Projective roots with multiplicity of a homogeneous binary form, deg <= 3.

    The form must involve at most two variables.  Returns
    (roots, active_pair, field) where roots is a list of ((u0, v0), mult) with
    coordinates in `field` (an automatic extension over F_q).  Over Q a root
    escaping the field raises FieldExtensionNeeded carrying the residual
    irreducible polynomial.
    """
    from .uniroots import roots_with_multiplicity

    if p.is_zero():
        raise ValueError("zero form has no well-defined root list")
    if not p.is_homogeneous():
        raise ValueError("binary_form_roots expects a homogeneous form")
    used = sorted(p.variables_used())
    if len(used) > 2:
        raise ValueError("form uses more than two variables")
    if len(used) == 0:
        raise ValueError("constant form")
    if len(used) == 1:
        used = [used[0], (used[0] + 1) % p.ring.nvars]
        used.sort()
    u, v = used
    d = p.degree()
    if d > 3:
        raise ValueError("binary_form_roots supports degree <= 3")
    field = p.ring.field
    # dehomogenize: g(t) = p at u = t, v = 1
    coeffs = [field.zero] * (d + 1)
    for e, c in p.terms.items():
        coeffs[e[u]] = c
    inf_mult = d - max(i for i, c in enumerate(coeffs) if c)
    roots, residual, out_field = roots_with_multiplicity(coeffs, field, auto_extend)
    if residual is not None:
        raise FieldExtensionNeeded(
            "binary form has roots outside the coefficient field",
            minimal_polynomial=residual,
        )
    result = []
    one = out_field.one if isinstance(out_field, FiniteField) else Fraction(1)
    zero = out_field.zero if isinstance(out_field, FiniteField) else Fraction(0)
    for r, m in roots:
        result.append(((r, one), m))
    if inf_mult:
        result.append(((one, zero), inf_mult))
    return result, (u, v), out_field
