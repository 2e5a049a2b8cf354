"""Univariate helpers: exact root finding, resultants, integer nth roots.

Root finding is complete over F_q (with automatic extension) and finds all
rational roots over Q, returning the rational-root-free residual so callers
can surface FieldExtensionNeeded honestly.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt

from .fields import QQ, FiniteField, RationalField


def trim(coeffs, zero):
    """Drop trailing zero coefficients (ascending order)."""
    out = list(coeffs)
    while out and not out[-1]:
        out.pop()
    return out


def poly_eval(coeffs, a, zero):
    acc = zero
    for c in reversed(coeffs):
        acc = acc * a + c
    return acc


def synthetic_divide(coeffs, root, field):
    """Divide by (t - root); assumes root is an actual root. Ascending order."""
    n = len(coeffs) - 1
    out = [field.zero] * n
    carry = coeffs[-1]
    for i in range(n - 1, -1, -1):
        out[i] = carry
        carry = coeffs[i] + carry * root
    return out


def _divisors(n: int):
    n = abs(n)
    out = []
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            if i != n // i:
                out.append(n // i)
        i += 1
    return sorted(out)


def rational_roots(coeffs):
    """All rational roots (with multiplicity) of a Q[t] polynomial.

    Returns (roots, residual) where residual is the remaining factor with no
    rational roots (None when the polynomial splits over Q into linears times
    a constant).
    """
    coeffs = trim([Fraction(c) for c in coeffs], Fraction(0))
    if not coeffs:
        raise ZeroDivisionError("zero polynomial has every root")
    roots = []
    # strip roots at zero
    while len(coeffs) > 1 and coeffs[0] == 0:
        roots.append((Fraction(0), 1))
        coeffs = coeffs[1:]
    if roots:
        roots = [(Fraction(0), len(roots))]
    while len(coeffs) > 1:
        den = 1
        for c in coeffs:
            den = den * c.denominator // gcd(den, c.denominator)
        ints = [int(c * den) for c in coeffs]
        g = 0
        for c in ints:
            g = gcd(g, abs(c))
        if g > 1:
            ints = [c // g for c in ints]
        found = None
        a0, an = ints[0], ints[-1]
        for p in _divisors(a0):
            for q in _divisors(an):
                if gcd(p, q) != 1:
                    continue
                for cand in (Fraction(p, q), Fraction(-p, q)):
                    if poly_eval(coeffs, cand, Fraction(0)) == 0:
                        found = cand
                        break
                if found is not None:
                    break
            if found is not None:
                break
        if found is None:
            break
        mult = 0
        while len(coeffs) > 1 and poly_eval(coeffs, found, Fraction(0)) == 0:
            coeffs = synthetic_divide(coeffs, found, QQ)
            mult += 1
        roots.append((found, mult))
    residual = coeffs if len(coeffs) > 1 else None
    return roots, residual


def ff_roots(coeffs, field: FiniteField):
    """All roots in the given finite field, with multiplicity, plus residual."""
    coeffs = trim([field.coerce(c) for c in coeffs], field.zero)
    if not coeffs:
        raise ZeroDivisionError("zero polynomial has every root")
    roots = []
    for a in field.elements():
        if len(coeffs) <= 1:
            break
        mult = 0
        while len(coeffs) > 1 and not poly_eval(coeffs, a, field.zero):
            coeffs = synthetic_divide(coeffs, a, field)
            mult += 1
        if mult:
            roots.append((a, mult))
    residual = coeffs if len(coeffs) > 1 else None
    return roots, residual


def roots_with_multiplicity(coeffs, field, auto_extend: bool = True):
    """Roots of a polynomial over Q or F_q.

    Over Q: rational roots plus a residual (irrational part) or None.
    Over F_q with auto_extend: extends the field until the polynomial splits;
    returns (roots, None, splitting_field) with all roots coerced there.
    """
    if isinstance(field, RationalField):
        roots, residual = rational_roots(coeffs)
        return roots, residual, field
    roots, residual = ff_roots(coeffs, field)
    if residual is None or not auto_extend:
        return roots, residual, field
    # extend degree by degree until the residual splits
    deg = len(residual) - 1
    for m in range(2, deg + 1):
        ext = field.extension(m)
        lifted = [ext.embed(c) for c in residual]
        more, res2 = ff_roots(lifted, ext)
        if res2 is None:
            all_roots = [(ext.embed(r), mult) for r, mult in roots] + more
            return all_roots, None, ext
    # splitting field of a degree-d polynomial has degree <= d!; for deg <= 6
    # the loop above suffices unless the residual is irreducible of prime
    # degree times another factor; fall back to the full splitting extension.
    for m in range(deg + 1, deg * deg + 1):
        ext = field.extension(m)
        lifted = [ext.embed(c) for c in residual]
        more, res2 = ff_roots(lifted, ext)
        if res2 is None:
            all_roots = [(ext.embed(r), mult) for r, mult in roots] + more
            return all_roots, None, ext
    raise RuntimeError("failed to split polynomial over extensions")  # pragma: no cover


def resultant(pc, qc, field):
    """Resultant of two univariate polynomials given by ascending coefficients."""
    pc = trim(list(pc), field.zero)
    qc = trim(list(qc), field.zero)
    if not pc or not qc:
        return field.zero
    m, n = len(pc) - 1, len(qc) - 1
    if m == 0:
        return pc[0] ** n if n else field.one
    if n == 0:
        return qc[0] ** m
    size = m + n
    rows = []
    for i in range(n):
        row = [field.zero] * size
        for j, c in enumerate(reversed(pc)):
            row[i + j] = c
        rows.append(row)
    for i in range(m):
        row = [field.zero] * size
        for j, c in enumerate(reversed(qc)):
            row[i + j] = c
        rows.append(row)
    return _det(rows, field)


def _det(rows, field):
    """Exact determinant by fraction-producing Gaussian elimination."""
    n = len(rows)
    rows = [list(r) for r in rows]
    det = field.one
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if rows[r][col]:
                pivot = r
                break
        if pivot is None:
            return field.zero
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            det = -det
        pv = rows[col][col]
        det = det * pv
        inv = field.one / pv if isinstance(field, FiniteField) else 1 / pv
        for r in range(col + 1, n):
            factor = rows[r][col] * inv
            if factor:
                for c in range(col, n):
                    rows[r][c] = rows[r][c] - factor * rows[col][c]
    return det


def poly_gcd(a, b, field):
    """Monic gcd of univariate polynomials over a field (ascending coeffs)."""
    a = trim(list(a), field.zero)
    b = trim(list(b), field.zero)
    while b:
        # a mod b
        a = list(a)
        db, lead = len(b) - 1, b[-1]
        inv = field.one / lead if not isinstance(field, RationalField) else 1 / lead
        while len(a) - 1 >= db and a:
            k = len(a) - 1 - db
            c = a[-1] * inv
            for i in range(db + 1):
                a[k + i] = a[k + i] - c * b[i]
            a = trim(a, field.zero)
        a, b = b, a
    if a:
        lead = a[-1]
        inv = field.one / lead if not isinstance(field, RationalField) else 1 / lead
        a = [c * inv for c in a]
    return a


def integer_nth_root_floor(n: int, k: int) -> int:
    """Largest r with r^k <= n, for n >= 0, k >= 1."""
    if n < 0:
        raise ValueError("negative radicand")
    if k == 1:
        return n
    if k == 2:
        return isqrt(n)
    if n in (0, 1):
        return n
    r = int(round(n ** (1.0 / k)))
    while r > 0 and r ** k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def nth_root_upper(n: int, k: int, digits: int = 9) -> Fraction:
    """Smallest Fraction with denominator 10^digits that is >= n^(1/k)."""
    scale = 10 ** digits
    num = integer_nth_root_floor(n * scale ** k, k)
    if num ** k < n * scale ** k:
        num += 1
    return Fraction(num, scale)
