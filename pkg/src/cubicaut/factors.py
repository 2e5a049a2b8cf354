"""Structured factor searches for degree <= 3 polynomials in three variables.

No general multivariate factorization lives here: the degree bound means any
nontrivial factorization contains an affine-linear factor, which we find by
brute force over small finite fields and by specialize-and-interpolate over
infinite fields.  Homogeneous forms get a dedicated complete linear-factor
splitter used for the analysis of parts at infinity.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

from .fields import FiniteField, RationalField
from .polyring import Poly, Ring
from .uniroots import ff_roots, rational_roots, resultant, trim


def _field_roots(coeffs, field):
    """Roots in the field itself (no extension), with multiplicity."""
    if isinstance(field, RationalField):
        roots, _ = rational_roots(coeffs)
        return roots
    roots, _ = ff_roots(coeffs, field)
    return roots


def _sample_values(field, count):
    if isinstance(field, RationalField):
        return [Fraction(i) for i in range(count)]
    els = list(field.elements())
    return els[:count]


def linear_factor(f: Poly):
    """Some affine-linear factor of f over its own field, or None.

    Complete for deg(f) <= 3 in <= 3 variables: if f is reducible over the
    base field, a linear factor over the base field exists and is found.
    """
    if f.degree() < 2:
        return None
    field = f.ring.field
    if isinstance(field, FiniteField) and field.order <= 9:
        return _linear_factor_brute(f)
    return _linear_factor_sampled(f)


def _all_monic_linears(ring: Ring):
    field = ring.field
    els = list(field.elements())
    n = ring.nvars
    for lead in range(n):
        # monic in variable `lead`, lower variables absent
        tail_vars = list(range(lead + 1, n))
        for combo in product(els, repeat=len(tail_vars) + 1):
            p = ring.var(lead)
            for v, c in zip(tail_vars, combo[:-1]):
                if c:
                    p = p + ring.var(v).scale(c)
            if combo[-1]:
                p = p + ring.const(combo[-1])
            yield p


def _linear_factor_brute(f: Poly):
    for ell in _all_monic_linears(f.ring):
        q = f.divide_exact(ell)
        if q is not None:
            return ell
    return None


def _linear_factor_sampled(f: Poly):
    ring = f.ring
    n = ring.nvars
    field = ring.field
    # try factors monic in each variable, most significant first
    for lead in range(n):
        others = [j for j in range(n) if j != lead]
        dx = f.degree_in(lead)
        if dx < 1:
            continue
        lead_coeff = f.coefficient_in_var(lead, dx)
        # sample points for the other variables keeping the x-degree maximal
        samples = []
        pool = _sample_values(field, 8 + 3 * n)
        base_points = _affine_frames(len(others), pool)
        for frame in base_points:
            ok = True
            for pt in frame:
                full = _point_with(lead, None, others, pt, n)
                if not _eval_partial(lead_coeff, full):
                    ok = False
                    break
            if ok:
                samples = frame
                break
        if not samples:
            continue
        roots_per_point = []
        for pt in samples:
            full = _point_with(lead, None, others, pt, n)
            coeffs = _specialize_to_univariate(f, lead, full)
            roots = [r for r, _ in _field_roots(coeffs, field)]
            if not roots:
                roots_per_point = None
                break
            roots_per_point.append(roots)
        if roots_per_point is None:
            continue
        for combo in product(*roots_per_point):
            u = _interpolate_affine(others, samples, combo, ring)
            if u is None:
                continue
            ell = ring.var(lead) - u
            if f.divide_exact(ell) is not None:
                return ell
    return None


def _affine_frames(k, pool):
    """Candidate affinely-independent sample frames for k variables."""
    if k == 0:
        return [[()]]
    if k == 1:
        frames = []
        for i in range(len(pool) - 1):
            frames.append([(pool[i],), (pool[i + 1],)])
        return frames
    frames = []
    for i in range(len(pool) - 2):
        a, b, c = pool[i], pool[i + 1], pool[i + 2]
        frames.append([(a, a), (b, a), (a, c)])
    return frames


def _point_with(lead, lead_val, others, pt, n):
    full = [None] * n
    for j, v in zip(others, pt):
        full[j] = v
    full[lead] = lead_val
    return full


def _eval_partial(p: Poly, point):
    """Evaluate p at a point where exactly the None coordinate is symbolic."""
    field = p.ring.field
    acc = field.zero
    for e, c in p.terms.items():
        v = c
        ok = True
        for i, ei in enumerate(e):
            if ei:
                if point[i] is None:
                    ok = False
                    break
                for _ in range(ei):
                    v = v * point[i]
        if ok:
            acc = acc + v
    return acc


def _specialize_to_univariate(f: Poly, var, point):
    d = f.degree_in(var)
    field = f.ring.field
    coeffs = [field.zero] * (d + 1)
    for e, c in f.terms.items():
        v = c
        for i, ei in enumerate(e):
            if i == var or not ei:
                continue
            for _ in range(ei):
                v = v * point[i]
        coeffs[e[var]] = coeffs[e[var]] + v
    return coeffs


def _interpolate_affine(others, samples, values, ring: Ring):
    """Affine-linear u in the `others` variables with u(sample) = value."""
    field = ring.field
    k = len(others)
    size = k + 1
    rows = []
    rhs = []
    for pt, val in zip(samples, values):
        rows.append(list(pt) + [field.one])
        rhs.append(val)
    sol = _solve_linear(rows[:size], rhs[:size], field)
    if sol is None:
        return None
    u = ring.const(sol[-1])
    for v, c in zip(others, sol[:-1]):
        if c:
            u = u + ring.var(v).scale(c)
    return u


def _solve_linear(rows, rhs, field):
    n = len(rows)
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    cols = len(rows[0])
    piv = 0
    where = []
    for col in range(cols):
        sel = None
        for r in range(piv, n):
            if aug[r][col]:
                sel = r
                break
        if sel is None:
            return None
        aug[piv], aug[sel] = aug[sel], aug[piv]
        pv = aug[piv][col]
        inv = field.one / pv if isinstance(field, FiniteField) else 1 / pv
        aug[piv] = [c * inv for c in aug[piv]]
        for r in range(n):
            if r != piv and aug[r][col]:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[piv])]
        where.append(col)
        piv += 1
        if piv == n:
            break
    for r in range(piv, n):
        if aug[r][cols]:
            return None
    sol = [field.zero] * cols
    for i, col in enumerate(where):
        sol[col] = aug[i][cols]
    return sol


def is_reducible(f: Poly) -> bool:
    """Reducibility over the base field for deg(f) <= 3."""
    if f.degree() < 2:
        return False
    ell = linear_factor(f)
    if ell is None:
        return False
    co = f.divide_exact(ell)
    return co.degree() >= 1


# -- homogeneous forms ----------------------------------------------------------


def form_linear_factors(F: Poly):
    """Complete splitting of a homogeneous form of degree <= 3 in 3 variables.

    Returns (factors, residual) where factors is a list of
    (linear form over the base field, multiplicity) and residual is the
    remaining form with no linear factor over the base field (or None).
    """
    if F.is_zero():
        raise ValueError("zero form")
    if not F.is_homogeneous():
        raise ValueError("expected a homogeneous form")
    factors = []
    current = F
    while current.degree() >= 1:
        ell = _form_linear_factor(current)
        if ell is None:
            break
        mult = 0
        while True:
            q = current.divide_exact(ell)
            if q is None:
                break
            current = q
            mult += 1
        factors.append((ell, mult))
    residual = current if current.degree() >= 1 else None
    return factors, residual


def _form_linear_factor(F: Poly):
    ring = F.ring
    field = ring.field
    if F.degree() == 1:
        return F
    if isinstance(field, FiniteField) and field.order <= 25:
        # brute force over the q^2 + q + 1 directions
        for ell in _all_monic_linear_forms(ring):
            if F.divide_exact(ell) is not None:
                return ell
        return None
    n = ring.nvars
    if n != 3:
        ell = linear_factor(F)
        return ell
    x, y, z = ring.gens()
    # z | F
    if F.subst([x, y, ring.zero()]).is_zero():
        return z
    # y - t z | F  <=>  F(x, t z, z) == 0
    for t in _form_root_candidates_1var(F, ring):
        if F.divide_exact(y - z.scale(t)) is not None:
            return y - z.scale(t)
    # x - (s y + t z) | F
    for s, t in _form_root_candidates_2var(F, ring):
        cand = x - y.scale(s) - z.scale(t)
        if F.divide_exact(cand) is not None:
            return cand
    return None


def _all_monic_linear_forms(ring: Ring):
    field = ring.field
    els = list(field.elements())
    n = ring.nvars
    for lead in range(n):
        tail_vars = list(range(lead + 1, n))
        for combo in product(els, repeat=len(tail_vars)):
            p = ring.var(lead)
            for v, c in zip(tail_vars, combo):
                if c:
                    p = p + ring.var(v).scale(c)
            yield p


def _form_root_candidates_1var(F: Poly, ring: Ring):
    """Candidate t with F(x, t z, z) == 0; coefficientwise root intersection."""
    field = ring.field
    # coefficients of F(x, t*z, z) as polynomials in t, per (x, z) monomial
    buckets: dict = {}
    for (ex, ey, ez), c in F.terms.items():
        key = (ex, ey + ez)
        buckets.setdefault(key, {})[ey] = c
    candidate_set = None
    for key, poly_t in buckets.items():
        deg = max(poly_t)
        coeffs = [poly_t.get(i, field.zero) for i in range(deg + 1)]
        coeffs = trim(coeffs, field.zero)
        if not coeffs:
            continue
        if len(coeffs) == 1:
            return []  # a nonzero constant bucket: no t works
        roots = {r for r, _ in _field_roots(coeffs, field)}
        candidate_set = roots if candidate_set is None else candidate_set & roots
        if not candidate_set:
            return []
    return sorted(candidate_set or set(), key=_field_sort_key(field))


def _form_root_candidates_2var(F: Poly, ring: Ring):
    """Candidate (s, t) with F(s y + t z, y, z) == 0, via resultants."""
    field = ring.field
    # F(s y + t z, y, z) = sum over y^i z^j of c_{ij}(s, t)
    from math import comb

    st_ring = Ring(2, field)
    buckets: dict = {}
    for (ex, ey, ez), c in F.terms.items():
        # (s y + t z)^ex contributes binomials; expand directly
        for k in range(ex + 1):
            coeff = field.coerce(comb(ex, k)) * c
            if not coeff:
                continue
            mono = st_ring.monomial((ex - k, k), 1).scale(coeff)
            key = (ey + ex - k, ez + k)
            buckets[key] = buckets.get(key, st_ring.zero()) + mono
    polys = [p for p in buckets.values() if not p.is_zero()]
    if not polys:
        return []
    if any(p.is_constant() and not p.is_zero() for p in polys):
        return []
    return solve_2var_system(polys, st_ring)


def _field_sort_key(field):
    if isinstance(field, RationalField):
        return lambda v: (v,)
    return lambda v: v.coeffs


def solve_2var_system(polys, ring: Ring):
    """All common zeros in field^2 of 2-variable polynomials (finite case).

    Assumes the common zero locus is finite; returns field-rational points
    sorted deterministically.  Used for small structured systems only.
    """
    field = ring.field
    polys = [p for p in polys if not p.is_zero()]
    if not polys:
        raise ValueError("empty system")
    if any(p.is_constant() for p in polys):
        return []
    # collect candidate first coordinates via resultants in the second variable
    s_candidates = None
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            res = _resultant_in_var(polys[i], polys[j], 1, ring)
            coeffs = trim(res, field.zero)
            if coeffs and len(coeffs) > 1:
                roots = {r for r, _ in _field_roots(coeffs, field)}
                s_candidates = roots if s_candidates is None else s_candidates | roots
    if s_candidates is None:
        # all resultants vanish; fall back: candidates from one-variable slices
        s_candidates = set()
        for p in polys:
            if p.degree_in(1) == 0:
                coeffs = [p.coefficient_of((k, 0)) for k in range(p.degree_in(0) + 1)]
                coeffs = trim(coeffs, field.zero)
                if len(coeffs) > 1:
                    s_candidates |= {r for r, _ in _field_roots(coeffs, field)}
        if not s_candidates and isinstance(field, FiniteField):
            s_candidates = set(field.elements())
        elif not s_candidates:
            s_candidates = {field.coerce(i) for i in range(8)}
    out = []
    for s0 in s_candidates:
        t_roots = None
        degenerate = True
        for p in polys:
            coeffs = _specialize_to_univariate(p, 1, [s0, None])
            coeffs = trim(coeffs, field.zero)
            if not coeffs:
                continue  # vanishes identically at s0
            if len(coeffs) == 1:
                t_roots = set()
                degenerate = False
                break
            degenerate = False
            roots = {r for r, _ in _field_roots(coeffs, field)}
            t_roots = roots if t_roots is None else t_roots & roots
            if not t_roots:
                break
        if degenerate:
            continue
        for t0 in t_roots or set():
            if all(not p.eval((s0, t0)) for p in polys):
                out.append((s0, t0))
    key = _field_sort_key(field)
    return sorted(set(out), key=lambda pt: (key(pt[0]), key(pt[1])))


def _resultant_in_var(p: Poly, q: Poly, var: int, ring: Ring):
    """Resultant eliminating `var`; returns ascending coeffs in the other var.

    Entries of the Sylvester matrix are univariate in the other variable, so
    we build them as plain coefficient lists and expand the determinant via
    polynomial arithmetic in one variable.
    """
    field = ring.field
    other = 1 - var
    dp, dq = p.degree_in(var), q.degree_in(var)
    if dp < 0 or dq < 0:
        return []

    def coeff_poly(f, power):
        d = f.degree_in(other)
        out = [field.zero] * (d + 1)
        for e, c in f.terms.items():
            if e[var] == power:
                out[e[other]] = out[e[other]] + c
        return trim(out, field.zero)

    pl = [coeff_poly(p, i) for i in range(dp + 1)]
    ql = [coeff_poly(q, i) for i in range(dq + 1)]
    size = dp + dq
    if size == 0:
        return [field.one]
    rows = []
    for i in range(dq):
        row = [[field.zero]] * size
        for j in range(dp + 1):
            row[i + j] = pl[dp - j]
        rows.append(row)
    for i in range(dp):
        row = [[field.zero]] * size
        for j in range(dq + 1):
            row[i + j] = ql[dq - j]
        rows.append(row)
    det = _uni_det(rows, field)
    return det


def _uni_mul(a, b, field):
    if not a or not b:
        return []
    out = [field.zero] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                if cb:
                    out[i + j] = out[i + j] + ca * cb
    return trim(out, field.zero)


def _uni_add(a, b, field):
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        ca = a[i] if i < len(a) else field.zero
        cb = b[i] if i < len(b) else field.zero
        out.append(ca + cb)
    return trim(out, field.zero)


def _uni_neg(a):
    return [-c for c in a]


def _uni_det(rows, field):
    """Determinant of a matrix of univariate coefficient lists (expansion)."""
    n = len(rows)
    if n == 1:
        return rows[0][0]
    acc = []
    for j in range(n):
        entry = rows[0][j]
        if not trim(list(entry), field.zero):
            continue
        minor = [[rows[i][k] for k in range(n) if k != j] for i in range(1, n)]
        term = _uni_mul(trim(list(entry), field.zero), _uni_det(minor, field), field)
        if j % 2:
            term = _uni_neg(term)
        acc = _uni_add(acc, term, field)
    return acc
