"""Decide whether a hypersurface of degree <= 3 in A^3 is isomorphic to A^2.

The decision follows the geometry: a degree-3 plane forces a point of
multiplicity >= 2 at infinity (a "pivot"); moving it to the distinguished
position turns f into x*p(y,z) + q(y,z); the factor p is normalized by affine
changes and the fibration criterion on q settles the question.  Every step is
an explicit affine coordinate change, accumulated into a witness, so positive
verdicts come with a certificate: witness^*(f) equals the normal form exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .factors import (
    form_linear_factors,
    is_reducible,
    linear_factor,
    _field_sort_key,
    _resultant_in_var,
    _solve_linear,
)
from .fields import FieldExtensionNeeded, FiniteField, RationalField
from .polymaps import (
    AffineMap,
    PolyMap,
    TameWord,
    TriangularMap,
    compose,
    eval_tame_word,
)
from .polyring import Poly, Ring
from .uniroots import poly_gcd, rational_roots, roots_with_multiplicity, trim


class NoPivot(ValueError):
    """No point of multiplicity >= d-1 exists at infinity."""


@dataclass
class PivotLocus:
    """Points (and whole lines) at infinity of multiplicity >= deg - 1.

    points: normalized projective triples over `field`;
    lines: linear forms in (x, y, z) whose entire zero line consists of pivots;
    unresolved: residual polynomials whose roots escaped Q (empty over F_q);
    all_infinity: every point qualifies (degree-1 input).
    """

    points: list
    lines: list
    field: object
    unresolved: list
    all_infinity: bool = False

    def has_rational_pivot(self) -> bool:
        return bool(self.points) or bool(self.lines) or self.all_infinity

    def best_pivot(self):
        """Lexicographically least pivot point, materializing line pivots."""
        candidates = list(self.points)
        for ell in self.lines:
            candidates.append(_lex_least_point_on_line(ell))
        if self.all_infinity:
            candidates.append(_normalize_proj((self.field.one if isinstance(self.field, FiniteField) else Fraction(1), _zero_of(self.field), _zero_of(self.field)), self.field))
        if not candidates:
            raise NoPivot("empty pivot locus")
        key = _field_sort_key(self.field)
        return min(candidates, key=lambda p: tuple(key(c) for c in p))


@dataclass
class StandardXpq:
    """f in the pivot frame: witness^*(f) = x*p + q with p, q in k[y, z]."""

    p: Poly
    q: Poly
    witness: AffineMap


@dataclass
class PlaneVerdict:
    is_plane: bool
    case: Optional[str]
    normal_form: Optional[Poly]
    witness: Optional[AffineMap]
    reason: Optional[str]
    f: Poly  # the input, lifted to verdict field if an extension was needed

    @property
    def field(self):
        return self.f.ring.field


@dataclass
class VariableWitness:
    """(f, g, h) automorphism certificate for a plane-defining variable f."""

    map: PolyMap
    inverse: PolyMap
    tame_word: Optional[TameWord]


def _zero_of(field):
    return field.zero if isinstance(field, FiniteField) else Fraction(0)


def _one_of(field):
    return field.one if isinstance(field, FiniteField) else Fraction(1)


def _normalize_proj(triple, field):
    """Scale so the first nonzero coordinate is one."""
    for c in triple:
        if c:
            inv = _one_of(field) / c
            return tuple(x * inv for x in triple)
    raise ValueError("zero vector is not projective")


def _lex_least_point_on_line(ell: Poly):
    """Least projective point on a line at infinity given by a linear form."""
    ring = ell.ring
    field = ring.field
    zero, one = _zero_of(field), _one_of(field)
    coeffs = [ell.coefficient_of(tuple(1 if j == i else 0 for j in range(3))) for i in range(3)]
    candidates = []
    basis = [(one, zero, zero), (zero, one, zero), (zero, zero, one)]
    for i, v in enumerate(basis):
        if not coeffs[i]:
            candidates.append(v)
    # points with two coordinates free: solve coeffs . v = 0 generically
    for i in range(3):
        for j in range(i + 1, 3):
            if coeffs[j]:
                v = [zero, zero, zero]
                v[i] = coeffs[j]
                v[j] = -coeffs[i]
                if any(v):
                    candidates.append(_normalize_proj(tuple(v), field))
    key = _field_sort_key(field)
    return min(
        (_normalize_proj(c, field) for c in candidates),
        key=lambda p: tuple(key(c) for c in p),
    )


# -- pivot computation ------------------------------------------------------------


def pivot_points(f: Poly) -> PivotLocus:
    """Points at infinity where the projective closure has multiplicity
    >= deg(f) - 1.

    For degree 3 these are the singular points of the cubic part's curve at
    which the quadratic part also vanishes; the locus can contain whole lines,
    returned separately.  For degree <= 2 the locus is infinite and the
    structure (factor lines, the conic's singular point, residual) is returned
    instead of an enumeration.  Needed extensions are constructed
    automatically over F_q; over Q escaping roots land in `unresolved`.
    """
    for _ in range(6):
        try:
            return _pivot_core(f)
        except _NeedsExtension as need:
            f = _lift_poly(f, need.field)
    raise RuntimeError("pivot extension chain did not stabilize")  # pragma: no cover


def _pivot_core(f: Poly) -> PivotLocus:
    d = f.degree()
    if d <= 0:
        raise ValueError("constant polynomial")
    field = f.ring.field
    if d == 1:
        return PivotLocus([], [], field, [], all_infinity=True)
    if d == 2:
        f2 = f.homogeneous_part(2)
        factors, residual = form_linear_factors(f2)
        if residual is not None and isinstance(field, FiniteField):
            raise _NeedsExtension(field.extension(2))
        lines = [ell for ell, _ in factors]
        points = []
        if residual is not None:
            sing = _conic_singular_point(f2)
            if sing is not None:
                points.append(sing)
        unresolved = [residual] if residual is not None and not points else []
        return PivotLocus(points, lines, field, unresolved)
    f3 = f.homogeneous_part(3)
    f2 = f.homogeneous_part(2)
    system = [p for p in [f3, f3.partial_derivative(0), f3.partial_derivative(1),
                          f3.partial_derivative(2), f2] if not p.is_zero()]
    lines = []
    points = []
    unresolved = []
    # whole-line components: multiple linear factors of f3 where f2 vanishes
    factors, _ = form_linear_factors(f3)
    multiple = [ell for ell, m in factors if m >= 2]
    for ell in multiple:
        restr = _restrict_form_to_line(f2, ell)
        if restr is None:
            lines.append(ell)
        else:
            pts, res = _roots_on_line(restr, ell, field)
            points.extend(pts)
            unresolved.extend(res)
    pts, res = _projective_solutions(system, f.ring)
    points.extend(pts)
    unresolved.extend(res)
    if unresolved and isinstance(field, FiniteField):
        raise _NeedsExtension(_splitting_field(unresolved, field))
    # dedup, drop points lying on full pivot lines (represented by the line)
    seen = []
    for p in points:
        if any(not _eval_form_at(ell, p) for ell in lines):
            continue
        if p not in seen:
            seen.append(p)
    key = _field_sort_key(field)
    seen.sort(key=lambda p: tuple(key(c) for c in p))
    return PivotLocus(seen, lines, field, unresolved)


def _splitting_field(residuals, field: FiniteField):
    """Smallest extension splitting all residual univariate polynomials."""
    from .uniroots import roots_with_multiplicity

    degree = 1
    for res in residuals:
        _, residual, out_field = roots_with_multiplicity(res, field, auto_extend=True)
        if residual is None:
            m = out_field.k // field.k
            degree = degree * m // _gcd(degree, m)
    if degree <= 1:
        degree = 2
    return field.extension(degree)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def _eval_form_at(p: Poly, point):
    return p.eval(point)


def _conic_singular_point(f2: Poly):
    """Rational singular point of a ternary conic (characteristic 0 only).

    A rank <= 2 conic is singular exactly at the kernel of its Gram matrix;
    rank 3 gives None.  Callers in characteristic 2 split the conic over an
    extension instead.
    """
    field = f2.ring.field
    if isinstance(field, FiniteField) and field.p == 2:
        return None
    two = field.coerce(2) if isinstance(field, FiniteField) else Fraction(2)
    a = f2.coefficient_of((2, 0, 0))
    b = f2.coefficient_of((0, 2, 0))
    c = f2.coefficient_of((0, 0, 2))
    d = f2.coefficient_of((1, 1, 0))
    e = f2.coefficient_of((1, 0, 1))
    g = f2.coefficient_of((0, 1, 1))
    M = [[two * a, d, e], [d, two * b, g], [e, g, two * c]]
    kern = _matrix_kernel_vector(M, field)
    if kern is None:
        return None
    if f2.eval(kern):
        return None  # strange char-p artifacts only; rank <= 2 always lands here
    return _normalize_proj(kern, field)


def _matrix_kernel_vector(M, field):
    """A nonzero kernel vector of a (possibly rectangular) matrix, or None."""
    nrows = len(M)
    ncols = len(M[0])
    rows = [list(r) for r in M]
    piv_cols = []
    r = 0
    for c in range(ncols):
        sel = None
        for i in range(r, nrows):
            if rows[i][c]:
                sel = i
                break
        if sel is None:
            continue
        rows[r], rows[sel] = rows[sel], rows[r]
        inv = _one_of(field) / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c]:
                fac = rows[i][c]
                rows[i] = [x - fac * y for x, y in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
    free = [c for c in range(ncols) if c not in piv_cols]
    if not free:
        return None
    c0 = free[0]
    v = [field.zero] * ncols
    v[c0] = field.one if isinstance(field, FiniteField) else Fraction(1)
    for i, c in enumerate(piv_cols):
        v[c] = -rows[i][c0] * v[c0]
    return tuple(v)


def _restrict_form_to_line(F: Poly, ell: Poly):
    """F restricted to the line {ell = 0}: binary form in (s, t), or None
    when identically zero."""
    field = F.ring.field
    basis = _line_basis(ell)
    spoly_ring = Ring(2, field)
    s, t = spoly_ring.gens()
    images = [s.scale(basis[0][i]) + t.scale(basis[1][i]) for i in range(3)]
    g = F.subst(images)
    return None if g.is_zero() else g


def _line_basis(ell: Poly):
    """Two independent points spanning the projective line {ell = 0}."""
    ring = ell.ring
    field = ring.field
    zero, one = field.zero, field.one
    coeffs = [ell.coefficient_of(tuple(1 if j == i else 0 for j in range(3))) for i in range(3)]
    pts = []
    for i in range(3):
        for j in range(i + 1, 3):
            v = [zero, zero, zero]
            v[i] = coeffs[j]
            v[j] = -coeffs[i]
            if any(v):
                pts.append(tuple(v))
    for i in range(3):
        if not coeffs[i]:
            v = [zero, zero, zero]
            v[i] = one
            pts.append(tuple(v))
    # pick two independent
    base = pts[0]
    for cand in pts[1:]:
        if not _proj_equal(base, cand, field):
            return [base, cand]
    raise RuntimeError("degenerate line")  # pragma: no cover


def _proj_equal(a, b, field):
    return _normalize_proj(a, field) == _normalize_proj(b, field)


def _roots_on_line(binary: Poly, ell: Poly, field):
    """Points on the line where the restricted form vanishes."""
    basis = _line_basis(ell)
    d = binary.degree()
    coeffs = [field.zero] * (d + 1)
    for (es, et), c in binary.terms.items():
        coeffs[es] = coeffs[es] + c
    pts, unresolved = [], []
    if isinstance(field, RationalField):
        roots, residual = rational_roots(coeffs)
        if residual is not None:
            unresolved.append(residual)
        pairs = [(r, Fraction(1)) for r, _ in roots]
    else:
        roots, residual, out_field = roots_with_multiplicity(coeffs, field, auto_extend=False)
        if residual is not None:
            unresolved.append(residual)
        pairs = [(r, field.one) for r, _ in roots]
    if not binary.coefficient_of((d, 0)):
        # the point [s:t] = [1:0] is a root of the restriction
        pairs.append((_one_of(field), _zero_of(field)))
    out = []
    for s0, t0 in pairs:
        pt = tuple(s0 * basis[0][i] + t0 * basis[1][i] for i in range(3))
        out.append(_normalize_proj(pt, field))
    return out, unresolved


def _roots_in_field(coeffs, field):
    """Roots in the base field plus the residual factor (None when split)."""
    if isinstance(field, RationalField):
        roots, residual = rational_roots(coeffs)
    else:
        from .uniroots import ff_roots

        roots, residual = ff_roots(coeffs, field)
    return [r for r, _ in roots], residual


def _projective_solutions(system, ring: Ring):
    """Field-rational common zeros in P^2 of the system, plus residuals."""
    field = ring.field
    points, unresolved = [], []
    # chart z = 1: bivariate system in (x, y)
    one, zero = _one_of(field), _zero_of(field)
    chart_ring = Ring(2, field)
    chart = []
    for p in system:
        q = _substitute_chart(p, chart_ring, fixed=(2, one))
        if not q.is_zero():
            chart.append(q)
    pts, res = _solve_affine_2var(chart, chart_ring)
    for (x0, y0) in pts:
        points.append(_normalize_proj((x0, y0, one), field))
    unresolved.extend(res)
    # line z = 0: binary forms in (x, y)
    line_ring = Ring(2, field)
    restr = []
    for p in system:
        q = _substitute_chart(p, line_ring, fixed=(2, zero))
        restr.append(q)
    if all(q.is_zero() for q in restr):
        # the whole line z=0 solves the system; callers see it via `lines`
        pass
    else:
        combined = None
        for q in restr:
            if q.is_zero():
                continue
            coeffs = [field.zero] * (q.degree_in(0) + 1)
            for (ex, ey), c in q.terms.items():
                coeffs[ex] = coeffs[ex] + c
            coeffs = trim(coeffs, field.zero)
            combined = coeffs if combined is None else poly_gcd(combined, coeffs, field)
            if len(combined) == 1:
                break
        roots = []
        if combined is not None and len(combined) > 1:
            roots, residual = _roots_in_field(combined, field)
            if residual is not None:
                unresolved.append(residual)
        cands = [(r, one, zero) for r in roots]
        cands.append((one, zero, zero))
        for cand in cands:
            if all(not p.eval(cand) for p in system):
                points.append(_normalize_proj(cand, field))
    return points, unresolved


def _substitute_chart(p: Poly, target: Ring, fixed):
    """Project a 3-variable poly to 2 variables by fixing one coordinate."""
    idx, val = fixed
    keep = [i for i in range(3) if i != idx]
    out = {}
    field = target.field
    for e, c in p.terms.items():
        v = c
        for _ in range(e[idx]):
            v = v * val
        if not v:
            continue
        key = (e[keep[0]], e[keep[1]])
        s = out.get(key)
        s = v if s is None else s + v
        if s:
            out[key] = s
        elif key in out:
            del out[key]
    return Poly(target, out)


def _solve_affine_2var(polys, ring: Ring):
    """Rational common zeros of bivariate polys (finite or line-augmented)."""
    field = ring.field
    polys = [p for p in polys if not p.is_zero()]
    if not polys:
        return [], []
    if any(p.is_constant() for p in polys):
        return [], []
    unresolved = []
    # peel off common linear factors (one-dimensional components)
    common = _common_linear_factor(polys)
    extra_pts = []
    if common is not None:
        reduced = []
        for p in polys:
            q = p.divide_exact(common)
            reduced.append(q if q is not None else p)
        # zeros = line {common=0} intersected with residuals, plus zeros of reduced
        on_line, res1 = _zeros_on_affine_line(polys, common, ring)
        extra_pts.extend(on_line)
        unresolved.extend(res1)
        polys = [p for p in reduced if not p.is_zero()]
        if not polys or any(p.is_constant() for p in polys):
            return extra_pts, unresolved
    # every pairwise resultant (and every y-free member) must vanish at a
    # common zero, so the candidate first coordinates are roots of their gcd
    constraints = []
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            if polys[i].degree_in(1) == 0 and polys[j].degree_in(1) == 0:
                continue
            res = _resultant_in_var(polys[i], polys[j], 1, ring)
            res = trim(res, field.zero)
            if res:
                constraints.append(res)
    for p in polys:
        if p.degree_in(1) == 0:
            coeffs = [p.coefficient_of((k, 0)) for k in range(p.degree_in(0) + 1)]
            coeffs = trim(coeffs, field.zero)
            if coeffs:
                constraints.append(coeffs)
    nonzero = [c for c in constraints if len(c) > 0]
    combined = None
    for c in nonzero:
        combined = c if combined is None else poly_gcd(combined, c, field)
        if combined is not None and len(combined) == 1:
            break
    x_candidates = set()
    if combined is None:
        if len(polys) == 1:
            # a single curve has no isolated points to report
            return extra_pts, unresolved
    elif len(combined) > 1:
        roots, residual = _roots_in_field(combined, field)
        if residual is not None:
            unresolved.append(residual)
        x_candidates |= set(roots)
    pts = list(extra_pts)
    skey = _field_sort_key(field)
    for x0 in sorted(x_candidates, key=skey):
        y_roots = None
        for p in polys:
            coeffs = [field.zero] * (p.degree_in(1) + 1)
            for (ex, ey), c in p.terms.items():
                v = c
                for _ in range(ex):
                    v = v * x0
                coeffs[ey] = coeffs[ey] + v
            coeffs = trim(coeffs, field.zero)
            if not coeffs:
                continue
            if len(coeffs) == 1:
                y_roots = set()
                break
            roots, residual = _roots_in_field(coeffs, field)
            if residual is not None:
                unresolved.append(residual)
            rset = set(roots)
            y_roots = rset if y_roots is None else y_roots & rset
            if not y_roots:
                break
        for y0 in y_roots or set():
            if all(not p.eval((x0, y0)) for p in polys):
                pts.append((x0, y0))
    return pts, unresolved


def _common_linear_factor(polys):
    first = min(polys, key=lambda p: p.degree())
    ell = linear_factor(first)
    candidates = [ell] if ell is not None else []
    if first.degree() == 1:
        candidates.append(first)
    for cand in candidates:
        if cand is None:
            continue
        if all(p.divide_exact(cand) is not None for p in polys):
            return cand
    return None


def _zeros_on_affine_line(polys, ell: Poly, ring: Ring):
    """Common zeros of the system restricted to the affine line {ell = 0}."""
    field = ring.field
    # parametrize the line
    a = ell.coefficient_of((1, 0))
    b = ell.coefficient_of((0, 1))
    c = ell.coefficient_of((0, 0))
    x, y = ring.gens()
    if b:
        inv = _one_of(field) / b
        images = [x, (x.scale(-a) - ring.const(c)).scale(inv)]
        back = lambda t: (t, (-a * t - c) * inv)
    else:
        inv = _one_of(field) / a
        images = [ring.const(-c).scale(inv), x]
        back = lambda t: ((-c) * inv, t)
    pts, unresolved = [], []
    inter = None
    for p in polys:
        r = p.subst(images)
        if r.is_zero():
            continue
        coeffs = [r.coefficient_of((k, 0)) for k in range(r.degree_in(0) + 1)]
        coeffs = trim(coeffs, field.zero)
        if len(coeffs) == 1:
            return [], []
        roots, residual = _roots_in_field(coeffs, field)
        if residual is not None:
            unresolved.append(residual)
        rset = set(roots)
        inter = rset if inter is None else inter & rset
        if not inter:
            return [], unresolved
    if inter is None:
        return [], unresolved
    skey = _field_sort_key(field)
    return [back(t) for t in sorted(inter, key=skey)], unresolved


# -- reduction to x*p + q ----------------------------------------------------------


class _Reducer:
    """Carries f through affine source changes, accumulating the witness.

    Invariant: original_f composed with `sigma` equals the current `f`.
    """

    def __init__(self, f: Poly):
        self.f = f
        self.ring = f.ring
        self.sigma = AffineMap.identity(f.ring)

    def apply(self, sigma_new: AffineMap):
        self.f = sigma_new.pullback(self.f)
        self.sigma = self.sigma.compose_with(sigma_new)

    def apply_components(self, comps):
        self.apply(AffineMap.from_components(comps))

    def swap(self, i: int, j: int):
        perm = list(range(self.ring.nvars))
        perm[i], perm[j] = perm[j], perm[i]
        self.apply(AffineMap.permutation(self.ring, perm))


def _move_pivot_map(ring: Ring, pivot) -> AffineMap:
    """Affine map whose linear part sends e1 to the pivot direction."""
    field = ring.field
    zero, one = field.zero, field.one
    cols = [list(pivot)]
    for basis in ([one, zero, zero], [zero, one, zero], [zero, zero, one]):
        trial = cols + [basis]
        if _rank(trial, field) == len(trial):
            cols.append(basis)
        if len(cols) == 3:
            break
    matrix = [[cols[j][i] for j in range(3)] for i in range(3)]
    return AffineMap(ring, matrix, [zero] * 3)


def _rank(rows, field):
    rows = [list(r) for r in rows]
    rank = 0
    ncols = len(rows[0])
    used = set()
    for row in rows:
        pivot_col = None
        for c in range(ncols):
            if c not in used and row[c]:
                pivot_col = c
                break
        if pivot_col is None:
            continue
        used.add(pivot_col)
        rank += 1
        inv = _one_of(field) / row[pivot_col]
        row = [v * inv for v in row]
        for other in rows:
            if other is not row and other[pivot_col]:
                fac = other[pivot_col]
                for c in range(ncols):
                    other[c] = other[c] - fac * row[c]
    return rank


def to_standard_xpq(f: Poly) -> StandardXpq:
    """Affine witness moving a pivot to the distinguished point, so that
    witness^*(f) = x*p(y,z) + q(y,z)."""
    locus = pivot_points(f)
    if not locus.has_rational_pivot():
        if locus.unresolved:
            raise FieldExtensionNeeded(
                "pivot exists only over an extension of Q",
                minimal_polynomial=locus.unresolved[0],
            )
        raise NoPivot("no point of multiplicity >= deg-1 at infinity")
    pivot = locus.best_pivot()
    red = _Reducer(f)
    red.apply(_move_pivot_map(f.ring, pivot))
    g = red.f
    if g.degree_in(0) > 1:
        raise RuntimeError("pivot reduction failed to reach x-degree 1")
    p = g.coefficient_in_var(0, 1)
    q = g.coefficient_in_var(0, 0)
    if 0 in p.variables_used():
        raise RuntimeError("pivot reduction left x inside the factor")
    return StandardXpq(p=p, q=q, witness=red.sigma)


# -- the fibration criterion --------------------------------------------------------


def _univ_coeffs_in_y(p: Poly):
    field = p.ring.field
    d = p.degree_in(1)
    out = [field.zero] * (d + 1)
    for e, c in p.terms.items():
        out[e[1]] = out[e[1]] + c
    return out


def _distinct_roots_of_p(p: Poly):
    """Distinct roots in the base field of p in k[y]; extension-aware."""
    field = p.ring.field
    coeffs = trim(_univ_coeffs_in_y(p), field.zero)
    if isinstance(field, RationalField):
        roots, residual = rational_roots(coeffs)
        if residual is not None:
            raise FieldExtensionNeeded(
                "roots of the x-factor escape Q", minimal_polynomial=residual
            )
        return [r for r, _ in roots]
    roots, residual, out_field = roots_with_multiplicity(coeffs, field)
    if out_field != field:
        raise _NeedsExtension(out_field)
    return [r for r, _ in roots]


class _NeedsExtension(Exception):
    def __init__(self, field):
        super().__init__(f"needs {field}")
        self.field = field


def russell_criterion(p: Poly, q: Poly):
    """The fibration criterion for f = x*p(y) + q(y,z) with p in k[y] - k.

    Returns (True, (a, r1, r0)) where q = a * ptilde + z*r1 + r0 exactly,
    deg r_i < number of distinct roots, and r1 does not vanish at any root;
    or (False, obstruction_tag).
    """
    ring = p.ring
    field = ring.field
    if p.is_zero() or p.is_constant():
        raise ValueError("the criterion needs a nonconstant p in k[y]")
    if p.variables_used() - {1}:
        raise ValueError("p must involve only y")
    if q.variables_used() - {1, 2}:
        raise ValueError("q must involve only y and z")
    roots = _distinct_roots_of_p(p)
    r = len(roots)
    if r == 0:
        # p has no roots even after splitting: impossible over a field
        raise RuntimeError("nonconstant p without roots")  # pragma: no cover
    y = ring.var(1)
    ptilde = ring.one()
    for a0 in roots:
        ptilde = ptilde * (y - ring.const(a0))
    # decompose q per z-power: c_j = quot_j * ptilde + rem_j with deg rem_j < r
    dz = q.degree_in(2)
    quots, rems = [], []
    for j in range(dz + 1):
        cj = q.coefficient_in_var(2, j)
        quot, rem = _divmod_in_y(cj, ptilde)
        quots.append(quot)
        rems.append(rem)
    for j in range(2, dz + 1):
        if not rems[j].is_zero():
            return False, f"z^{j} term is not a multiple of the root radical"
    r1 = rems[1] if dz >= 1 else ring.zero()
    r0 = rems[0]
    for a0 in roots:
        if not r1.eval((field.zero, a0, field.zero)):
            return False, f"linear z-coefficient vanishes at a root of p"
    z = ring.var(2)
    a = ring.zero()
    for j, quot in enumerate(quots):
        a = a + quot * z ** j
    # re-verify by expansion
    if a * ptilde + z * r1 + r0 != q:
        raise RuntimeError("criterion decomposition failed to re-expand")
    return True, (a, r1, r0)


def _divmod_in_y(c: Poly, ptilde: Poly):
    """Division with remainder by a monic poly in y, inside the 3-var ring."""
    ring = c.ring
    d = ptilde.degree_in(1)
    quot = ring.zero()
    rem = c
    y = ring.var(1)
    while rem.degree_in(1) >= d and not rem.is_zero():
        k = rem.degree_in(1)
        lead = rem.coefficient_in_var(1, k)
        if lead.is_zero():
            break
        t = lead * y ** (k - d)
        quot = quot + t
        rem = rem - t * ptilde
    return quot, rem


# -- the decision -------------------------------------------------------------------


def is_plane_deg3(f: Poly) -> PlaneVerdict:
    """Decide X = {f = 0} isomorphic to A^2 for deg(f) <= 3, with witness.

    Over finite fields, extensions are constructed automatically when roots
    escape; the verdict's `f` field carries the lifted polynomial.  Over Q,
    a genuinely out-of-field step raises FieldExtensionNeeded.
    """
    if f.is_zero() or f.is_constant():
        raise ValueError("f must be nonconstant")
    for _ in range(4):
        try:
            if f.degree() > 3:
                return _is_plane_high_degree(f)
            return _is_plane_worker(f)
        except _NeedsExtension as need:
            f = _lift_poly(f, need.field)
    raise RuntimeError("extension chain did not stabilize")  # pragma: no cover


def _is_plane_high_degree(f: Poly) -> PlaneVerdict:
    """Degree > 3 is decidable only for inputs already shaped x*p(y) + q(y,z),
    where the fibration criterion applies verbatim (no normal-form case)."""
    if f.degree_in(0) > 1:
        raise ValueError("degree > 3 inputs must have x-degree <= 1")
    p = f.coefficient_in_var(0, 1)
    q = f.coefficient_in_var(0, 0)
    if 0 in p.variables_used() or 0 in q.variables_used():
        raise ValueError("degree > 3 inputs must be of the form x*p + q")
    ring = f.ring
    if p.is_zero():
        raise ValueError("degree > 3 cylinder inputs are not supported")
    if is_reducible_xpq(p, q):
        return _no(f, "reducible")
    if p.is_constant():
        red = _Reducer(f)
        return _finish_case_a(f, red, p.constant_coeff())
    if p.variables_used() - {1}:
        raise ValueError("degree > 3 inputs need p in k[y]")
    ok, data = russell_criterion(p, q)
    if not ok:
        return _no(f, f"fibration-criterion-failed: {data}")
    return PlaneVerdict(True, None, f, AffineMap.identity(ring), None, f)


def is_reducible_xpq(p: Poly, q: Poly) -> bool:
    """x*p + q with p in k[y] nonzero is reducible iff p shares a k[y]-factor
    with every z-coefficient of q; decided by univariate gcds."""
    field = p.ring.field
    g = trim(_univ_coeffs_in_y(p), field.zero)
    for j in range(q.degree_in(2) + 1):
        cj = q.coefficient_in_var(2, j)
        g = poly_gcd(g, trim(_univ_coeffs_in_y(cj), field.zero), field)
        if len(g) <= 1:
            return False
    return len(g) > 1


def _lift_poly(f: Poly, ext: FiniteField) -> Poly:
    return f.map_field(ext, ext.embed)


def _no(f, reason):
    return PlaneVerdict(False, None, None, None, reason, f)


def _is_plane_worker(f: Poly) -> PlaneVerdict:
    ring = f.ring
    field = ring.field
    if is_reducible(f):
        return _no(f, "reducible")
    if f.degree() == 1:
        red = _Reducer(f)
        red.apply(_completion_witness(f))
        assert red.f == ring.var(0)
        return PlaneVerdict(True, "A", red.f, red.sigma, None, f)
    if f.degree() == 2:
        # a degree-2 plane forces a degenerate conic at infinity
        f2 = f.homogeneous_part(2)
        factors, residual = form_linear_factors(f2)
        if factors:
            key = _field_sort_key(field)
            pivot = min(
                (_lex_least_point_on_line(ell) for ell, _ in factors),
                key=lambda p: tuple(key(c) for c in p),
            )
        else:
            if isinstance(field, FiniteField):
                raise _NeedsExtension(field.extension(2))
            sing = _conic_singular_point(f2)
            if sing is None:
                return _no(f, "nondegenerate-conic-at-infinity")
            pivot = sing
        red = _Reducer(f)
        red.apply(_move_pivot_map(ring, pivot))
        assert red.f.degree_in(0) <= 1
        p = red.f.coefficient_in_var(0, 1)
        q = red.f.coefficient_in_var(0, 0)
        return _decide_from_xpq(f, red, p, q)
    try:
        std = to_standard_xpq(f)
    except NoPivot:
        return _no(f, "no-pivot-at-infinity")
    red = _Reducer(f)
    red.apply(std.witness)
    return _decide_from_xpq(f, red, std.p, std.q)


def _completion_witness(f: Poly) -> AffineMap:
    """For affine-linear f: a source map sigma with f o sigma = x."""
    ring = f.ring
    tau_comps = [f]
    field = ring.field
    n = ring.nvars
    rows = [[f.coefficient_of(tuple(1 if j == i else 0 for j in range(n))) for i in range(n)]]
    for i in range(n):
        basis_row = [field.one if j == i else field.zero for j in range(n)]
        if _rank(rows + [basis_row], field) == len(rows) + 1:
            rows.append(basis_row)
            tau_comps.append(ring.var(i))
        if len(rows) == n:
            break
    tau = AffineMap.from_components(tau_comps)
    return tau.inverse()


def _decide_from_xpq(f_orig: Poly, red: _Reducer, p: Poly, q: Poly) -> PlaneVerdict:
    """Branch on the x-factor p; every step mirrors an explicit affine change."""
    ring = red.ring
    field = ring.field
    if p.is_zero():
        return _curve_route(f_orig, red)
    if p.is_constant():
        return _finish_case_a(f_orig, red, p.constant_coeff())
    if p.degree() == 1:
        red.apply(_linear_to_y_map(p, ring))
        return _pk_y_route(f_orig, red)
    # deg p = 2: analyze the direction(s) of p at infinity
    p2 = red.f.coefficient_in_var(0, 1).homogeneous_part(2)
    direction = _double_root_direction(p2)
    if direction is None:
        return _no(f_orig, "x-factor-has-two-infinite-directions")
    # rotate so the double direction is y: p = c*y^2 + d*y + e*z + g
    red.apply(_yz_rotation_to_y(direction, ring))
    pcur = red.f.coefficient_in_var(0, 1)
    c2 = pcur.coefficient_of((0, 2, 0))
    assert c2, "double-root normalization failed"
    e1 = pcur.coefficient_of((0, 0, 1))
    if e1:
        return _parabola_route(f_orig, red)
    return _pk_y_route(f_orig, red)


def _linear_to_y_map(p: Poly, ring: Ring) -> AffineMap:
    """Affine (y,z)-change sending the linear p(y,z) to exactly y."""
    field = ring.field
    x, y, z = ring.gens()
    alpha = p.coefficient_of((0, 1, 0))
    beta = p.coefficient_of((0, 0, 1))
    gamma = p.coefficient_of((0, 0, 0))
    one = _one_of(field)
    if alpha:
        inv = one / alpha
        comp_y = (y - z.scale(beta) - ring.const(gamma)).scale(inv)
        return AffineMap.from_components([x, comp_y, z])
    inv = one / beta
    comp_z = (y - ring.const(gamma)).scale(inv)
    return AffineMap.from_components([x, z, comp_z])


def _double_root_direction(p2: Poly):
    """The double root direction [t:1] or [1:0] of a binary quadratic, or None.

    None means two distinct directions at infinity over the algebraic closure
    (the factor curve is then never a disjoint union of affine lines).  Double
    roots of quadratics are always rational: in odd characteristic they equal
    -b/2a, in characteristic 2 they are square roots, which exist, and over Q
    an irreducible quadratic is separable.
    """
    field = p2.ring.field
    a = p2.coefficient_of((0, 2, 0))
    b = p2.coefficient_of((0, 1, 1))
    c = p2.coefficient_of((0, 0, 2))
    one = _one_of(field)
    if not a and not b:
        return (one, _zero_of(field))  # c*z^2: the direction [1:0]
    if not a:
        return None  # z * (b*y + c*z): two distinct directions
    coeffs = trim([c, b, a], field.zero)
    if isinstance(field, RationalField):
        roots, residual = rational_roots(coeffs)
        if residual is not None:
            return None
    else:
        from .uniroots import ff_roots

        roots, residual = ff_roots(coeffs, field)
        if residual is not None:
            return None
    if len(roots) == 1 and roots[0][1] == 2:
        return (roots[0][0], one)
    return None


def _yz_rotation_to_y(direction, ring: Ring) -> AffineMap:
    """Send the double direction of the binary part to the pure-y direction."""
    x, y, z = ring.gens()
    t, s = direction
    if s:
        # direction [t:1]: p2 = a (y - t z)^2; (x, y + t z, z) straightens it
        return AffineMap.from_components([x, y + z.scale(t), z])
    return AffineMap.from_components([x, z, y])


def _finish_case_a(f_orig: Poly, red: _Reducer, c) -> PlaneVerdict:
    """Current f = c*x + q(y, z): absorb low parts, land on x + r2 + r3."""
    ring = red.ring
    field = ring.field
    x = ring.var(0)
    q = red.f - x.scale(c)
    assert 0 not in q.variables_used(), "case A shape violated"
    low = q.homogeneous_part(0) + q.homogeneous_part(1)
    inv = _one_of(field) / c
    sigma_x = (x - low).scale(inv)
    red.apply_components([sigma_x, ring.var(1), ring.var(2)])
    nf = red.f
    assert nf.coefficient_of((1, 0, 0)) == ring.field.one and nf.degree_in(0) == 1
    return PlaneVerdict(True, "A", nf, red.sigma, None, f_orig)


def _finish_from_xy_shape(f_orig: Poly, red: _Reducer) -> PlaneVerdict:
    """Current f = x*y + y*w(y,z) + z: split w and land in case A or B."""
    ring = red.ring
    x, y, z = ring.gens()
    w = (red.f - x * y - z).divide_exact(y)
    assert w is not None, "xy-shape violated"
    low = w - w.homogeneous_part(2)
    if not low.is_zero():
        red.apply_components([x - low, y, z])
        w = w.homogeneous_part(2)
    if 2 not in w.variables_used():
        # w in k[y]: exchange x and z; f becomes x + y z + w*y (case A)
        red.swap(0, 2)
        return _finish_case_a(f_orig, red, ring.field.one)
    nf = red.f
    assert nf == x * y + y * w + z
    return PlaneVerdict(True, "B", nf, red.sigma, None, f_orig)


def _pk_y_route(f_orig: Poly, red: _Reducer) -> PlaneVerdict:
    """Current f = x*p + q with p in k[y] nonconstant of degree <= 2."""
    ring = red.ring
    field = ring.field
    x, y, z = ring.gens()
    p = red.f.coefficient_in_var(0, 1)
    assert p.variables_used() <= {1}
    roots = _distinct_roots_of_p(p)
    one = _one_of(field)
    if p.degree() == 1:
        rho = roots[0]
        red.apply_components([x, y + ring.const(rho), z])
        alpha = red.f.coefficient_in_var(0, 1).coefficient_of((0, 1, 0))
        red.apply_components([x.scale(one / alpha), y, z])
        shape = "y"
    elif len(roots) == 1:
        rho = roots[0]
        red.apply_components([x, y + ring.const(rho), z])
        alpha = red.f.coefficient_in_var(0, 1).coefficient_of((0, 2, 0))
        red.apply_components([x.scale(one / alpha), y, z])
        shape = "y2"
    else:
        rho1, rho2 = roots[0], roots[1]
        diff = rho1 - rho2
        red.apply_components([x, y.scale(diff) + ring.const(rho1), z])
        alpha = red.f.coefficient_in_var(0, 1).coefficient_of((0, 2, 0))
        red.apply_components([x.scale(one / alpha), y, z])
        shape = "yy1"
    p_cur = red.f.coefficient_in_var(0, 1)
    q_cur = red.f.coefficient_in_var(0, 0)
    ok, data = russell_criterion(p_cur, q_cur)
    if not ok:
        return _no(f_orig, f"fibration-criterion-failed: {data}")
    a, r1, r0 = data

    if shape in ("y", "y2"):
        # r1, r0 are constants; normalize z so that q = a*y + z
        r1c = r1.constant_coeff()
        r0c = r0.constant_coeff()
        red.apply_components([x, y, (z - ring.const(r0c)).scale(one / r1c)])
        if shape == "y":
            return _finish_from_xy_shape(f_orig, red)
        # shape y2: f = x y^2 + a*y + z; absorb the y-multiples of a into x
        atilde = (red.f - x * y * y - z).divide_exact(y)
        assert atilde is not None
        s = _z_only_part(atilde)
        b = (atilde - s).divide_exact(y)
        assert b is not None
        if not b.is_zero():
            red.apply_components([x - b, y, z])
        # now f = x y^2 + y s(z) + z with deg s <= 2
        s = (red.f - x * y * y - z).divide_exact(y)
        assert s is not None and s.variables_used() <= {2} and s.degree() <= 2
        return _case_c_finish(f_orig, red, s)

    # shape y(y+1): f = x y (y+1) + a*y(y+1) + z*r1(y) + r0(y)
    assert a.degree() <= 1
    if not a.is_zero():
        red.apply_components([x - a, y, z])
    red.swap(0, 2)
    # f = x*s(y) + y(y+1) z + t(y)  with s = r1, t = r0
    s_poly, t_poly = r1, r0
    if s_poly.degree() == 0:
        sc = s_poly.constant_coeff()
        red.apply_components([(x - t_poly).scale(one / sc), y, z])
        return _finish_case_a(f_orig, red, field.one)
    s1 = s_poly.coefficient_of((0, 1, 0))
    s0 = s_poly.coefficient_of((0, 0, 0))
    red.apply_components([x, (y - ring.const(s0)).scale(one / s1), z])
    # f = x*y + u(y) z + v(y), deg u = 2, u(0) != 0
    u = red.f.coefficient_in_var(2, 1)
    v = red.f.coefficient_in_var(2, 0) - red.f.coefficient_in_var(0, 1) * x
    u0 = u.coefficient_of((0, 0, 0))
    assert u0, "root condition at 0 violated after normalization"
    v0 = v.coefficient_of((0, 0, 0))
    red.apply_components([x, y, (z - ring.const(v0)).scale(one / u0)])
    return _finish_from_xy_shape(f_orig, red)


def _z_only_part(p: Poly) -> Poly:
    out = {e: c for e, c in p.terms.items() if e[0] == 0 and e[1] == 0}
    return Poly(p.ring, out)


def _case_c_finish(f_orig: Poly, red: _Reducer, s: Poly) -> PlaneVerdict:
    """Current f = x y^2 + y s(z) + z; branch on deg s."""
    ring = red.ring
    field = ring.field
    one = _one_of(field)
    x, y, z = ring.gens()
    s2 = s.coefficient_of((0, 0, 2))
    s1 = s.coefficient_of((0, 0, 1))
    s0 = s.coefficient_of((0, 0, 0))
    if not s2 and not s1:
        # constant s: (x, y, z - s0*y) then exchange x, z lands in case A
        red.apply_components([x, y, z - y.scale(s0)])
        red.swap(0, 2)
        return _finish_case_a(f_orig, red, field.one)
    if not s2:
        # deg s = 1: classical change lands back in the xy-shape
        a1, b1 = s1, s0
        comp_x = z.scale(a1 * a1) + ring.const(a1 * b1)
        comp_y = (y - ring.const(one)).scale(one / a1)
        red.apply(AffineMap.from_components([comp_x, comp_y, x]))
        # now f = x*y + y*r(y,z) + z
        return _finish_from_xy_shape(f_orig, red)
    # deg s = 2: case C normal form via scalings
    beta = one / s2
    alpha = s2 * s2
    red.apply_components([x.scale(alpha), y.scale(beta), z])
    nf = red.f
    scur = (nf - x * y * y - z).divide_exact(y)
    assert scur is not None and scur.coefficient_of((0, 0, 2)) == field.one
    return PlaneVerdict(True, "C", nf, red.sigma, None, f_orig)


def _parabola_route(f_orig: Poly, red: _Reducer) -> PlaneVerdict:
    """Current f = x*p + q where p = c y^2 + d y + e z + g with c, e nonzero."""
    ring = red.ring
    field = ring.field
    one = _one_of(field)
    x, y, z = ring.gens()
    p = red.f.coefficient_in_var(0, 1)
    c = p.coefficient_of((0, 2, 0))
    d = p.coefficient_of((0, 1, 0))
    e = p.coefficient_of((0, 0, 1))
    g = p.coefficient_of((0, 0, 0))
    inv_e = one / e
    comp_z = y.scale(c * inv_e) - z.scale(d * inv_e) - ring.const(g * inv_e)
    red.apply(AffineMap.from_components([x, z, comp_z]))
    # p o psi = c (y + z^2); absorb c into x
    red.apply_components([x.scale(one / c), y, z])
    p_cur = red.f.coefficient_in_var(0, 1)
    assert p_cur == y + z * z, "parabola normalization failed"
    q_cur = red.f.coefficient_in_var(0, 0)
    # the fiber criterion after the (non-affine) straightening y -> y - z^2
    T = q_cur.subst([x, y - z * z, z])
    t0 = T.subst([x, ring.zero(), z])
    if t0.degree_in(2) != 1 or not t0.coefficient_in_var(2, 1).is_constant():
        return _no(f_orig, "parabola-fiber-not-a-line")
    r1 = t0.coefficient_of((0, 0, 1))
    r0 = t0.coefficient_of((0, 0, 0))
    A = (T - z.scale(r1) - ring.const(r0)).divide_exact(y)
    assert A is not None
    s = A.subst([x, y + z * z, z])
    assert s.degree() <= 1, "structural degree bound violated"
    red.apply_components([x - s, y, z])
    assert red.f == x * (y + z * z) + z.scale(r1) + ring.const(r0)
    red.apply_components([x, y, (z - ring.const(r0)).scale(one / r1)])
    # f = x (y + r'(z)) + z with r' quadratic
    rprime = red.f.coefficient_in_var(0, 1) - y
    mu2 = rprime.coefficient_of((0, 0, 2))
    mu1 = rprime.coefficient_of((0, 0, 1))
    mu0 = rprime.coefficient_of((0, 0, 0))
    red.apply_components([x, y - ring.const(mu0) - z.scale(mu1), z])
    red.apply_components([x.scale(one / mu2), y.scale(mu2), z])
    assert red.f == x * (y + z * z) + z
    red.swap(0, 1)
    # f = x y + y z^2 + z: case B with r2 = z^2
    assert red.f == x * y + y * (z * z) + z
    return PlaneVerdict(True, "B", red.f, red.sigma, None, f_orig)


def _full_root_direction(qd: Poly, d: int):
    """Direction [t:1] or [1:0] where the binary form qd is c * ell^d."""
    field = qd.ring.field
    coeffs = [field.zero] * (d + 1)
    for e, c in qd.terms.items():
        coeffs[e[1]] = coeffs[e[1]] + c
    coeffs = trim(coeffs, field.zero)
    if len(coeffs) == 1:
        return (_one_of(field), _zero_of(field))  # qd = c z^d -> direction [1:0]
    if len(coeffs) != d + 1:
        return None  # z divides qd along with a y-factor: two directions
    if isinstance(field, RationalField):
        roots, residual = rational_roots(coeffs)
        if residual is not None:
            return None
    else:
        from .uniroots import ff_roots

        roots, residual = ff_roots(coeffs, field)
        if residual is not None:
            return None
    if len(roots) == 1 and roots[0][1] == d:
        return (roots[0][0], _one_of(field))
    return None


def _curve_route(f_orig: Poly, red: _Reducer) -> PlaneVerdict:
    """Current f = q(y, z): the surface is a cylinder over a plane curve."""
    ring = red.ring
    field = ring.field
    one = _one_of(field)
    x, y, z = ring.gens()
    q = red.f
    d = q.degree()
    qd = q.homogeneous_part(d)
    direction = _full_root_direction(qd, d)
    if direction is None:
        return _no(f_orig, "curve-has-several-points-at-infinity")
    t, ssig = direction
    if ssig:
        red.apply_components([x, y + z.scale(t), z])
    else:
        red.swap(1, 2)
    q = red.f
    if q.degree_in(2) != 1 or not q.coefficient_in_var(2, 1).is_constant():
        return _no(f_orig, "curve-not-isomorphic-to-a-line")
    a = q.coefficient_of((0, 0, 1))
    s = q.coefficient_in_var(2, 0)
    s0 = s.coefficient_of((0, 0, 0))
    s1 = s.coefficient_of((0, 1, 0))
    comp_z = (x - ring.const(s0) - y.scale(s1)).scale(one / a)
    red.apply(AffineMap.from_components([z, y, comp_z]))
    nf = red.f
    assert nf.coefficient_of((1, 0, 0)) == field.one and nf.degree_in(0) == 1
    assert nf.homogeneous_part(1) == x
    return PlaneVerdict(True, "A", nf, red.sigma, None, f_orig)


# -- variable witnesses ---------------------------------------------------------------


def variable_witness(f: Poly, verdict: Optional[PlaneVerdict] = None) -> VariableWitness:
    """Complete a plane-defining f to a full coordinate system (f, g, h).

    The returned map is verified to be an automorphism by composing with an
    explicitly constructed two-sided inverse.  For cases A and B a tame word
    evaluating to the map is attached; the case C trivialization has degree 6
    and is certified by its inverse instead.
    """
    if verdict is None:
        verdict = is_plane_deg3(f)
    if not verdict.is_plane:
        raise ValueError(f"not a plane: {verdict.reason}")
    ring = verdict.normal_form.ring
    x, y, z = ring.gens()
    sigma_inv = verdict.witness.inverse()
    nf = verdict.normal_form
    if verdict.case == "A":
        tri = TriangularMap.from_components([nf, y, z])
        word = TameWord([("triangular", tri), ("affine", sigma_inv)])
        phi = eval_tame_word(word)
        inv = eval_tame_word(word.inverse())
    elif verdict.case == "B":
        w2 = (nf - x * y - z).divide_exact(y)
        a_xz = w2.subst([x, z, x])       # w2(z, x): quadratic in (x, z)
        a_yz = a_xz.subst([y, y, z])     # same form in (y, z) for the tail
        h1 = TriangularMap.from_components([x + y * z, y, z])
        h2 = TriangularMap.from_components([x + a_yz, y, z])
        iota = AffineMap.permutation(ring, [1, 0, 2])
        tau = AffineMap.permutation(ring, [2, 0, 1])  # (z, x, y)
        word = TameWord(
            [
                ("triangular", h1),
                ("affine", iota),
                ("triangular", h2),
                ("affine", iota),
                ("affine", tau),
                ("affine", sigma_inv),
            ]
        )
        phi = eval_tame_word(word)
        inv = eval_tame_word(word.inverse())
    else:  # case C: explicit trivialization of the fibration
        a = nf.coefficient_of((0, 1, 1))
        b = nf.coefficient_of((0, 1, 0))
        s = x * y + z * z + z.scale(a) + ring.const(b)
        t = x - s * (z + z + y * s + ring.const(a))
        phi_nf = PolyMap([nf, y, t])
        S = z * y + x * x + x.scale(a) + ring.const(b)
        z_back = x - y * S
        x_back = z + S * (x + x - y * S + ring.const(a))
        psi_nf = PolyMap([x_back, y, z_back])
        assert compose(phi_nf, psi_nf).is_identity()
        assert compose(psi_nf, phi_nf).is_identity()
        phi = compose(phi_nf, sigma_inv.to_polymap())
        inv = compose(verdict.witness.to_polymap(), psi_nf)
        word = None
    if word is not None:
        assert eval_tame_word(word) == phi
    assert compose(phi, inv).is_identity() and compose(inv, phi).is_identity()
    return VariableWitness(map=phi, inverse=inv, tame_word=word)
