"""Random instances of the eleven normal-form families, for tests."""

from cubicaut.fields import GF, QQ
from cubicaut.polymaps import AffineMap, PolyMap
from cubicaut.polyring import Ring


def rand_coeff(field, rng, nonzero=False):
    if field is QQ:
        while True:
            c = rng.randint(-4, 4)
            if c or not nonzero:
                return c
    els = list(field.elements())
    while True:
        c = rng.choice(els)
        if c or not nonzero:
            return c


def rand_affine(ring, rng):
    field = ring.field
    n = ring.nvars
    while True:
        rows = [[field.coerce(rand_coeff(field, rng)) for _ in range(n)] for _ in range(n)]
        trans = [field.coerce(rand_coeff(field, rng)) for _ in range(n)]
        try:
            return AffineMap(ring, rows, trans)
        except ValueError:
            continue


def rand_homog2(ring, rng, vars_pair, require_var=None):
    """Random homogeneous degree-2 form in the two given variables."""
    i, j = vars_pair
    while True:
        terms = {}
        for (ei, ej) in [(2, 0), (1, 1), (0, 2)]:
            c = rand_coeff(ring.field, rng)
            if c:
                e = [0, 0, 0]
                e[i], e[j] = ei, ej
                terms[tuple(e)] = ring.field.coerce(c)
        from cubicaut.polyring import Poly

        p = Poly(ring, terms)
        if p.is_zero():
            continue
        if require_var is not None and require_var not in p.variables_used():
            continue
        return p


def rand_homog3(ring, rng, vars_pair):
    i, j = vars_pair
    from cubicaut.polyring import Poly

    terms = {}
    for (ei, ej) in [(3, 0), (2, 1), (1, 2), (0, 3)]:
        c = rand_coeff(ring.field, rng)
        if c:
            e = [0, 0, 0]
            e[i], e[j] = ei, ej
            terms[tuple(e)] = ring.field.coerce(c)
    return Poly(ring, terms)


def family_instance(fam, ring, rng):
    """A random member of the given family's parameter set (normal form)."""
    x, y, z = ring.gens()
    field = ring.field
    C = lambda nonzero=False: field.coerce(rand_coeff(field, rng, nonzero))
    if fam == 1:
        r2 = rand_homog2(ring, rng, (1, 2))
        r3 = rand_homog3(ring, rng, (1, 2))
        return PolyMap([x + r2 + r3])
    if fam == 2:
        r2 = rand_homog2(ring, rng, (1, 2), require_var=2)
        return PolyMap([x * y + y * r2 + z])
    if fam == 3:
        return PolyMap([x * y * y + y * (z * z + z.scale(C()) + ring.const(C())) + z])
    if fam in (4, 10):
        p2 = rand_homog2(ring, rng, (1, 2))
        p3 = rand_homog3(ring, rng, (1, 2))
        comp1 = x + p2 + p3
        comp2 = y + (z * z).scale(C()) + (z ** 3).scale(C())
        return PolyMap([comp1, comp2] + ([z] if fam == 10 else []))
    if fam in (5, 6, 11):
        a2 = rand_homog2(ring, rng, (0, 2), require_var=0)
        comp1 = y * z + z * a2 + x
        if fam == 6:
            return PolyMap([comp1, z])
        if fam == 5:
            r = z.scale(C()) + (z * z).scale(C()) + (z ** 3).scale(C())
        else:
            r = (z * z).scale(C()) + (z ** 3).scale(C())
        comp2 = y + a2 + r
        return PolyMap([comp1, comp2] + ([z] if fam == 11 else []))
    if fam == 7:
        comp1 = x * y * y + y * (z * z + z.scale(C()) + ring.const(C())) + z
        return PolyMap([comp1, y])
    if fam == 8:
        return PolyMap([x + z * z + y ** 3, y + x * x])
    if fam == 9:
        return PolyMap([x + z * z + y ** 3, z + x ** 3])
    raise ValueError(fam)


def family_field(fam):
    if fam == 8:
        return GF(2)
    if fam == 9:
        return GF(3)
    return QQ
