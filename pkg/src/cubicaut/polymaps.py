"""Polynomial maps A^d -> A^n, affine and triangular generators, tame words.

Composition conventions used throughout the package:

* ``compose(f, g)`` is the map ``v -> f(g(v))``, written ``f o g``.
* For an affine map ``a`` and a polynomial ``p``, the pullback ``a.pullback(p)``
  is ``p o a`` (substitute the components of ``a`` into ``p``).
* ``eval_tame_word([w1, w2, w3])`` is ``w1 o w2 o w3`` (leftmost outermost).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .fields import FiniteField
from .polyring import Poly, Ring, parse_poly


class DimensionMismatch(ValueError):
    """Source/target dimensions of maps do not line up."""


class BudgetExceeded(RuntimeError):
    """Iteration stopped early; partial exact results are attached."""

    def __init__(self, message, degrees=None):
        super().__init__(message)
        self.degrees = degrees or []


class PolyMap:
    """A tuple of polynomials sharing a source ring."""

    __slots__ = ("components", "ring")

    def __init__(self, components: Sequence[Poly]):
        components = tuple(components)
        if not components:
            raise ValueError("empty map")
        ring = components[0].ring
        for c in components:
            if c.ring != ring:
                raise DimensionMismatch("components live in different rings")
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "ring", ring)

    def __setattr__(self, *_):
        raise AttributeError("PolyMap is immutable")

    @property
    def source_dim(self) -> int:
        return self.ring.nvars

    @property
    def target_dim(self) -> int:
        return len(self.components)

    def degree(self) -> int:
        return max(c.degree() for c in self.components)

    def is_identity(self) -> bool:
        if self.source_dim != self.target_dim:
            return False
        return all(c == self.ring.var(i) for i, c in enumerate(self.components))

    def __getitem__(self, i) -> Poly:
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __eq__(self, other):
        if not isinstance(other, PolyMap):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.components) + ")"

    def __repr__(self):
        return f"PolyMap{self}"

    @classmethod
    def identity(cls, ring: Ring) -> "PolyMap":
        return cls(ring.gens())

    @classmethod
    def parse(cls, text: str, ring: Ring) -> "PolyMap":
        """Parse "(f1, ..., fn)" using the polynomial grammar inside."""
        s = text.strip()
        if not (s.startswith("(") and s.endswith(")")):
            return cls([parse_poly(s, ring)])
        inner = s[1:-1]
        pieces, depth, start = [], 0, 0
        for i, ch in enumerate(inner):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch == "," and depth == 0:
                pieces.append(inner[start:i])
                start = i + 1
        pieces.append(inner[start:])
        return cls([parse_poly(p, ring) for p in pieces])


def compose(f: PolyMap, g: PolyMap) -> PolyMap:
    """The composite f o g; requires target_dim(g) == source_dim(f)."""
    if g.target_dim != f.source_dim:
        raise DimensionMismatch(
            f"cannot compose: inner map has target dim {g.target_dim}, "
            f"outer expects {f.source_dim}"
        )
    return PolyMap([c.subst(list(g.components)) for c in f.components])


def jacobian_det(f: PolyMap) -> Poly:
    """Exact determinant of the Jacobian matrix of a square map."""
    n = f.source_dim
    if f.target_dim != n:
        raise DimensionMismatch("Jacobian determinant needs a square map")
    rows = [[f[i].partial_derivative(j) for j in range(n)] for i in range(n)]
    return _poly_det(rows, f.ring)


def _poly_det(rows, ring: Ring) -> Poly:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    # cofactor expansion; n <= 3 in this package
    acc = ring.zero()
    for j in range(n):
        minor = [[rows[i][k] for k in range(n) if k != j] for i in range(1, n)]
        term = rows[0][j] * _poly_det(minor, ring)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


class _Budget:
    """Tracks term counts and multiplication work against caps.

    `cap` bounds the number of terms in any intermediate polynomial; the
    pair-product work allowance is 16 * cap, keeping single steps from
    degenerating into quadratic blowups far beyond the term budget.
    """

    def __init__(self, cap: int):
        self.cap = cap
        self.work_cap = 16 * cap
        self.spent = 0

    def mul(self, a: Poly, b: Poly) -> Poly:
        self.spent += len(a.terms) * len(b.terms)
        if self.spent > self.work_cap:
            raise BudgetExceeded(f"work budget {self.work_cap} exceeded")
        out = a * b
        if len(out.terms) > self.cap:
            raise BudgetExceeded(f"term budget {self.cap} exceeded")
        return out


def _budgeted_subst(p: Poly, images, budget: _Budget) -> Poly:
    target = images[0].ring
    acc = target.zero()
    cache: dict = {}
    for i, img in enumerate(images):
        cache[(i, 1)] = img
    for e, c in sorted(p.terms.items()):
        term = target.const(c)
        for i, ei in enumerate(e):
            if ei:
                if (i, ei) not in cache:
                    k = max(j for j in range(1, ei + 1) if (i, j) in cache)
                    chain = cache[(i, k)]
                    for j in range(k + 1, ei + 1):
                        chain = budget.mul(chain, images[i])
                        cache[(i, j)] = chain
                term = budget.mul(term, cache[(i, ei)])
        acc = acc + term
    return acc


def iterate_degrees(f: PolyMap, r_max: int, budget: int = 10 ** 6):
    """Exact degrees of f^1, ..., f^r_max.

    Composes f with the previous iterate.  When the multiplication work or
    any term count for the next step exceeds `budget`, raises BudgetExceeded
    with the exact partial degree list attached.
    """
    if f.source_dim != f.target_dim:
        raise DimensionMismatch("iteration needs a square map")
    degrees = []
    current = f
    degrees.append(current.degree())
    for _ in range(1, r_max):
        tracker = _Budget(budget)
        try:
            comps = [
                _budgeted_subst(c, list(current.components), tracker)
                for c in f.components
            ]
        except BudgetExceeded as stop:
            raise BudgetExceeded(
                f"budget {budget} exceeded after {len(degrees)} iterates: {stop}",
                degrees=degrees,
            ) from None
        current = PolyMap(comps)
        degrees.append(current.degree())
    return degrees


class AffineMap:
    """x -> M x + t with an exact nonzero-determinant certificate."""

    __slots__ = ("ring", "matrix", "translation", "det")

    def __init__(self, ring: Ring, matrix, translation):
        n = ring.nvars
        field = ring.field
        matrix = tuple(tuple(field.coerce(c) for c in row) for row in matrix)
        translation = tuple(field.coerce(c) for c in translation)
        if len(matrix) != n or any(len(r) != n for r in matrix) or len(translation) != n:
            raise DimensionMismatch("affine data has wrong shape")
        det = _field_det(matrix, field)
        if not det:
            raise ValueError("affine map is not invertible (determinant is zero)")
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "translation", translation)
        object.__setattr__(self, "det", det)

    def __setattr__(self, *_):
        raise AttributeError("AffineMap is immutable")

    @classmethod
    def identity(cls, ring: Ring) -> "AffineMap":
        n = ring.nvars
        one, zero = ring.field.one, ring.field.zero
        m = [[one if i == j else zero for j in range(n)] for i in range(n)]
        return cls(ring, m, [zero] * n)

    @classmethod
    def permutation(cls, ring: Ring, perm) -> "AffineMap":
        """Map with components (x_{perm[0]}, ..., x_{perm[n-1]})."""
        n = ring.nvars
        one, zero = ring.field.one, ring.field.zero
        m = [[one if j == perm[i] else zero for j in range(n)] for i in range(n)]
        return cls(ring, m, [zero] * n)

    @classmethod
    def translation_by(cls, ring: Ring, v) -> "AffineMap":
        a = cls.identity(ring)
        return cls(ring, a.matrix, v)

    @classmethod
    def from_components(cls, comps: Sequence[Poly]) -> "AffineMap":
        """Build from degree <= 1 polynomial components."""
        ring = comps[0].ring
        n = ring.nvars
        if len(comps) != n:
            raise DimensionMismatch("affine map must be square")
        zero = ring.field.zero
        matrix, translation = [], []
        for c in comps:
            if c.degree() > 1:
                raise ValueError(f"component {c} is not affine")
            row = []
            for j in range(n):
                e = [0] * n
                e[j] = 1
                row.append(c.coefficient_of(e))
            matrix.append(row)
            translation.append(c.coefficient_of([0] * n))
        return cls(ring, matrix, translation)

    def component(self, i: int) -> Poly:
        acc = self.ring.const(self.translation[i])
        for j, c in enumerate(self.matrix[i]):
            if c:
                acc = acc + self.ring.var(j).scale(c)
        return acc

    def to_polymap(self) -> PolyMap:
        return PolyMap([self.component(i) for i in range(self.ring.nvars)])

    def pullback(self, p: Poly) -> Poly:
        """alpha^*(p) = p o alpha."""
        return p.subst([self.component(i) for i in range(self.ring.nvars)])

    def apply_to_point(self, point):
        field = self.ring.field
        out = []
        for i in range(self.ring.nvars):
            acc = self.translation[i]
            for j, c in enumerate(self.matrix[i]):
                acc = acc + c * point[j]
            out.append(acc)
        return tuple(out)

    def inverse(self) -> "AffineMap":
        inv = _field_matrix_inverse(self.matrix, self.ring.field)
        n = self.ring.nvars
        t = []
        for i in range(n):
            acc = self.ring.field.zero
            for j in range(n):
                acc = acc + inv[i][j] * self.translation[j]
            t.append(-acc)
        return AffineMap(self.ring, inv, t)

    def compose_with(self, other: "AffineMap") -> "AffineMap":
        """self o other, staying in the affine group."""
        n = self.ring.nvars
        field = self.ring.field
        m = [[field.zero] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                acc = field.zero
                for k in range(n):
                    acc = acc + self.matrix[i][k] * other.matrix[k][j]
                m[i][j] = acc
        t = list(self.apply_to_point(other.translation))
        return AffineMap(self.ring, m, t)

    def is_identity(self) -> bool:
        return self.to_polymap().is_identity()

    def linear_part_row(self, i: int):
        return self.matrix[i]

    def __eq__(self, other):
        if not isinstance(other, AffineMap):
            return NotImplemented
        return (self.matrix, self.translation) == (other.matrix, other.translation)

    def __hash__(self):
        return hash((self.matrix, self.translation))

    def __str__(self):
        return str(self.to_polymap())

    def __repr__(self):
        return f"AffineMap{self}"


def _field_det(matrix, field):
    from .uniroots import _det

    return _det([list(r) for r in matrix], field)


def _field_matrix_inverse(matrix, field):
    n = len(matrix)
    one, zero = field.one, field.zero
    aug = [list(matrix[i]) + [one if j == i else zero for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if aug[r][col])
        aug[col], aug[pivot] = aug[pivot], aug[col]
        pv = aug[col][col]
        inv = one / pv if isinstance(field, FiniteField) else 1 / pv
        aug[col] = [c * inv for c in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    return tuple(tuple(row[n:]) for row in aug)


class TriangularMap:
    """Components c_i * x_i + tail_i(x_{i+1}, ..., x_n) with c_i nonzero."""

    __slots__ = ("ring", "scalars", "tails")

    def __init__(self, ring: Ring, scalars, tails):
        field = ring.field
        scalars = tuple(field.coerce(c) for c in scalars)
        tails = tuple(tails)
        n = ring.nvars
        if len(scalars) != n or len(tails) != n:
            raise DimensionMismatch("triangular data has wrong shape")
        for i, (c, t) in enumerate(zip(scalars, tails)):
            if not c:
                raise ValueError(f"triangular scalar {i} is zero")
            if any(v <= i for v in t.variables_used()):
                raise ValueError(f"tail {i} uses variable <= {i}")
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "scalars", scalars)
        object.__setattr__(self, "tails", tails)

    def __setattr__(self, *_):
        raise AttributeError("TriangularMap is immutable")

    @classmethod
    def from_components(cls, comps: Sequence[Poly]) -> "TriangularMap":
        ring = comps[0].ring
        n = ring.nvars
        scalars, tails = [], []
        for i, comp in enumerate(comps):
            e = [0] * n
            e[i] = 1
            c = comp.coefficient_of(e)
            if not c:
                raise ValueError(f"component {i} has no x_{i} term")
            tail = comp - ring.var(i).scale(c)
            if any(v <= i for v in tail.variables_used()):
                raise ValueError(f"component {i} is not triangular: {comp}")
            scalars.append(c)
            tails.append(tail)
        return cls(ring, scalars, tails)

    def to_polymap(self) -> PolyMap:
        return PolyMap(
            [self.ring.var(i).scale(c) + t for i, (c, t) in enumerate(zip(self.scalars, self.tails))]
        )

    def inverse(self) -> "TriangularMap":
        """Exact inverse by descending back-substitution."""
        ring = self.ring
        n = ring.nvars
        field = ring.field
        inv_comps: list = [None] * n
        for i in range(n - 1, -1, -1):
            c, tail = self.scalars[i], self.tails[i]
            inv_c = field.one / c if isinstance(field, FiniteField) else 1 / c
            # x_i = (y_i - tail(inverse of later components)) / c_i
            images = [ring.var(j) if j <= i else inv_comps[j] for j in range(n)]
            inv_comps[i] = (ring.var(i) - tail.subst(images)).scale(inv_c)
        return TriangularMap.from_components(inv_comps)

    def __eq__(self, other):
        if not isinstance(other, TriangularMap):
            return NotImplemented
        return (self.scalars, self.tails) == (other.scalars, other.tails)

    def __str__(self):
        return str(self.to_polymap())

    def __repr__(self):
        return f"TriangularMap{self}"


class TameWord:
    """A word in affine and triangular generators; evaluates by composition."""

    __slots__ = ("letters",)

    def __init__(self, letters):
        letters = tuple(letters)
        for kind, gen in letters:
            if kind not in ("affine", "triangular"):
                raise ValueError(f"unknown letter kind {kind!r}")
            if kind == "affine" and not isinstance(gen, AffineMap):
                raise TypeError("affine letter must be an AffineMap")
            if kind == "triangular" and not isinstance(gen, TriangularMap):
                raise TypeError("triangular letter must be a TriangularMap")
        object.__setattr__(self, "letters", letters)

    def __setattr__(self, *_):
        raise AttributeError("TameWord is immutable")

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def inverse(self) -> "TameWord":
        out = []
        for kind, gen in reversed(self.letters):
            out.append((kind, gen.inverse()))
        return TameWord(out)

    def __repr__(self):
        kinds = ",".join(k[0] for k, _ in self.letters)
        return f"TameWord[{kinds}]"


def invert_triangular(t: TriangularMap) -> TriangularMap:
    return t.inverse()


def invert_affine(a: AffineMap) -> AffineMap:
    return a.inverse()


def eval_tame_word(word: TameWord) -> PolyMap:
    """Compose the letters as written: eval([a, b]) = a o b."""
    if not word.letters:
        raise ValueError("empty tame word")
    result = None
    for kind, gen in word.letters:
        pm = gen.to_polymap()
        result = pm if result is None else compose(result, pm)
    return result


def apply_equivalence(alpha: AffineMap, f: PolyMap, beta: AffineMap) -> PolyMap:
    """alpha o f o beta, computed exactly."""
    if alpha.ring.nvars != f.target_dim:
        raise DimensionMismatch("target affine map has wrong dimension")
    if beta.ring.nvars != f.source_dim:
        raise DimensionMismatch("source affine map has wrong dimension")
    inner = compose(f, beta.to_polymap())
    comps = []
    for i in range(alpha.ring.nvars):
        acc = inner.ring.const(alpha.translation[i])
        for j, c in enumerate(alpha.matrix[i]):
            if c:
                acc = acc + inner.components[j].scale(c)
        comps.append(acc)
    return PolyMap(comps)
