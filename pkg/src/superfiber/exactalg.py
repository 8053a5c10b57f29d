"""Exact linear algebra over prime fields F_p and the rationals.

Vectors are row tuples.  An m x n matrix represents a linear map F^n -> F^m
acting on column vectors, so ``apply_matrix(M, v) = M v``.  Subspaces are
stored as reduced row echelon bases, which makes equality of subspaces
equality of representations.

Bilinear data comes in two kinds.  An ``alternate`` form stores its Gram
matrix directly.  A ``symmetric`` form is stored through a quadratic
coefficient matrix Q with q(v) = v Q v^t; the pairing used for orthogonality
and perps is the polar form Q + Q^t.  Over odd characteristic the polar form
is exactly the classical Gram matrix and q vanishes precisely on the vectors
v with Gram(v, v) = 0.  Over F_2 the quadratic form is the meaningful
isotropy notion (the Gram diagonal alone would degenerate to a linear
condition), and the polar form of an odd-dimensional space acquires a
one-dimensional anisotropic radical, which is the correct behaviour.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator, Optional, Sequence, Tuple

Vector = Tuple
Matrix = Tuple[Tuple, ...]


class FiniteField:
    """Arithmetic mod a small prime."""

    def __init__(self, p: int):
        if p < 2 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
            raise ValueError(f"modulus {p} is not prime")
        self.p = p
        self.zero = 0
        self.one = 1 % p

    @property
    def char(self) -> int:
        return self.p

    def of(self, x) -> int:
        return int(x) % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, self.p - 2, self.p)

    def elements(self) -> Iterator[int]:
        return iter(range(self.p))

    def __eq__(self, other):
        return isinstance(other, FiniteField) and other.p == self.p

    def __hash__(self):
        return hash(("Fp", self.p))

    def __repr__(self):
        return f"GF({self.p})"


class RationalField:
    """Exact rational arithmetic via fractions.Fraction."""

    zero = Fraction(0)
    one = Fraction(1)

    @property
    def char(self) -> int:
        return 0

    def of(self, x) -> Fraction:
        return Fraction(x)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / Fraction(a)

    def elements(self):
        raise TypeError("cannot enumerate the rationals")

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")

    def __repr__(self):
        return "QQ"


QQ = RationalField()


def field_for(modulus: Optional[int]):
    """Field from a JSON-style modulus: an integer p gives F_p, None gives Q."""
    return QQ if modulus is None else FiniteField(modulus)


# ---------------------------------------------------------------------------
# matrices


def mat(field, rows) -> Matrix:
    return tuple(tuple(field.of(x) for x in row) for row in rows)


def zero_matrix(field, m: int, n: int) -> Matrix:
    z = field.zero
    return tuple((z,) * n for _ in range(m))


def identity_matrix(field, n: int) -> Matrix:
    z, o = field.zero, field.one
    return tuple(tuple(o if i == j else z for j in range(n)) for i in range(n))


def transpose(m: Matrix) -> Matrix:
    return tuple(zip(*m)) if m else ()


def mat_mul(field, a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return tuple(
        tuple(sum_dot(field, row, col) for col in bt) for row in a
    )


def sum_dot(field, u: Sequence, v: Sequence):
    acc = field.zero
    for x, y in zip(u, v):
        acc = field.add(acc, field.mul(x, y))
    return acc


def apply_matrix(field, m: Matrix, v: Vector) -> Vector:
    return tuple(sum_dot(field, row, v) for row in m)


def mat_pow(field, m: Matrix, k: int) -> Matrix:
    n = len(m)
    out = identity_matrix(field, n)
    for _ in range(k):
        out = mat_mul(field, out, m)
    return out


def rref(field, rows: Sequence[Sequence]) -> Tuple[Matrix, Tuple[int, ...]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    work = [list(r) for r in rows]
    nrows = len(work)
    ncols = len(work[0]) if work else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, nrows):
            if work[i][c] != field.zero:
                pr = i
                break
        if pr is None:
            continue
        work[r], work[pr] = work[pr], work[r]
        inv = field.inv(work[r][c])
        work[r] = [field.mul(inv, x) for x in work[r]]
        for i in range(nrows):
            if i != r and work[i][c] != field.zero:
                f = work[i][c]
                work[i] = [field.sub(x, field.mul(f, y)) for x, y in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return tuple(tuple(row) for row in work[:r]), tuple(pivots)


def rank(field, m: Matrix) -> int:
    return len(rref(field, m)[0]) if m else 0


def right_kernel(field, m: Matrix, ncols: Optional[int] = None) -> Matrix:
    """Canonical basis (as rows) of {v : M v = 0}."""
    if ncols is None:
        ncols = len(m[0]) if m else 0
    if not m:
        return identity_matrix(field, ncols)
    red, pivots = rref(field, m)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [field.zero] * ncols
        v[fc] = field.one
        for r, pc in enumerate(pivots):
            v[pc] = field.neg(red[r][fc])
        basis.append(tuple(v))
    rows, _ = rref(field, basis) if basis else ((), ())
    return rows


def solve(field, m: Matrix, b: Vector) -> Optional[Vector]:
    """One solution of M x = b, or None."""
    ncols = len(m[0]) if m else 0
    aug = [list(row) + [bi] for row, bi in zip(m, b)]
    red, pivots = rref(field, aug)
    x = [field.zero] * ncols
    for r, pc in enumerate(pivots):
        if pc == ncols:
            return None
        x[pc] = red[r][ncols]
    return tuple(x)


def inverse_matrix(field, m: Matrix) -> Matrix:
    n = len(m)
    aug = [list(row) + list(identity_matrix(field, n)[i]) for i, row in enumerate(m)]
    red, pivots = rref(field, aug)
    if tuple(pivots) != tuple(range(n)):
        raise ValueError("matrix is not invertible")
    return tuple(tuple(row[n:]) for row in red)


# ---------------------------------------------------------------------------
# subspaces


@dataclass(frozen=True)
class Subspace:
    """A subspace of F^n in canonical reduced row echelon form."""

    ambient: int
    rows: Matrix

    @staticmethod
    def from_rows(field, ambient: int, rows: Sequence[Sequence]) -> "Subspace":
        red, _ = rref(field, mat(field, rows)) if rows else ((), ())
        return Subspace(ambient, red)

    @staticmethod
    def zero(ambient: int) -> "Subspace":
        return Subspace(ambient, ())

    @staticmethod
    def full(field, ambient: int) -> "Subspace":
        return Subspace(ambient, identity_matrix(field, ambient))

    @property
    def dim(self) -> int:
        return len(self.rows)

    def contains_vector(self, field, v: Vector) -> bool:
        red, _ = rref(field, self.rows + (tuple(v),))
        return len(red) == self.dim

    def contains(self, field, other: "Subspace") -> bool:
        red, _ = rref(field, self.rows + other.rows)
        return len(red) == self.dim

    def vectors(self, field) -> Iterator[Vector]:
        """All vectors of the subspace (finite fields only)."""
        for coeffs in product(list(field.elements()), repeat=self.dim):
            v = [field.zero] * self.ambient
            for c, row in zip(coeffs, self.rows):
                if c != field.zero:
                    v = [field.add(x, field.mul(c, y)) for x, y in zip(v, row)]
            yield tuple(v)


def kernel(field, m: Matrix, ncols: Optional[int] = None) -> Subspace:
    if ncols is None:
        ncols = len(m[0]) if m else 0
    return Subspace(ncols, right_kernel(field, m, ncols))


def image(field, m: Matrix) -> Subspace:
    """Column space of m, as a subspace of F^(#rows)."""
    ambient = len(m)
    return Subspace.from_rows(field, ambient, transpose(m))


def constraints_of(field, s: Subspace) -> Matrix:
    """Rows c with c . v = 0 exactly cutting out s (standard dot pairing)."""
    if s.dim == 0:
        return identity_matrix(field, s.ambient)
    return right_kernel(field, s.rows, s.ambient)


def intersect(field, a: Subspace, b: Subspace) -> Subspace:
    if a.ambient != b.ambient:
        raise ValueError("ambient dimension mismatch")
    stacked = constraints_of(field, a) + constraints_of(field, b)
    return Subspace(a.ambient, right_kernel(field, stacked, a.ambient))


def subspace_sum(field, a: Subspace, b: Subspace) -> Subspace:
    if a.ambient != b.ambient:
        raise ValueError("ambient dimension mismatch")
    return Subspace.from_rows(field, a.ambient, a.rows + b.rows)


def projective_normalize(field, v: Vector) -> Vector:
    """Scale so the first nonzero coordinate is 1."""
    for x in v:
        if x != field.zero:
            inv = field.inv(x)
            return tuple(field.mul(inv, y) for y in v)
    raise ValueError("zero vector has no projective representative")


def line_representatives(field, s: Subspace) -> Iterator[Vector]:
    """Canonical representatives of the lines of s, each exactly once."""
    elems = list(field.elements())
    d = s.dim
    for lead in range(d):
        for tail in product(elems, repeat=d - lead - 1):
            coeffs = (field.zero,) * lead + (field.one,) + tail
            v = [field.zero] * s.ambient
            for c, row in zip(coeffs, s.rows):
                if c != field.zero:
                    v = [field.add(x, field.mul(c, y)) for x, y in zip(v, row)]
            yield projective_normalize(field, tuple(v))


# ---------------------------------------------------------------------------
# bilinear and quadratic forms

SYMMETRIC = "symmetric"
ALTERNATE = "alternate"


@dataclass(frozen=True)
class BilinearForm:
    """A symmetric (quadratic) or alternate form on F^n.

    For the symmetric kind ``matrix`` holds quadratic coefficients Q and the
    pairing is the polar form Q + Q^t.  For the alternate kind ``matrix`` is
    the Gram matrix itself.
    """

    kind: str
    ambient: int
    matrix: Matrix

    @staticmethod
    def symmetric_from_gram(field, gram: Sequence[Sequence]) -> "BilinearForm":
        """Build from a classical symmetric Gram matrix.

        Over odd characteristic (and Q) the diagonal is halved so that the
        polar form reproduces the Gram matrix exactly.  Over F_2 the upper
        triangle including the diagonal is kept as the quadratic refinement.
        """
        g = mat(field, gram)
        n = len(g)
        if any(g[i][j] != g[j][i] for i in range(n) for j in range(n)):
            raise ValueError("Gram matrix is not symmetric")
        if field.char == 2:
            q = [[g[i][j] if i < j else (g[i][i] if i == j else field.zero)
                  for j in range(n)] for i in range(n)]
        else:
            half = field.inv(field.of(2))
            q = [[g[i][j] if i < j else (field.mul(half, g[i][i]) if i == j else field.zero)
                  for j in range(n)] for i in range(n)]
        return BilinearForm(SYMMETRIC, n, tuple(tuple(r) for r in q))

    @staticmethod
    def symmetric_from_quadratic(field, q: Sequence[Sequence]) -> "BilinearForm":
        return BilinearForm(SYMMETRIC, len(q), mat(field, q))

    @staticmethod
    def alternate_from_gram(field, gram: Sequence[Sequence]) -> "BilinearForm":
        g = mat(field, gram)
        n = len(g)
        for i in range(n):
            if g[i][i] != field.zero:
                raise ValueError("alternate Gram matrix must have zero diagonal")
            for j in range(n):
                if field.add(g[i][j], g[j][i]) != field.zero:
                    raise ValueError("alternate Gram matrix must be antisymmetric")
        return BilinearForm(ALTERNATE, n, g)

    def polar_matrix(self, field) -> Matrix:
        """Matrix of the pairing used for orthogonality and perps."""
        if self.kind == ALTERNATE:
            return self.matrix
        q = self.matrix
        return tuple(
            tuple(field.add(q[i][j], q[j][i]) for j in range(self.ambient))
            for i in range(self.ambient)
        )

    def pairing(self, field, v: Vector, w: Vector):
        p = self.polar_matrix(field)
        return sum_dot(field, v, apply_matrix(field, p, w))

    def q(self, field, v: Vector):
        """Quadratic value; zero for every vector of an alternate form."""
        if self.kind == ALTERNATE:
            return field.zero
        acc = field.zero
        for i, row in enumerate(self.matrix):
            vi = v[i]
            if vi == field.zero:
                continue
            acc = field.add(acc, field.mul(vi, sum_dot(field, row, v)))
        return acc

    def is_isotropic_vector(self, field, v: Vector) -> bool:
        return self.kind == ALTERNATE or self.q(field, v) == field.zero

    def is_totally_isotropic(self, field, s: Subspace) -> bool:
        rows = s.rows
        for i, v in enumerate(rows):
            if not self.is_isotropic_vector(field, v):
                return False
            for w in rows[i + 1:]:
                if self.pairing(field, v, w) != field.zero:
                    return False
        return True

    def is_nondegenerate(self, field) -> bool:
        p = self.polar_matrix(field)
        rad = right_kernel(field, p, self.ambient)
        if not rad:
            return True
        if self.kind == ALTERNATE or field.char != 2:
            return False
        # char 2: the radical of the polar form may carry anisotropic vectors;
        # the quadratic form is additive there, so a basis check suffices.
        if len(rad) > 1:
            return False
        return self.q(field, rad[0]) != field.zero

    def perp(self, field, s: Subspace) -> Subspace:
        """{v : pairing(v, s) = 0}, via the polar form."""
        if s.ambient != self.ambient:
            raise ValueError("ambient dimension mismatch")
        if s.dim == 0:
            return Subspace.full(field, self.ambient)
        p = self.polar_matrix(field)
        constraint_rows = mat_mul(field, s.rows, p)
        return Subspace(self.ambient, right_kernel(field, constraint_rows, self.ambient))

    def quotient_form(self, field, lift_rows: Matrix) -> "BilinearForm":
        """Induced form on a quotient, given ambient lifts of its basis."""
        n = len(lift_rows)
        if self.kind == ALTERNATE:
            g = [[self.pairing(field, lift_rows[i], lift_rows[j]) for j in range(n)]
                 for i in range(n)]
            return BilinearForm(ALTERNATE, n, tuple(tuple(r) for r in g))
        q = [[field.zero] * n for _ in range(n)]
        for i in range(n):
            q[i][i] = self.q(field, lift_rows[i])
            for j in range(i + 1, n):
                q[i][j] = self.pairing(field, lift_rows[i], lift_rows[j])
        return BilinearForm(SYMMETRIC, n, tuple(tuple(r) for r in q))

    def to_json(self, field) -> dict:
        return {
            "kind": self.kind,
            "matrix": [[str(x) if field.char == 0 else int(x) for x in row]
                       for row in self.matrix],
        }


def isotropic_lines(field, s: Subspace, form: BilinearForm) -> Iterator[Vector]:
    """Canonical representatives of the isotropic lines of s.

    For subspaces inside an isotropic-flag construction the quadratic value
    is constant on cosets of an isotropic, orthogonal subspace, so callers
    may also test a single representative per line; this helper simply scans
    every line of s once.
    """
    if isinstance(field, RationalField):
        raise TypeError("isotropic line enumeration needs a finite field")
    for v in line_representatives(field, s):
        if form.is_isotropic_vector(field, v):
            yield v


# ---------------------------------------------------------------------------
# quotient by an isotropic line


@dataclass(frozen=True)
class LineQuotient:
    """Data for V -> x_perp / x on one graded sector.

    ``lift_rows`` are ambient representatives of the quotient basis and
    ``project`` maps an ambient vector of x_perp to quotient coordinates.
    """

    lift_rows: Matrix
    perp_rows: Matrix
    line: Vector

    def project(self, field, v: Vector) -> Vector:
        m = transpose(self.lift_rows + (self.line,))
        sol = solve(field, m, v)
        if sol is None:
            raise ValueError("vector is not in the perp of the quotient line")
        return sol[: len(self.lift_rows)]

    def lift(self, field, vbar: Vector) -> Vector:
        n = len(self.lift_rows[0]) if self.lift_rows else len(self.line)
        v = [field.zero] * n
        for c, row in zip(vbar, self.lift_rows):
            if c != field.zero:
                v = [field.add(x, field.mul(c, y)) for x, y in zip(v, row)]
        return tuple(v)


def quotient_by_isotropic_line(field, form: BilinearForm, x: Vector) -> Tuple[BilinearForm, LineQuotient]:
    """Quotient x_perp / x of the sector carrying ``form`` by the line <x>.

    Requires x isotropic.  Returns the induced form together with lift and
    projection data.
    """
    if not form.is_isotropic_vector(field, x):
        raise ValueError("quotient line must be isotropic")
    xs = Subspace.from_rows(field, form.ambient, [x])
    perp = form.perp(field, xs)
    if not perp.contains_vector(field, x):
        raise ValueError("line does not lie in its own perp")
    coords = solve(field, transpose(perp.rows), tuple(x))
    drop = next(i for i, c in enumerate(coords) if c != field.zero)
    lift_rows = tuple(row for i, row in enumerate(perp.rows) if i != drop)
    induced = form.quotient_form(field, lift_rows)
    return induced, LineQuotient(lift_rows=lift_rows, perp_rows=perp.rows, line=tuple(x))
