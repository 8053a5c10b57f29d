"""Explicit odd orthosymplectic nilpotents built from marked diagrams.

A realization is a pair of maps u: V0 -> V1 and u*: V1 -> V0 together with a
symmetric form on V0 and an alternate form on V1, compatible through the
integer matrix identity  G . u* = u^t . Psi  (equivalently u* = G^-1 u^t Psi
whenever G is invertible).  The odd endomorphism X acts as u on V0 and as u*
on V1.

Construction is by blocks.  Each line of the diagram becomes a shift string;
strings are paired two by two whenever possible (forms hyperbolic between
the two strings of a pair, each string totally isotropic), and a leftover
line of a self-sufficient shape carries the pairing along its own middle.
Pairing repeated lines keeps every quadric that shows up in fiber
enumeration split, so point counts over tiny fields stay faithful.  The
construction is certified after the fact: the diagram is recomputed from
kernel/image dimensions and must reproduce the input.
"""

from __future__ import annotations

import json
from importlib import resources
from typing import Dict, List, Optional, Sequence, Tuple

from . import exactalg as xa
from .diagram import (
    KernelProfile,
    Line,
    MarkedDiagram,
    diagram_from_kernel_profile,
    diagram_parity,
    is_admissible,
    parse_diagram,
)
from .slicing import SAME_LINE, TWO_LINES


class Realization:
    """An odd nilpotent (u, u*) on a based graded space with its forms."""

    def __init__(self, field, u: xa.Matrix, ustar: xa.Matrix,
                 phi: xa.BilinearForm, psi: xa.BilinearForm,
                 diagram: Optional[MarkedDiagram] = None):
        self.field = field
        self.u = u
        self.ustar = ustar
        self.phi = phi
        self.psi = psi
        self.dim0 = phi.ambient
        self.dim1 = psi.ambient
        if u and (len(u) != self.dim1 or (u[0] and len(u[0]) != self.dim0)):
            raise ValueError("u must be a (dim V1) x (dim V0) matrix")
        if ustar and (len(ustar) != self.dim0 or (ustar[0] and len(ustar[0]) != self.dim1)):
            raise ValueError("u* must be a (dim V0) x (dim V1) matrix")
        self._powers: List[xa.Matrix] = []
        self._diagram = diagram

    # -- full odd endomorphism on V0 (+) V1, V0 coordinates first

    @property
    def total_dim(self) -> int:
        return self.dim0 + self.dim1

    def x_matrix(self) -> xa.Matrix:
        f = self.field
        n0, n1 = self.dim0, self.dim1
        rows = []
        for i in range(n0):
            rows.append((f.zero,) * n0 + tuple(self.ustar[i]))
        for i in range(n1):
            rows.append(tuple(self.u[i]) + (f.zero,) * n1)
        return tuple(rows)

    def x_power(self, a: int) -> xa.Matrix:
        if not self._powers:
            self._powers.append(xa.identity_matrix(self.field, self.total_dim))
        while len(self._powers) <= a:
            self._powers.append(xa.mat_mul(self.field, self._powers[-1], self.x_matrix()))
        return self._powers[a]

    def sector_form(self, eps: int) -> xa.BilinearForm:
        return self.phi if eps == 0 else self.psi

    def sector_dim(self, eps: int) -> int:
        return self.dim0 if eps == 0 else self.dim1

    def embed(self, eps: int, v: xa.Vector) -> xa.Vector:
        f = self.field
        if eps == 0:
            return tuple(v) + (f.zero,) * self.dim1
        return (f.zero,) * self.dim0 + tuple(v)

    def sector_part(self, eps: int, v: xa.Vector) -> xa.Vector:
        return v[: self.dim0] if eps == 0 else v[self.dim0:]

    def apply(self, eps: int, v: xa.Vector) -> xa.Vector:
        """Image of a sector vector under X, landing in the other sector."""
        m = self.u if eps == 0 else self.ustar
        return xa.apply_matrix(self.field, m, v)

    def power_block(self, a: int, target_eps: int) -> xa.Matrix:
        """Block of X^a mapping V_{target+a mod 2} into V_target."""
        src = (target_eps + a) % 2
        full = self.x_power(a)
        rows = range(self.dim0) if target_eps == 0 else range(self.dim0, self.total_dim)
        cols = range(self.dim0) if src == 0 else range(self.dim0, self.total_dim)
        return tuple(tuple(full[i][j] for j in cols) for i in rows)

    def kernel_in_sector(self, eps: int) -> xa.Subspace:
        m = self.u if eps == 0 else self.ustar
        return xa.kernel(self.field, m, self.sector_dim(eps))

    def is_nilpotent(self) -> bool:
        z = xa.zero_matrix(self.field, self.total_dim, self.total_dim)
        return self.x_power(self.total_dim) == z

    @property
    def diagram(self) -> MarkedDiagram:
        if self._diagram is None:
            self._diagram = diagram_of(self)
        return self._diagram


def diagram_of(r: Realization) -> MarkedDiagram:
    """Recover the marked diagram from graded kernel dimensions of powers.

    The number of parity-d lines of length at least k equals
    dim(Ker X^k cap V_e) - dim(Ker X^(k-1) cap V_e) with e = (d + k - 1) mod 2.
    """
    if not r.is_nilpotent():
        raise ValueError("realization is not nilpotent")
    f = r.field
    kdims: Dict[int, List[int]] = {0: [0], 1: [0]}
    a = 1
    while True:
        done = True
        for eps in (0, 1):
            cols = range(r.dim0) if eps == 0 else range(r.dim0, r.total_dim)
            full = r.x_power(a)
            sub = tuple(tuple(row[j] for j in cols) for row in full)
            kd = r.sector_dim(eps) - xa.rank(f, sub)
            kdims[eps].append(kd)
            if kd != r.sector_dim(eps):
                done = False
        if done:
            break
        a += 1
    max_a = len(kdims[0]) - 1
    dims: Dict[Tuple[int, int], int] = {}
    for k in range(1, max_a + 1):
        for par in (0, 1):
            eps = (par + k - 1) % 2
            n = kdims[eps][k] - kdims[eps][k - 1]
            if n:
                dims[(par, k)] = n
    return diagram_from_kernel_profile(KernelProfile.from_dict(dims))


# ---------------------------------------------------------------------------
# block construction


def _singleton_shape(length: int, parity: int) -> bool:
    """Lines that are admissible on their own."""
    return (length % 4 == 1) == (parity == 0)


class _BlockBuilder:
    """Assembles integer u, u*, Gram and symplectic matrices string-wise."""

    def __init__(self):
        self.pos0: List[Tuple[int, int, int]] = []  # (block, string, position)
        self.pos1: List[Tuple[int, int, int]] = []
        self.index0: Dict[Tuple[int, int, int], int] = {}
        self.index1: Dict[Tuple[int, int, int], int] = {}
        self.blocks: List[Tuple[Tuple[Line, ...]]] = []

    def add_block(self, lines: Tuple[Line, ...]):
        b = len(self.blocks)
        self.blocks.append(lines)
        for s, line in enumerate(lines):
            for i in range(1, line.length + 1):
                sector = (line.parity + i - 1) % 2
                key = (b, s, i)
                if sector == 0:
                    self.index0[key] = len(self.pos0)
                    self.pos0.append(key)
                else:
                    self.index1[key] = len(self.pos1)
                    self.pos1.append(key)

    def build(self):
        n0, n1 = len(self.pos0), len(self.pos1)
        u = [[0] * n0 for _ in range(n1)]
        ustar = [[0] * n1 for _ in range(n0)]
        gram = [[0] * n0 for _ in range(n0)]
        psi = [[0] * n1 for _ in range(n1)]
        for b, lines in enumerate(self.blocks):
            for s, line in enumerate(lines):
                for i in range(2, line.length + 1):
                    src, dst = (b, s, i), (b, s, i - 1)
                    if src in self.index0:
                        u[self.index1[dst]][self.index0[src]] = 1
                    else:
                        ustar[self.index0[dst]][self.index1[src]] = 1
            values = _solve_block_pairings(lines)
            for ((s, i), (s2, j)), val in values.items():
                p, q = (b, s, i), (b, s2, j)
                if p in self.index0:
                    gram[self.index0[p]][self.index0[q]] = val
                else:
                    psi[self.index1[p]][self.index1[q]] = val
        return u, ustar, gram, psi


def _solve_block_pairings(lines: Tuple[Line, ...]) -> Dict[Tuple[Tuple[int, int], Tuple[int, int]], int]:
    """Pairing values B(w_{s,i}, w_{s',j}) for one block, as ordered entries.

    Within a block only positions i and L+1-i pair (on the partner string
    for two-string blocks, on the same string otherwise).  The compatibility
    constraints G(u* a, b) = psi(a, u b) propagate a sign along the pairing
    antidiagonal; every solution is unit-valued.
    """
    L = lines[0].length
    if any(l.length != L for l in lines):
        raise ValueError("paired strings must have equal length")
    nstr = len(lines)
    partner = {0: 0} if nstr == 1 else {0: 1, 1: 0}

    def sector(s: int, i: int) -> int:
        return (lines[s].parity + i - 1) % 2

    def pairpos(s: int, i: int) -> Tuple[int, int]:
        return (partner[s], L + 1 - i)

    # canonical unknown per unordered pairing; orientation sign from the kind
    def keyed(s: int, i: int):
        p, q = (s, i), pairpos(s, i)
        if p <= q:
            return (p, q), 1
        sign = 1 if sector(s, i) == 0 else -1
        return (q, p), sign

    unknowns = sorted({keyed(s, i + 1)[0] for s in range(nstr) for i in range(L)})
    edges: List[Tuple[tuple, tuple, int]] = []
    for s in range(nstr):
        for i in range(2, L + 1):
            if sector(s, i) != 1:
                continue
            s2, j = pairpos(s, i - 1)  # V0 position paired with the shifted one
            # G u* = u^t Psi reads G(w_{s,i-1}, w_{s2,j}) = -psi(w_{s,i}, w_{s2,j-1})
            if pairpos(s, i) != (s2, j - 1):
                continue
            k1, o1 = keyed(s, i - 1)
            k2, o2 = keyed(s, i)
            edges.append((k1, k2, -o1 * o2))

    values: Dict[tuple, int] = {}
    for root in unknowns:
        if root in values:
            continue
        values[root] = 1
        stack = [root]
        while stack:
            cur = stack.pop()
            for k1, k2, rel in edges:
                for a, bkey in ((k1, k2), (k2, k1)):
                    if a == cur and bkey not in values:
                        values[bkey] = rel * values[cur]
                        stack.append(bkey)
    for k1, k2, rel in edges:
        if values[k1] != rel * values[k2]:
            raise AssertionError("inconsistent pairing constraints in block solve")

    out: Dict[Tuple[Tuple[int, int], Tuple[int, int]], int] = {}
    for s in range(nstr):
        for i in range(1, L + 1):
            key, orient = keyed(s, i)
            out[((s, i), pairpos(s, i))] = orient * values[key]
    return out


def build_nilpotent(d: MarkedDiagram, field) -> Realization:
    """A realization of an admissible diagram with a parity, self-certified."""
    if not is_admissible(d):
        raise ValueError(f"{d} is not admissible")
    if diagram_parity(d) is None:
        raise ValueError(f"{d} has no parity, sizes (2n+1, 2n) or (2n-1, 2n) only")

    builder = _BlockBuilder()
    counts: Dict[Line, int] = {}
    for l in d.lines:
        counts[l] = counts.get(l, 0) + 1
    for line in sorted(counts, key=lambda l: (-l.length, l.parity)):
        c = counts[line]
        if line.length % 2 == 0:
            if line.parity == 1:
                continue  # handled together with the parity-0 partner
            partner = Line(line.length, 1)
            for _ in range(c):
                builder.add_block((line, partner))
        elif _singleton_shape(line.length, line.parity):
            for _ in range(c // 2):
                builder.add_block((line, line))
            if c % 2:
                builder.add_block((line,))
        else:
            if c % 2:
                raise ValueError(f"{d} is not admissible: odd count of paired shape {line}")
            for _ in range(c // 2):
                builder.add_block((line, line))

    u_z, ustar_z, gram_z, psi_z = builder.build()
    _check_integer_compatibility(u_z, ustar_z, gram_z, psi_z)

    f = field
    u = xa.mat(f, u_z) if u_z else ()
    ustar = xa.mat(f, ustar_z) if ustar_z else ()
    phi = xa.BilinearForm.symmetric_from_gram(f, gram_z)
    psi = xa.BilinearForm.alternate_from_gram(f, psi_z)
    if gram_z and not phi.is_nondegenerate(f):
        # Over F_2 every self-paired string contributes its anisotropic middle
        # to the radical of the polar form.  That is intrinsic to quadratic
        # geometry in characteristic two; the realization stays usable as
        # long as no isotropic radical vector can enter a kernel line.
        if f.char != 2:
            raise AssertionError("constructed symmetric form is degenerate")
        rad = xa.right_kernel(f, phi.polar_matrix(f), phi.ambient)
        radspace = xa.Subspace(phi.ambient, rad)
        for v in radspace.vectors(f):
            if any(c != f.zero for c in v) and phi.q(f, v) == f.zero \
                    and all(c == f.zero for c in xa.apply_matrix(f, u, v)):
                raise AssertionError(
                    "isotropic kernel vector in the polar radical over F_2")
    if psi_z and not psi.is_nondegenerate(f):
        raise AssertionError("constructed alternate form is degenerate")
    r = Realization(f, u, ustar, phi, psi)
    got = diagram_of(r)
    if got != d:
        raise AssertionError(f"self-certification failed: built {got}, wanted {d}")
    r._diagram = d
    return r


def _check_integer_compatibility(u, ustar, gram, psi):
    """G . u* = u^t . Psi over the integers; holds then over every field."""
    n0, n1 = len(gram), len(psi)
    for i in range(n0):
        for j in range(n1):
            lhs = sum(gram[i][t] * ustar[t][j] for t in range(n0))
            rhs = sum(u[t][i] * psi[t][j] for t in range(n1))
            if lhs != rhs:
                raise AssertionError("block construction violates the form identity")


# ---------------------------------------------------------------------------
# strata membership and restriction


def membership_stratum(r: Realization, eps: int, x: xa.Vector) -> Optional[Tuple[int, int]]:
    """The unique (eps, k) level of an isotropic kernel line, else None."""
    f = r.field
    if all(c == f.zero for c in x):
        return None
    if any(c != f.zero for c in r.apply(eps, x)):
        return None
    if not r.sector_form(eps).is_isotropic_vector(f, x):
        return None
    k = 1
    while True:
        block = r.power_block(k, eps)
        img = xa.image(f, block)
        if not img.contains_vector(f, x):
            return eps, k
        k += 1
        if k > r.total_dim + 1:
            raise AssertionError("membership scan ran past the nilpotency degree")


def removal_mode_at(r: Realization, eps: int, k: int, x: xa.Vector) -> str:
    """Prop-style dichotomy: pair x against a preimage under X^(k-1)."""
    f = r.field
    if k % 2 == 0:
        return TWO_LINES  # preimage lives in the other sector, pairing vanishes
    block = r.power_block(k - 1, eps)
    y = xa.solve(f, block, x)
    if y is None:
        raise ValueError("vector is not in the required power image")
    form = r.sector_form(eps)
    # the pairing is independent of the preimage choice: alternatives differ
    # by the sector kernel of X^(k-1), which must pair to zero with x
    kb = xa.kernel(f, _sector_block(r, k - 1, eps), r.sector_dim(eps))
    for row in kb.rows:
        if form.pairing(f, x, row) != f.zero:
            raise AssertionError("preimage pairing is not well defined")
    val = form.pairing(f, x, y)
    return SAME_LINE if val != f.zero else TWO_LINES


def _sector_block(r: Realization, a: int, src_eps: int) -> xa.Matrix:
    """Block of X^a with source sector src, target determined by a."""
    target = (src_eps + a) % 2
    full = r.x_power(a)
    rows = range(r.dim0) if target == 0 else range(r.dim0, r.total_dim)
    cols = range(r.dim0) if src_eps == 0 else range(r.dim0, r.total_dim)
    return tuple(tuple(full[i][j] for j in cols) for i in rows)


class SectorQuotient:
    """Lift/project data for one graded sector of a subquotient."""

    def __init__(self, field, lift_rows: xa.Matrix, cut_rows: xa.Matrix, ambient: int):
        self.field = field
        self.lift_rows = lift_rows
        self.cut_rows = cut_rows  # basis of the subspace being divided out
        self.ambient = ambient

    @property
    def dim(self) -> int:
        return len(self.lift_rows)

    def lift(self, vbar: xa.Vector) -> xa.Vector:
        f = self.field
        v = [f.zero] * self.ambient
        for c, row in zip(vbar, self.lift_rows):
            if c != f.zero:
                v = [f.add(a, f.mul(c, b)) for a, b in zip(v, row)]
        return tuple(v)

    def project(self, v: xa.Vector) -> xa.Vector:
        f = self.field
        cols = xa.transpose(self.lift_rows + self.cut_rows) if (self.lift_rows or self.cut_rows) \
            else ()
        sol = xa.solve(f, cols, v)
        if sol is None:
            raise ValueError("vector is outside the perp being divided")
        return sol[: self.dim]


def _identity_quotient(field, n: int) -> SectorQuotient:
    return SectorQuotient(field, xa.identity_matrix(field, n), (), n)


def _matrix_from_columns(nrows: int, cols: Sequence[xa.Vector]) -> xa.Matrix:
    """Assemble an nrows x len(cols) matrix, keeping degenerate shapes sane."""
    return tuple(tuple(col[i] for col in cols) for i in range(nrows))


def quotient_sector(field, form: xa.BilinearForm, cut: xa.Subspace) -> Tuple[xa.BilinearForm, SectorQuotient]:
    """Form and lift data on (cut^perp)/cut for a totally isotropic cut."""
    if not form.is_totally_isotropic(field, cut):
        raise ValueError("can only divide by a totally isotropic subspace")
    perp = form.perp(field, cut)
    if perp.dim != form.ambient - cut.dim:
        raise AssertionError("cut subspace meets the radical of the pairing")
    if not perp.contains(field, cut):
        raise AssertionError("isotropic subspace escaped its own perp")
    kept: List[xa.Vector] = []
    base = cut.rows
    current, _ = xa.rref(field, base) if base else ((), ())
    rank0 = len(current)
    for row in perp.rows:
        cand = current + (row,)
        red, _ = xa.rref(field, cand)
        if len(red) > len(current):
            kept.append(row)
            current = red
    lift_rows = tuple(kept)
    induced = form.quotient_form(field, lift_rows)
    return induced, SectorQuotient(field, lift_rows, base, form.ambient)


def restrict_to_subquotient(r: Realization, e_rows: Sequence[xa.Vector],
                            f_rows: Sequence[xa.Vector]) -> Realization:
    """Restriction of X to (E (+) F)^perp / (E (+) F) for isotropic E, F."""
    fld = r.field
    e_sub = xa.Subspace.from_rows(fld, r.dim0, e_rows) if e_rows else xa.Subspace.zero(r.dim0)
    f_sub = xa.Subspace.from_rows(fld, r.dim1, f_rows) if f_rows else xa.Subspace.zero(r.dim1)
    phi2, q0 = quotient_sector(fld, r.phi, e_sub)
    psi2, q1 = quotient_sector(fld, r.psi, f_sub)
    u2 = _matrix_from_columns(q1.dim, [
        q1.project(xa.apply_matrix(fld, r.u, q0.lift(unit)))
        for unit in xa.identity_matrix(fld, q0.dim)
    ])
    ustar2 = _matrix_from_columns(q0.dim, [
        q0.project(xa.apply_matrix(fld, r.ustar, q1.lift(unit)))
        for unit in xa.identity_matrix(fld, q1.dim)
    ])
    return Realization(fld, u2, ustar2, phi2, psi2)


def restrict_at(r: Realization, eps: int, x: xa.Vector) -> Tuple[Realization, str, "SectorQuotient"]:
    """Quotient by one isotropic kernel line; returns the removal mode too."""
    member = membership_stratum(r, eps, x)
    if member is None:
        raise ValueError("line is not an isotropic kernel line")
    _, k = member
    mode = removal_mode_at(r, eps, k, x)
    fld = r.field
    cut = xa.Subspace.from_rows(fld, r.sector_dim(eps), [x])
    if eps == 0:
        phi2, q0 = quotient_sector(fld, r.phi, cut)
        psi2, q1 = r.psi, _identity_quotient(fld, r.dim1)
    else:
        phi2, q0 = r.phi, _identity_quotient(fld, r.dim0)
        psi2, q1 = quotient_sector(fld, r.psi, cut)
    u2 = _matrix_from_columns(q1.dim, [
        q1.project(xa.apply_matrix(fld, r.u, q0.lift(unit)))
        for unit in xa.identity_matrix(fld, q0.dim)
    ])
    ustar2 = _matrix_from_columns(q0.dim, [
        q0.project(xa.apply_matrix(fld, r.ustar, q1.lift(unit)))
        for unit in xa.identity_matrix(fld, q1.dim)
    ])
    out = Realization(fld, u2, ustar2, phi2, psi2)
    return out, mode, (q0 if eps == 0 else q1)


# ---------------------------------------------------------------------------
# fixtures


def _antidiag_gram(n: int) -> List[List[int]]:
    return [[1 if i + j == n - 1 else 0 for j in range(n)] for i in range(n)]


def _symplectic_gram(n: int) -> List[List[int]]:
    g = [[0] * n for _ in range(n)]
    for i in range(n):
        j = n - 1 - i
        if i < j:
            g[i][j] = 1
        elif i > j:
            g[i][j] = -1
    return g


def realization_from_u(field, u_rows: Sequence[Sequence[int]],
                       expected: Optional[MarkedDiagram] = None) -> Realization:
    """Realization from a bare u matrix in the standard antidiagonal bases.

    u* is derived as phi^-1 u^t psi; both standard Gram matrices are unimodular
    so this works over every field.
    """
    n1, n0 = len(u_rows), len(u_rows[0])
    f = field
    gram = _antidiag_gram(n0)
    psig = _symplectic_gram(n1)
    u = xa.mat(f, u_rows)
    g = xa.mat(f, gram)
    p = xa.mat(f, psig)
    ustar = xa.mat_mul(f, xa.mat_mul(f, xa.inverse_matrix(f, g), xa.transpose(u)), p)
    phi = xa.BilinearForm.symmetric_from_gram(f, gram)
    psi = xa.BilinearForm.alternate_from_gram(f, psig)
    r = Realization(f, u, ustar, phi, psi)
    if expected is not None and diagram_of(r) != expected:
        raise AssertionError(f"fixture diagram is {diagram_of(r)}, expected {expected}")
    return r


def load_fixture(name: str, field=None) -> Realization:
    """Named packaged fixture, optionally over a different field."""
    data = json.loads(resources.files("superfiber.fixtures").joinpath(f"{name}.json").read_text())
    f = field if field is not None else xa.field_for(data["field"])
    return realization_from_u(f, data["u"], parse_diagram(data["diagram"]))


def fixture_names() -> List[str]:
    return ["osp76_O2", "osp76_O3"]
