"""Desk-scale fiber computation over small finite fields.

Enumerates pairs of isotropic complete flags (E_i), (F_j) with

    u(E_i) in F_{i-1}   and   u*(F_i) in E_i,

classifies each flag by the chain of restricted diagrams it induces, counts
points per slicing, estimates dimensions from count growth across fields,
and estimates connectivity from a neighbour graph on the enumerated flags.

Two independent enumerators are provided.  The direct one searches ambient
subspaces level by level with nothing but linear constraints.  The recursive
one walks the restriction tower, choosing an isotropic kernel line in the
current subquotient and descending to its perp-quotient, then lifting the
choices back to ambient coordinates.  Agreement of the two is the central
correctness check of the whole module.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from math import log
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import exactalg as xa
from .diagram import MarkedDiagram
from .realize import Realization, build_nilpotent, diagram_of, restrict_at, restrict_to_subquotient
from .slicing import Slicing, enumerate_slicings, stratum_profile

DEFAULT_NODE_BUDGET = 10_000_000

WHOLE_FIBER = "whole_fiber"
PER_STRATUM = "per_stratum"


class BudgetExceeded(RuntimeError):
    """The search visited more nodes than the configured budget allows."""


class _Budget:
    def __init__(self, limit: Optional[int]):
        if limit is None:
            limit = int(os.environ.get("SUPERFIBER_BUDGET", DEFAULT_NODE_BUDGET))
        self.limit = limit
        self.used = 0

    def tick(self, n: int = 1):
        self.used += n
        if self.used > self.limit:
            raise BudgetExceeded(f"search budget of {self.limit} nodes exhausted")


@dataclass(frozen=True)
class FlagPair:
    """Canonical pair of isotropic flags; each subspace an echelon row tuple."""

    e_steps: Tuple[xa.Matrix, ...]
    f_steps: Tuple[xa.Matrix, ...]

    def slot(self, i: int) -> xa.Matrix:
        n = len(self.e_steps)
        return self.e_steps[i] if i < n else self.f_steps[i - n]

    @property
    def slots(self) -> int:
        return len(self.e_steps) + len(self.f_steps)

    def key(self):
        return (self.e_steps, self.f_steps)


def _flag_rank(r: Realization) -> int:
    if r.dim0 != r.dim1 + 1:
        raise ValueError(
            f"fiber enumeration expects dims (2n+1, 2n), got ({r.dim0}, {r.dim1})")
    if r.dim1 % 2 != 0:
        raise ValueError("odd symplectic dimension")
    return r.dim1 // 2


def _line_class_reps(field, big: xa.Subspace, small_rows: xa.Matrix) -> Iterable[xa.Vector]:
    """One ambient representative per line of big/span(small_rows)."""
    current, _ = xa.rref(field, small_rows) if small_rows else ((), ())
    comp: List[xa.Vector] = []
    for row in big.rows:
        cand = current + (row,)
        red, _ = xa.rref(field, cand)
        if len(red) > len(current):
            comp.append(row)
            current = red
    elems = list(field.elements())
    d = len(comp)
    from itertools import product as iproduct
    for lead in range(d):
        for tail in iproduct(elems, repeat=d - lead - 1):
            coeffs = (field.zero,) * lead + (field.one,) + tail
            v = [field.zero] * big.ambient
            for c, row in zip(coeffs, comp):
                if c != field.zero:
                    v = [field.add(a, field.mul(c, b)) for a, b in zip(v, row)]
            yield tuple(v)


def enumerate_fiber_direct(r: Realization, budget: Optional[int] = None) -> List[FlagPair]:
    """All fiber flags by level-wise ambient search.  Independent oracle."""
    f = r.field
    n = _flag_rank(r)
    bud = _Budget(budget)
    out: List[FlagPair] = []

    id0 = xa.identity_matrix(f, r.dim0)
    id1 = xa.identity_matrix(f, r.dim1)

    def solutions_e(e_rows: xa.Matrix, f_rows: xa.Matrix) -> xa.Subspace:
        rows: List[xa.Vector] = []
        polar = r.phi.polar_matrix(f)
        if e_rows:
            rows.extend(xa.mat_mul(f, e_rows, polar))
        fspace = xa.Subspace.from_rows(f, r.dim1, f_rows) if f_rows else xa.Subspace.zero(r.dim1)
        cf = xa.constraints_of(f, fspace)
        if cf:
            rows.extend(xa.mat_mul(f, cf, r.u))
        if not rows:
            return xa.Subspace(r.dim0, id0)
        return xa.Subspace(r.dim0, xa.right_kernel(f, tuple(rows), r.dim0))

    def solutions_f(e_rows: xa.Matrix, f_rows: xa.Matrix) -> xa.Subspace:
        rows: List[xa.Vector] = []
        if f_rows:
            rows.extend(xa.mat_mul(f, f_rows, r.psi.matrix))
        espace = xa.Subspace.from_rows(f, r.dim0, e_rows) if e_rows else xa.Subspace.zero(r.dim0)
        ce = xa.constraints_of(f, espace)
        if ce:
            rows.extend(xa.mat_mul(f, ce, r.ustar))
        if not rows:
            return xa.Subspace(r.dim1, id1)
        return xa.Subspace(r.dim1, xa.right_kernel(f, tuple(rows), r.dim1))

    def descend(level: int, e_list: List[xa.Matrix], f_list: List[xa.Matrix]):
        if level == 2 * n:
            out.append(FlagPair(tuple(e_list), tuple(f_list)))
            return
        e_rows = e_list[-1] if e_list else ()
        f_rows = f_list[-1] if f_list else ()
        if level % 2 == 0:
            space = solutions_e(e_rows, f_rows)
            for x in _line_class_reps(f, space, e_rows):
                bud.tick()
                if r.phi.q(f, x) != f.zero:
                    continue
                new_rows, _ = xa.rref(f, e_rows + (x,))
                e_list.append(new_rows)
                descend(level + 1, e_list, f_list)
                e_list.pop()
        else:
            space = solutions_f(e_rows, f_rows)
            for w in _line_class_reps(f, space, f_rows):
                bud.tick()
                new_rows, _ = xa.rref(f, f_rows + (w,))
                f_list.append(new_rows)
                descend(level + 1, e_list, f_list)
                f_list.pop()

    descend(0, [], [])
    out.sort(key=FlagPair.key)
    return out


def enumerate_fiber_recursive(r: Realization, budget: Optional[int] = None,
                              with_chains: bool = False):
    """Fiber flags through the restriction tower, lifted back to ambient.

    With ``with_chains`` each flag comes with the diagram chain its quotient
    path produced, which is its stratum label.
    """
    f = r.field
    n = _flag_rank(r)
    bud = _Budget(budget)
    out = []

    def lift_through(stack, eps: int, v: xa.Vector) -> xa.Vector:
        for sq, seps in reversed(stack):
            if seps == eps:
                v = sq.lift(v)
        return v

    def descend(level: int, cur: Realization, stack, e_list, f_list, chain):
        if level == 2 * n:
            flag = FlagPair(tuple(e_list), tuple(f_list))
            out.append((flag, tuple(chain)) if with_chains else flag)
            return
        eps = 0 if level % 2 == 0 else 1
        ker = cur.kernel_in_sector(eps)
        form = cur.sector_form(eps)
        for x in xa.isotropic_lines(f, ker, form):
            bud.tick()
            sub, mode, quot = restrict_at(cur, eps, x)
            ambient_x = lift_through(stack, eps, x)
            if eps == 0:
                prev = e_list[-1] if e_list else ()
                new_rows, _ = xa.rref(f, prev + (ambient_x,))
                e_list.append(new_rows)
            else:
                prev = f_list[-1] if f_list else ()
                new_rows, _ = xa.rref(f, prev + (ambient_x,))
                f_list.append(new_rows)
            stack.append((quot, eps))
            chain.append(diagram_of(sub))
            descend(level + 1, sub, stack, e_list, f_list, chain)
            chain.pop()
            stack.pop()
            (e_list if eps == 0 else f_list).pop()

    descend(0, r, [], [], [], [diagram_of(r)])
    if with_chains:
        out.sort(key=lambda p: p[0].key())
    else:
        out.sort(key=FlagPair.key)
    return out


def classify_flag(r: Realization, flag: FlagPair) -> Slicing:
    """The slicing whose chain of restricted diagrams the flag realizes."""
    d = diagram_of(r)
    chain: List[MarkedDiagram] = [d]
    n = len(flag.e_steps)
    for i in range(1, n + 1):
        e_rows = flag.e_steps[i - 1]
        f_prev = flag.f_steps[i - 2] if i >= 2 else ()
        chain.append(diagram_of(restrict_to_subquotient(r, e_rows, f_prev)))
        chain.append(diagram_of(restrict_to_subquotient(r, e_rows, flag.f_steps[i - 1])))
    key = tuple(chain)
    for s in enumerate_slicings(d):
        if s.chain == key:
            return s
    raise ValueError(f"flag chain {[str(c) for c in chain]} is not an admissible slicing")


# ---------------------------------------------------------------------------
# connectivity heuristic


def _pencil_components(flags: Sequence[FlagPair]) -> int:
    """Components of the pencil graph on the given flags.

    Flags are joined when they differ in exactly one subspace slot and that
    slot moves in a pencil of at least three valid values; a two-element
    pencil is a zero-dimensional pair (a split quadric point set), not a
    curve, and stays disconnected.
    """
    if not flags:
        return 0
    index = {fl.key(): i for i, fl in enumerate(flags)}
    parent = list(range(len(flags)))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    slots = flags[0].slots
    for s in range(slots):
        groups: Dict[tuple, List[int]] = {}
        for i, fl in enumerate(flags):
            rest = tuple(fl.slot(t) for t in range(slots) if t != s)
            groups.setdefault(rest, []).append(i)
        for members in groups.values():
            if len(members) >= 3:
                first = members[0]
                for other in members[1:]:
                    union(first, other)
    return len({find(i) for i in range(len(flags))})


def heuristic_components(r: Realization, flags: Sequence[FlagPair], scope: str = WHOLE_FIBER,
                         strata: Optional[Dict[int, List[FlagPair]]] = None):
    """Connectivity estimate from the pencil graph; heuristic only.

    ``whole_fiber`` returns one integer; ``per_stratum`` needs the stratum
    partition and returns a dict of per-stratum component counts.
    """
    if scope == WHOLE_FIBER:
        return _pencil_components(list(flags))
    if scope == PER_STRATUM:
        if strata is None:
            raise ValueError("per-stratum scope needs the stratum partition")
        return {i: _pencil_components(members) for i, members in strata.items()}
    raise ValueError(f"unknown scope {scope!r}")


# ---------------------------------------------------------------------------
# dimension estimates and the fiber report


def dimension_estimate(counts_by_q: Dict[int, Sequence[int]]) -> List[Optional[int]]:
    """Per-stratum dimension from count growth between the two largest fields.

    A stratum with zero points at every field is reported as None (empty).
    """
    qs = sorted(counts_by_q)
    if len(qs) < 2:
        raise ValueError("need counts for at least two field sizes")
    q1, q2 = qs[-2], qs[-1]
    n_strata = len(counts_by_q[q1])
    out: List[Optional[int]] = []
    for i in range(n_strata):
        c1, c2 = counts_by_q[q1][i], counts_by_q[q2][i]
        if all(counts_by_q[q][i] == 0 for q in qs):
            out.append(None)
        elif c1 == 0 or c2 == 0:
            out.append(None)
        else:
            out.append(round(log(c2 / c1) / log(q2 / q1)))
    return out


ESTIMATE_FIELDS = (3, 5)


def fiber_report(d: MarkedDiagram, q: int, budget: Optional[int] = None,
                 estimate: bool = True) -> dict:
    """Cross-validated fiber summary for one diagram over F_q.

    Runs both enumerators, classifies every flag, compares per-stratum
    counts with the combinatorial dimensions (growth measured across the
    fields in ESTIMATE_FIELDS), and reports pencil-graph component counts.
    Every disagreement lands in ``mismatches``.
    """
    field = xa.FiniteField(q)
    r = build_nilpotent(d, field)
    direct = enumerate_fiber_direct(r, budget)
    tagged = enumerate_fiber_recursive(r, budget, with_chains=True)
    recursive = [fl for fl, _ in tagged]

    mismatches: List[str] = []
    if [fl.key() for fl in direct] != [fl.key() for fl in recursive]:
        mismatches.append("direct and recursive enumerations differ")

    slicings = enumerate_slicings(d)
    chain_index = {s.chain: i for i, s in enumerate(slicings)}
    strata: Dict[int, List[FlagPair]] = {i: [] for i in range(len(slicings))}
    for fl, chain in tagged:
        i = chain_index.get(chain)
        if i is None:
            mismatches.append(f"flag chain not in the slicing set: {[str(c) for c in chain]}")
            continue
        strata[i].append(fl)
        cls = classify_flag(r, fl)
        if cls.chain != chain:
            mismatches.append("independent classification disagrees with the tower path")

    counts = [len(strata[i]) for i in range(len(slicings))]
    if sum(counts) != len(direct):
        mismatches.append("stratum counts do not add up to the fiber size")

    profiles = [stratum_profile(s) for s in slicings]
    dim_est: List[Optional[int]] = [None] * len(slicings)
    if estimate:
        counts_by_q: Dict[int, List[int]] = {}
        for eq in sorted(set(ESTIMATE_FIELDS) | {q}):
            if eq == q:
                counts_by_q[eq] = counts
                continue
            er = build_nilpotent(d, xa.FiniteField(eq))
            etagged = enumerate_fiber_recursive(er, budget, with_chains=True)
            ec = [0] * len(slicings)
            for _, chain in etagged:
                ec[chain_index[chain]] += 1
            counts_by_q[eq] = ec
        est_input = {eq: counts_by_q[eq] for eq in ESTIMATE_FIELDS}
        dim_est = dimension_estimate(est_input)
        for i, prof in enumerate(profiles):
            combo = prof.dimension
            if combo is None:
                if any(est_input[eq][i] for eq in ESTIMATE_FIELDS):
                    mismatches.append(f"stratum {i} is combinatorially empty but has points")
            elif dim_est[i] is None:
                mismatches.append(f"stratum {i} has no points to estimate a dimension")
            elif dim_est[i] != combo:
                mismatches.append(
                    f"stratum {i} dimension estimate {dim_est[i]} != combinatorial {combo}")

    per_stratum = heuristic_components(r, direct, PER_STRATUM, strata)
    whole = heuristic_components(r, direct, WHOLE_FIBER)

    return {
        "diagram": str(d),
        "q": q,
        "total": len(direct),
        "strata": [
            {
                "slicing": i,
                "count": counts[i],
                "dim_est": dim_est[i],
                "combinatorial_dim": profiles[i].dimension,
                "components_est": per_stratum[i],
            }
            for i in range(len(slicings))
        ],
        "graph_components": whole,
        "mismatches": mismatches,
    }
