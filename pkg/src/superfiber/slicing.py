"""Two-box removals, slicings, stratum dimensions and orbit recognizers.

A step from an admissible diagram D of parity eps removes two boxes sitting
at the beginning and at the end of lines of one common length k, so that the
result is again admissible and has the opposite parity.  Either both boxes
lie on one line (``same_line``: that line loses its first and last box) or
on two lines of equal length (``two_lines``: one line loses its head, the
other its tail).  A slicing is a maximal chain of such steps down to the
one-box diagram.

Dimensions of the locally closed pieces indexed by a slicing are computed
stepwise.  The step locus at length k inside the kernel of the current
restriction has projective dimension

    sum_{i >= k} l_eps(i) - 1,

except that for eps = 0, k = 1 two is subtracted (one extra quadric
condition from the rank of the form on the kernel) and the locus is empty
when there is exactly one even length-1 line.  When both removal modes are
admissible at the same length the locus splits further: the two-line piece
is cut out by one more quadratic equation and loses one dimension, while
the same-line piece is its open complement.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from .diagram import (
    Line,
    MarkedDiagram,
    diagram_parity,
    is_admissible,
)

SAME_LINE = "same_line"
TWO_LINES = "two_lines"


@dataclass(frozen=True)
class Removal:
    """Record of one two-box removal step."""

    k: int
    mode: str
    parities: Tuple[int, ...]

    def __post_init__(self):
        if self.mode not in (SAME_LINE, TWO_LINES):
            raise ValueError(f"bad removal mode {self.mode!r}")
        if self.mode == SAME_LINE and (self.k < 2 or len(self.parities) != 1):
            raise ValueError("same_line removal needs k >= 2 and one affected line")
        if self.mode == TWO_LINES and len(self.parities) != 2:
            raise ValueError("two_lines removal affects two lines")

    def to_json(self) -> dict:
        return {"k": self.k, "mode": self.mode}


def _result_of_same_line(d: MarkedDiagram, line: Line) -> MarkedDiagram:
    out = d.remove(line)
    if line.length > 2:
        out = out.add(Line(line.length - 2, 1 - line.parity))
    return out


def _result_of_two_lines(d: MarkedDiagram, head: Line, tail: Line) -> MarkedDiagram:
    out = d.remove(head, tail)
    if head.length > 1:
        out = out.add(Line(head.length - 1, 1 - head.parity))
    if tail.length > 1:
        out = out.add(Line(tail.length - 1, tail.parity))
    return out


def admissible_subdiagrams(d: MarkedDiagram) -> List[Tuple[MarkedDiagram, Removal]]:
    """All admissible two-box removals of d, with their removal records.

    Generated by trying every head/tail removal and filtering by
    admissibility and the parity flip; candidates are ordered by descending
    length, two-line removals before same-line ones at equal length.
    """
    eps = diagram_parity(d)
    if eps is None:
        raise ValueError(f"diagram {d} has no parity")
    want = 1 - eps
    found: Dict[Tuple[MarkedDiagram, int, str], Removal] = {}

    distinct = sorted(set(d.lines), key=lambda l: (-l.length, l.parity))
    for line in distinct:
        if line.length >= 2:
            res = _result_of_same_line(d, line)
            if diagram_parity(res) == want and is_admissible(res):
                key = (res, line.length, SAME_LINE)
                found.setdefault(key, Removal(line.length, SAME_LINE, (line.parity,)))
    for head in distinct:
        for tail in distinct:
            if head.length != tail.length:
                continue
            if head == tail and d.count(head.length, head.parity) < 2:
                continue
            res = _result_of_two_lines(d, head, tail)
            if diagram_parity(res) == want and is_admissible(res):
                key = (res, head.length, TWO_LINES)
                found.setdefault(
                    key, Removal(head.length, TWO_LINES, (head.parity, tail.parity))
                )

    items = [(sub, rem) for (sub, _, _), rem in found.items()]
    items.sort(key=lambda p: (-p[1].k, 0 if p[1].mode == TWO_LINES else 1, p[0].sort_key()))
    return items


def subdiagram_count_for_length(d: MarkedDiagram, k: int) -> int:
    """Distinct admissible subdiagrams whose removal happens at length k."""
    return sum(1 for _, rem in admissible_subdiagrams(d) if rem.k == k)


def apply_removal(d: MarkedDiagram, k: int, mode: str) -> MarkedDiagram:
    """The admissible subdiagram of d removed at length k with this mode."""
    for sub, rem in admissible_subdiagrams(d):
        if rem.k == k and rem.mode == mode:
            return sub
    raise ValueError(f"no admissible {mode} removal at length {k} in {d}")


def _modes_at(d: MarkedDiagram, k: int) -> Tuple[bool, bool]:
    """(same_line possible, two_lines possible) at length k."""
    same = two = False
    for _, rem in admissible_subdiagrams(d):
        if rem.k == k:
            if rem.mode == SAME_LINE:
                same = True
            else:
                two = True
    return same, two


@dataclass(frozen=True)
class Slicing:
    """A maximal chain D_0 > D_1 > ... > D_{2n} with its removal records."""

    chain: Tuple[MarkedDiagram, ...]
    removals: Tuple[Removal, ...]

    def __post_init__(self):
        if len(self.chain) != len(self.removals) + 1:
            raise ValueError("chain and removals lengths are inconsistent")
        for i, rem in enumerate(self.removals):
            cur, nxt = self.chain[i], self.chain[i + 1]
            eps = diagram_parity(cur)
            if eps is None or diagram_parity(nxt) != 1 - eps:
                raise ValueError(f"parity does not flip at step {i + 1}")
            if cur.boxes - nxt.boxes != 2:
                raise ValueError(f"step {i + 1} does not remove exactly two boxes")
            if not is_admissible(nxt):
                raise ValueError(f"step {i + 1} leaves an inadmissible diagram")
            if apply_removal(cur, rem.k, rem.mode) != nxt:
                raise ValueError(f"removal record at step {i + 1} does not match")
            # label bookkeeping: E-steps (odd i+1) drop two 0-boxes, F-steps two 1-boxes
            dz = cur.size[0] - nxt.size[0]
            expected = 2 if i % 2 == 0 else 0
            if dz != expected:
                raise ValueError(f"step {i + 1} removes boxes with the wrong labels")

    @property
    def steps(self) -> int:
        return len(self.removals)

    def step_side(self, i: int) -> str:
        """Side of 1-based step i: 'E' for even-sector steps, 'F' otherwise."""
        return "E" if i % 2 == 1 else "F"

    def to_json(self) -> dict:
        return {
            "chain": [str(d) for d in self.chain],
            "removals": [r.to_json() for r in self.removals],
        }


def enumerate_slicings(d: MarkedDiagram) -> List[Slicing]:
    """All admissible slicings of d, in depth-first canonical order.

    The first element is the special slicing (longest removals first,
    two-line removals preferred at equal length).
    """
    if diagram_parity(d) != 0:
        raise ValueError(f"slicings need a diagram of size (2n+1, 2n), got {d.size}")
    if not is_admissible(d):
        raise ValueError(f"diagram {d} is not admissible")
    out: List[Slicing] = []
    chain: List[MarkedDiagram] = [d]
    rems: List[Removal] = []

    def descend(cur: MarkedDiagram):
        if cur.boxes == 1:
            out.append(Slicing(tuple(chain), tuple(rems)))
            return
        for sub, rem in admissible_subdiagrams(cur):
            chain.append(sub)
            rems.append(rem)
            descend(sub)
            chain.pop()
            rems.pop()

    descend(d)
    return out


@lru_cache(maxsize=None)
def _slicings_cached(d: MarkedDiagram) -> Tuple[Slicing, ...]:
    return tuple(enumerate_slicings(d))


def special_slicing(d: MarkedDiagram) -> Slicing:
    """Greedy slicing: maximal removal length, two-line mode on ties."""
    if diagram_parity(d) != 0:
        raise ValueError(f"special slicing needs size (2n+1, 2n), got {d.size}")
    chain = [d]
    rems: List[Removal] = []
    cur = d
    while cur.boxes > 1:
        sub, rem = admissible_subdiagrams(cur)[0]
        chain.append(sub)
        rems.append(rem)
        cur = sub
    return Slicing(tuple(chain), tuple(rems))


# ---------------------------------------------------------------------------
# stratum dimensions


def kappa_dimension(d: MarkedDiagram, eps: int, k: int) -> Optional[int]:
    """Projective dimension of the isotropic step locus at level (eps, k).

    Returns None for the empty locus.  The value is meaningful whenever d has
    a parity-eps line of length exactly k, which holds at every slicing step.
    """
    total = d.line_count_at_least(eps, k)
    if total == 0:
        return None
    if eps == 0 and k == 1:
        ones = d.count(1, 0)
        if ones == 1:
            return None
        if ones > 1:
            return total - 2
    return total - 1


def kappa_components(d: MarkedDiagram, eps: int, k: int) -> int:
    """Component count of the step locus: two crossing pieces only for the
    rank-two quadric at eps = 0, k = 1."""
    if kappa_dimension(d, eps, k) is None:
        return 0
    if eps == 0 and k == 1 and d.count(1, 0) == 2:
        return 2
    return 1


@dataclass(frozen=True)
class StratumProfile:
    """Per-step dimensions and component estimate for one slicing."""

    slicing: Slicing
    step_dims: Tuple[int, ...]          # -1 encodes an empty step
    step_components: Tuple[int, ...]
    dimension: Optional[int]            # None encodes an empty stratum
    component_factor: int

    def to_json(self) -> dict:
        return {
            "dims": list(self.step_dims),
            "dimension": self.dimension if self.dimension is not None else "empty",
            "components_est": self.component_factor,
        }


def stratum_profile(s: Slicing) -> StratumProfile:
    """Dimension and component estimate of the locally closed piece of s.

    The component factor multiplies per-step counts and is an estimate only:
    later steps can be permuted by monodromy along earlier ones, so the true
    component count can be smaller.  Point counts over small fields are the
    cross-check.
    """
    dims: List[int] = []
    comps: List[int] = []
    for i, rem in enumerate(s.removals):
        d = s.chain[i]
        eps = diagram_parity(d)
        base = kappa_dimension(d, eps, rem.k)
        if base is None:
            dims.append(-1)
            comps.append(0)
            continue
        same_ok, two_ok = _modes_at(d, rem.k)
        if same_ok and two_ok:
            # the locus splits by the mode of the removal a point induces
            if rem.mode == TWO_LINES:
                dims.append(base - 1)
                comps.append(2 if d.count(rem.k, eps) == 2 else 1)
            else:
                dims.append(base)
                comps.append(1)
        else:
            dims.append(base)
            comps.append(kappa_components(d, eps, rem.k))
    empty = any(x < 0 for x in dims)
    dim = None if empty else sum(dims)
    factor = 0 if empty else _product(comps)
    return StratumProfile(s, tuple(dims), tuple(comps), dim, factor)


def _product(xs: Sequence[int]) -> int:
    out = 1
    for x in xs:
        out *= x
    return out


def fiber_dimension(d: MarkedDiagram) -> int:
    """Largest stratum dimension over all slicings, skipping empty strata."""
    best = None
    for s in _slicings_cached(d):
        prof = stratum_profile(s)
        if prof.dimension is not None and (best is None or prof.dimension > best):
            best = prof.dimension
    if best is None:
        raise ValueError(f"every stratum of {d} is empty")
    return best


# ---------------------------------------------------------------------------
# orbit recognizers and special families


def is_connected_fiber(d: MarkedDiagram) -> bool:
    """False exactly on the subregular diagram {(4n-1)o, 1e, 1e}."""
    if diagram_parity(d) != 0 or not is_admissible(d):
        raise ValueError(f"connectedness needs an admissible (2n+1, 2n) diagram, got {d}")
    ls = d.lines
    if len(ls) == 3 and d.count(1, 0) == 2:
        long = ls[0]
        if long.parity == 1 and long.length >= 3:
            return False
    return True


def orbit_diagram(codim: int, n: int) -> MarkedDiagram:
    """Diagram of the codimension 1, 2 or 3 orbit in the odd nilcone."""
    if codim == 1:
        if n < 1:
            raise ValueError("codimension 1 orbit needs n >= 1")
        return MarkedDiagram.of((4 * n - 1, 1), (1, 0), (1, 0))
    if codim == 2:
        if n < 2:
            raise ValueError("codimension 2 orbit needs n >= 2")
        return MarkedDiagram.of((4 * n - 3, 0), (3, 1), (1, 0))
    if codim == 3:
        if n < 2:
            raise ValueError("codimension 3 orbit needs n >= 2")
        return MarkedDiagram.of((4 * n - 3, 0), (2, 1), (2, 0))
    raise ValueError("codim must be 1, 2 or 3")


def is_hook(d: MarkedDiagram) -> bool:
    """At most one line longer than one box."""
    return sum(1 for l in d.lines if l.length > 1) <= 1


class HookFormulaMismatch(AssertionError):
    """The closed hook formula disagreed with the stratum computation."""


def hook_fiber_dimension(d: MarkedDiagram) -> int:
    """Fiber dimension of a hook diagram by the closed case formulas.

    For an even arm with p one-boxes-only lines of each parity the dimension
    is p^2/2; for an odd arm with p even and p-2 odd length-1 lines it is
    p(p-2)/2.  The value is checked against the stepwise computation and a
    mismatch raises instead of silently preferring one reading.
    """
    if not is_hook(d):
        raise ValueError(f"{d} is not a hook")
    if diagram_parity(d) != 0 or not is_admissible(d):
        raise ValueError(f"hook formula needs an admissible (2n+1, 2n) diagram")
    arms = [l for l in d.lines if l.length > 1]
    a, b = d.count(1, 0), d.count(1, 1)
    if not arms or arms[0].parity == 0:
        # even arm (possibly a degenerate length-1 arm among the 1e lines)
        p = b
        value = p * p // 2
    else:
        p = a
        value = p * (p - 2) // 2
    check = fiber_dimension(d)
    if value != check:
        raise HookFormulaMismatch(
            f"hook formula gives {value} for {d} but the strata give {check}"
        )
    return value


def strata_report(d: MarkedDiagram) -> dict:
    """JSON-friendly summary of all strata of d."""
    profiles = [stratum_profile(s) for s in _slicings_cached(d)]
    return {
        "diagram": str(d),
        "slicings": [
            {**p.slicing.to_json(), **p.to_json()} for p in profiles
        ],
        "fiber_dimension": fiber_dimension(d),
        "connected": is_connected_fiber(d),
    }
