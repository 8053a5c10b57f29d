"""Marked Young diagrams with alternating 0/1 box labels.

A line of length L and parity eps stands for a diagram row whose boxes are
labelled eps, 1-eps, eps, ... starting from the first box.  A marked diagram
is a multiset of such lines; only the multiset of (length, parity) pairs
enters any computation, row order is presentation only (rendered French
style, longest row at the bottom).

Admissibility means the multiset splits into indecomposable pieces:

    1. a single parity-0 line of length 4p+1,
    2. a single parity-1 line of length 4p-1,
    3. a pair of parity-0 lines of length 4p-1,
    4. a pair of parity-1 lines of length 4p+1,
    5. a pair of lines of even length 2p, one of each parity.

Equivalently, per length: even lengths need equal counts of both parities,
lengths = 1 mod 4 need an even number of parity-1 lines, and lengths = 3
mod 4 an even number of parity-0 lines.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple


@dataclass(frozen=True, order=True)
class Line:
    length: int
    parity: int

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("line length must be positive")
        if self.parity not in (0, 1):
            raise ValueError("line parity must be 0 or 1")

    @property
    def zero_boxes(self) -> int:
        # labels alternate starting from the parity label
        return (self.length + 1) // 2 if self.parity == 0 else self.length // 2

    @property
    def one_boxes(self) -> int:
        return self.length - self.zero_boxes

    def labels(self) -> Tuple[int, ...]:
        return tuple((self.parity + i) % 2 for i in range(self.length))

    def __str__(self) -> str:
        return f"{self.length}{'e' if self.parity == 0 else 'o'}"


def _canonical(lines: Sequence[Line]) -> Tuple[Line, ...]:
    return tuple(sorted(lines, key=lambda l: (-l.length, l.parity)))


@dataclass(frozen=True)
class MarkedDiagram:
    """A multiset of lines, kept in canonical (length desc, parity asc) order."""

    lines: Tuple[Line, ...]

    @staticmethod
    def of(*specs) -> "MarkedDiagram":
        """Build from Line objects, (length, parity) pairs, or token strings."""
        lines: List[Line] = []
        for s in specs:
            if isinstance(s, Line):
                lines.append(s)
            elif isinstance(s, str):
                lines.append(_parse_token(s))
            else:
                lines.append(Line(int(s[0]), int(s[1])))
        return MarkedDiagram(_canonical(lines))

    def __post_init__(self):
        object.__setattr__(self, "lines", _canonical(self.lines))

    @property
    def size(self) -> Tuple[int, int]:
        """(number of 0-labelled boxes, number of 1-labelled boxes)."""
        return (sum(l.zero_boxes for l in self.lines),
                sum(l.one_boxes for l in self.lines))

    @property
    def boxes(self) -> int:
        return sum(l.length for l in self.lines)

    def count(self, length: int, parity: int) -> int:
        return sum(1 for l in self.lines if l.length == length and l.parity == parity)

    def lines_of_parity(self, parity: int) -> List[Line]:
        return [l for l in self.lines if l.parity == parity]

    def line_count_at_least(self, parity: int, k: int) -> int:
        """Number of parity lines with length >= k."""
        return sum(1 for l in self.lines if l.parity == parity and l.length >= k)

    def remove(self, *lines: Line) -> "MarkedDiagram":
        pool = list(self.lines)
        for l in lines:
            pool.remove(l)
        return MarkedDiagram(tuple(pool))

    def add(self, *lines: Line) -> "MarkedDiagram":
        return MarkedDiagram(self.lines + tuple(lines))

    def sort_key(self):
        return tuple((-l.length, l.parity) for l in self.lines)

    def __str__(self) -> str:
        return ",".join(str(l) for l in self.lines)

    def render(self) -> str:
        """ASCII picture, French style: shortest rows on top."""
        rows = ["".join(str(b) for b in l.labels()) for l in self.lines]
        return "\n".join(reversed(rows))

    def to_json(self) -> dict:
        return {"lines": [{"len": l.length, "par": l.parity} for l in self.lines]}

    @staticmethod
    def from_json(data: dict) -> "MarkedDiagram":
        return MarkedDiagram(tuple(Line(d["len"], d["par"]) for d in data["lines"]))


_TOKEN_RE = re.compile(r"^(\d+)([eo])$")
_ROW_RE = re.compile(r"^[01]+$")


def _parse_token(tok: str) -> Line:
    m = _TOKEN_RE.match(tok.strip())
    if not m:
        raise ValueError(f"bad line token {tok!r}, expected e.g. '9e' or '3o'")
    return Line(int(m.group(1)), 0 if m.group(2) == "e" else 1)


def parse_diagram(text: str) -> MarkedDiagram:
    """Parse '9e,3o,1e' tokens or a row string like '01010/101/0'."""
    text = text.strip()
    if not text:
        raise ValueError("empty diagram string")
    if "/" in text or _ROW_RE.match(text):
        lines = []
        for row in text.split("/"):
            row = row.strip()
            if not _ROW_RE.match(row):
                raise ValueError(f"bad diagram row {row!r}")
            for a, b in zip(row, row[1:]):
                if a == b:
                    raise ValueError(f"labels must alternate within a row: {row!r}")
            lines.append(Line(len(row), int(row[0])))
        return MarkedDiagram(tuple(lines))
    return MarkedDiagram(tuple(_parse_token(t) for t in text.split(",")))


def diagram_to_json_str(d: MarkedDiagram) -> str:
    return json.dumps(d.to_json(), sort_keys=True)


# ---------------------------------------------------------------------------
# admissibility


def is_indecomposable(d: MarkedDiagram) -> bool:
    """One of the five basic shapes, exactly."""
    ls = d.lines
    if len(ls) == 1:
        (l,) = ls
        if l.parity == 0:
            return l.length % 4 == 1
        return l.length % 4 == 3
    if len(ls) == 2:
        a, b = ls
        if a.length != b.length:
            return False
        if a.length % 2 == 0:
            return {a.parity, b.parity} == {0, 1}
        if a.parity == 0 and b.parity == 0:
            return a.length % 4 == 3
        if a.parity == 1 and b.parity == 1:
            return a.length % 4 == 1
        return False
    return False


def is_admissible(d: MarkedDiagram) -> bool:
    """Multiset criterion, equivalent to partitioning into basic shapes."""
    lengths = {l.length for l in d.lines}
    for k in lengths:
        even_count = d.count(k, 0)
        odd_count = d.count(k, 1)
        if k % 2 == 0:
            if even_count != odd_count:
                return False
        elif k % 4 == 1:
            if odd_count % 2 != 0:
                return False
        else:  # k % 4 == 3
            if even_count % 2 != 0:
                return False
    return True


def indecomposable_pieces(d: MarkedDiagram) -> Optional[List[MarkedDiagram]]:
    """A partition into basic shapes, or None.  Search-based test oracle."""
    pieces: List[MarkedDiagram] = []
    pool = list(d.lines)
    while pool:
        l = pool.pop()
        if l.length % 2 == 0:
            partner = Line(l.length, 1 - l.parity)
            if partner not in pool:
                return None
            pool.remove(partner)
            pieces.append(MarkedDiagram((l, partner)))
        elif (l.parity == 0) == (l.length % 4 == 1):
            pieces.append(MarkedDiagram((l,)))  # self-sufficient single line
        else:
            if l not in pool:
                return None
            pool.remove(l)
            pieces.append(MarkedDiagram((l, l)))
    return pieces


def diagram_parity(d: MarkedDiagram) -> Optional[int]:
    """0 for size (2n+1, 2n), 1 for size (2n-1, 2n), else None."""
    d0, d1 = d.size
    if d1 % 2 != 0:
        return None
    n = d1 // 2
    if d0 == 2 * n + 1:
        return 0
    if d0 == 2 * n - 1 and n >= 1:
        return 1
    return None


def enumerate_admissible(d0: int, d1: int) -> List[MarkedDiagram]:
    """All admissible diagrams with d0 zero-boxes and d1 one-boxes.

    Generated by assembling indecomposable pieces, largest lengths first;
    the result is sorted by the canonical line-multiset key.
    """
    if d0 < 0 or d1 < 0:
        raise ValueError("box counts must be nonnegative")

    pieces: List[Tuple[Line, ...]] = []
    for length in range(1, d0 + d1 + 1):
        if length % 2 == 0:
            pieces.append((Line(length, 0), Line(length, 1)))
        elif length % 4 == 1:
            pieces.append((Line(length, 0),))
            pieces.append((Line(length, 1), Line(length, 1)))
        else:  # length % 4 == 3
            pieces.append((Line(length, 1),))
            pieces.append((Line(length, 0), Line(length, 0)))

    sized = []
    for lines in pieces:
        z = sum(l.zero_boxes for l in lines)
        o = sum(l.one_boxes for l in lines)
        if z <= d0 and o <= d1:
            sized.append(((z, o), lines))
    sized.sort(key=lambda p: (-(p[0][0] + p[0][1]), p[1]))

    results = set()

    def extend(idx: int, rem0: int, rem1: int, acc: List[Line]):
        if rem0 == 0 and rem1 == 0:
            results.add(MarkedDiagram(tuple(acc)))
            return
        for i in range(idx, len(sized)):
            (z, o), lines = sized[i]
            if z <= rem0 and o <= rem1:
                acc.extend(lines)
                extend(i, rem0 - z, rem1 - o, acc)
                del acc[len(acc) - len(lines):]

    extend(0, d0, d1, [])
    return sorted(results, key=MarkedDiagram.sort_key)


# ---------------------------------------------------------------------------
# kernel profiles (Jordan data seen through the grading)


@dataclass(frozen=True)
class KernelProfile:
    """dims[(eps, k)] = dim(Ker X intersect Im X^(k-1) intersect V_eps)."""

    dims: Tuple[Tuple[Tuple[int, int], int], ...]

    @staticmethod
    def from_dict(dims: Dict[Tuple[int, int], int]) -> "KernelProfile":
        cleaned = {key: v for key, v in dims.items() if v != 0}
        for (eps, k), v in cleaned.items():
            if eps not in (0, 1) or k < 1 or v < 0:
                raise ValueError(f"bad kernel profile entry {(eps, k)}: {v}")
        items = tuple(sorted(cleaned.items()))
        prof = KernelProfile(items)
        for eps in (0, 1):
            seq = [prof.dim(eps, k) for k in range(1, prof.max_length(eps) + 2)]
            if any(a < b for a, b in zip(seq, seq[1:])):
                raise ValueError("kernel profile must be weakly decreasing in k")
        return prof

    def dim(self, eps: int, k: int) -> int:
        for (e, kk), v in self.dims:
            if e == eps and kk == k:
                return v
        return 0

    def max_length(self, eps: int) -> int:
        ks = [k for (e, k), _ in self.dims if e == eps]
        return max(ks) if ks else 0


def kernel_profile_of(d: MarkedDiagram) -> KernelProfile:
    """dims(eps, k) = number of parity-eps lines of length at least k."""
    dims: Dict[Tuple[int, int], int] = {}
    for eps in (0, 1):
        lengths = [l.length for l in d.lines_of_parity(eps)]
        if not lengths:
            continue
        for k in range(1, max(lengths) + 1):
            v = sum(1 for L in lengths if L >= k)
            if v:
                dims[(eps, k)] = v
    return KernelProfile.from_dict(dims)


def diagram_from_kernel_profile(p: KernelProfile) -> MarkedDiagram:
    """Inverse of kernel_profile_of: multiplicity of length k is the jump."""
    lines: List[Line] = []
    for eps in (0, 1):
        top = p.max_length(eps)
        for k in range(1, top + 1):
            mult = p.dim(eps, k) - p.dim(eps, k + 1)
            if mult < 0:
                raise ValueError("kernel profile must be weakly decreasing in k")
            lines.extend([Line(k, eps)] * mult)
    return MarkedDiagram(tuple(lines))


def rank_of_form_on_kernel(d: MarkedDiagram, eps: int) -> int:
    """Rank of the super form on Ker X intersect V_eps: the length-1 lines."""
    return d.count(1, eps)
