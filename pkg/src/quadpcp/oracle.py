"""Exact search on small hypergraphs: independent sets, colorings, covering number.

The searches work on edge bitmasks.  Witnesses are re-checked by the
plain set-based checkers at the bottom of the module, which share no code
with the searches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from quadpcp.verifier import Hypergraph

DEFAULT_IS_CAP = 60
DEFAULT_COLOR_CAP = 256
DEFAULT_NODE_BUDGET = 5_000_000


class OracleLimit(RuntimeError):
    """The instance is beyond what the exact search is allowed to attempt."""


def _edges(h) -> tuple[int, list[tuple[int, ...]]]:
    if isinstance(h, Hypergraph):
        return h.n, h.edge_list()
    n, edges = h
    return n, [tuple(sorted(set(e))) for e in edges]


# ---------- independent sets


def max_independent_set(h, cap: int = DEFAULT_IS_CAP) -> tuple[int, list[int]]:
    """Largest vertex set containing no edge, by branch and bound.

    Accepts a :class:`Hypergraph` or a pair ``(n, edges)``.
    """
    n, edges = _edges(h)
    if n > cap:
        raise OracleLimit(f"{n} vertices exceeds the independent-set cap of {cap}")
    masks = [sum(1 << v for v in e) for e in edges]
    if any(bin(mk).count("1") == 1 for mk in masks):
        # a one-vertex edge forbids that vertex outright
        banned = {e[0] for e in edges if len(e) == 1}
    else:
        banned = set()
    incident: list[list[int]] = [[] for _ in range(n)]
    for mk in masks:
        for v in range(n):
            if mk >> v & 1:
                incident[v].append(mk)
    order = sorted((v for v in range(n) if v not in banned), key=lambda v: -len(incident[v]))

    best = [0, 0]  # size, mask

    def extend(i: int, chosen: int, size: int):
        if size > best[0]:
            best[0], best[1] = size, chosen
        if size + (len(order) - i) <= best[0]:
            return
        for j in range(i, len(order)):
            if size + (len(order) - j) <= best[0]:
                return
            v = order[j]
            trial = chosen | (1 << v)
            if all(mk & ~trial for mk in incident[v]):
                extend(j + 1, trial, size + 1)

    extend(0, 0, 0)
    witness = [v for v in range(n) if best[1] >> v & 1]
    if not is_independent(edges, witness):
        raise AssertionError("independent-set witness failed verification")
    return best[0], witness


# ---------- colorings


def find_coloring(h, q: int, cap: int = DEFAULT_COLOR_CAP, budget: int = DEFAULT_NODE_BUDGET, hint=None):
    """A ``q``-coloring with no monochromatic edge, or ``None`` if none exists.

    Backtracking over domains with forward checking: once every vertex of
    an edge but one is colored with a single color, that color leaves the
    last vertex's domain.  Colors are introduced in order (a vertex may
    only take a color already used or the next fresh one), which removes
    the symmetry between colors.  ``hint`` is an optional vertex order.
    """
    n, edges = _edges(h)
    if n > cap:
        raise OracleLimit(f"{n} vertices exceeds the coloring cap of {cap}")
    if q < 1:
        raise ValueError("q must be positive")
    if any(len(e) == 1 for e in edges):
        return None
    inc: list[list[int]] = [[] for _ in range(n)]
    for i, e in enumerate(edges):
        for v in e:
            inc[v].append(i)
    full = (1 << q) - 1
    dom = [full] * n
    color = [-1] * n
    nodes = [0]

    def propagate(v: int, trail: list) -> bool:
        """Forward check every edge at ``v``; record domain changes in ``trail``."""
        stack = [v]
        while stack:
            x = stack.pop()
            for ei in inc[x]:
                e = edges[ei]
                free = [y for y in e if color[y] < 0]
                cols = {color[y] for y in e if color[y] >= 0}
                if not free:
                    if len(cols) == 1:
                        return False
                    continue
                if len(free) == 1 and len(cols) == 1:
                    y = free[0]
                    c = next(iter(cols))
                    if dom[y] >> c & 1:
                        trail.append((y, dom[y]))
                        dom[y] &= ~(1 << c)
                        if not dom[y]:
                            return False
        return True

    def pick() -> int:
        best, key = -1, None
        for v in range(n):
            if color[v] < 0:
                k = (bin(dom[v]).count("1"), -len(inc[v]))
                if key is None or k < key:
                    best, key = v, k
        return best

    def solve(used: int) -> bool:
        nodes[0] += 1
        if nodes[0] > budget:
            raise OracleLimit(f"coloring search exceeded {budget} nodes")
        v = pick()
        if v < 0:
            return True
        for c in range(min(q, used + 1)):
            if not dom[v] >> c & 1:
                continue
            color[v] = c
            trail: list = []
            if propagate(v, trail) and solve(max(used, c + 1)):
                return True
            for y, d in reversed(trail):
                dom[y] = d
            color[v] = -1
        return False

    if not solve(0):
        return None
    out = [max(c, 0) for c in color]
    if not is_proper_coloring(edges, out):
        raise AssertionError("coloring witness failed verification")
    return out


def is_q_colorable(h, q: int, cap: int = DEFAULT_COLOR_CAP, budget: int = DEFAULT_NODE_BUDGET):
    """``(colorable, witness)``."""
    w = find_coloring(h, q, cap, budget)
    return w is not None, w


def covering_number(h, max_t: int = 4, cap: int = DEFAULT_COLOR_CAP, budget: int = DEFAULT_NODE_BUDGET):
    """Fewest Boolean assignments such that every edge is non-constant under one of them.

    ``t`` assignments cover every edge exactly when reading them together
    as a ``2^t``-coloring leaves no edge monochromatic, so this is the least
    ``t`` with a ``2^t``-coloring.  Returns ``(t, assignments)``, or
    ``(None, [])`` if some edge has a single vertex (no assignment can make
    it non-constant) or no ``t <= max_t`` works.
    """
    n, edges = _edges(h)
    if any(len(e) == 1 for e in edges):
        return None, []
    if not edges:
        return 0, []
    for t in range(1, max_t + 1):
        col = find_coloring((n, edges), 1 << t, cap, budget)
        if col is not None:
            assigns = [[(c >> b) & 1 for c in col] for b in range(t)]
            if not is_cover(edges, assigns):
                raise AssertionError("cover witness failed verification")
            return t, assigns
    return None, []


# ---------- result bundle


@dataclass
class OracleResult:
    n: int
    max_independent_set_size: int | None = None
    witness: list[int] = field(default_factory=list)
    q_colorable: dict[int, bool] = field(default_factory=dict)
    colorings: dict[int, list[int] | None] = field(default_factory=dict)
    covering_number: int | None = None
    cover: list[list[int]] = field(default_factory=list)
    skipped: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema": "quadpcp/oracle/1",
            "n": self.n,
            "max_independent_set_size": self.max_independent_set_size,
            "witness": self.witness,
            "q_colorable": {str(q): ok for q, ok in self.q_colorable.items()},
            "colorings": {str(q): c for q, c in self.colorings.items()},
            "covering_number": self.covering_number,
            "cover": self.cover,
            "skipped": self.skipped,
        }


def solve(h: Hypergraph, qs: Sequence[int] = (2, 3, 4), is_cap: int = DEFAULT_IS_CAP,
          color_cap: int = DEFAULT_COLOR_CAP, budget: int = DEFAULT_NODE_BUDGET) -> OracleResult:
    """Run every oracle that fits under its cap; record the ones that do not."""
    res = OracleResult(h.n)
    try:
        res.max_independent_set_size, res.witness = max_independent_set(h, is_cap)
    except OracleLimit as exc:
        res.skipped["max_independent_set"] = str(exc)
    for q in qs:
        try:
            ok, w = is_q_colorable(h, q, color_cap, budget)
            res.q_colorable[q], res.colorings[q] = ok, w
        except OracleLimit as exc:
            res.skipped[f"colorable_{q}"] = str(exc)
    try:
        res.covering_number, res.cover = covering_number(h, cap=color_cap, budget=budget)
    except OracleLimit as exc:
        res.skipped["covering_number"] = str(exc)
    return res


# ---------- independent checkers


def is_independent(edges, members) -> bool:
    s = set(members)
    return not any(set(e) <= s for e in edges)


def is_proper_coloring(edges, colors) -> bool:
    return all(len({colors[v] for v in e}) > 1 for e in edges)


def is_cover(edges, assignments) -> bool:
    return all(any(len({a[v] for v in e}) > 1 for a in assignments) for e in edges)


def cover_lower_bound(q: int) -> int:
    """Assignments needed to encode a proper ``q``-coloring: ``ceil(log2 q)``."""
    return max(0, math.ceil(math.log2(q)))
