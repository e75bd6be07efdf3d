"""The 8-query test, its 4-query pairing, and the hypergraphs they define.

Both tests draw the same randomness: ``u``, two edges ``(u, v)`` and
``(u, w)``, matrices ``X1, X2, Y1, Y2``, vectors ``x, y, z, x', y', z'`` and
``F``.  The 8-query test reads ``A_v`` at ``X1..X4`` and ``A_w`` at
``Y1..Y4``; the 4-query test reads paired tables at ``(X1, X2)``,
``(X3, X4)``, ``(Y1, Y2)``, ``(Y3, Y4)``.  Either accepts iff the values
read are not all equal.

Exact expectations over the test never enumerate the matrices: given
``(u, v, w, x, x', F)`` the four query pairs are independent, and each is an
autocorrelation of a coset table at an offset determined by the rest of the
randomness.  The coset map is linear, so offsets are computed in the
quotient space directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from quadpcp.gf2 import BitMatrix, BitVector, adjoint_apply, dot, outer_bits, outer_product
from quadpcp.labelcover import LabelCoverInstance, PlantedLabeling, verify_labeling
from quadpcp.quadcode import FoldedColoring, FoldingSpace, evaluate_folded, folding_spaces, walsh_hadamard


class LimitExceeded(RuntimeError):
    """Refusal to materialize something too large; carries a size estimate."""

    def __init__(self, message: str, estimate: float):
        super().__init__(f"{message} (estimated size {estimate:.3g})")
        self.estimate = estimate


@lru_cache(maxsize=32)
def _spaces(inst: LabelCoverInstance) -> tuple[FoldingSpace, ...]:
    return folding_spaces(inst)


# ---------- sampling


@dataclass(frozen=True)
class TestRandomness:
    u: int
    edge_v: int
    edge_w: int
    v: int
    w: int
    X1: BitMatrix
    X2: BitMatrix
    Y1: BitMatrix
    Y2: BitMatrix
    xbar: BitVector
    ybar: BitVector
    zbar: BitVector
    xbar2: BitVector
    ybar2: BitVector
    zbar2: BitVector
    F: BitMatrix


@dataclass(frozen=True)
class QueryTuple8:
    """Queried matrices and the ``(vertex, coset index)`` they land on.

    Order: ``v:X1, v:X2, v:X3, v:X4, w:Y1, w:Y2, w:Y3, w:Y4``.
    """

    matrices: tuple[BitMatrix, ...]
    queries: tuple[tuple[int, int], ...]


def _rand_vec(rng, n) -> BitVector:
    return BitVector(n, int(rng.integers(0, 1 << n)))


def _rand_mat(rng, rows, cols) -> BitMatrix:
    return BitMatrix(rows, cols, int(rng.integers(0, 1 << (rows * cols))))


def draw_randomness(inst: LabelCoverInstance, rng: np.random.Generator, **force) -> TestRandomness:
    """One draw of the test randomness; keyword arguments pin individual fields."""
    m, r = inst.m, inst.r
    u = force.pop("u", None)
    if u is None:
        u = int(rng.integers(0, inst.n_u))
    es = inst.edges_at_u(u)
    ev = es[int(rng.integers(0, len(es)))]
    ew = es[int(rng.integers(0, len(es)))]
    fields = dict(
        X1=_rand_mat(rng, m, m), X2=_rand_mat(rng, m, m), Y1=_rand_mat(rng, m, m), Y2=_rand_mat(rng, m, m),
        xbar=_rand_vec(rng, m), ybar=_rand_vec(rng, m), zbar=_rand_vec(rng, m),
        xbar2=_rand_vec(rng, m), ybar2=_rand_vec(rng, m), zbar2=_rand_vec(rng, m),
        F=_rand_mat(rng, r, r),
    )
    unknown = set(force) - set(fields) - {"edge_v", "edge_w"}
    if unknown:
        raise TypeError(f"cannot force {sorted(unknown)}")
    ev = force.pop("edge_v", ev)
    ew = force.pop("edge_w", ew)
    fields.update(force)
    return TestRandomness(u, ev, ew, inst.edges[ev].v, inst.edges[ew].v, **fields)


def query_matrices(inst: LabelCoverInstance, R: TestRandomness) -> tuple[BitMatrix, ...]:
    """``X1..X4, Y1..Y4`` for one draw."""
    m = inst.m
    e = BitVector.unit(m, m - 1)
    em = outer_product(e, e)
    Fp = adjoint_apply(R.F, inst.edges[R.edge_v].pi)
    Fs = adjoint_apply(R.F, inst.edges[R.edge_w].pi)
    X3 = R.X1 + outer_product(R.xbar, R.ybar) + Fp
    X4 = R.X2 + outer_product(R.xbar + e, R.zbar) + Fp
    Y3 = R.Y1 + outer_product(R.xbar2, R.ybar2) + Fs + em
    Y4 = R.Y2 + outer_product(R.xbar2 + e, R.zbar2) + Fs + em
    return (R.X1, R.X2, X3, X4, R.Y1, R.Y2, Y3, Y4)


def sample_test_28(inst: LabelCoverInstance, rng: np.random.Generator, **force) -> tuple[TestRandomness, QueryTuple8]:
    R = draw_randomness(inst, rng, **force)
    mats = query_matrices(inst, R)
    sp = _spaces(inst)
    qs = tuple((R.v, sp[R.v].index(M.bits)) for M in mats[:4]) + tuple(
        (R.w, sp[R.w].index(M.bits)) for M in mats[4:]
    )
    return R, QueryTuple8(mats, qs)


def sample_test_44(inst: LabelCoverInstance, rng: np.random.Generator, **force):
    """Same randomness as :func:`sample_test_28`; queries paired as (X1,X2), (X3,X4), (Y1,Y2), (Y3,Y4).

    Returns ``(randomness, 8-query tuple, pair queries)`` where each pair
    query is ``(vertex, q1 * coset_count + q2)``.
    """
    R, q8 = sample_test_28(inst, rng, **force)
    sp = _spaces(inst)
    qs = q8.queries
    pairs = []
    for a, b in ((0, 1), (2, 3), (4, 5), (6, 7)):
        (vx, i), (_, j) = qs[a], qs[b]
        pairs.append((vx, i * sp[vx].coset_count + j))
    return R, q8, tuple(pairs)


def check_edge(colors: Sequence) -> bool:
    """Not-all-equal predicate on the queried colors."""
    colors = list(colors)
    if not colors:
        raise ValueError("an edge needs at least one color")
    first = colors[0]
    return any(c != first for c in colors[1:])


# ---------- exact factored evaluation


@dataclass(frozen=True)
class _EdgeOffsets:
    """Quotient offsets ``d1[F, x, y]`` and ``d2[F, x, z]`` of one edge."""

    d1: np.ndarray
    d2: np.ndarray


@lru_cache(maxsize=256)
def _edge_offsets(inst: LabelCoverInstance, e: int, shifted: bool) -> _EdgeOffsets:
    m, r = inst.m, inst.r
    edge = inst.edges[e]
    sp = _spaces(inst)[edge.v]
    emb = 1 << (m - 1)
    corner = sp.index(outer_bits(emb, emb, m)) if shifted else 0
    vecs = range(1 << m)
    outer = np.array([[sp.index(outer_bits(x, y, m)) for y in vecs] for x in vecs], dtype=np.int64)
    adj = np.array([sp.index(edge.pi.adjoint_bits(F)) for F in range(1 << (r * r))], dtype=np.int64)
    base = adj[:, None, None] ^ corner
    d1 = base ^ outer[None, :, :]
    d2 = base ^ outer[None, [x ^ emb for x in vecs], :]
    return _EdgeOffsets(d1, d2)


def _autocorrelation(t: np.ndarray) -> np.ndarray:
    """``ac[d] = sum_a t[a] t[a ^ d]`` as exact integers."""
    n = len(t)
    if n <= 4096:
        a = np.arange(n)
        return t[np.bitwise_xor.outer(a, a)] @ t
    h = walsh_hadamard(t)
    return walsh_hadamard(h * h) // n


def _side_blocks(inst, col: FoldedColoring, e: int, shifted: bool, ac: np.ndarray) -> list[int]:
    """For each ``F``: ``sum_x P1(x) P2(x)`` (mode 28) or ``sum_x P(x)`` (mode 44), integer numerators."""
    off = _edge_offsets(inst, e, shifted)
    if col.mode == 28:
        p1 = ac[off.d1].sum(axis=2)
        p2 = ac[off.d2].sum(axis=2)
        return [int(v) for v in (p1.astype(object) * p2.astype(object)).sum(axis=1)]
    cc = col.spaces[inst.edges[e].v].coset_count
    D = (off.d1[:, :, :, None] * cc) ^ off.d2[:, :, None, :]
    return [int(v) for v in ac[D].sum(axis=(1, 2, 3))]


def independence_theta(inst: LabelCoverInstance, col: FoldedColoring) -> Fraction:
    """Exact probability that every query of the test lands in the marked set.

    Zero iff the set marked by the 0/1 coloring contains no hyperedge.
    """
    if not col.is_indicator:
        raise ValueError("independence_theta needs a 0/1 indicator coloring")
    r = inst.r
    acs = [_autocorrelation(t) for t in col.tables]
    total = Fraction(0)
    cache: dict[tuple[int, bool], list[int]] = {}
    for wt, _u, ev, ew in inst.triples():
        kv, kw = (ev, False), (ew, True)
        for key in (kv, kw):
            if key not in cache:
                e, sh = key
                cache[key] = _side_blocks(inst, col, e, sh, acs[inst.edges[e].v])
        bv, bw = cache[kv], cache[kw]
        num = sum(a * b for a, b in zip(bv, bw))
        den = (1 << (r * r)) * _side_den(col, inst, ev) * _side_den(col, inst, ew)
        total += wt * Fraction(num, den)
    return total


def _side_den(col: FoldedColoring, inst, e: int) -> int:
    # average over x and over y, z (or the pair (y, z)), with ac normalised by
    # the table size: 2^m * 2^2m * cc^2 in both modes
    cc = col.spaces[inst.edges[e].v].coset_count
    return (1 << (3 * inst.m)) * cc * cc


def acceptance_probability(inst: LabelCoverInstance, col: FoldedColoring) -> Fraction:
    """Exact acceptance probability of the test against a (2- or 4-) coloring."""
    return 1 - sum((independence_theta(inst, col.indicator(c)) for c in range(col.n_colors)), Fraction(0))


@dataclass
class CompletenessReport:
    mode: int
    acceptance: Fraction
    value_table_ok: bool
    value_table_mismatches: int


def completeness_check(inst: LabelCoverInstance, lab: PlantedLabeling, mode: int) -> CompletenessReport:
    """Acceptance of the honest quadratic-code coloring, plus the value-table check.

    The table check confirms, for every edge and all ``x, y, z, F``, that the
    honest coloring shifts by ``<y_v,x><y_v,y> + f`` between the first pair
    of queries and by ``(<y_v,x> + 1)<y_v,z> + f`` between the second (plus 1
    on the ``w`` side), where ``f = <F, x_u (x) x_u>``.
    """
    rep = verify_labeling(inst, lab)
    if not rep.ok:
        raise ValueError("labeling does not perfectly satisfy the instance")
    sp = _spaces(inst)
    col = FoldedColoring.honest(mode, sp, lab)
    acc = acceptance_probability(inst, col)

    honest28 = col if mode == 28 else FoldedColoring.honest(28, sp, lab)
    m, r = inst.m, inst.r
    emb = 1 << (m - 1)
    mism = 0
    for e in inst.edges:
        y = lab.y[e.v].bits
        xu = lab.x[e.u].bits
        xx = outer_bits(xu, xu, r)
        for shifted in (False, True):
            extra = outer_bits(emb, emb, m) if shifted else 0
            for F in range(1 << (r * r)):
                f = dot(F, xx)
                Fp = e.pi.adjoint_bits(F) ^ extra
                for x in range(1 << m):
                    for t in range(1 << m):
                        got1 = _honest_at(honest28, e.v, outer_bits(x, t, m) ^ Fp)
                        want1 = (dot(y, x) & dot(y, t)) ^ f ^ shifted
                        got2 = _honest_at(honest28, e.v, outer_bits(x ^ emb, t, m) ^ Fp)
                        want2 = ((dot(y, x) ^ 1) & dot(y, t)) ^ f ^ shifted
                        mism += (got1 != want1) + (got2 != want2)
    return CompletenessReport(mode, acc, mism == 0, mism)


def _honest_at(col: FoldedColoring, v: int, X: int) -> int:
    sp = col.spaces[v]
    return int(col.tables[v][sp.index(X)])


# ---------- Monte Carlo cross-check


def theta_monte_carlo(inst: LabelCoverInstance, col: FoldedColoring, samples: int, rng) -> tuple[float, float]:
    """Sampled estimate of :func:`independence_theta` and its standard error."""
    hits = 0
    for _ in range(samples):
        if col.mode == 28:
            _, q8 = sample_test_28(inst, rng)
            ok = all(evaluate_folded(col, v, M) for (v, _), M in zip(q8.queries, q8.matrices))
        else:
            _, q8, _ = sample_test_44(inst, rng)
            M = q8.matrices
            vs = [q8.queries[i][0] for i in (0, 2, 4, 6)]
            ok = all(
                evaluate_folded(col, vx, pair)
                for vx, pair in zip(vs, ((M[0], M[1]), (M[2], M[3]), (M[4], M[5]), (M[6], M[7])))
            )
        hits += ok
    p = hits / samples
    return p, float(np.sqrt(max(p * (1 - p), 1e-300) / samples))


# ---------- hypergraph

_PAD = -1


def _normalize_rows(rows, width: int | None = None) -> np.ndarray:
    """Sorted distinct-id rows padded with -1 at the end, deduplicated and sorted."""
    if isinstance(rows, np.ndarray):
        arr = rows.astype(np.int64, copy=True)
        if arr.ndim != 2:
            raise ValueError("edge array must be 2-D")
    else:
        rows = [tuple(r) for r in rows]
        w = max((len(r) for r in rows), default=0)
        arr = np.full((len(rows), w), _PAD, dtype=np.int64)
        for i, r in enumerate(rows):
            arr[i, : len(r)] = r
    if width is not None and arr.shape[1] < width:
        arr = np.hstack([arr, np.full((arr.shape[0], width - arr.shape[1]), _PAD, dtype=np.int64)])
    big = np.iinfo(np.int64).max
    arr = np.where(arr < 0, big, arr)
    arr.sort(axis=1)
    if arr.shape[1] > 1:
        dup = np.zeros_like(arr, dtype=bool)
        dup[:, 1:] = arr[:, 1:] == arr[:, :-1]
        arr[dup] = big
        arr.sort(axis=1)
    arr = np.where(arr == big, _PAD, arr)
    if len(arr):
        bits = max(int(arr.max()).bit_length() + 1, 8)
        if bits * arr.shape[1] <= 64:
            _, idx = np.unique(_row_keys(arr, bits, presorted=True), return_index=True)
            arr = arr[idx]
        else:
            arr = np.unique(arr, axis=0)
    return arr


@dataclass
class Hypergraph:
    """Explicit hypergraph on vertices ``(v, index)``.

    ``edges`` is an ``(E, width)`` array of increasing vertex ids padded
    with -1; rows are distinct.  ``minimal`` marks a hypergraph from which
    every edge containing another edge has been removed, which changes
    neither its colorings nor its independent sets.
    """

    n: int
    uniformity: int
    vertices: list[tuple[int, int]]
    edges: np.ndarray
    collapsed: int = 0
    minimal: bool = False
    provenance: dict | None = None

    def __post_init__(self):
        self.edges = _normalize_rows(self.edges, self.uniformity)
        if len(self.edges):
            if (self.edges[:, 0] < 0).any():
                raise ValueError("empty edge")
            if self.edges.max() >= self.n:
                raise ValueError("edge mentions a vertex id >= n")

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def sizes(self) -> np.ndarray:
        return (self.edges >= 0).sum(axis=1)

    def edge_list(self) -> list[tuple[int, ...]]:
        return [tuple(int(x) for x in r if x >= 0) for r in self.edges]

    def edge_masks(self) -> list[int]:
        return [sum(1 << int(x) for x in r if x >= 0) for r in self.edges]

    def is_valid(self) -> bool:
        """Every edge has at least two distinct vertices."""
        return bool((self.sizes() >= 2).all())

    def monochromatic(self, colors) -> np.ndarray:
        """Boolean mask of edges on which ``colors`` is constant."""
        c = np.asarray(colors)[self.edges.clip(0)]
        valid = self.edges >= 0
        return ((c == c[:, :1]) | ~valid).all(axis=1)

    def edges_inside(self, members) -> np.ndarray:
        """Boolean mask of edges entirely inside the vertex set ``members``."""
        inside = np.zeros(self.n, dtype=bool)
        inside[np.asarray(list(members), dtype=np.int64)] = True
        return (inside[self.edges.clip(0)] | (self.edges < 0)).all(axis=1)

    def coloring_vector(self, col: FoldedColoring) -> np.ndarray:
        """Colors of all hypergraph vertices under a folded coloring."""
        return np.array([col.tables[v][idx] for v, idx in self.vertices], dtype=np.int64)

    def minimal_edges(self) -> Hypergraph:
        keep = ~_has_proper_subedge(self.edges, self.n)
        return Hypergraph(self.n, self.uniformity, self.vertices, self.edges[keep], self.collapsed, True, self.provenance)

    def to_dict(self) -> dict:
        d = {
            "schema": "quadpcp/hypergraph/1",
            "n": self.n,
            "uniformity": self.uniformity,
            "vertices": [{"v": v, "coset": c} for v, c in self.vertices],
            "edges": self.edge_list(),
            "collapsed": self.collapsed,
            "minimal": self.minimal,
        }
        if self.provenance:
            d["provenance"] = self.provenance
        return d

    @classmethod
    def from_dict(cls, d: dict) -> Hypergraph:
        if d.get("schema", "quadpcp/hypergraph/1") != "quadpcp/hypergraph/1":
            raise ValueError(f"unsupported hypergraph schema {d.get('schema')!r}")
        return cls(
            int(d["n"]),
            int(d["uniformity"]),
            [(int(x["v"]), int(x["coset"])) for x in d["vertices"]],
            [tuple(e) for e in d["edges"]],
            int(d.get("collapsed", 0)),
            bool(d.get("minimal", False)),
            d.get("provenance"),
        )


def _row_keys(arr: np.ndarray, bits: int, presorted: bool = False) -> np.ndarray:
    """Pack each row (ids ascending, padding last) into one integer key."""
    sentinel = (1 << bits) - 1
    a = np.where(arr < 0, sentinel, arr).astype(np.uint64)
    if not presorted:
        a.sort(axis=1)
    key = np.zeros(len(a), dtype=np.uint64)
    for j in range(a.shape[1]):
        key = (key << np.uint64(bits)) | a[:, j]
    return key


def _has_proper_subedge(edges: np.ndarray, n: int) -> np.ndarray:
    """For each row, whether some proper subset of it (size >= 1) is also a row."""
    width = edges.shape[1]
    bits = max(n.bit_length() + 1, 8)
    if bits * width > 64:
        return _has_proper_subedge_slow(edges)
    keys = np.sort(_row_keys(edges, bits, presorted=True))
    sizes = (edges >= 0).sum(axis=1)
    out = np.zeros(len(edges), dtype=bool)
    for s in np.unique(sizes):
        s = int(s)
        if s < 2:
            continue
        rows = np.flatnonzero(sizes == s)
        sub = edges[rows][:, :s]
        hit = np.zeros(len(rows), dtype=bool)
        for drop in range(1, (1 << s) - 1):
            # drop the positions set in ``drop``; a nonempty proper subset remains
            cols = [j for j in range(s) if not (drop >> j) & 1]
            cand = np.full((len(rows), width), _PAD, dtype=np.int64)
            cand[:, : len(cols)] = sub[:, cols]
            ck = _row_keys(cand, bits, presorted=True)
            pos = np.searchsorted(keys, ck)
            pos = np.minimum(pos, len(keys) - 1)
            hit |= keys[pos] == ck
        out[rows] = hit
    return out


def _has_proper_subedge_slow(edges: np.ndarray) -> np.ndarray:
    from itertools import combinations

    sets = {frozenset(int(x) for x in r if x >= 0) for r in edges}
    out = []
    for r in edges:
        e = [int(x) for x in r if x >= 0]
        out.append(any(frozenset(c) in sets for k in range(1, len(e)) for c in combinations(e, k)))
    return np.array(out, dtype=bool)


@dataclass
class Limits:
    max_m: int = 2
    max_block: int = 64  # vertices per big-side block; local sets are 64-bit masks
    max_pairs: int = 5_000_000  # (v-side set, w-side set) combinations enumerated
    max_minimal_pairs: int = 50_000_000  # the same, counting only inclusion-minimal side sets


def _side_sets(off: _EdgeOffsets, cc: int, mode: int, F: int) -> np.ndarray:
    """Distinct local vertex masks touched on one side for a fixed ``F``."""
    d1, d2 = off.d1[F], off.d2[F]
    # pair the two offsets that share the same x
    D = np.unique(((d1[:, :, None] << 32) | d2[:, None, :]).reshape(-1))
    d1s, d2s = (D >> 32).astype(np.uint64), (D & 0xFFFFFFFF).astype(np.uint64)
    one = np.uint64(1)
    if mode == 28:
        q = np.arange(cc, dtype=np.uint64)
        a = (one << q)[None, :] | (one << (q[None, :] ^ d1s[:, None]))
        b = (one << q)[None, :] | (one << (q[None, :] ^ d2s[:, None]))
        masks = a[:, :, None] | b[:, None, :]
    else:
        q = np.arange(cc * cc, dtype=np.uint64)
        Dp = d1s * np.uint64(cc) ^ d2s
        masks = (one << q)[None, :] | (one << (q[None, :] ^ Dp[:, None]))
    return np.unique(masks.reshape(-1))


def _antichain(masks: np.ndarray) -> np.ndarray:
    """Masks that contain no other mask of the (deduplicated) collection."""
    contains = (masks[None, :] & ~masks[:, None]) == 0  # [i, j]: masks[j] inside masks[i]
    np.fill_diagonal(contains, False)
    return masks[~contains.any(axis=1)]


def _mask_ids(masks: np.ndarray, offsets: np.ndarray, width: int) -> np.ndarray:
    """Vertex ids of local 64-bit masks, shifted by per-row block offsets."""
    if len(masks) == 0:
        return np.zeros((0, width), dtype=np.int64)
    bits = np.unpackbits(masks.astype("<u8").view(np.uint8).reshape(-1, 8), axis=1, bitorder="little")
    big = 1 << 20
    pos = np.where(bits.astype(bool), np.arange(64), big)
    pos.sort(axis=1)
    pos = pos[:, :width]
    return np.where(pos == big, _PAD, pos + offsets[:, None])


def build_hypergraph(
    inst: LabelCoverInstance, mode: int, limits: Limits | None = None, minimal: bool = False
) -> Hypergraph:
    """Materialize every edge the test can query, deduplicated as vertex sets.

    Queried matrices only matter through their cosets, so the enumeration
    runs over ``(u, v, w)``, ``F`` and the offsets generated by the
    vectors, then over all coset choices on each side.  With ``minimal``
    only inclusion-minimal edges are produced: side sets containing
    another side set of the same product are skipped up front, and the
    survivors are filtered globally.
    """
    limits = limits or Limits()
    if mode not in (28, 44):
        raise ValueError("mode must be 28 or 44")
    if inst.m > limits.max_m:
        raise LimitExceeded(f"materialization capped at m <= {limits.max_m}", 2.0 ** (inst.m * inst.m))
    sp = _spaces(inst)
    block = [s.coset_count if mode == 28 else s.coset_count**2 for s in sp]
    if max(block) > limits.max_block:
        raise LimitExceeded("vertex block too large for 64-bit masks", max(block))

    sides: dict[tuple[int, bool, int], np.ndarray] = {}

    def side(e: int, shifted: bool, F: int) -> np.ndarray:
        key = (e, shifted, F)
        if key not in sides:
            s = _side_sets(_edge_offsets(inst, e, shifted), sp[inst.edges[e].v].coset_count, mode, F)
            sides[key] = _antichain(s) if minimal else s
        return sides[key]

    nF = 1 << (inst.r**2)
    est = sum(len(side(a, False, F)) * len(side(b, True, F)) for _, _, a, b in inst.triples() for F in range(nF))
    if est > (limits.max_minimal_pairs if minimal else limits.max_pairs):
        raise LimitExceeded("too many query combinations to enumerate", est)

    offsets = np.concatenate([[0], np.cumsum(block)]).astype(np.int64)
    vertices = [(v, i) for v in range(inst.n_v) for i in range(block[v])]
    width = 8 if mode == 28 else 4
    half = 4 if mode == 28 else 2

    seen: set[tuple[int, int, int]] = set()
    chunks = []
    for _, _, ev, ew in inst.triples():
        v, w = inst.edges[ev].v, inst.edges[ew].v
        for F in range(nF):
            if (ev, ew, F) in seen:
                continue
            seen.add((ev, ew, F))
            sv, sw = side(ev, False, F), side(ew, True, F)
            if v == w:
                un = np.unique((sv[:, None] | sw[None, :]).reshape(-1))
                rows = _mask_ids(un, np.full(len(un), offsets[v]), width)
            else:
                A = np.repeat(sv, len(sw))
                B = np.tile(sw, len(sv))
                rows = np.hstack([
                    _mask_ids(A, np.full(len(A), offsets[v]), half),
                    _mask_ids(B, np.full(len(B), offsets[w]), half),
                ])
            chunks.append(_normalize_rows(rows, width))
    allrows = _normalize_rows(np.vstack(chunks), width)
    sizes = (allrows >= 0).sum(axis=1)
    collapsed = int((sizes < 2).sum())
    h = Hypergraph(int(offsets[-1]), width, vertices, allrows[sizes >= 2], collapsed, False)
    return h.minimal_edges() if minimal else h


def monochromatic_edges(h: Hypergraph, colors) -> list[tuple[int, ...]]:
    mono = h.monochromatic(colors)
    return [e for e, bad in zip(h.edge_list(), mono) if bad]
