"""Label cover instances with matrix labels and linear projection maps.

Big-side vertices ``v`` carry ``m x m`` labels, small-side vertices ``u``
carry ``r x r`` labels, and each edge ``(u, v)`` carries a linear map
``pi: F^{m x m} -> F^{r x r}`` preserving symmetry.  Every ``v`` also has a
list of homogeneous linear constraints ``<c, M> = 0`` on its label.

Real hard instances come out of a quasi-polynomial reduction from 3-SAT;
here we only generate planted YES instances and keep the soundness
parameters ``k`` and ``delta`` as declared metadata.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from quadpcp.gf2 import (
    BitMatrix,
    BitVector,
    MatrixSpaceMap,
    ShapeError,
    dot,
    outer_bits,
)

SCHEMA_INSTANCE = "quadpcp/instance/1"


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    pi: MatrixSpaceMap


@dataclass(frozen=True)
class LabelCoverInstance:
    m: int
    r: int
    n_u: int
    n_v: int
    edges: tuple[Edge, ...]
    constraints: tuple[tuple[int, ...], ...]  # per v, packed m x m functionals
    k: int = 1
    delta_log2: float = -1.0
    _by_u: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    _by_v: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 1 <= self.r <= self.m:
            raise ValueError(f"need 1 <= r <= m, got r={self.r}, m={self.m}")
        if len(self.constraints) != self.n_v:
            raise ShapeError("one constraint list per big-side vertex")
        by_u: list[list[int]] = [[] for _ in range(self.n_u)]
        by_v: list[list[int]] = [[] for _ in range(self.n_v)]
        for i, e in enumerate(self.edges):
            if (e.pi.m, e.pi.r) != (self.m, self.r):
                raise ShapeError(f"edge {i} map has the wrong dimensions")
            if not (0 <= e.u < self.n_u and 0 <= e.v < self.n_v):
                raise ValueError(f"edge {i} endpoint out of range")
            by_u[e.u].append(i)
            by_v[e.v].append(i)
        for cs in self.constraints:
            for c in cs:
                if c >> (self.m * self.m):
                    raise ShapeError("constraint functional does not fit m x m")
        if any(not es for es in by_u) or any(not es for es in by_v):
            raise ValueError("label cover graph has an isolated vertex")
        object.__setattr__(self, "_by_u", tuple(map(tuple, by_u)))
        object.__setattr__(self, "_by_v", tuple(map(tuple, by_v)))

    def edges_at_u(self, u: int) -> tuple[int, ...]:
        return self._by_u[u]

    def edges_at_v(self, v: int) -> tuple[int, ...]:
        return self._by_v[v]

    def triples(self):
        """Yield ``(weight, u, e_v, e_w)`` for the test's choice of ``u, v, w``.

        ``u`` is uniform, and the two edges are independent uniform picks
        among the edges at ``u``; weights sum to one.
        """
        for u in range(self.n_u):
            es = self._by_u[u]
            wt = Fraction(1, self.n_u * len(es) ** 2)
            for a in es:
                for b in es:
                    yield wt, u, a, b


@dataclass(frozen=True)
class PlantedLabeling:
    x: tuple[BitVector, ...]  # per u, length r
    y: tuple[BitVector, ...]  # per v, length m


@dataclass(frozen=True)
class MatrixAssignment:
    mu: tuple[BitMatrix, ...]
    mv: tuple[BitMatrix, ...]

    @classmethod
    def from_labeling(cls, lab: PlantedLabeling) -> MatrixAssignment:
        mu = tuple(BitMatrix(x.dim, x.dim, outer_bits(x.bits, x.bits, x.dim)) for x in lab.x)
        mv = tuple(BitMatrix(y.dim, y.dim, outer_bits(y.bits, y.bits, y.dim)) for y in lab.y)
        return cls(mu, mv)


def _random_bits(rng: np.random.Generator, n: int) -> int:
    return int(rng.integers(0, 1 << n)) if n < 63 else int.from_bytes(rng.bytes((n + 7) // 8), "little") & ((1 << n) - 1)


def _bipartite_edges(rng, n_u: int, n_v: int, degree: int) -> list[tuple[int, int]]:
    """Each u gets ``degree`` distinct neighbours and every v is covered."""
    if degree > n_v:
        raise ValueError("degree exceeds the number of big-side vertices")
    if n_u * degree < n_v:
        raise ValueError("too few edge slots to cover every big-side vertex")
    nbrs: list[set[int]] = [set() for _ in range(n_u)]
    order = rng.permutation(n_v)
    for i, v in enumerate(order):
        nbrs[i % n_u].add(int(v))
    for u in range(n_u):
        while len(nbrs[u]) < degree:
            nbrs[u].add(int(rng.integers(0, n_v)))
    return [(u, v) for u in range(n_u) for v in sorted(nbrs[u])]


def generate_yes_instance(
    m: int,
    r: int,
    n_u: int,
    n_v: int,
    degree: int,
    num_constraints: int = 1,
    seed: int = 0,
    k: int = 1,
    delta_log2: float = -1.0,
) -> tuple[LabelCoverInstance, PlantedLabeling]:
    """Random instance together with a labeling satisfying every edge.

    Projections are conjugations ``rho alpha rho^T`` with ``rho y_v = x_u``;
    each row of ``rho`` is uniform on the affine hyperplane it must lie in.
    Constraints are uniform functionals vanishing on ``y_v (x) y_v``.
    """
    if not 1 <= r <= m:
        raise ValueError(f"need 1 <= r <= m, got r={r}, m={m}")
    if degree < 1 or n_u < 1 or n_v < 1 or num_constraints < 0:
        raise ValueError("sizes must be positive")
    rng = np.random.default_rng(seed)
    emb = 1 << (m - 1)  # e_m: last coordinate
    ys = tuple(BitVector(m, _random_bits(rng, m - 1) | emb) for _ in range(n_v))
    xs = tuple(BitVector(r, 1 + int(rng.integers(0, (1 << r) - 1))) for _ in range(n_u))

    edges = []
    for u, v in _bipartite_edges(rng, n_u, n_v, degree):
        y = ys[v].bits
        rho = 0
        for i in range(r):
            w = _random_bits(rng, m)
            if dot(w, y) != xs[u][i]:
                w ^= emb  # <e_m, y> = 1, so this lands on the right hyperplane
            rho |= w << (i * m)
        edges.append(Edge(u, v, MatrixSpaceMap.conjugation(BitMatrix(r, m, rho))))

    mm = m * m
    corner = 1 << (mm - 1)  # (m, m) entry; (y (x) y) has it set
    cons = []
    for v in range(n_v):
        yy = outer_bits(ys[v].bits, ys[v].bits, m)
        cs = []
        for _ in range(num_constraints):
            c = _random_bits(rng, mm)
            if dot(c, yy):
                c ^= corner
            cs.append(c)
        cons.append(tuple(cs))

    inst = LabelCoverInstance(m, r, n_u, n_v, tuple(edges), tuple(cons), k=k, delta_log2=delta_log2)
    return inst, PlantedLabeling(xs, ys)


@dataclass
class LabelingReport:
    satisfied_fraction: Fraction
    unsatisfied_edges: list[int]
    last_coordinate_violations: list[int]
    constraint_violations: list[int]

    @property
    def ok(self) -> bool:
        return (
            self.satisfied_fraction == 1
            and not self.last_coordinate_violations
            and not self.constraint_violations
        )


def verify_labeling(inst: LabelCoverInstance, lab: PlantedLabeling) -> LabelingReport:
    """Fraction of edges with ``pi(y_v (x) y_v) = x_u (x) x_u``, plus side conditions."""
    if len(lab.x) != inst.n_u or len(lab.y) != inst.n_v:
        raise ShapeError("labeling does not cover the instance")
    if any(x.dim != inst.r for x in lab.x) or any(y.dim != inst.m for y in lab.y):
        raise ShapeError("label vectors have the wrong length")
    m, r = inst.m, inst.r
    yy = [outer_bits(y.bits, y.bits, m) for y in lab.y]
    xx = [outer_bits(x.bits, x.bits, r) for x in lab.x]
    bad = [i for i, e in enumerate(inst.edges) if e.pi.apply_bits(yy[e.v]) != xx[e.u]]
    last = [v for v, y in enumerate(lab.y) if not y[m - 1]]
    cviol = [v for v in range(inst.n_v) if any(dot(c, yy[v]) for c in inst.constraints[v])]
    frac = Fraction(len(inst.edges) - len(bad), len(inst.edges))
    return LabelingReport(frac, bad, last, cviol)


@dataclass
class AssignmentReport:
    u_flags: list[dict[str, bool]]
    v_flags: list[dict[str, bool]]
    satisfied_fraction: Fraction

    @property
    def all_valid(self) -> bool:
        return all(all(f.values()) for f in self.u_flags + self.v_flags)


def check_matrix_assignment(inst: LabelCoverInstance, A: MatrixAssignment, k: int) -> AssignmentReport:
    """Per-vertex validity flags and the fraction of edges with ``pi(M_v) = M_u``."""
    m, r = inst.m, inst.r
    if len(A.mu) != inst.n_u or len(A.mv) != inst.n_v:
        raise ShapeError("assignment does not cover the instance")
    for M in A.mu:
        if M.shape != (r, r):
            raise ShapeError("small-side labels must be r x r")
    for M in A.mv:
        if M.shape != (m, m):
            raise ShapeError("big-side labels must be m x m")
    u_flags = [{"symmetric": M.is_symmetric(), "rank_le_k": M.rank() <= k} for M in A.mu]
    v_flags = [
        {
            "symmetric": M.is_symmetric(),
            "rank_le_k": M.rank() <= k,
            "corner_one": bool(M[m - 1, m - 1]),
            "constraints": not any(dot(c, M.bits) for c in inst.constraints[v]),
        }
        for v, M in enumerate(A.mv)
    ]
    good = sum(1 for e in inst.edges if e.pi.apply_bits(A.mv[e.v].bits) == A.mu[e.u].bits)
    return AssignmentReport(u_flags, v_flags, Fraction(good, len(inst.edges)))


def smoothness_estimate(inst: LabelCoverInstance, v: int, M: BitMatrix) -> Fraction:
    """Exact fraction of edges at ``v`` whose projection kills ``M``."""
    if M.shape != (inst.m, inst.m):
        raise ShapeError("label must be m x m")
    if M.is_zero():
        raise ValueError("smoothness is only defined for nonzero labels")
    if not M.is_symmetric():
        raise ValueError("smoothness is only defined for symmetric labels")
    es = inst.edges_at_v(v)
    zero = sum(1 for i in es if inst.edges[i].pi.apply_bits(M.bits) == 0)
    return Fraction(zero, len(es))


# ---------- parameters


@dataclass(frozen=True)
class Parameters:
    """Reduction parameters in log2 form.  ``log2_N`` is the only input size."""

    log2_N: float
    epsilon: float
    k: float
    log2_delta: float
    m_bound: float
    log2_n_bound: float
    log2_s_bound: float

    def lemma_consistent(self) -> bool:
        """Whether ``s_bound^8 >= delta + 2^-(k/2+1)`` at these values.

        This is the relation the soundness lemma needs for ``s_bound`` to
        exclude independent sets; it only kicks in once ``(log N)^eps`` is
        large, so it fails for moderate ``N``.
        """
        lhs = 8 * self.log2_s_bound
        rhs = _log2_sum(self.log2_delta, -(self.k / 2 + 1))
        return lhs >= rhs

    def outer_pcp_bounds(self) -> dict[str, bool]:
        """Advisory comparison with the outer verifier's guaranteed ``delta``, ``k``."""
        L = self.log2_N
        return {
            "delta_le_2^-L^(1/3)": self.log2_delta <= -(L ** (1 / 3)),
            "k_ge_L^(1/9)": self.k >= L ** (1 / 9),
        }


def _log2_sum(a: float, b: float) -> float:
    hi, lo = max(a, b), min(a, b)
    return hi + math.log2(1.0 + 2.0 ** (lo - hi))


def compute_parameters(log2_N: float, epsilon: float) -> Parameters:
    """Rank bound, soundness, and size bounds as functions of ``log N``."""
    if not log2_N >= 1:
        raise ValueError("need N >= 2")
    if not 0 < epsilon < 1 / 20:
        raise ValueError("need 0 < epsilon < 1/20")
    L = float(log2_N)
    k = _pow(L, 1 / 8 - 2 * epsilon)
    log2_delta = -_pow(L, 1 / 4 - 2 * epsilon)
    # n <= N 2^{m^2} <= N 2^{L^{10/4 + 2 eps}}
    m_sq = _pow(L, 10 / 4 + 2 * epsilon)
    return Parameters(
        log2_N=L,
        epsilon=epsilon,
        k=k,
        log2_delta=log2_delta,
        m_bound=math.sqrt(m_sq),
        log2_n_bound=L + m_sq,
        log2_s_bound=-_pow(L, 1 / 8 - 3 * epsilon),
    )


def _pow(x: float, e: float) -> float:
    try:
        return x**e
    except OverflowError:
        return math.inf


# ---------- JSON


def _bits_rows(M: BitMatrix) -> list[list[int]]:
    return M.to_rows()


def instance_to_dict(inst: LabelCoverInstance, planted: PlantedLabeling | None = None) -> dict:
    mm = inst.m * inst.m
    edges = []
    for e in inst.edges:
        d = {"u": e.u, "v": e.v}
        if e.pi.rho is not None:
            d["rho"] = _bits_rows(e.pi.rho)
        else:
            d["matrix"] = _bits_rows(e.pi.matrix)
        edges.append(d)
    out = {
        "schema": SCHEMA_INSTANCE,
        "coset_ranking": (
            "matrices flattened row-major, entry (i,j) at bit i*m+j; coset index = "
            "non-pivot bits of the canonical representative, packed low to high"
        ),
        "m": inst.m,
        "r": inst.r,
        "U": inst.n_u,
        "V": inst.n_v,
        "edges": edges,
        "constraints": {
            str(v): [[(c >> i) & 1 for i in range(mm)] for c in cs] for v, cs in enumerate(inst.constraints)
        },
        "k": inst.k,
        "delta_log2": inst.delta_log2,
    }
    if planted is not None:
        out["planted"] = {
            "x": [x.to_list() for x in planted.x],
            "y": [y.to_list() for y in planted.y],
        }
    return out


def instance_from_dict(d: dict) -> tuple[LabelCoverInstance, PlantedLabeling | None]:
    if d.get("schema") != SCHEMA_INSTANCE:
        raise ValueError(f"unsupported instance schema {d.get('schema')!r}")
    m, r = int(d["m"]), int(d["r"])
    edges = []
    for e in d["edges"]:
        if "rho" in e:
            pi = MatrixSpaceMap.conjugation(BitMatrix.from_rows(e["rho"]))
        else:
            pi = MatrixSpaceMap.general(m, r, BitMatrix.from_rows(e["matrix"]))
        edges.append(Edge(int(e["u"]), int(e["v"]), pi))
    cons = []
    for v in range(int(d["V"])):
        cs = d["constraints"].get(str(v), [])
        cons.append(tuple(BitVector.from_list(c).bits if len(c) == m * m else _bad_len(c, m) for c in cs))
    inst = LabelCoverInstance(
        m, r, int(d["U"]), int(d["V"]), tuple(edges), tuple(cons),
        k=int(d.get("k", 1)), delta_log2=float(d.get("delta_log2", -1.0)),
    )
    planted = None
    if "planted" in d:
        p = d["planted"]
        planted = PlantedLabeling(
            tuple(BitVector.from_list(x) for x in p["x"]),
            tuple(BitVector.from_list(y) for y in p["y"]),
        )
    return inst, planted


def _bad_len(c, m):
    raise ShapeError(f"constraint has {len(c)} bits, expected {m * m}")

