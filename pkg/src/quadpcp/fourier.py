"""Fourier expansion of the 8-query test and the three-way split of its value.

For a 0/1 indicator ``A`` the probability that all eight queries land in
the set expands over quadruples ``(a1, a2, b1, b2)`` of characters.  A
quadruple contributes

    (-1)^nu(b1+b2) * A_v(a1)^2 A_v(a2)^2 A_w(b1)^2 A_w(b2)^2 * P(a1, a2) * P(b1, b2)

when ``pi(a1+a2) = sigma(b1+b2)`` and nothing otherwise, where
``P(a1, a2) = Pr_x[a1^T x = 0 and a2^T x = a2^T e_m]`` and ``nu`` reads the
bottom-right entry.  (With ``<a, x (x) y> = x^T a y`` the transposes are
what the expectation over ``y`` and ``z`` produces; for the symmetric
characters that carry weight they change nothing.)

Splitting quadruples by ``rank(a1+a2)``, ``rank(b1+b2)`` against ``k`` and
by ``nu(b1+b2)`` gives ``theta0`` (low rank, sign +), ``theta1`` (low rank,
sign -) and ``theta2`` (some high rank).
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

from quadpcp.gf2 import BitMatrix, BitVector, MatrixSpaceMap, ShapeError, rank_bits, solve_affine, transpose_bits
from quadpcp.labelcover import LabelCoverInstance
from quadpcp.quadcode import FoldedColoring, Spectrum, fourier_transform
from quadpcp.verifier import LimitExceeded, _spaces, independence_theta

MAX_QUADRUPLES = 1 << 24


def nu(alpha: int, m: int) -> int:
    """Bit ``<alpha, e_m (x) e_m>``: the bottom-right entry."""
    return (alpha >> (m * m - 1)) & 1


@lru_cache(maxsize=1 << 16)
def pair_probability(a1: int, a2: int, m: int) -> Fraction:
    """``Pr_x[a1^T x = 0 and a2^T x = a2^T e_m]`` over uniform ``x`` in ``GF(2)^m``."""
    t1 = transpose_bits(a1, m, m)
    t2 = transpose_bits(a2, m, m)
    mask = (1 << m) - 1
    rows = [(t1 >> (i * m)) & mask for i in range(m)] + [(t2 >> (i * m)) & mask for i in range(m)]
    last = (a2 >> ((m - 1) * m)) & mask  # a2^T e_m is the last row of a2
    rhs = [0] * m + [(last >> i) & 1 for i in range(m)]
    ok, rk = solve_affine(rows, rhs)
    return Fraction(1, 1 << rk) if ok else Fraction(0)


def rank_prob(alpha: BitMatrix, b: BitVector) -> Fraction:
    """Exact ``Pr_x[alpha x = b]``; either 0 or ``2^-rank(alpha)``."""
    if b.dim != alpha.rows:
        raise ShapeError(f"right-hand side of length {b.dim} for a {alpha.rows}-row matrix")
    ok, rk = solve_affine(alpha.row_ints(), b.to_list())
    return Fraction(1, 1 << rk) if ok else Fraction(0)


def subadditivity_step(a1: int, a2: int, m: int, k: int) -> bool:
    """``rank(a1 + a2) > k`` implies ``max(rank a1, rank a2) > k/2``."""
    if rank_bits(a1 ^ a2, m, m) <= k:
        return True
    return 2 * max(rank_bits(a1, m, m), rank_bits(a2, m, m)) > k


def compute_term(
    v: int,
    w: int,
    pi: MatrixSpaceMap,
    sigma: MatrixSpaceMap,
    a1: int,
    a2: int,
    b1: int,
    b2: int,
    transforms: Mapping[int, Spectrum],
) -> Fraction:
    """One quadruple's contribution to the expansion (characters as packed ints)."""
    m = pi.m
    if sigma.m != m or pi.r != sigma.r:
        raise ShapeError("projections disagree on dimensions")
    if max(a1, a2, b1, b2) >> (m * m):
        raise ShapeError(f"character does not fit in {m}x{m}")
    if pi.apply_bits(a1 ^ a2) != sigma.apply_bits(b1 ^ b2):
        return Fraction(0)
    tv, tw = transforms[v], transforms[w]
    weight = (tv.coefficient(a1) * tv.coefficient(a2) * tw.coefficient(b1) * tw.coefficient(b2)) ** 2
    if not weight:
        return Fraction(0)
    sign = -1 if nu(b1 ^ b2, m) else 1
    return sign * weight * pair_probability(a1, a2, m) * pair_probability(b1, b2, m)


def transforms_of(col: FoldedColoring) -> dict[int, Spectrum]:
    if col.mode != 28:
        raise ValueError("the expansion is defined for 8-query colorings")
    if not col.is_indicator:
        raise ValueError("the expansion needs a 0/1 indicator coloring")
    return {v: fourier_transform(col, v) for v in range(len(col.tables))}


def quadruple_count(inst: LabelCoverInstance, transforms: Mapping[int, Spectrum]) -> int:
    sizes = {v: len(t.support()) for v, t in transforms.items()}
    total = 0
    for _, _, ev, ew in inst.triples():
        total += sizes[inst.edges[ev].v] ** 2 * sizes[inst.edges[ew].v] ** 2
    return total


def compute_theta_fourier(inst: LabelCoverInstance, col: FoldedColoring, cap: int = MAX_QUADRUPLES) -> Fraction:
    """The expansion summed term by term over the Fourier supports."""
    tr = transforms_of(col)
    est = quadruple_count(inst, tr)
    if est > cap:
        raise LimitExceeded("quadruple sum over the Fourier supports is too large", est)
    supp = {v: t.support() for v, t in tr.items()}
    total = Fraction(0)
    for wt, _u, ev, ew in inst.triples():
        e, f = inst.edges[ev], inst.edges[ew]
        s = Fraction(0)
        for a1 in supp[e.v]:
            for a2 in supp[e.v]:
                for b1 in supp[f.v]:
                    for b2 in supp[f.v]:
                        s += compute_term(e.v, f.v, e.pi, f.pi, a1, a2, b1, b2, tr)
        total += wt * s
    return total


# ---------- grouped evaluation


@dataclass(frozen=True)
class _PairRow:
    total: int  # a1 + a2
    rank: int
    nu: int
    weight: int  # numerator of A(a1)^2 A(a2)^2 over 2^(4 m^2)
    prob: int  # numerator of P(a1, a2) over 2^m


def _pair_rows(spec: Spectrum, m: int) -> list[_PairRow]:
    rows = []
    supp = spec.support()
    for a1 in supp:
        for a2 in supp:
            w = int(spec.num[a1]) ** 2 * int(spec.num[a2]) ** 2
            p = pair_probability(a1, a2, m) * (1 << m)
            t = a1 ^ a2
            rows.append(_PairRow(t, rank_bits(t, m, m), nu(t, m), w, int(p)))
    return rows


def _side(rows: list[_PairRow], pi: MatrixSpaceMap, with_prob: bool) -> dict[tuple[int, int, int], int]:
    """Pair weights grouped by ``(projected label, rank, nu)``."""
    out: dict[tuple[int, int, int], int] = defaultdict(int)
    for row in rows:
        out[(pi.apply_bits(row.total), row.rank, row.nu)] += row.weight * (row.prob if with_prob else 1)
    return out


@dataclass
class _Split:
    theta0: Fraction
    theta1: Fraction
    theta2: Fraction
    theta2_abs: Fraction  # sum of |term| over the high-rank part
    eq7: Fraction  # theta1 index set, weights only


def _split(inst: LabelCoverInstance, tr: Mapping[int, Spectrum], k: int) -> _Split:
    m = inst.m
    rows = {v: _pair_rows(t, m) for v, t in tr.items()}
    sides: dict[tuple[int, bool], dict] = {}

    def side(e: int, with_prob: bool):
        key = (e, with_prob)
        if key not in sides:
            edge = inst.edges[e]
            sides[key] = _side(rows[edge.v], edge.pi, with_prob)
        return sides[key]

    acc = {name: Fraction(0) for name in ("t0", "t1", "t2", "t2abs", "eq7")}
    den_p = 1 << (8 * m * m + 2 * m)
    den_w = 1 << (8 * m * m)
    for wt, _u, ev, ew in inst.triples():
        sv, sw = side(ev, True), side(ew, True)
        by_label = defaultdict(list)
        for key, val in sw.items():
            by_label[key[0]].append((key, val))
        part = {name: 0 for name in acc}
        for (lab, rv, _), a in sv.items():
            for (_, rw, nw), b in by_label.get(lab, ()):
                term = a * b
                if rv > k or rw > k:
                    part["t2"] += -term if nw else term
                    part["t2abs"] += term
                elif nw:
                    part["t1"] -= term
                else:
                    part["t0"] += term
        # the same index set without the probability factors
        uv, uw = side(ev, False), side(ew, False)
        for (lab, rv, _), a in uv.items():
            if rv > k:
                continue
            for (lw, rw, nw), b in uw.items():
                if lw == lab and rw <= k and nw:
                    part["eq7"] += a * b
        for name in ("t0", "t1", "t2", "t2abs"):
            acc[name] += wt * Fraction(part[name], den_p)
        acc["eq7"] += wt * Fraction(part["eq7"], den_w)
    return _Split(acc["t0"], acc["t1"], acc["t2"], acc["t2abs"], acc["eq7"])


def theta_by_groups(inst: LabelCoverInstance, col: FoldedColoring) -> Fraction:
    """The expansion evaluated by grouping character pairs per side."""
    s = _split(inst, transforms_of(col), k=inst.m)
    return s.theta0 + s.theta1 + s.theta2


# ---------- decoding


@dataclass
class DecodingOutcome:
    success_probability: Fraction
    eq7_sum: Fraction
    u_labels: dict[int, dict[int, Fraction]]  # label distribution (r x r matrices) per u
    w_labels: dict[int, dict[int, Fraction]]  # label distribution (m x m matrices) per v
    homogeneous: bool  # every b1 + b2 with weight lies in W_v
    nonhomogeneous: list[tuple[int, int]] = field(default_factory=list)

    @property
    def agrees(self) -> bool:
        return self.success_probability == self.eq7_sum


def decode_labeling(inst: LabelCoverInstance, col: FoldedColoring, k: int) -> DecodingOutcome:
    """Exact success probability of the randomized decoding.

    ``u`` picks a random neighbour ``v`` and a pair ``(a1, a2)`` with
    probability ``A_v(a1)^2 A_v(a2)^2`` and takes the label
    ``pi(a1 + a2)``; the big-side vertex ``w`` picks ``(b1, b2)`` the same way
    and takes ``b1 + b2``.  Only pairs in the index set of ``theta1`` (rank at
    most ``k``, and ``nu(b1 + b2) = 1`` on the big side) produce a label;
    otherwise the vertex stays unlabelled.
    """
    tr = transforms_of(col)
    m = inst.m
    den = 1 << (4 * m * m)
    spaces = _spaces(inst)
    big: dict[int, dict[int, Fraction]] = {}
    bad = []
    for v, spec in tr.items():
        dist: dict[int, Fraction] = defaultdict(Fraction)
        supp = spec.support()
        for b1 in supp:
            for b2 in supp:
                t = b1 ^ b2
                if t not in spaces[v].W:
                    bad.append((v, t))
                if rank_bits(t, m, m) <= k and nu(t, m):
                    dist[t] += Fraction(int(spec.num[b1]) ** 2 * int(spec.num[b2]) ** 2, den)
        big[v] = dict(dist)
    small: dict[int, dict[int, Fraction]] = {}
    for u in range(inst.n_u):
        es = inst.edges_at_u(u)
        dist = defaultdict(Fraction)
        for e in es:
            edge = inst.edges[e]
            spec = tr[edge.v]
            supp = spec.support()
            for a1 in supp:
                for a2 in supp:
                    t = a1 ^ a2
                    if rank_bits(t, m, m) <= k:
                        dist[edge.pi.apply_bits(t)] += Fraction(
                            int(spec.num[a1]) ** 2 * int(spec.num[a2]) ** 2, den * len(es)
                        )
        small[u] = dict(dist)
    success = Fraction(0)
    for u in range(inst.n_u):
        es = inst.edges_at_u(u)
        for e in es:
            edge = inst.edges[e]
            s = sum((p * small[u].get(edge.pi.apply_bits(M), 0) for M, p in big[edge.v].items()), Fraction(0))
            success += s / (inst.n_u * len(es))
    eq7 = _split(inst, tr, k).eq7
    return DecodingOutcome(success, eq7, small, big, not bad, sorted(set(bad)))


# ---------- report


def _exact(q) -> dict:
    if isinstance(q, float):
        return {"float": q}
    return {"num": q.numerator, "den": q.denominator, "float": float(q)}


@dataclass
class BoundCheck:
    ok: bool
    lhs: Fraction
    rhs: Fraction | float

    def to_dict(self) -> dict:
        return {"ok": self.ok, "lhs": _exact(self.lhs), "rhs": _exact(self.rhs)}


@dataclass
class ThetaReport:
    theta: Fraction  # direct factored evaluation
    theta_fourier: Fraction
    theta0: Fraction
    theta1: Fraction
    theta2: Fraction
    s: Fraction
    k: int
    decoding_success: Fraction
    bound_checks: dict[str, BoundCheck]
    advisory: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.bound_checks.values())

    def to_dict(self) -> dict:
        return {
            "schema": "quadpcp/theta-report/1",
            "theta": _exact(self.theta),
            "theta_fourier": _exact(self.theta_fourier),
            "theta0": _exact(self.theta0),
            "theta1": _exact(self.theta1),
            "theta2": _exact(self.theta2),
            "s": _exact(self.s),
            "k": self.k,
            "decoding_success": _exact(self.decoding_success),
            "bound_checks": {name: c.to_dict() for name, c in self.bound_checks.items()},
            "advisory": self.advisory,
            "ok": self.ok,
        }


def set_density(inst: LabelCoverInstance, col: FoldedColoring) -> Fraction:
    """``E_{u, v} A_v(0)``: density averaged over a random ``u`` and a random edge at ``u``."""
    dens = col.densities()
    total = Fraction(0)
    for u in range(inst.n_u):
        es = inst.edges_at_u(u)
        total += sum((dens[inst.edges[e].v] for e in es), Fraction(0)) / (inst.n_u * len(es))
    return total


def rank_bound(k: int) -> float:
    """``2^-(k/2 + 1)``; irrational for odd ``k``, so only reported as a float."""
    return 2.0 ** -(k / 2 + 1)


def le_rank_bound(x: Fraction, k: int) -> bool:
    """Exact test of ``x <= 2^-(k/2 + 1)`` for ``x >= 0``."""
    return x * x <= Fraction(1, 1 << (k + 2))


def theta2_bound_check(report: ThetaReport, transforms: Mapping[int, Spectrum], k: int) -> bool:
    """``|theta2| <= 2^-(k/2+1)`` and Parseval mass at most 1 for every table."""
    mass_ok = all(t.mass() <= 1 for t in transforms.values())
    return mass_ok and le_rank_bound(abs(report.theta2), k)


def theta2_term_bound(inst: LabelCoverInstance, tr: Mapping[int, Spectrum], k: int) -> bool:
    """Every quadruple in the high-rank part has probability factor at most ``2^-(k+1)``.

    If ``rank(a1 + a2) > k`` then the rows of ``a1 + a2`` lie in the row space
    of ``a1`` stacked on ``a2``, so the system defining ``P(a1, a2)`` has rank
    above ``k``.  Since ``2^-(k+1) <= 2^-(k/2+1)`` and the squared weights sum
    to at most 1, this yields the aggregate bound.
    """
    m = inst.m
    cap = Fraction(1, 1 << (k + 1))
    for v, t in tr.items():
        supp = t.support()
        for a1 in supp:
            for a2 in supp:
                if rank_bits(a1 ^ a2, m, m) > k and pair_probability(a1, a2, m) > cap:
                    return False
    return True


def decompose_theta(inst: LabelCoverInstance, col: FoldedColoring, k: int) -> ThetaReport:
    """Full three-way split with every bound of the soundness argument checked exactly."""
    tr = transforms_of(col)
    sp = _split(inst, tr, k)
    direct = independence_theta(inst, col)
    fourier = sp.theta0 + sp.theta1 + sp.theta2
    dec = decode_labeling(inst, col, k)
    s = set_density(inst, col)
    checks = {
        "identity_ok": BoundCheck(direct == fourier, direct, fourier),
        "theta0_nonnegative": BoundCheck(sp.theta0 >= 0, Fraction(0), sp.theta0),
        "theta0_ge_s8": BoundCheck(sp.theta0 >= s**8, s**8, sp.theta0),
        "theta1_le_eq7": BoundCheck(abs(sp.theta1) <= sp.eq7, abs(sp.theta1), sp.eq7),
        "eq7_eq_decoding": BoundCheck(dec.agrees, sp.eq7, dec.success_probability),
        "theta1_le_delta_decoding": BoundCheck(
            abs(sp.theta1) <= dec.success_probability, abs(sp.theta1), dec.success_probability
        ),
        "theta2_le_rankbound": BoundCheck(
            le_rank_bound(sp.theta2_abs, k) and le_rank_bound(abs(sp.theta2), k), abs(sp.theta2), rank_bound(k)
        ),
        "parseval": BoundCheck(all(t.mass() <= 1 for t in tr.values()), max(t.mass() for t in tr.values()), Fraction(1)),
        "homogeneous_labels": BoundCheck(dec.homogeneous, Fraction(len(dec.nonhomogeneous)), Fraction(0)),
    }
    if direct == 0:
        # s^8 <= theta0 = -(theta1 + theta2) <= decoding + 2^-(k/2+1)
        lhs = s**8 - dec.success_probability
        ok = lhs <= 0 or le_rank_bound(lhs, k)
        checks["soundness_chain"] = BoundCheck(ok, s**8, float(dec.success_probability) + rank_bound(k))
    advisory = {
        "declared_delta_log2": inst.delta_log2,
        "theta1_le_declared_delta": float(abs(sp.theta1)) <= 2.0**inst.delta_log2,
    }
    return ThetaReport(direct, fourier, sp.theta0, sp.theta1, sp.theta2, s, k, dec.success_probability, checks, advisory)
