"""End-to-end acceptance checks, one function per criterion.

Each check returns a :class:`CriterionResult`; :func:`run_all` runs them in
order and shares generated instances and hypergraphs between them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable

import numpy as np

from quadpcp.fourier import (
    compute_theta_fourier,
    decompose_theta,
    le_rank_bound,
    rank_prob,
    transforms_of,
    theta2_bound_check,
)
from quadpcp.gf2 import BitMatrix, BitVector
from quadpcp.labelcover import compute_parameters, generate_yes_instance
from quadpcp.oracle import find_coloring, is_cover, is_independent
from quadpcp.quadcode import FoldedColoring, check_folding_support, folding_spaces
from quadpcp.verifier import build_hypergraph, completeness_check

SEEDS = tuple(range(20))
PROFILE = dict(m=2, r=1, n_u=3, n_v=3, degree=2, num_constraints=1)


@dataclass
class CriterionResult:
    number: int
    title: str
    ok: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"criterion {self.number:2d} [{'PASS' if self.ok else 'FAIL'}] {self.title}: {self.detail} ({self.seconds:.1f}s)"


@dataclass
class Context:
    """Instances, hypergraphs and colorings reused across criteria."""

    seed: int = 2024
    _inst: dict = field(default_factory=dict)
    _hyper: dict = field(default_factory=dict)
    _random: list = field(default_factory=list)

    def instance(self, s: int):
        if s not in self._inst:
            self._inst[s] = generate_yes_instance(**PROFILE, seed=s)
        return self._inst[s]

    def hypergraph(self, s: int, mode: int):
        # the 8-query graph is small enough to keep whole; the 4-query one is
        # kept as its inclusion-minimal edges (same colorings, same independent sets)
        key = (s, mode)
        if key not in self._hyper:
            inst, _ = self.instance(s)
            self._hyper[key] = build_hypergraph(inst, mode, minimal=(mode == 44))
        return self._hyper[key]

    def random_colorings(self, count: int = 100):
        """``count`` random folded indicator colorings spread over the seeded instances."""
        if not self._random:
            rng = np.random.default_rng(self.seed)
            for i in range(count):
                inst, _ = self.instance(SEEDS[i % len(SEEDS)])
                p = float(rng.uniform(0.2, 0.9))
                self._random.append((inst, FoldedColoring.random(28, folding_spaces(inst), rng, p=p)))
        return self._random[:count]


def _timed(number: int, title: str, fn: Callable[[Context], tuple[bool, str]], ctx: Context) -> CriterionResult:
    t = time.perf_counter()
    try:
        ok, detail = fn(ctx)
    except Exception as exc:  # a crash is a failed criterion, reported as such
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return CriterionResult(number, title, ok, detail, time.perf_counter() - t)


# ---------- criteria


def completeness_28(ctx: Context) -> tuple[bool, str]:
    t = time.perf_counter()
    bad = []
    for s in SEEDS:
        inst, lab = ctx.instance(s)
        rep = completeness_check(inst, lab, 28)
        h = ctx.hypergraph(s, 28)
        col = FoldedColoring.honest(28, folding_spaces(inst), lab)
        mono = int(h.monochromatic(h.coloring_vector(col)).sum())
        if rep.acceptance != 1 or not rep.value_table_ok or mono:
            bad.append((s, str(rep.acceptance), mono))
    dt = time.perf_counter() - t
    ok = not bad and dt < 60
    return ok, f"{len(SEEDS)} instances, acceptance 1 and 0 monochromatic edges; failures={bad}; {dt:.1f}s < 60s"


def completeness_44(ctx: Context) -> tuple[bool, str]:
    bad = []
    for s in SEEDS:
        inst, lab = ctx.instance(s)
        rep = completeness_check(inst, lab, 44)
        h = ctx.hypergraph(s, 44)
        col = find_coloring(h, 4)
        if rep.acceptance != 1 or col is None:
            bad.append((s, str(rep.acceptance), col is not None))
    return not bad, f"{len(SEEDS)} instances, acceptance 1 and oracle 4-coloring found; failures={bad}"


def balancedness(ctx: Context) -> tuple[bool, str]:
    bad = []
    for s in SEEDS:
        inst, lab = ctx.instance(s)
        sp = folding_spaces(inst)
        for mode, share in ((28, Fraction(1, 2)), (44, Fraction(1, 4))):
            col = FoldedColoring.honest(mode, sp, lab)
            h = ctx.hypergraph(s, mode)
            edges = h.edge_list()
            colors = h.coloring_vector(col)
            for v in range(inst.n_v):
                fr = col.color_fractions(v)
                if any(fr.get(c, 0) != share for c in range(col.n_colors)):
                    bad.append((s, mode, v, "share"))
            for c in range(col.n_colors):
                members = [i for i in range(h.n) if colors[i] == c]
                if not is_independent(edges, members):
                    bad.append((s, mode, c, "class not independent"))
    return not bad, f"per-block shares 1/2 and 1/4, every class independent; failures={bad}"


def theta_identity(ctx: Context) -> tuple[bool, str]:
    t = time.perf_counter()
    bad = 0
    for i, (inst, col) in enumerate(ctx.random_colorings()):
        rep = decompose_theta(inst, col, k=1)
        lit = compute_theta_fourier(inst, col)
        if not (rep.theta == lit == rep.theta0 + rep.theta1 + rep.theta2):
            bad += 1
    dt = time.perf_counter() - t
    return bad == 0 and dt < 300, f"100 colorings, direct = Fourier = split exactly; mismatches={bad}; {dt:.1f}s < 300s"


def theta0_bound(ctx: Context) -> tuple[bool, str]:
    bad = 0
    for inst, col in ctx.random_colorings():
        rep = decompose_theta(inst, col, k=1)
        bad += rep.theta0 < rep.s**8
    inst, _ = ctx.instance(0)
    sp = folding_spaces(inst)
    zero = decompose_theta(inst, FoldedColoring.constant(28, sp, 0), k=1)
    one = decompose_theta(inst, FoldedColoring.constant(28, sp, 1), k=1)
    edges_ok = zero.s == 0 and zero.theta0 == 0 and one.s == 1 and one.theta0 == 1
    return bad == 0 and edges_ok, f"theta0 >= s^8 on 100 colorings (violations={bad}); s=0 -> theta0=0, s=1 -> theta0=1: {edges_ok}"


def theta1_bound(ctx: Context) -> tuple[bool, str]:
    bad = nonhom = 0
    for inst, col in ctx.random_colorings():
        rep = decompose_theta(inst, col, k=1)
        c = rep.bound_checks
        bad += not (c["theta1_le_eq7"].ok and c["eq7_eq_decoding"].ok)
        nonhom += not c["homogeneous_labels"].ok
    return bad == 0 and nonhom == 0, f"|theta1| <= eq7 sum = decoding probability (violations={bad}); non-homogeneous labels={nonhom}"


def theta2_bound(ctx: Context) -> tuple[bool, str]:
    bad = 0
    for inst, col in ctx.random_colorings():
        tr = transforms_of(col)
        for k in (1, 2, 3):
            rep = decompose_theta(inst, col, k)
            bad += not (rep.bound_checks["theta2_le_rankbound"].ok and theta2_bound_check(rep, tr, k))
    # exhaustive rank probabilities over 3x3 matrices
    m = 3
    wrong = 0
    for a in range(1 << (m * m)):
        A = BitMatrix(m, m, a)
        rk = A.rank()
        for b in range(1 << m):
            p = rank_prob(A, BitVector(m, b))
            count = sum((A @ BitVector(m, x)).bits == b for x in range(1 << m))
            wrong += p != Fraction(count, 1 << m) or p not in (0, Fraction(1, 1 << rk))
    return bad == 0 and wrong == 0, f"|theta2| bound for k=1,2,3 (violations={bad}); rank_prob 4096x8 cases (mismatches={wrong})"


def _greedy_independent(h, rng) -> list[int]:
    edges = h.edge_list()
    order = rng.permutation(h.n)
    chosen: set[int] = set()
    for v in order:
        trial = chosen | {int(v)}
        if is_independent(edges, trial):
            chosen = trial
    return sorted(chosen)


def soundness_chain(ctx: Context) -> tuple[bool, str]:
    rng = np.random.default_rng(ctx.seed + 1)
    checked = bad = 0
    for s in SEEDS:
        inst, lab = ctx.instance(s)
        sp = folding_spaces(inst)
        cands = [FoldedColoring.honest(28, sp, lab).indicator(c) for c in (0, 1)]
        h = ctx.hypergraph(s, 28)
        for _ in range(3):
            members = set(_greedy_independent(h, rng))
            tables = [[0] * s_.coset_count for s_ in sp]
            for i, (v, idx) in enumerate(h.vertices):
                if i in members:
                    tables[v][idx] = 1
            cands.append(FoldedColoring.from_tables(28, sp, tables))
        for col in cands:
            for k in (1, 2, 3):
                rep = decompose_theta(inst, col, k)
                if rep.theta != 0:
                    continue
                checked += 1
                lhs = rep.s**8 - rep.decoding_success
                bad += not (lhs <= 0 or le_rank_bound(lhs, k))
    return checked > 0 and bad == 0, f"{checked} (coloring, k) pairs with theta=0; s^8 <= decoding + 2^-(k/2+1) violations={bad}"


def folding_support(ctx: Context) -> tuple[bool, str]:
    rng = np.random.default_rng(ctx.seed + 2)
    folded_bad = 0
    for i in range(50):
        inst, _ = ctx.instance(SEEDS[i % len(SEEDS)])
        col = FoldedColoring.random(28, folding_spaces(inst), rng)
        folded_bad += not all(check_folding_support(col, v) for v in range(inst.n_v))
    caught = 0
    for i in range(10):
        inst, _ = ctx.instance(SEEDS[i])
        sp = folding_spaces(inst)
        full = [rng.integers(0, 2, size=1 << (inst.m * inst.m)) for _ in range(inst.n_v)]
        col = FoldedColoring.unfolded(sp, full)
        caught += not all(check_folding_support(col, v) for v in range(inst.n_v))
    return folded_bad == 0 and caught == 10, f"50 folded pass (failures={folded_bad}); unfolded controls rejected {caught}/10"


def covering(ctx: Context) -> tuple[bool, str]:
    bad = []
    for s in SEEDS:
        inst, lab = ctx.instance(s)
        h = ctx.hypergraph(s, 44)
        col = FoldedColoring.honest(44, folding_spaces(inst), lab)
        colors = h.coloring_vector(col)
        assigns = [[int(c) >> 1 for c in colors], [int(c) & 1 for c in colors]]
        if not is_cover(h.edge_list(), assigns):
            bad.append(s)
    return not bad, f"two honest coordinate assignments cover every 4-query edge on {len(SEEDS)} instances; failures={bad}"


def parameters(ctx: Context) -> tuple[bool, str]:
    import mpmath

    mpmath.mp.dps = 50
    worst = 0.0
    for e10, eps in product((10, 20, 30), (0.001, 0.01)):
        L = 2**e10
        p = compute_parameters(L, eps)
        Lm, em = mpmath.mpf(L), mpmath.mpf(eps)
        want_n = Lm + Lm ** (mpmath.mpf(10) / 4 + 2 * em)
        want_s = -(Lm ** (mpmath.mpf(1) / 8 - 3 * em))
        for got, want in ((p.log2_n_bound, want_n), (p.log2_s_bound, want_s)):
            worst = max(worst, float(abs((mpmath.mpf(got) - want) / want)))
    return worst <= 1e-9, f"n-bound exponent and log2 s-bound at 6 points, worst relative error {worst:.2e} <= 1e-9"


CRITERIA: tuple[tuple[int, str, Callable], ...] = (
    (1, "8-query completeness", completeness_28),
    (2, "4-query completeness", completeness_44),
    (3, "balanced independent color classes", balancedness),
    (4, "theta identity", theta_identity),
    (5, "theta0 >= s^8", theta0_bound),
    (6, "theta1 decoding bound", theta1_bound),
    (7, "theta2 rank bound", theta2_bound),
    (8, "soundness chain", soundness_chain),
    (9, "folding support", folding_support),
    (10, "covering number <= 2", covering),
    (11, "parameter arithmetic", parameters),
)


def run_criterion(number: int, ctx: Context | None = None) -> CriterionResult:
    ctx = ctx or Context()
    for n, title, fn in CRITERIA:
        if n == number:
            return _timed(n, title, fn, ctx)
    raise KeyError(number)


def run_all(ctx: Context | None = None, echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    ctx = ctx or Context()
    out = []
    for n, title, fn in CRITERIA:
        res = _timed(n, title, fn, ctx)
        if echo:
            echo(res.line())
        out.append(res)
    return out
