import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from quadpcp.gf2 import BitMatrix, BitVector, adjoint_apply, outer_product
from quadpcp.labelcover import generate_yes_instance
from quadpcp.quadcode import FoldedColoring, folding_spaces
from quadpcp.verifier import (
    Hypergraph,
    LimitExceeded,
    Limits,
    acceptance_probability,
    build_hypergraph,
    check_edge,
    completeness_check,
    independence_theta,
    monochromatic_edges,
    sample_test_28,
    sample_test_44,
    theta_monte_carlo,
)


@pytest.fixture(scope="module")
def inst0():
    return generate_yes_instance(2, 1, 3, 3, 2, 1, seed=0)


@pytest.fixture(scope="module")
def inst6():
    # every block has 4 cosets, so even the full 4-query hypergraph is small
    return generate_yes_instance(2, 1, 3, 3, 2, 1, seed=6)


def _ids(h):
    return {vx: i for i, vx in enumerate(h.vertices)}


# ---------- sampling


def test_offset_identities(inst0):
    inst, _ = inst0
    rng = np.random.default_rng(0)
    e = BitVector.unit(2, 1)
    em = outer_product(e, e)
    for _ in range(10_000):
        R, q = sample_test_28(inst, rng)
        X1, X2, X3, X4, Y1, Y2, Y3, Y4 = q.matrices
        Fp = adjoint_apply(R.F, inst.edges[R.edge_v].pi)
        Fs = adjoint_apply(R.F, inst.edges[R.edge_w].pi)
        assert X3 + X1 == outer_product(R.xbar, R.ybar) + Fp
        assert X4 + X2 == outer_product(R.xbar + e, R.zbar) + Fp
        assert Y3 + Y1 == outer_product(R.xbar2, R.ybar2) + Fs + em
        assert Y4 + Y2 == outer_product(R.xbar2 + e, R.zbar2) + Fs + em
        assert R.edge_v in inst.edges_at_u(R.u) and R.edge_w in inst.edges_at_u(R.u)


def test_forced_zero_vectors(inst0):
    inst, _ = inst0
    rng = np.random.default_rng(1)
    z = BitVector.zero(2)
    for _ in range(200):
        R, q = sample_test_28(inst, rng, xbar=z, zbar=z)
        Fp = adjoint_apply(R.F, inst.edges[R.edge_v].pi)
        assert q.matrices[3] == q.matrices[1] + Fp
    with pytest.raises(TypeError):
        sample_test_28(inst, rng, nonsense=1)


def test_coset_frequencies_uniform(inst0):
    inst, _ = inst0
    sp = folding_spaces(inst)
    rng = np.random.default_rng(2)
    counts = {v: np.zeros(sp[v].coset_count) for v in range(3)}
    for _ in range(100_000):
        _, q = sample_test_28(inst, rng)
        v, i = q.queries[0]
        counts[v][i] += 1
    for v, c in counts.items():
        p = stats.chisquare(c).pvalue
        assert p > 1e-4
        n = c.sum()
        sigma = math.sqrt(n * (1 / len(c)) * (1 - 1 / len(c)))
        assert np.all(np.abs(c - n / len(c)) < 4 * sigma)


def test_pair_queries_project_to_single_queries(inst0):
    inst, _ = inst0
    sp = folding_spaces(inst)
    rng = np.random.default_rng(3)
    for _ in range(500):
        _, q8, pairs = sample_test_44(inst, rng)
        singles = []
        for vx, p in pairs:
            cc = sp[vx].coset_count
            singles += [(vx, p // cc), (vx, p % cc)]
            assert p < cc * cc
        assert tuple(singles) == q8.queries


def test_sampling_deterministic(inst0):
    inst, _ = inst0
    a = [sample_test_44(inst, np.random.default_rng(5))[2] for _ in range(3)]
    assert a[0] == a[1] == a[2]


def test_check_edge():
    assert not check_edge([0] * 8)
    assert check_edge([0] * 7 + [1])
    assert check_edge([(0, 1), (0, 1), (0, 1), (1, 1)])
    assert not check_edge([(1, 0)] * 4)
    with pytest.raises(ValueError):
        check_edge([])


# ---------- exact evaluation


@pytest.mark.parametrize("seed", range(6))
def test_completeness(seed):
    inst, lab = generate_yes_instance(2, 1, 3, 3, 2, 1, seed=seed)
    for mode in (28, 44):
        rep = completeness_check(inst, lab, mode)
        assert rep.acceptance == 1 and rep.value_table_ok


def test_completeness_m3():
    inst, lab = generate_yes_instance(3, 2, 2, 2, 2, 2, seed=1)
    assert completeness_check(inst, lab, 28).acceptance == 1


def test_constant_coloring_rejected_everywhere(inst0):
    inst, _ = inst0
    sp = folding_spaces(inst)
    for mode in (28, 44):
        for c in range(2 if mode == 28 else 4):
            assert acceptance_probability(inst, FoldedColoring.constant(mode, sp, c)) == 0


def test_completeness_rejects_bad_labeling(inst0):
    inst, lab = inst0
    from quadpcp.labelcover import PlantedLabeling

    bad = PlantedLabeling(lab.x, tuple(BitVector.zero(2) for _ in lab.y))
    with pytest.raises(ValueError):
        completeness_check(inst, bad, 28)


def test_theta_examples(inst0):
    inst, lab = inst0
    sp = folding_spaces(inst)
    honest = FoldedColoring.honest(28, sp, lab)
    assert independence_theta(inst, honest.indicator(0)) == 0
    assert independence_theta(inst, honest.indicator(1)) == 0
    assert independence_theta(inst, FoldedColoring.constant(28, sp, 1)) == 1
    with pytest.raises(ValueError):
        independence_theta(inst, FoldedColoring.honest(44, sp, lab))


def _literal_theta(inst, col):
    """Average over every raw randomness outcome, with matrices reduced to cosets."""
    sp = folding_spaces(inst)
    m, r = inst.m, inst.r
    total = Fraction(0)
    vecs = range(1 << m)
    for wt, _u, ev, ew in inst.triples():
        for F in range(1 << (r * r)):
            Fm = BitMatrix(r, r, F)
            sides = []
            for e, shift in ((ev, False), (ew, True)):
                edge = inst.edges[e]
                s = sp[edge.v]
                t = col.tables[edge.v]
                Fp = adjoint_apply(Fm, edge.pi).bits ^ ((1 << (m * m - 1)) if shift else 0)
                per_x = []
                for x in vecs:
                    # sum over X1, X2 (as coset reps) and y, z
                    p1 = sum(
                        t[a] * t[s.index(s.rep_of(a) ^ outer_product(BitVector(m, x), BitVector(m, y)).bits ^ Fp)]
                        for a in range(s.coset_count)
                        for y in vecs
                    )
                    e_m = 1 << (m - 1)
                    p2 = sum(
                        t[a] * t[s.index(s.rep_of(a) ^ outer_product(BitVector(m, x ^ e_m), BitVector(m, z)).bits ^ Fp)]
                        for a in range(s.coset_count)
                        for z in vecs
                    )
                    per_x.append(Fraction(p1 * p2, (s.coset_count << m) ** 2))
                sides.append(sum(per_x) / len(per_x))
            total += wt * sides[0] * sides[1] / (1 << (r * r))
    return total


def test_theta_against_literal_enumeration():
    rng = np.random.default_rng(4)
    for seed in range(3):
        inst, _ = generate_yes_instance(2, 1, 2, 2, 2, 1, seed=seed)
        col = FoldedColoring.random(28, folding_spaces(inst), rng, p=0.7)
        assert independence_theta(inst, col) == _literal_theta(inst, col)


@pytest.mark.parametrize("m,r", [(2, 1), (3, 1), (3, 2)])
def test_theta_against_monte_carlo(m, r):
    inst, _ = generate_yes_instance(m, r, 3, 3, 2, 1, seed=m + r)
    rng = np.random.default_rng(m * 10 + r)
    for mode in (28, 44) if m == 2 else (28,):
        col = FoldedColoring.random(mode, folding_spaces(inst), rng, p=0.8, colors=2)
        exact = independence_theta(inst, col)
        est, se = theta_monte_carlo(inst, col, 20_000, rng)
        assert abs(est - float(exact)) < 5 * se + 1e-3


# ---------- hypergraphs


def test_hypergraph_sizes_and_honest_coloring(inst0, inst6):
    for inst, lab in (inst0, inst6):
        sp = folding_spaces(inst)
        h = build_hypergraph(inst, 28)
        assert h.n == sum(s.coset_count for s in sp)
        assert h.is_valid() and h.collapsed == 0
        col = FoldedColoring.honest(28, sp, lab)
        colors = h.coloring_vector(col)
        assert not monochromatic_edges(h, colors)
        # replay: every edge has honest colors that the predicate accepts
        assert all(check_edge([colors[v] for v in e]) for e in h.edge_list())
    inst, lab = inst6
    h44 = build_hypergraph(inst, 44)
    assert h44.n == sum(s.coset_count**2 for s in folding_spaces(inst))
    col = FoldedColoring.honest(44, folding_spaces(inst), lab)
    assert not h44.monochromatic(h44.coloring_vector(col)).any()


def test_sampled_query_sets_are_edges(inst0):
    inst, _ = inst0
    h = build_hypergraph(inst, 28)
    ids = _ids(h)
    edges = set(h.edge_list())
    rng = np.random.default_rng(7)
    for _ in range(3000):
        _, q = sample_test_28(inst, rng)
        s = tuple(sorted({ids[x] for x in q.queries}))
        assert s in edges or len(s) == 1


def test_sampled_pair_queries_contain_minimal_edges(inst0):
    inst, _ = inst0
    h = build_hypergraph(inst, 44, minimal=True)
    ids = _ids(h)
    minimal = [set(e) for e in h.edge_list()]
    rng = np.random.default_rng(8)
    for _ in range(300):
        _, _, pairs = sample_test_44(inst, rng)
        s = {ids[x] for x in pairs}
        assert any(e <= s for e in minimal)


@pytest.mark.parametrize("mode", [28, 44])
def test_minimal_construction_matches_filtering(inst6, mode):
    inst, _ = inst6
    full = build_hypergraph(inst, mode)
    direct = build_hypergraph(inst, mode, minimal=True)
    assert direct.minimal and direct.edge_list() == full.minimal_edges().edge_list()
    # every full edge contains a minimal one
    mins = [set(e) for e in direct.edge_list()]
    assert all(any(m <= set(e) for m in mins) for e in full.edge_list())


def test_minimal_edges_brute_force():
    edges = [(0, 1), (0, 1, 2), (2, 3, 4), (2, 3), (1, 4, 5), (0, 4, 5, 1)]
    h = Hypergraph(6, 4, [(0, i) for i in range(6)], edges)
    assert h.minimal_edges().edge_list() == [(0, 1), (1, 4, 5), (2, 3)]


def test_theta_zero_iff_no_edge_inside(inst0):
    inst, _ = inst0
    sp = folding_spaces(inst)
    h = build_hypergraph(inst, 28)
    rng = np.random.default_rng(9)
    seen = {True: 0, False: 0}
    for i in range(200):
        col = FoldedColoring.random(28, sp, rng, p=float(rng.uniform(0.1, 0.6)))
        members = np.flatnonzero(h.coloring_vector(col) == 1)
        contains = bool(h.edges_inside(members).any()) if len(members) else False
        theta = independence_theta(inst, col)
        assert (theta == 0) == (not contains)
        seen[contains] += 1
    assert seen[True] and seen[False]


def test_hypergraph_deterministic_and_serializable(inst0):
    inst, _ = inst0
    a, b = build_hypergraph(inst, 28), build_hypergraph(inst, 28)
    assert a.edge_list() == b.edge_list() and a.n == b.n
    d = a.to_dict()
    assert d["schema"] == "quadpcp/hypergraph/1"
    back = Hypergraph.from_dict(d)
    assert back.edge_list() == a.edge_list() and back.vertices == a.vertices


def test_hypergraph_limits(inst0):
    inst, _ = inst0
    with pytest.raises(LimitExceeded) as err:
        build_hypergraph(inst, 44)
    assert err.value.estimate > Limits().max_pairs
    with pytest.raises(LimitExceeded):
        build_hypergraph(inst, 28, Limits(max_pairs=10))
    big, _ = generate_yes_instance(3, 1, 2, 2, 1, 1, seed=0)
    with pytest.raises(LimitExceeded):
        build_hypergraph(big, 28)


def test_hypergraph_rejects_bad_edges():
    with pytest.raises(ValueError):
        Hypergraph(3, 2, [(0, 0), (0, 1), (0, 2)], [(0, 5)])
    h = Hypergraph(3, 2, [(0, 0), (0, 1), (0, 2)], [(1, 1), (0, 2)])
    assert h.edge_list() == [(0, 2), (1,)]
    assert not h.is_valid()
