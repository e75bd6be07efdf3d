import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadpcp.gf2 import BitMatrix, BitVector, ShapeError, dot, outer_bits
from quadpcp.labelcover import (
    Edge,
    LabelCoverInstance,
    MatrixAssignment,
    PlantedLabeling,
    check_matrix_assignment,
    compute_parameters,
    generate_yes_instance,
    instance_from_dict,
    instance_to_dict,
    smoothness_estimate,
    verify_labeling,
)

profiles = st.tuples(
    st.integers(1, 4),  # m
    st.integers(1, 4),  # r
    st.integers(1, 4),  # n_u
    st.integers(1, 4),  # n_v
    st.integers(1, 3),  # degree
    st.integers(0, 3),  # constraints
    st.integers(0, 10_000),  # seed
).filter(lambda p: p[1] <= p[0] and p[4] <= p[3] and p[2] * p[4] >= p[3])


@settings(max_examples=60, deadline=None)
@given(profiles)
def test_generated_instances_are_yes_instances(p):
    m, r, nu, nv, d, c, seed = p
    inst, lab = generate_yes_instance(m, r, nu, nv, d, c, seed=seed)
    rep = verify_labeling(inst, lab)
    assert rep.ok and rep.satisfied_fraction == 1
    assert all(e.pi.preserves_symmetry() for e in inst.edges)
    for v, y in enumerate(lab.y):
        assert y[m - 1] == 1
        yy = outer_bits(y.bits, y.bits, m)
        assert all(dot(cc, yy) == 0 for cc in inst.constraints[v])
    assert all(not x.is_zero() for x in lab.x)
    assert all(inst.edges_at_u(u) for u in range(nu))
    assert all(inst.edges_at_v(v) for v in range(nv))
    assert all(len(inst.edges_at_u(u)) == d for u in range(nu))
    assert check_matrix_assignment(inst, MatrixAssignment.from_labeling(lab), 1).all_valid


def test_small_instance_constraints_hold():
    inst, lab = generate_yes_instance(2, 1, 2, 2, 2, 1, seed=4)
    for v in range(2):
        y = lab.y[v].bits
        yy = BitMatrix(2, 2, outer_bits(y, y, 2))
        for c in inst.constraints[v]:
            # evaluate <c, y (x) y> entry by entry
            cm = BitMatrix(2, 2, c)
            assert sum(cm[i, j] * yy[i, j] for i in range(2) for j in range(2)) % 2 == 0


def test_generation_is_deterministic():
    a = generate_yes_instance(3, 2, 3, 4, 2, 2, seed=9)
    b = generate_yes_instance(3, 2, 3, 4, 2, 2, seed=9)
    assert a == b
    assert generate_yes_instance(3, 2, 3, 4, 2, 2, seed=10) != a


def test_generation_rejects_bad_parameters():
    with pytest.raises(ValueError):
        generate_yes_instance(2, 3, 2, 2, 1)
    with pytest.raises(ValueError):
        generate_yes_instance(2, 1, 2, 2, 0)
    with pytest.raises(ValueError):
        generate_yes_instance(2, 1, 2, 2, 3)  # degree above |V|
    with pytest.raises(ValueError):
        generate_yes_instance(2, 1, 1, 3, 1)  # one edge cannot reach three vertices


def test_flipped_label_breaks_edges():
    inst, lab = generate_yes_instance(3, 2, 3, 3, 3, 1, seed=1)
    ys = list(lab.y)
    ys[0] = ys[0] + BitVector.unit(3, 0)
    bad = PlantedLabeling(lab.x, tuple(ys))
    rep = verify_labeling(inst, bad)
    # recompute per edge
    want = [
        i
        for i, e in enumerate(inst.edges)
        if e.pi.apply_bits(outer_bits(bad.y[e.v].bits, bad.y[e.v].bits, 3))
        != outer_bits(bad.x[e.u].bits, bad.x[e.u].bits, 2)
    ]
    assert rep.unsatisfied_edges == want
    assert rep.satisfied_fraction == Fraction(len(inst.edges) - len(want), len(inst.edges))
    assert rep.satisfied_fraction < 1


def test_zero_labels_violate_last_coordinate():
    inst, lab = generate_yes_instance(2, 1, 2, 2, 2, 1, seed=0)
    zero = PlantedLabeling(lab.x, tuple(BitVector.zero(2) for _ in lab.y))
    rep = verify_labeling(inst, zero)
    assert rep.last_coordinate_violations == [0, 1]
    assert not rep.ok
    with pytest.raises(ShapeError):
        verify_labeling(inst, PlantedLabeling(lab.x, lab.y[:1]))


def test_matrix_assignment_flags():
    inst, lab = generate_yes_instance(3, 2, 3, 3, 2, 1, seed=2)
    A = MatrixAssignment.from_labeling(lab)
    rep = check_matrix_assignment(inst, A, 1)
    assert rep.all_valid and rep.satisfied_fraction == 1
    zeroed = MatrixAssignment(A.mu, tuple(BitMatrix.zero(3) for _ in A.mv))
    rep = check_matrix_assignment(inst, zeroed, 1)
    assert not any(f["corner_one"] for f in rep.v_flags)


def test_matrix_assignment_random_rank_two():
    inst, lab = generate_yes_instance(3, 2, 3, 3, 2, 1, seed=5)
    rng = np.random.default_rng(0)
    mv = []
    for _ in range(inst.n_v):
        while True:
            a, b = (BitVector(3, int(rng.integers(1, 8))) for _ in range(2))
            M = BitMatrix(3, 3, outer_bits(a.bits, b.bits, 3) ^ outer_bits(b.bits, a.bits, 3))
            if M.rank() == 2:
                break
        mv.append(M)
    A = MatrixAssignment(MatrixAssignment.from_labeling(lab).mu, tuple(mv))
    rep = check_matrix_assignment(inst, A, 2)
    manual = sum(1 for e in inst.edges if e.pi(mv[e.v]) == A.mu[e.u]) / len(inst.edges)
    assert float(rep.satisfied_fraction) == manual
    assert all(f["symmetric"] and f["rank_le_k"] for f in rep.v_flags)


def test_smoothness():
    inst, lab = generate_yes_instance(3, 2, 4, 3, 2, 1, seed=6)
    for v, y in enumerate(lab.y):
        M = BitMatrix(3, 3, outer_bits(y.bits, y.bits, 3))
        assert smoothness_estimate(inst, v, M) == 0
    rng = np.random.default_rng(1)
    for _ in range(20):
        v = int(rng.integers(0, 3))
        x = int(rng.integers(1, 8))
        M = BitMatrix(3, 3, outer_bits(x, x, 3))
        es = inst.edges_at_v(v)
        manual = sum(inst.edges[i].pi(M).is_zero() for i in es)
        assert smoothness_estimate(inst, v, M) == Fraction(manual, len(es))
    with pytest.raises(ValueError):
        smoothness_estimate(inst, 0, BitMatrix.zero(3))
    with pytest.raises(ValueError):
        smoothness_estimate(inst, 0, BitMatrix.from_rows([[0, 1, 0], [0, 0, 0], [0, 0, 0]]))


def test_single_edge_vertex_smoothness():
    inst, lab = generate_yes_instance(2, 1, 1, 1, 1, 0, seed=3)
    M = BitMatrix(2, 2, outer_bits(lab.y[0].bits, lab.y[0].bits, 2))
    assert smoothness_estimate(inst, 0, M) == 0


def test_instance_validation():
    inst, _ = generate_yes_instance(2, 1, 2, 2, 1, 1, seed=0)
    with pytest.raises(ValueError):
        # vertex 1 on the U side has no edge
        LabelCoverInstance(2, 1, 2, 2, inst.edges[:1], inst.constraints)
    with pytest.raises((ValueError, ShapeError)):
        LabelCoverInstance(2, 1, 2, 2, inst.edges + (Edge(0, 5, inst.edges[0].pi),), inst.constraints)


def test_instance_json_round_trip():
    inst, lab = generate_yes_instance(3, 2, 3, 3, 2, 2, seed=8)
    d = instance_to_dict(inst, lab)
    assert d["schema"] == "quadpcp/instance/1"
    assert "coset_ranking" in d
    back, planted = instance_from_dict(d)
    assert back == inst and planted == lab
    d["schema"] = "other"
    with pytest.raises(ValueError):
        instance_from_dict(d)


# ---------- parameters


def _mp_params(L, eps):
    mpmath.mp.dps = 60
    L, e = mpmath.mpf(L), mpmath.mpf(eps)
    return {
        "k": L ** (mpmath.mpf(1) / 8 - 2 * e),
        "log2_delta": -(L ** (mpmath.mpf(1) / 4 - 2 * e)),
        "m_bound": mpmath.sqrt(L ** (mpmath.mpf(10) / 4 + 2 * e)),
        "log2_n_bound": L + L ** (mpmath.mpf(10) / 4 + 2 * e),
        "log2_s_bound": -(L ** (mpmath.mpf(1) / 8 - 3 * e)),
    }


@pytest.mark.parametrize("e10", [10, 20, 30])
@pytest.mark.parametrize("eps", [0.001, 0.01, 0.04])
def test_parameters_against_high_precision(e10, eps):
    p = compute_parameters(2**e10, eps)
    for name, want in _mp_params(2**e10, eps).items():
        got = getattr(p, name)
        assert abs((mpmath.mpf(got) - want) / want) < 1e-9, name


def test_parameters_monotone():
    prev = None
    for e10 in range(4, 40, 3):
        p = compute_parameters(2**e10, 0.01)
        if prev:
            assert p.k > prev.k and p.log2_delta < prev.log2_delta and p.log2_s_bound < prev.log2_s_bound
        prev = p


def test_parameters_reject_bad_input():
    for args in ((0.5, 0.01), (100, 0.0), (100, 0.05), (100, -1)):
        with pytest.raises(ValueError):
            compute_parameters(*args)


def test_lemma_relation_needs_huge_n():
    # s^8 >= delta + 2^-(k/2+1) is false at log N = 2^20 (eps = 0.01): 8 log2 s is
    # about -29.9 while 2^-(k/2+1) alone is about 2^-3.1
    p = compute_parameters(2**20, 0.01)
    assert not p.lemma_consistent()
    assert 8 * p.log2_s_bound < -(p.k / 2 + 1)
    # it switches on only around log2 log N ~ 400 at this epsilon
    assert not compute_parameters(2.0**300, 0.01).lemma_consistent()
    assert compute_parameters(2.0**400, 0.01).lemma_consistent()


def test_outer_bounds_are_advisory():
    p = compute_parameters(2**20, 0.01)
    assert p.outer_pcp_bounds() == {"delta_le_2^-L^(1/3)": False, "k_ge_L^(1/9)": False}
    # k >= L^(1/9) holds for small epsilon once L is large
    q = compute_parameters(2.0**200, 0.001)
    assert q.outer_pcp_bounds()["k_ge_L^(1/9)"]


def test_parameters_saturate_instead_of_overflowing():
    p = compute_parameters(2.0**1000, 0.01)
    assert math.isinf(p.log2_n_bound)
