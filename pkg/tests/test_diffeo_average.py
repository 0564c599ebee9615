"""Correspondence enumeration, state transport, and the group-averaged
inner product obtained by summing once over each correspondence class."""

import numpy as np
import numpy.testing as npt
import pytest

from spinnet import (
    Spin,
    InvalidNetworkError,
    SegmentRegistry,
    decompose,
    canonicalize,
    inverse,
    evaluate,
    exact_inner_product,
    enumerate_correspondences,
    transport,
    averaged_inner_product,
    averaged_gram,
)
from helpers import (
    loop_network,
    theta_network,
    figure8_network,
    dumbbell_registry,
    brute_correspondence_count,
    random_holonomies,
    random_network,
    reintertwine,
)


@pytest.fixture
def rng():
    return np.random.default_rng(606)


def two_circle_registry():
    reg = SegmentRegistry()
    reg.add_segment("s1", "P", "P")
    reg.add_segment("s2", "Q", "Q")
    return reg


# ---------------------------------------------------------------------------
# enumeration

def test_loop_self_correspondences():
    d = decompose(loop_network(1).graph)
    both = enumerate_correspondences(d, d)
    assert len(both) == 2
    assert sorted(c.circle_map for c in both) == [((0, False),), ((0, True),)]
    op = enumerate_correspondences(d, d, orientation_preserving_only=True)
    assert len(op) == 1
    assert op[0].circle_map == ((0, False),)


def test_theta_self_correspondences():
    d = decompose(theta_network((1, 1, 2)).graph)
    cs = enumerate_correspondences(d, d)
    # 3! interval pairings, times a global end swap
    assert len(cs) == 12
    assert len(enumerate_correspondences(d, d, orientation_preserving_only=True)) == 6
    # every correspondence either fixes both vertices or swaps them, and the
    # interval flips follow the point map
    for c in cs:
        pm = dict(c.point_map)
        assert pm in ({"X": "X", "Y": "Y"}, {"X": "Y", "Y": "X"})
        flips = {f for _, f in c.interval_map}
        assert flips == ({False} if pm["X"] == "X" else {True})


def test_non_diffeomorphic_graphs_have_no_correspondences():
    d_loop = decompose(loop_network(1).graph)
    d_theta = decompose(theta_network((1, 1, 2)).graph)
    assert enumerate_correspondences(d_loop, d_theta) == []
    assert enumerate_correspondences(d_theta, d_loop) == []


ZOO = []


def _zoo():
    if ZOO:
        return ZOO
    reg2 = two_circle_registry()
    reg3 = SegmentRegistry()
    for sid in ("a1", "a2", "a3"):
        reg3.add_segment(sid, f"V{sid}", f"V{sid}")
    regd = dumbbell_registry()
    regmix = SegmentRegistry()
    for sid in ("u1", "u2", "u3"):
        regmix.add_segment(sid, "X", "Y")
    regmix.add_segment("far", "W", "W")
    regchain = SegmentRegistry()
    regchain.add_segment("c1", "A", "B")
    regchain.add_segment("c2", "B", "C")
    regchain.add_segment("hk", "A", "A")
    regchain.add_segment("hk2", "C", "C")
    ZOO.extend(
        [
            ("loop", decompose(reg2.graph(["s1"]))),
            ("two circles", decompose(reg2.graph(["s1", "s2"]))),
            ("three circles", decompose(reg3.graph(["a1", "a2", "a3"]))),
            ("theta", decompose(regmix.graph(["u1", "u2", "u3"]))),
            ("theta + circle", decompose(regmix.graph(["u1", "u2", "u3", "far"]))),
            ("figure eight", decompose(figure8_network().graph)),
            ("dumbbell", decompose(regd.graph(["dl", "dm", "dr"]))),
            ("barbell chain", decompose(regchain.graph(["c1", "c2", "hk", "hk2"]))),
        ]
    )
    return ZOO


def test_enumeration_matches_brute_oracle_on_zoo():
    """Library counts equal the filtered product-space enumeration, for every
    pair of zoo decompositions and both orientation settings."""
    zoo = _zoo()
    for name1, d1 in zoo:
        for name2, d2 in zoo:
            for op_only in (False, True):
                got = len(enumerate_correspondences(d1, d2, op_only))
                want = brute_correspondence_count(d1, d2, op_only)
                assert got == want, (name1, name2, op_only, got, want)


def test_known_zoo_counts():
    zoo = dict(_zoo())
    counts = {
        "two circles": 8,
        "three circles": 48,
        "theta": 12,
        "figure eight": 8,
        "dumbbell": 8,
        "theta + circle": 24,
    }
    for name, want in counts.items():
        d = zoo[name]
        assert len(enumerate_correspondences(d, d)) == want, name


# ---------------------------------------------------------------------------
# transport

def test_transport_identity_is_canonical_form():
    th = theta_network((1, 1, 2))
    d = decompose(th.graph)
    ident = [
        c
        for c in enumerate_correspondences(d, d)
        if all(p == q for p, q in c.point_map)
        and all(t == k and not f for k, (t, f) in enumerate(c.interval_map))
    ]
    assert len(ident) == 1
    assert transport(th, ident[0]) == canonicalize(th)


def test_transport_flip_pulls_back_holonomies(rng):
    """The all-flip self-correspondence inverts every segment traversal, so
    the transported state evaluates like the original at inverted holonomies."""
    th = theta_network((1, 1, 2))
    d = decompose(th.graph)
    allflip = [
        c
        for c in enumerate_correspondences(d, d)
        if all(t == k and f for k, (t, f) in enumerate(c.interval_map))
    ]
    assert len(allflip) == 1
    t = transport(th, allflip[0])
    base = canonicalize(th)
    for _ in range(5):
        h = random_holonomies(rng, th)
        hinv = {s: inverse(g) for s, g in h.items()}
        npt.assert_allclose(evaluate(t, h), evaluate(base, hinv), atol=1e-12)


def test_transport_moves_support_across_circles(rng):
    reg = two_circle_registry()
    a = loop_network(2, registry=reg)
    d1 = decompose(a.graph)
    d2 = decompose(reg.graph(["s2"]))
    cs = enumerate_correspondences(d1, d2)
    assert len(cs) == 2
    t = transport(a, cs[0])
    assert t.graph.segments == frozenset({"s2"})
    g = random_holonomies(rng, t)
    # a loop state only sees its own circle's holonomy
    npt.assert_allclose(evaluate(t, {"s1": g["s2"], "s2": g["s2"]}),
                        evaluate(a, {"s1": g["s2"], "s2": g["s2"]}), atol=1e-12)


def test_transport_preserves_norm_over_all_classes():
    th = theta_network((1, 1, 2))
    d = decompose(th.graph)
    norm = exact_inner_product(th, th)
    for c in enumerate_correspondences(d, d):
        t = transport(th, c)
        npt.assert_allclose(exact_inner_product(t, t), norm, atol=1e-12)


# ---------------------------------------------------------------------------
# averaged inner product

def test_averaged_loop_values():
    lp = loop_network(1)
    npt.assert_allclose(averaged_inner_product(lp, lp), 2.0, atol=1e-12)
    npt.assert_allclose(
        averaged_inner_product(lp, lp, orientation_preserving_only=True),
        1.0,
        atol=1e-12,
    )


def test_averaged_theta_frozen_value():
    th = theta_network((1, 1, 2))
    npt.assert_allclose(averaged_inner_product(th, th), 1.0 / 3.0, atol=1e-12)


def test_averaged_across_disjoint_circles():
    reg = two_circle_registry()
    a = loop_network(2, registry=reg)
    b = loop_network(2, segment="s2", point="Q", registry=reg)
    npt.assert_allclose(averaged_inner_product(a, b), 2.0, atol=1e-12)


def test_averaged_zero_between_distinct_graphs():
    reg = SegmentRegistry()
    for sid in ("u1", "u2", "u3"):
        reg.add_segment(sid, "X", "Y")
    reg.add_segment("far", "W", "W")
    th = theta_network((1, 1, 2), registry=reg)
    lp = loop_network(1, segment="far", point="W", registry=reg)
    assert averaged_inner_product(th, lp) == 0
    d1, d2 = decompose(th.graph), decompose(lp.graph)
    assert enumerate_correspondences(d1, d2) == []


def test_averaged_invariant_under_transport(rng):
    """Averaging makes every correspondence class act trivially."""
    th = theta_network((1, 1, 2))
    other = theta_network(
        (1, 1, 2), coeffs={"X": [1.0 - 0.5j], "Y": [2.0]}, registry=th.graph.registry
    )
    base = averaged_inner_product(th, other)
    d = decompose(other.graph)
    cs = enumerate_correspondences(d, d)
    for k in (1, 5, 9):
        moved = transport(other, cs[k])
        npt.assert_allclose(averaged_inner_product(th, moved), base, atol=1e-10)


def test_averaged_hermitian(rng):
    a = theta_network((1, 1, 2))
    b = theta_network(
        (1, 1, 2), coeffs={"X": [1.0 + 2.0j], "Y": [0.5]}, registry=a.graph.registry
    )
    npt.assert_allclose(
        averaged_inner_product(a, b),
        np.conj(averaged_inner_product(b, a)),
        atol=1e-12,
    )


def test_group_sum_identity_on_theta():
    """Summing plain inner products over all pairs of transported copies
    equals the class count times the averaged inner product."""
    th = theta_network((1, 1, 2))
    d = decompose(th.graph)
    cs = enumerate_correspondences(d, d)
    moved = [transport(th, c) for c in cs]
    total = sum(exact_inner_product(x, y) for x in moved for y in moved)
    npt.assert_allclose(total, len(cs) * averaged_inner_product(th, th), atol=1e-9)


def test_averaged_requires_shared_registry():
    a = loop_network(1)
    regb = SegmentRegistry()
    regb.add_segment("zz", "W", "W")
    b = loop_network(1, segment="zz", point="W", registry=regb)
    with pytest.raises(InvalidNetworkError):
        averaged_inner_product(a, b)


# ---------------------------------------------------------------------------
# Gram matrices

def test_gram_matches_pairwise_entries():
    reg = two_circle_registry()
    a = loop_network(2, registry=reg)
    b = loop_network(2, segment="s2", point="Q", registry=reg)
    gm = averaged_gram([[(1.0, a)], [(1.0, b)]])
    npt.assert_allclose(gm[0, 0], averaged_inner_product(a, a), atol=1e-12)
    npt.assert_allclose(gm[0, 1], averaged_inner_product(a, b), atol=1e-12)
    npt.assert_allclose(gm, gm.conj().T, atol=1e-12)
    assert np.linalg.eigvalsh(gm).min() >= -1e-12


def test_gram_weights_are_sesquilinear():
    lp = loop_network(2)
    gm = averaged_gram([[(2.0 + 1.0j, lp)]])
    npt.assert_allclose(
        gm[0, 0], abs(2.0 + 1.0j) ** 2 * averaged_inner_product(lp, lp), atol=1e-12
    )


def test_gram_null_combination():
    th = theta_network((1, 1, 2))
    gm = averaged_gram([[(1.0, th), (-1.0, th)]])
    npt.assert_allclose(gm, 0.0, atol=1e-12)


def test_gram_of_transported_difference_vanishes(rng):
    """A state minus any transported copy of itself is null for the
    averaged product."""
    n = random_network(rng, motif="theta")
    d = decompose(n.graph)
    cs = enumerate_correspondences(d, d)
    c = cs[int(rng.integers(len(cs)))]
    moved = transport(n, c)
    gm = averaged_gram([[(1.0, n), (-1.0, moved)]])
    npt.assert_allclose(gm[0, 0], 0.0, atol=1e-9)


def test_gram_psd_on_random_family(rng):
    nets = []
    base = random_network(rng, motif="theta")
    nets.append(base)
    nets.append(reintertwine(rng, base))
    lp = loop_network(1, registry=base.graph.registry, segment="extra", point="Z")
    nets.append(lp)
    gm = averaged_gram([[(1.0, n)] for n in nets])
    npt.assert_allclose(gm, gm.conj().T, atol=1e-10)
    assert np.linalg.eigvalsh(gm).min() >= -1e-9
