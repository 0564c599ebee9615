"""Shared builders and independent oracles for the test suite.

Oracles here deliberately avoid the library's own contraction paths:
evaluation by explicit index sums, Monte Carlo by direct quaternion
sampling, correspondence counting by filtering the full assignment
product space.
"""

import itertools

import numpy as np

from spinnet import (
    Spin,
    GroupElement,
    Intertwiner,
    SegmentRegistry,
    Edge,
    network,
    intertwiner_basis,
    wigner_matrix,
    wigner_entries,
    epsilon,
)
from spinnet.inner_product import edge_holonomy


# ---------------------------------------------------------------------------
# motif networks

def loop_network(twice_j=1, segment="s1", point="P", registry=None):
    reg = registry if registry is not None else SegmentRegistry()
    if segment not in reg:
        reg.add_segment(segment, point, point)
    spin = Spin(twice_j)
    marker = Intertwiner(((spin, "out"), (spin, "in")), np.eye(spin.dim))
    return network(reg, [Edge("loop", ((segment, False),), point, point, spin)],
                   {point: marker})


def theta_registry():
    reg = SegmentRegistry()
    for sid in ("u1", "u2", "u3"):
        reg.add_segment(sid, "X", "Y")
    return reg


def theta_network(twice_js=(1, 1, 2), coeffs=None, registry=None):
    """Two trivalent vertices joined by three parallel edges."""
    reg = registry if registry is not None else theta_registry()
    spins = [Spin(tj) for tj in twice_js]
    edges = [Edge(f"e{k}", ((f"u{k + 1}", False),), "X", "Y", s)
             for k, s in enumerate(spins)]
    verts = {}
    for v, direction in (("X", "out"), ("Y", "in")):
        legs = tuple((s, direction) for s in spins)
        basis = intertwiner_basis(legs)
        if not basis:
            raise ValueError(f"no invariants for {twice_js}")
        if coeffs is None:
            verts[v] = basis[0]
        else:
            comps = sum(c * b.components for c, b in zip(coeffs[v], basis))
            verts[v] = Intertwiner(legs, comps)
    return network(reg, edges, verts)


def figure8_network(tja=1, tjb=1, coeff=None, registry=None):
    reg = registry if registry is not None else SegmentRegistry()
    for sid in ("f1", "f2"):
        if sid not in reg:
            reg.add_segment(sid, "O", "O")
    sa, sb = Spin(tja), Spin(tjb)
    edges = [Edge("a", (("f1", False),), "O", "O", sa),
             Edge("b", (("f2", False),), "O", "O", sb)]
    legs = ((sa, "out"), (sa, "in"), (sb, "out"), (sb, "in"))
    basis = intertwiner_basis(legs)
    if coeff is None:
        iv = basis[0]
    else:
        comps = sum(c * b.components for c, b in zip(coeff, basis))
        iv = Intertwiner(legs, comps)
    return network(reg, edges, {"O": iv})


def dumbbell_registry():
    reg = SegmentRegistry()
    reg.add_segment("dl", "P", "P")
    reg.add_segment("dm", "P", "Q")
    reg.add_segment("dr", "Q", "Q")
    return reg


# ---------------------------------------------------------------------------
# random generators

MOTIF_NAMES = ("theta", "figure8", "twogon", "dumbbell", "bouquet3")


def _motif_skeleton(name, reg):
    """Register segments and return (edges-without-intertwiners, vertex ids).

    Spins are sampled by the caller; edge tuples here are
    (id, word, source, target).
    """
    if name == "theta":
        for sid in ("u1", "u2", "u3"):
            reg.add_segment(sid, "X", "Y")
        return [("e0", (("u1", False),), "X", "Y"),
                ("e1", (("u2", False),), "X", "Y"),
                ("e2", (("u3", False),), "X", "Y")]
    if name == "figure8":
        reg.add_segment("f1", "O", "O")
        reg.add_segment("f2", "O", "O")
        return [("a", (("f1", False),), "O", "O"),
                ("b", (("f2", False),), "O", "O")]
    if name == "twogon":
        reg.add_segment("g1", "A", "B")
        reg.add_segment("g2", "A", "B")
        return [("p", (("g1", False),), "A", "B"),
                ("q", (("g2", False),), "A", "B")]
    if name == "dumbbell":
        reg.add_segment("dl", "P", "P")
        reg.add_segment("dm", "P", "Q")
        reg.add_segment("dr", "Q", "Q")
        return [("l", (("dl", False),), "P", "P"),
                ("m", (("dm", False),), "P", "Q"),
                ("r", (("dr", False),), "Q", "Q")]
    if name == "bouquet3":
        for sid in ("w1", "w2", "w3"):
            reg.add_segment(sid, "O", "O")
        return [("a", (("w1", False),), "O", "O"),
                ("b", (("w2", False),), "O", "O"),
                ("c", (("w3", False),), "O", "O")]
    raise ValueError(name)


def _slot_legs(edges):
    slots = {}
    for e in edges:
        slots.setdefault(e.source, []).append((e.spin, "out"))
        slots.setdefault(e.target, []).append((e.spin, "in"))
    return slots


def random_intertwiner(rng, legs):
    basis = intertwiner_basis(legs)
    if not basis:
        return None
    w = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    comps = sum(c * b.components for c, b in zip(w, basis))
    return Intertwiner(legs, comps)


def random_network(rng, motif=None, max_twice_j=2, registry=None):
    """A random invariant-vertex network on one of the motif graphs.

    Spins are resampled until every vertex admits an invariant; fixed
    seeds make the draws reproducible.
    """
    name = motif if motif is not None else MOTIF_NAMES[rng.integers(len(MOTIF_NAMES))]
    reg = registry if registry is not None else SegmentRegistry()
    skeleton = _motif_skeleton(name, reg)
    for _ in range(200):
        edges = [Edge(eid, word, src, tgt, Spin(int(rng.integers(1, max_twice_j + 1))))
                 for eid, word, src, tgt in skeleton]
        verts = {}
        for v, legs in _slot_legs(edges).items():
            iv = random_intertwiner(rng, tuple(legs))
            if iv is None:
                break
            verts[v] = iv
        else:
            return network(reg, edges, verts)
    raise RuntimeError(f"could not spin-match motif {name}")


def reintertwine(rng, net):
    """Same graph and spins, fresh random invariant intertwiners."""
    verts = {v: random_intertwiner(rng, iv.leg_spins)
             for v, iv in net.vertices.items()}
    return network(net.graph.registry, list(net.edges), verts)


def random_holonomies(rng, net):
    return {sid: haar_element(rng) for sid in sorted(net.graph.segments, key=str)}


def haar_element(rng):
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    return GroupElement(*q)


def identity_holonomies(net):
    return {sid: GroupElement.identity() for sid in net.graph.segments}


# ---------------------------------------------------------------------------
# evaluation oracle: explicit index sums, no tensor engine

def naive_evaluate(net, holonomies):
    """Sum over all edge matrix indices of products of Wigner entries and
    intertwiner components; exponential cost, tiny networks only."""
    mats = {}
    for e in net.edges:
        g = edge_holonomy(holonomies, e.word)
        mats[e.id] = wigner_matrix(e.spin, g).entries
    slot_index = {}
    for e in net.edges:
        slot_index.setdefault(e.source, []).append((e.id, "out"))
        slot_index.setdefault(e.target, []).append((e.id, "in"))
    ranges = [range(e.spin.dim) for e in net.edges for _ in "rc"]
    total = 0.0 + 0.0j
    for assignment in itertools.product(*ranges):
        rows = {}
        cols = {}
        for k, e in enumerate(net.edges):
            rows[e.id] = assignment[2 * k]
            cols[e.id] = assignment[2 * k + 1]
        term = 1.0 + 0.0j
        for e in net.edges:
            term *= mats[e.id][rows[e.id], cols[e.id]]
        for v, iv in net.vertices.items():
            idx = tuple(cols[eid] if d == "out" else rows[eid]
                        for eid, d in slot_index[v])
            term *= iv.components[idx]
        total += term
    return total


def brute_mc_inner_product(bra, ket, n_samples, seed, use_naive=False):
    """Monte Carlo over raw quaternion draws, one sample at a time batched
    by segment; independent of the engine's stream and chunking."""
    from spinnet.inner_product import evaluate

    rng = np.random.default_rng(seed)
    segs = sorted(set(bra.graph.segments) | set(ket.graph.segments), key=str)
    value = naive_evaluate if use_naive else evaluate
    total = 0.0 + 0.0j
    sq = 0.0
    for _ in range(n_samples):
        h = {sid: haar_element(rng) for sid in segs}
        term = np.conj(value(bra, h)) * value(ket, h)
        total += term
        sq += abs(term) ** 2
    mean = total / n_samples
    var = max(sq / n_samples - abs(mean) ** 2, 0.0)
    return mean, np.sqrt(var / n_samples)


def mc_character_product(twice_js, n_samples, seed):
    """Monte Carlo estimate of the Haar integral of a product of characters
    (the invariant-subspace dimension), with its standard error."""
    rng = np.random.default_rng(seed)
    q = rng.standard_normal((n_samples, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    prod = np.ones(n_samples)
    counts = {tj: tuple(twice_js).count(tj) for tj in set(twice_js)}
    for tj, k in counts.items():
        chi = np.trace(wigner_entries(tj, q), axis1=-2, axis2=-1).real
        prod = prod * chi ** k
    mean = prod.mean()
    stderr = prod.std(ddof=1) / np.sqrt(n_samples)
    return mean, stderr


# ---------------------------------------------------------------------------
# correspondence-count oracle: filter the full assignment product space

def brute_correspondence_count(d1, d2, orientation_preserving_only=False):
    if len(d1.intervals) != len(d2.intervals) or len(d1.circles) != len(d2.circles):
        return 0
    flips = (False,) if orientation_preserving_only else (False, True)
    n_int, n_circ = len(d1.intervals), len(d2.circles)
    count = 0
    for iassign in itertools.product(
            itertools.product(range(n_int), flips), repeat=n_int):
        if len({t for t, _ in iassign}) != n_int:
            continue
        pmap = {}
        ok = True
        for src, (tgt_idx, flip) in zip(d1.intervals, iassign):
            tgt = d2.intervals[tgt_idx]
            pairs = ((src.start, tgt.end), (src.end, tgt.start)) if flip \
                else ((src.start, tgt.start), (src.end, tgt.end))
            for p, q in pairs:
                if pmap.setdefault(p, q) != q:
                    ok = False
        if not ok:
            continue
        if set(pmap) != set(d1.points):
            continue
        values = list(pmap.values())
        if len(set(values)) != len(values) or set(values) != set(d2.points):
            continue
        for cassign in itertools.product(
                itertools.product(range(n_circ), flips), repeat=n_circ):
            if len({t for t, _ in cassign}) == n_circ:
                count += 1
    return count


# ---------------------------------------------------------------------------
# misc

def character(twice_j, g):
    """Closed form for the SU(2) character, from the rotation angle."""
    w = np.clip(g.w, -1.0, 1.0)
    half = np.arccos(w)
    if abs(np.sin(half)) < 1e-8:
        sign = 1.0 if w > 0 else (-1.0) ** twice_j
        return sign * (twice_j + 1)
    return np.sin((twice_j + 1) * half) / np.sin(half)
