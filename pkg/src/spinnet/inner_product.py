"""State evaluation and inner products under the uniform measure.

A spin-network state is a function of one group element per registry
segment: each edge contributes the Wigner matrix of its holonomy (the
ordered product of segment elements along the edge word) and the vertex
intertwiners contract matrix rows into "in" slots and columns into "out"
slots.  Under the uniform measure the segment variables are independent and
Haar distributed, so inner products reduce to one Haar projector per
segment; :func:`exact_inner_product` performs that contraction exactly and
:func:`mc_inner_product` estimates the same integral by sampling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .network_model import InvalidNetworkError, SpinNetwork, common_refinement
from .rep_core import GroupElement, Spin, inverse, multiply, wigner_matrix
from .tensor_engine import (
    FactorNetwork,
    GroupFactor,
    LabeledTensor,
    Leg,
    contract,
    haar_project,
    mc_expectation,
)


@dataclass(frozen=True)
class HolonomyAssignment:
    """One group element per segment id."""

    elements: Mapping

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", dict(self.elements))
        for s, g in self.elements.items():
            if not isinstance(g, GroupElement):
                raise InvalidNetworkError(f"holonomy for segment {s!r} is not a GroupElement")

    def __getitem__(self, segment_id) -> GroupElement:
        return self.elements[segment_id]

    def __contains__(self, segment_id) -> bool:
        return segment_id in self.elements


def _coerce_holonomies(h) -> HolonomyAssignment:
    if isinstance(h, HolonomyAssignment):
        return h
    return HolonomyAssignment(h)


def edge_holonomy(h: HolonomyAssignment, word) -> GroupElement:
    """Ordered product of segment holonomies along a word, rightmost first."""
    total = GroupElement.identity()
    for segment, rev in word:
        g = h[segment]
        if rev:
            g = inverse(g)
        total = multiply(g, total)
    return total


def evaluate(n: SpinNetwork, h) -> complex:
    """Value of the network state at a holonomy assignment.

    Each edge contributes D^j(holonomy); its row index is contracted with the
    "in" slot at the edge's target and its column index with the "out" slot
    at its source.
    """
    h = _coerce_holonomies(h)
    missing = sorted((s for s in n.graph.segments if s not in h), key=str)
    if missing:
        raise InvalidNetworkError(f"holonomy assignment missing segments {missing!r}")
    tensors = []
    pairings = []
    for e in n.edges:
        mat = wigner_matrix(e.spin, edge_holonomy(h, e.word)).entries
        row = ("E", e.id, "r")
        col = ("E", e.id, "c")
        tensors.append(
            LabeledTensor((Leg(row, e.spin, "ket"), Leg(col, e.spin, "bra")), mat)
        )
        pairings.append((row, ("V", e.target, e.id, "in")))
        pairings.append((col, ("V", e.source, e.id, "out")))
    for v, iv in n.vertices.items():
        legs = []
        for (eid, d, spin) in n.vertex_slots(v):
            legs.append(Leg(("V", v, eid, d), spin, "ket" if d == "out" else "bra"))
        tensors.append(LabeledTensor(tuple(legs), iv.components))
    result = contract(tensors, pairings)
    return complex(result.data)


def _side_tensors(n: SpinNetwork, side: str, conjugate: bool):
    """Factors, vertex tensors, and pairings for one (refined) network.

    ``conjugate`` marks the bra side: tensor data is conjugated and leg
    variances flip, matching the conjugated group factors.
    """
    factors = []
    tensors = []
    pairings = []
    for e in n.edges:
        (segment, rev), = e.word
        row = (side, "E", e.id, "r")
        col = (side, "E", e.id, "c")
        factors.append(
            GroupFactor(segment, e.spin, conjugated=conjugate, inverted=rev, row_leg=row, col_leg=col)
        )
        pairings.append((row, (side, "V", e.target, e.id, "in")))
        pairings.append((col, (side, "V", e.source, e.id, "out")))
    for v, iv in n.vertices.items():
        legs = []
        for (eid, d, spin) in n.vertex_slots(v):
            if conjugate:
                variance = "bra" if d == "out" else "ket"
            else:
                variance = "ket" if d == "out" else "bra"
            legs.append(Leg((side, "V", v, eid, d), spin, variance))
        data = iv.components.conj() if conjugate else iv.components
        tensors.append(LabeledTensor(tuple(legs), data))
    return factors, tensors, pairings


def _segment_spins(a: SpinNetwork, b: SpinNetwork) -> dict:
    spins: dict = {}
    for n in (a, b):
        for e in n.edges:
            for s, _ in e.word:
                spins.setdefault(s, []).append(e.spin.twice_j)
    return spins


def structural_zero(a: SpinNetwork, b: SpinNetwork) -> bool:
    """Whether the inner product vanishes identically, before any numerics.

    Integrating a segment's variable kills the product unless the spins
    crossing that segment (from either state) admit an invariant: their
    doubled sum must be even and no single spin may exceed the sum of the
    rest.  A segment traversed with nontrivial spin by only one of two
    disjointly supported networks is the basic case.
    """
    for tjs in _segment_spins(a, b).values():
        if sum(tjs) % 2 == 1 or 2 * max(tjs) > sum(tjs):
            return True
    return False


def _paired_network(a: SpinNetwork, b: SpinNetwork):
    if a.graph.registry != b.graph.registry:
        raise InvalidNetworkError("inner products require a shared segment registry")
    ra, rb = common_refinement(a, b)
    fa, ta, pa = _side_tensors(ra, "A", conjugate=True)
    fb, tb, pb = _side_tensors(rb, "B", conjugate=False)
    return fa + fb, ta + tb, pa + pb


def exact_inner_product(a: SpinNetwork, b: SpinNetwork) -> complex:
    """<a, b> = integral of conj(state_a) * state_b, antilinear in ``a``.

    Computed by common refinement, one Haar projector per segment, and a
    greedy contraction of projectors against vertex tensors.
    """
    if structural_zero(a, b):
        if a.graph.registry != b.graph.registry:
            raise InvalidNetworkError("inner products require a shared segment registry")
        return 0j
    factors, tensors, pairings = _paired_network(a, b)
    by_segment: dict = {}
    for f in factors:
        by_segment.setdefault(f.variable, []).append(f)
    for segment in sorted(by_segment, key=str):
        tensors.append(haar_project(tuple(by_segment[segment])))
    result = contract(tensors, pairings)
    return complex(result.data)


def mc_inner_product(a: SpinNetwork, b: SpinNetwork, n_samples: int, seed: int):
    """Monte Carlo estimate of <a, b>; returns (mean, standard error)."""
    factors, tensors, pairings = _paired_network(a, b)
    net = FactorNetwork(tuple(factors), tuple(tensors), tuple(pairings))
    return mc_expectation(net, n_samples, seed)
