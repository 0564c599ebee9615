"""Spin-network states over SU(2).

Exact and Monte Carlo inner products of cylinder functions under the
uniform (Haar) measure, canonical network forms, the group-averaged
diffeomorphism-invariant inner product, and the four-curve web states
whose overlaps fall outside the proper spin-network rules.
"""

from .rep_core import (
    Spin,
    GroupElement,
    WignerMatrix,
    Intertwiner,
    multiply,
    inverse,
    haar_sample,
    wigner_matrix,
    wigner_entries,
    clebsch_gordan,
    epsilon,
    invariant_vectors,
    intertwiner_basis,
    transform_intertwiner,
)
from .tensor_engine import (
    Leg,
    LabeledTensor,
    GroupFactor,
    FactorNetwork,
    contract,
    haar_project,
    mc_expectation,
)
from .network_model import (
    InvalidNetworkError,
    SegmentRegistry,
    EmbeddedGraph,
    Interval,
    Circle,
    GraphDecomposition,
    Edge,
    SpinNetwork,
    network,
    decompose,
    common_refinement,
    canonicalize,
)
from .inner_product import (
    HolonomyAssignment,
    edge_holonomy,
    evaluate,
    structural_zero,
    exact_inner_product,
    mc_inner_product,
)
from .diffeo_average import (
    Correspondence,
    enumerate_correspondences,
    transport,
    averaged_inner_product,
    averaged_gram,
)
from .blipweb import (
    ToleranceError,
    BlipAlphabet,
    CurveWord,
    TasselState,
    BumpCurve,
    build_tassel,
    build_phi,
    swap_signs,
    truncated_inner_product,
    stabilized_inner_product,
    observation_one,
    observation_two,
    emit_geometry,
    write_curves_csv,
)
from .documents import (
    DocumentError,
    network_from_document,
    network_to_document,
    holonomies_from_document,
    holonomies_to_document,
    read_network,
    read_holonomies,
    dumps_document,
)

__version__ = "0.1.0"

__all__ = [
    "Spin",
    "GroupElement",
    "WignerMatrix",
    "Intertwiner",
    "multiply",
    "inverse",
    "haar_sample",
    "wigner_matrix",
    "wigner_entries",
    "clebsch_gordan",
    "epsilon",
    "invariant_vectors",
    "intertwiner_basis",
    "transform_intertwiner",
    "Leg",
    "LabeledTensor",
    "GroupFactor",
    "FactorNetwork",
    "contract",
    "haar_project",
    "mc_expectation",
    "InvalidNetworkError",
    "SegmentRegistry",
    "EmbeddedGraph",
    "Interval",
    "Circle",
    "GraphDecomposition",
    "Edge",
    "SpinNetwork",
    "network",
    "decompose",
    "common_refinement",
    "canonicalize",
    "HolonomyAssignment",
    "edge_holonomy",
    "evaluate",
    "structural_zero",
    "exact_inner_product",
    "mc_inner_product",
    "Correspondence",
    "enumerate_correspondences",
    "transport",
    "averaged_inner_product",
    "averaged_gram",
    "ToleranceError",
    "BlipAlphabet",
    "CurveWord",
    "TasselState",
    "BumpCurve",
    "build_tassel",
    "build_phi",
    "swap_signs",
    "truncated_inner_product",
    "stabilized_inner_product",
    "observation_one",
    "observation_two",
    "emit_geometry",
    "write_curves_csv",
    "DocumentError",
    "network_from_document",
    "network_to_document",
    "holonomies_from_document",
    "holonomies_to_document",
    "read_network",
    "read_holonomies",
    "dumps_document",
    "__version__",
]
