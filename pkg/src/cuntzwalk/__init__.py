"""Cuntz-algebra representations from labeled weighted random walks.

Build a row coisometry from a walk on a finite graph, dilate it explicitly to
a truncated Cuntz family, and compute intertwiners/commutants through balanced
minimal invariant sets of the product walk.  A companion module covers
self-affine spectral systems and their Parseval frames of exponentials.
"""

from .walks import (
    LabeledWalk,
    Violation,
    ValidationReport,
    WalkInputError,
    cayley_walk,
    load_walk,
    save_walk,
    validate_walk,
    walk_step,
)
from .coisometry import Coisometry, InvalidWalkError, apply_sigma, build_coisometry
from .products import (
    MinimalSet,
    MinimalSetReport,
    ProductGraph,
    classify_balanced,
    first_arrival_words,
    first_passage,
    irreducibility_verdict,
    is_connected,
    is_separating,
    minimal_invariant_sets,
    orbit,
    product_graph,
)
from .dilation import (
    CuntzReport,
    DilationOperators,
    DilationSpace,
    build_dilation,
    complete_unitary,
    cyclicity_rank,
    first_return_decomposition,
    km_projection,
    verify_cuntz,
    words_up_to,
)
from .intertwiners import (
    IntertwinerSpace,
    commutant_product,
    first_arrival_deviation,
    fixed_point_oracle,
    intertwiner_basis,
    span_residual,
)
from .spectral import (
    AssumptionReport,
    MinSet,
    SpectralSystem,
    check_assumptions,
    export_min_set_walk,
    find_min_sets,
    frame_frequencies,
    mu_hat,
    verify_parseval,
)
from . import fixtures

__version__ = "0.1.0"

__all__ = [
    "LabeledWalk", "Violation", "ValidationReport", "WalkInputError",
    "cayley_walk", "load_walk", "save_walk", "validate_walk", "walk_step",
    "Coisometry", "InvalidWalkError", "apply_sigma", "build_coisometry",
    "MinimalSet", "MinimalSetReport", "ProductGraph", "classify_balanced",
    "first_arrival_words", "first_passage", "irreducibility_verdict",
    "is_connected", "is_separating", "minimal_invariant_sets", "orbit",
    "product_graph",
    "CuntzReport", "DilationOperators", "DilationSpace", "build_dilation",
    "complete_unitary", "cyclicity_rank", "first_return_decomposition",
    "km_projection", "verify_cuntz", "words_up_to",
    "IntertwinerSpace", "commutant_product", "first_arrival_deviation",
    "fixed_point_oracle", "intertwiner_basis", "span_residual",
    "AssumptionReport", "MinSet", "SpectralSystem", "check_assumptions",
    "export_min_set_walk", "find_min_sets", "frame_frequencies", "mu_hat",
    "verify_parseval",
    "fixtures",
]
