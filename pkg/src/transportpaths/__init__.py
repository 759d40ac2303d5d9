"""Transport paths between finite atomic measures.

Networks are weighted directed graphs with exact rational weights.  The
package extracts good decompositions into source-to-target curves, improves
them into better decompositions, stairifies their representing matrices and
splits the path into parts compatible with transport maps and plans.
"""

from .core import (
    AtomicMeasure,
    Edge,
    EdgeChain,
    PathCurve,
    Point,
    SignedNodeMeasure,
    TransportNetwork,
    Violation,
    boundary,
    chain_cost_alpha,
    cost_alpha,
    is_on,
    is_subcurrent,
    mass,
    validate_network,
)
from .cycles import CycleCertificate, find_curve, find_curve_on, find_cycle, forest_identity, perturbation_inequality
from .decomposition import (
    CurveMeasure,
    RepresentingMatrix,
    better_decompose,
    candidate_set,
    cell_chain,
    extract_good_decomposition,
    is_better,
    precc_check,
    vanishing_cycle,
    verify_good_decomposition,
)
from .docformat import Document, emit_document, parse_document, parse_matrix_csv, to_dot
from .errors import DomainError, ParseError, PreconditionError, StructuralError, TransportError
from .fixtures import load_fixture
from .splitting import (
    SplitResult,
    TransportMapAssignment,
    TransportPlanMatrix,
    split_map_plan,
    split_single_target,
    split_two_maps,
    verify_compatibility,
)
from .stairs import (
    ElementaryMove,
    StairProfile,
    admissible_moves_witness,
    blockwise_stairify,
    congruent,
    detect_blocks,
    is_stair_shaped,
    rescale_measure,
    stairify,
)

__version__ = "0.1.0"
