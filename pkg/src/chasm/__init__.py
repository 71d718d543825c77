"""Depth-reduction toolkit for arithmetic circuits.

Circuits are lowered through weakly-skew form and arithmetic branching
programs to matrix powering, which yields depth-4 sum-product circuits and
formulas, depth-2D circuits, boolean constant-depth circuits, and
polylogarithmic-depth circuits.  Every pass is verified against an exact
sparse-polynomial oracle and every claimed size/depth/weight bound is
re-measured and reported.
"""

from .abp import Abp, AbpStats, LabeledMatrix, abp_stats, abp_to_matrix, emit_abp, parse_abp, trim, zero_abp
from .circuit import (
    Circuit,
    CircuitBuilder,
    CircuitStats,
    Gate,
    Shape,
    check_shape,
    circuit_stats,
    emit_circuit,
    formal_degree,
    normalize_leaf_fanout,
    parse_circuit,
)
from .corpus import CorpusSpec, gen_corpus
from .errors import (
    AddInputCondition,
    CapExceeded,
    ChasmError,
    DegreeOverflow,
    LayerNotSkew,
    NotTrimmed,
    NotWeaklySkew,
    ParseError,
    PreconditionViolated,
    StructureMismatch,
)
from .passes.depth import (
    PipelineConfig,
    abp_to_depth4,
    abp_to_depth_2delta,
    abp_to_logdepth,
    circuit_to_abp,
    reduce_boolean,
    reduce_to_depth4,
    reduce_to_polylog,
    run_pipeline,
    to_weakly_skew,
    weakly_skew_to_abp,
)
from .passes.normalize import (
    binarize_multiplications,
    collapse_additions,
    eliminate_subtractions,
    homogenize,
)
from .poly import SparsePoly, equiv_exact, equiv_random, expand_to_poly, monomial_cap
from .report import PassReport, bound_report
from .semiring import (
    BOOLEAN,
    INTEGERS,
    NATURALS,
    SemiringSpec,
    eval_semiring,
    modular_ring,
    truth_table,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
