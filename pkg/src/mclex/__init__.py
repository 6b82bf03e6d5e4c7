"""Decision procedure and classifier for matrix properties of left exact
categories: implication decisions with lex-tableau certificates, and
computation of the posets of matrix classes within a dimension box."""

from .matrices import (
    BadShapeError,
    EmptyMatrixError,
    EntryOutOfRangeError,
    LinkagePartition,
    Matrix,
    MclexError,
    ParseError,
    SameRowError,
    Triviality,
    TrivialityReport,
    canonical_key,
    empty_matrix,
    format_matrix,
    format_matrix_set,
    from_grid,
    is_doubly_lexi_ordered,
    linkage_classes,
    make_matrix,
    matrix_from_obj,
    matrix_to_obj,
    normalize,
    parse_matrix,
    parse_matrix_set,
    product,
    triviality,
)
from .decision import (
    ColumnSet,
    DerivationStep,
    FailureKind,
    FailureWitness,
    GuardExceededError,
    LexTableau,
    MatrixSet,
    RowInterpretation,
    ShortCircuit,
    TrivialPremiseError,
    Verdict,
    check_tableau,
    closure,
    col,
    equivalent,
    expand_once,
    implies,
    implies_bool,
    oracle_functional,
    oracle_implies,
    tableau_from_obj,
    tableau_to_obj,
    verify_tableau,
)
from .poset import (
    ClassPoset,
    DecisionCache,
    EnumerationFilter,
    MatrixClass,
    NotAPartialOrderError,
    box_intersect,
    classify,
    classify_box,
    count_table,
    enumerate_matrices,
    hasse_reduce,
    poset_from_obj,
    poset_to_dot,
    poset_to_obj,
)

__all__ = [name for name in dir() if not name.startswith("_")]
