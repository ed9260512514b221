"""Order-property ranks, pattern combinatorics, multi-orders, and dense
linear order dimension, over finite structures and the symbolic rationals."""

from .logic import (
    And, Atom, Bot, Const, Eq, Exists, Forall, Imp, Not, Or, Rat, Top, Var,
    FALSE, TRUE, DLO_SIGNATURE, DefinableSubset, FiniteStructure,
    PartitionedFormula, Signature, LogicError, ParseError, evaluate,
    free_vars, load_structure, parse_formula, parse_partitioned,
    print_formula, solutions, structure_from_dict, structure_to_dict,
)
from .contexts import BudgetExceededError, Constraint, FiniteContext
from .ranks import (
    GammaWitness, InconsistentTypeError, RankQuery, RankValue,
    gamma_consistent, localized_opd, op_dimension, op_rank, shelah_rank2,
)
from .patterns import (
    ICTPattern, IRDPattern, PatternError, SearchResult, alternation,
    check_ict, check_ird, dp_rank_lower, ird_from_alternation, ird_to_ict,
    search_ict, search_ird,
)
from .multiorder import (
    Embedding, ExtensionSpec, MopReport, MultiCut, MultiOrder,
    MultiOrderError, PictureWitness, amalgamate, as_structure,
    check_embedding, check_mop_witness, enumerate_multicuts,
    extension_property_level, generate_generic, grid_embed, linearize_grid,
    load_multiorder, multiorder_from_dict, multiorder_to_dict,
    one_point_extend, pairwise_comparable, validate,
)
from .dlo import (
    DimensionReport, DloContext, DloError, DloSet, OrderDiagram, dimension,
    evaluate_q, ird_witness_from_dim, order_diagrams, product, qe_dlo,
    sat_sample, satisfiable_q, standard_grid,
)

__version__ = "0.1.0"
