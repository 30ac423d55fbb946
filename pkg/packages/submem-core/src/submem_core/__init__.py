"""submem-core: associative memory over a sparse-constraint subspace.

Transport-agnostic library. Messages live in ``M = null(B)`` for a sparse random
constraint matrix B; the learning phase recovers B from samples of M, the recall phase
corrects sparse errors through B's expander structure. No logging, no configuration, no
server imports; the app on top consumes it in-process.
"""

from submem_core.errors import (
    DegenerateParameters,
    EmptyInputError,
    FormatError,
    InstanceTooLarge,
    InsufficientSamples,
    LearningFailed,
    NoSparseBasis,
    ReportWriteError,
    SubmemError,
    TrivialDataset,
)
from submem_core.learn import (
    ERSpUDConfig,
    LearnReport,
    canonicalize_row,
    er_spud,
    exhaustive_sparse_basis,
    learn_constraints,
    match_rows,
)
from submem_core.linalg import null_space, orthogonal_complement_from_samples, rank
from submem_core.lp import L1RowProblem, LPSolution, solve_l1_row
from submem_core.model import (
    SparseConstraintMatrix,
    WeightLaw,
    enumerate_binary_nullspace,
    generate_B,
    generate_error,
    sample_dataset,
    sample_until_stable,
)
from submem_core.recall import (
    DecoderConfig,
    ExpansionReport,
    check_expansion,
    decode,
    expansion_capacity,
    expansion_failure_bound,
    iter_decode,
    recall,
    syndrome,
)
from submem_core.types import TolerancePolicy

__all__ = [
    "DecoderConfig",
    "DegenerateParameters",
    "ERSpUDConfig",
    "EmptyInputError",
    "ExpansionReport",
    "FormatError",
    "InstanceTooLarge",
    "InsufficientSamples",
    "L1RowProblem",
    "LPSolution",
    "LearnReport",
    "LearningFailed",
    "NoSparseBasis",
    "ReportWriteError",
    "SparseConstraintMatrix",
    "SubmemError",
    "TolerancePolicy",
    "TrivialDataset",
    "WeightLaw",
    "canonicalize_row",
    "check_expansion",
    "decode",
    "enumerate_binary_nullspace",
    "er_spud",
    "exhaustive_sparse_basis",
    "expansion_capacity",
    "expansion_failure_bound",
    "generate_B",
    "generate_error",
    "iter_decode",
    "learn_constraints",
    "match_rows",
    "null_space",
    "orthogonal_complement_from_samples",
    "rank",
    "recall",
    "sample_dataset",
    "sample_until_stable",
    "solve_l1_row",
    "syndrome",
]

__version__ = "0.1.0"
