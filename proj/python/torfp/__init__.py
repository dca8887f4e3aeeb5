"""Fixed-point Torontonian toolkit.

Exact-arithmetic evaluation of the Torontonian and click-pattern
probabilities for threshold-detector Gaussian boson sampling, plus the
supporting pieces: synthetic instance generation, quantized matrix
serialization, subset enumeration and work partitioning, precision-budget
selection, operation-count reporting, and an optimal dual-pipeline
instruction scheduler.
"""

from ._core import (
    InputMatrix,
    InstructionDAG,
    TorfpError,
    binom,
    check_symmetries,
    dequantize,
    emit_dag,
    expand_dag,
    extract_submatrix,
    factorization_op_count,
    from_dense,
    generate_instance,
    get_kth_mask,
    get_next_mask,
    load_dag,
    load_matrix,
    partition,
    probability,
    probability_reference,
    quantize,
    schedule,
    select_precision,
    simulate,
    torontonian,
    torontonian_reference,
    total_op_count,
)

__all__ = [
    "InputMatrix",
    "InstructionDAG",
    "TorfpError",
    "binom",
    "check_symmetries",
    "dequantize",
    "emit_dag",
    "expand_dag",
    "extract_submatrix",
    "factorization_op_count",
    "from_dense",
    "generate_instance",
    "get_kth_mask",
    "get_next_mask",
    "load_dag",
    "load_matrix",
    "partition",
    "probability",
    "probability_reference",
    "quantize",
    "schedule",
    "select_precision",
    "simulate",
    "torontonian",
    "torontonian_reference",
    "total_op_count",
]

__version__ = "0.1.0"
