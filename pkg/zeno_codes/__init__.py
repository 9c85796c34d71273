from .code_search import (
    Encoding,
    find_code_vector,
    find_encoding,
    find_encoding_with_restarts,
    knill_residual,
    projected_error,
    trivial_embedding,
    weak_residual,
)
from .control import (
    ControlPair,
    TimingSequence,
    build_h1,
    build_h2,
    default_control_pair,
    inverse_sequence,
    sequence_gradient,
    sequence_unitary,
    synthesize,
    synthesize_with_restarts,
    target_increments,
)
from .error_model import ErrorSet, error_count, hamming_feasible, pauli_error_set, random_error_set
from .exceptions import (
    CapExceededError,
    DimensionMismatchError,
    FormatError,
    IndexOutOfRangeError,
    InvalidParameterError,
    NotConvergedError,
    NotDensityMatrixError,
    NotHermitianError,
    ZenoCodeError,
    ZeroDetuningError,
    ZeroNormStateError,
)
from .registry import ChannelRegistry
from .zeno import (
    FieldTrace,
    ZenoConfig,
    ZenoReport,
    ZenoSimulator,
    effective_hamiltonian,
    master_step,
    noise_step,
    random_encoding_gain,
    zeno_run,
)

__all__ = [
    "Encoding",
    "find_code_vector",
    "find_encoding",
    "find_encoding_with_restarts",
    "knill_residual",
    "projected_error",
    "trivial_embedding",
    "weak_residual",
    "ControlPair",
    "TimingSequence",
    "build_h1",
    "build_h2",
    "default_control_pair",
    "inverse_sequence",
    "sequence_gradient",
    "sequence_unitary",
    "synthesize",
    "synthesize_with_restarts",
    "target_increments",
    "ErrorSet",
    "error_count",
    "hamming_feasible",
    "pauli_error_set",
    "random_error_set",
    "CapExceededError",
    "DimensionMismatchError",
    "FormatError",
    "IndexOutOfRangeError",
    "InvalidParameterError",
    "NotConvergedError",
    "NotDensityMatrixError",
    "NotHermitianError",
    "ZenoCodeError",
    "ZeroDetuningError",
    "ZeroNormStateError",
    "ChannelRegistry",
    "FieldTrace",
    "ZenoConfig",
    "ZenoReport",
    "ZenoSimulator",
    "effective_hamiltonian",
    "master_step",
    "noise_step",
    "random_encoding_gain",
    "zeno_run",
]
