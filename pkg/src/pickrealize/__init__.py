"""Pick-class membership tests and constructive matrix realizations.

Decides whether a rational matrix-valued function of several complex
variables has PSD imaginary part on the upper poly-half-plane, and builds
the three equivalent block-matrix representations (resolvent, transfer,
linear pencil), each certified by evaluation identities.
"""

from .analysis import (
    CERTIFIED_CAYLEY_INNER,
    CERTIFIED_PICK_VIA_REALIZATION,
    FALSIFIED,
    INCONCLUSIVE,
    PickVerdict,
    cayley_inner_criterion,
    check_cayley_symmetry,
    sample_pick,
)
from .errors import (
    BlockNotFound,
    DegenerateLift,
    DegreeTooLow,
    DimensionMismatch,
    InconsistentCase,
    InputFormatError,
    NonConstantTerminal,
    NotHermitianStructure,
    PickFalsified,
    PickRealizeError,
    PoleProximity,
    ResidualTooLarge,
    ShapeMismatch,
    SingularAtPoint,
    SolverStalled,
    TerminalNotHermitian,
)
from .exact import QQi
from .forms import (
    BlockStructure,
    LftRep,
    PencilRealization,
    SchurRealization,
    TransferRealization,
    eval_realization,
)
from .lifting import LiftResult, lift, restrict_lift, specialize_lift, split_parts
from .poly import (
    MatrixPoly,
    RationalMatrixFunction,
    ScalarPoly,
    block_matrix,
    wronskian,
)
from .realization import (
    CertificateReport,
    certify,
    darlington_step,
    kernel_decomposition,
    permute_reblock,
    realize_cayley_inner,
    realize_pick,
    schur_to_pencil,
    schur_to_transfer,
    superpose,
    transfer_to_schur,
)
from .reduction import (
    ReductionPlan,
    elementary_symmetric,
    reduce_to_multi_affine,
    reduce_variable,
    restore_variables,
)
from .sos import (
    GramProblem,
    SOSFactor,
    factor_gram,
    gram_solve,
    hermitian_to_real_embedding,
    psd_project,
    recombine_embedded,
    sos_factor,
)

__version__ = "0.1.0"
