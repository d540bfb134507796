"""Low-rank quaternion matrix completion with transform-domain sparsity.

Color images are encoded as pure quaternion matrices and recovered from
partial observations by a truncated-nuclear-norm model with an l1 penalty
in the quaternion DCT domain, optimized by a two-stage ADMM.
"""

from .imaging import (
    ObservationMask,
    load_image,
    load_mask,
    psnr,
    quaternion_to_rgb,
    random_mask,
    rgb_to_quaternion,
    save_image,
    save_mask,
    ssim,
    text_mask,
)
from .qdct import TransformAxis, TransformPlan, default_axis, iqdct_l, qdct_l
from .qsvd import (
    QSVDFactors,
    TruncatedFactors,
    nuclear_norm,
    qsvd,
    qtnn,
    singular_values,
    soft_threshold,
    svt,
    truncated_factors,
)
from .quat import (
    Quaternion,
    QuaternionMatrix,
    conj_transpose,
    entry_moduli,
    frobenius_norm,
    from_adjoint,
    qmat_mul,
    qmul,
    qtrace,
    randn_qmatrix,
    real_inner,
    to_adjoint,
)
from .solver import (
    CompletionProblem,
    RecoveryResult,
    SolverConfig,
    SolverState,
    inner_solve,
    lrqr_sr,
    objective,
    qtnn_baseline,
)

__version__ = "0.1.0"
