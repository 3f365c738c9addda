"""framecover: a finite-dimensional laboratory for unit-sphere ball
coverings, Schauder-frame dilation, and approximation-property constants
on l_p-style spaces.

Everything is exact-or-certified where a closed form exists and seeded
multistart elsewhere; estimates carry their method and a certified flag.
"""

from .approx import (
    ApproximatingSequence,
    ConstantsReport,
    MultiplierCheck,
    SignSupResult,
    UbapEstimate,
    constants_report,
    from_basis,
    multiplier_bound_check,
    operator_ubap_estimate,
    reflection_defect,
    sign_sup,
    signed_prefix_sup,
)
from .bip import (
    BipInstance,
    BipResult,
    bip_feasible,
    dual_reflection_defect,
    three_point_instance,
)
from .covering import (
    BallCover,
    CoarseNetError,
    CoverCertificate,
    CoverOneResult,
    CoverParams,
    NormMode,
    NoThresholdError,
    SearchOptions,
    cover_one,
    generate_bcp_points,
    verify_cover,
)
from .dilation import (
    DilationReport,
    DilationSpace,
    dilation_norm,
    embed_T,
    norm_estimates,
    prefix_component,
    recover_S,
    sign_component,
    ufdd_constant,
)
from .frames import (
    DilationPlan,
    SchauderFrame,
    block_unconditional_bound,
    dilate_to_frame,
    frame_bound,
    frame_from_json,
    frame_to_json,
    reconstruct,
)
from .opnorm import (
    NormEstimate,
    Operator,
    OpNormOptions,
    TailModel,
    alpha_norm,
    compose,
    identity,
    multistart_lower,
    norming_functional,
    norming_vector,
    op_norm,
    op_norm_oracle,
    transpose_dual,
)
from .rng import stream
from .spaces import (
    SpaceSpec,
    UnitNet,
    Vector,
    dual_space,
    format_spec,
    lp,
    lp_sum,
    pairing,
    parse_spec,
    sample_sphere,
    unit_net,
    vector_norm,
    wlp,
)

__version__ = "0.1.0"

__all__ = [
    "ApproximatingSequence",
    "BallCover",
    "BipInstance",
    "BipResult",
    "CoarseNetError",
    "ConstantsReport",
    "CoverCertificate",
    "CoverOneResult",
    "CoverParams",
    "DilationPlan",
    "DilationReport",
    "DilationSpace",
    "MultiplierCheck",
    "NormEstimate",
    "NormMode",
    "NoThresholdError",
    "Operator",
    "OpNormOptions",
    "SchauderFrame",
    "SearchOptions",
    "SignSupResult",
    "SpaceSpec",
    "TailModel",
    "UbapEstimate",
    "UnitNet",
    "Vector",
    "alpha_norm",
    "bip_feasible",
    "block_unconditional_bound",
    "compose",
    "constants_report",
    "cover_one",
    "dilate_to_frame",
    "dilation_norm",
    "dual_reflection_defect",
    "dual_space",
    "embed_T",
    "format_spec",
    "frame_bound",
    "frame_from_json",
    "frame_to_json",
    "from_basis",
    "generate_bcp_points",
    "identity",
    "lp",
    "lp_sum",
    "multiplier_bound_check",
    "multistart_lower",
    "norm_estimates",
    "norming_functional",
    "norming_vector",
    "op_norm",
    "op_norm_oracle",
    "operator_ubap_estimate",
    "pairing",
    "parse_spec",
    "prefix_component",
    "reconstruct",
    "recover_S",
    "reflection_defect",
    "sample_sphere",
    "sign_component",
    "sign_sup",
    "signed_prefix_sup",
    "stream",
    "three_point_instance",
    "transpose_dual",
    "ufdd_constant",
    "unit_net",
    "vector_norm",
    "verify_cover",
    "wlp",
]
