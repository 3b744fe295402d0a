"""Metric and combinatorial dimension estimation on dyadic approximations."""

from .dyadic import (
    BudgetExceeded,
    DyadicCover,
    DyadicCube,
    FiberFamily,
    Metric,
    PointSet,
    ScalingCurve,
    components,
    cover_points,
    fibers,
    net_number,
    project,
    refine,
    scaling_curve,
)
from .constructions import (
    SetRecipe,
    affine_image,
    bilipschitz_constants,
    build,
    cantor,
    factorials,
    graph_sample,
    grid,
    product,
    reciprocals,
    rotated_product,
)
from .estimators import (
    AdimScanParams,
    DimEstimate,
    adim_scan,
    adim_via_localization,
    classify_interior,
    default_window,
    family_udim,
    fiber_curves,
    localize,
    point_fibers,
    proj_dim,
    tdim_zero_test,
    udim_fit,
    udim_net,
)
from .sparse import (
    CertificateError,
    SparseCertificate,
    SparsenessProfile,
    ThmBClasses,
    card_bound_check,
    is_delta_sparse,
    sparse_decompose,
    sparseness_profile,
    theoremB_classify,
    uniform_partition_search,
    validate_certificate,
)
from .amplifier import (
    AmplifierTrace,
    ConeGap,
    amplify,
    cone_gap,
    eps_dense,
    project_pairs,
    quotient_image,
    verify_cone_gap,
)

__version__ = "0.1.0"
