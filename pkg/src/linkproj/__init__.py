"""Linking numbers of closed curves and surfaces by Gauss-type integrals,
hyperplane reduction, and integral-free oracles."""

__version__ = "0.1.0"

from ._kernels import backend
from .errors import (
    DimensionMismatch,
    DisjointnessViolation,
    ImmersionFailure,
    InputError,
    LinkingError,
    NonFiniteSample,
    NonGenericProjection,
    NonTransverse,
    OpenContour,
    PointOnBoundary,
    PointOnCurve,
    ToleranceNotReached,
    UnknownFamily,
)
from .geometry import (
    ClosedCurve,
    Expected,
    Hyperplane,
    Isometry,
    PatchManifold,
    Polyline,
    Scene,
    apply_isometry,
    check_disjoint,
    min_distance,
    point_manifold,
    sample_polyline,
    sampled_curve,
)
from .invariants import (
    LinkingResult,
    degree_linking,
    gauss_linking_r3,
    linking_integral,
    sphere_volume,
    swap_sign,
    winding_number,
)
from .oracles import (
    crossing_linking_curves,
    crossing_sign_linking,
    gamma_identity_lhs,
    gamma_identity_rhs,
    iterated_tail_identity,
    raycast_winding,
)
from .quadrature import QuadratureResult, integral_even_decay, integrate_box, refine_until
from .reduction import (
    find_plane_intersections,
    homotopy_invariance_check,
    reduced_linking,
    reduced_terms,
    slice_surface,
)
from .scenes import (
    BUILTIN_SCENES,
    builtin_scene,
    load_scene,
    make_object,
    random_planar_scene,
    save_scene,
    scene_from_dict,
)

__all__ = [name for name in dir() if not name.startswith("_")]
