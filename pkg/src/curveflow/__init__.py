"""Curvature flows of convex curves in 2-D space forms.

Numerical engine for the length-preserving inverse curvature flow with a
support-function constraint, plus curve shortening and classical inverse
curvature flow, and a verification harness for the geometric identities and
inequalities the flow certifies: isoperimetric deficit monotonicity, the
Minkowski identity, the Heintze-Karcher gap, weighted total curvature
bounds, and direction-weighted curvature integrals on the hemisphere.
"""

from .curve import CurveFields, RadialCurve, curve_from_csv, curve_to_csv, load_curve, save_curve
from .flow import (
    ConvexityLost,
    FlowConfig,
    FlowFailure,
    FlowStatus,
    FlowTrace,
    MonitorViolation,
    PoleHit,
    SpeedLaw,
    StepUnderflow,
    decay_rate,
    l2_decay_rate,
    limit_radius,
    mode_amplitudes,
    refine_curve,
    rhs,
    run,
    stable_dt,
    step,
)
from .functionals import (
    GeometryReport,
    geometry_report,
    gp_argmax,
    gp_functional,
    gp_gap,
    hk_gap,
    isoperimetric_deficit,
    minkowski_residual,
    monotone_functional,
    nonconvex_margin,
    quad_slack,
    report_to_json,
    total_curvature_margin,
    weighted_margin,
    weighted_phi_kappa,
)
from .generators import (
    CurveSpec,
    SplitMix64,
    generate,
    item_seed,
    sample_convex,
    sample_nonconvex_star,
)
from .spaceform import (
    EUCLIDEAN,
    HYPERBOLIC,
    POLE_MARGIN,
    SPHERICAL,
    SpaceForm,
    embed_unit_sphere,
    inverse_warp,
    warp,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
