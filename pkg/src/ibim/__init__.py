"""Implicit boundary integral quadrature on rigidly transformed lattices."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DegeneratePolygon,
    FocalPointReached,
    IBIMError,
    InvalidWidth,
    NoConvergence,
    NonUniqueProjection,
    OutsideBand,
    RotationUnsupported,
    WidthExceedsReach,
)
from .geometry import (  # noqa: E402
    Arc,
    Capsule,
    Circle,
    QuarticConvex,
    Segment,
    Semicircle,
    Sphere,
    StarCurve,
    curvature,
    jacobian,
    project,
    signed_distance,
)
from .lattice import LatticeFrame, enumerate_tube, sample_frame  # noqa: E402
from .quadrature import ibim_integrate, quadrature_error  # noqa: E402
from .weights import WeightFunction, eval_weight, moment  # noqa: E402
