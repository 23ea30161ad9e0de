"""Madelung transform between density-phase pairs and wave functions on the circle."""

from .field_core import (
    ComplexField,
    Field,
    GridMismatchError,
    PeriodicGrid,
    RealField,
    dealias_product,
    derivative,
    integrate,
)
from .density_geometry import (
    CotangentPoint,
    CotangentTangent,
    DensityFloorError,
    DensityPoint,
    MetricScaling,
)
from .wave_geometry import ProjectiveTangent, WaveFunction
from .madelung_maps import (
    AlgebraElement,
    GroupElement,
    Momentum,
    WindingError,
    madelung_forward,
    madelung_inverse,
    madelung_tangent,
    recover_theta,
)

__version__ = "0.1.0"
