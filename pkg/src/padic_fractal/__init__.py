"""Fractal images of base-p digit expansions.

Maps base-p numbers into the complex plane and the base-p solenoid into
a solid torus, certifies when the maps are embeddings, and verifies the
scaling, measure, dimension, and flow structure numerically.
"""

from .analysis import (
    DimensionEstimate,
    MomentResult,
    box_dimension,
    measure_consistency,
    metric_divergence,
    moment,
    tuple_coefficient,
)
from .complex_map import (
    EmbeddingCertificate,
    MapParams,
    PlaneMap,
    PointCloud2D,
    delta_certificate,
    delta_lower,
    rotate_digits,
    s_zero,
)
from .padic import PAdic, PrecisionError, expand, from_int, residues
from .render import PRESETS, FigurePreset, RasterConfig, build_cloud, preset
from .solenoid import (
    PointCloud3D,
    SolenoidParams,
    SolenoidPoint,
    TorusMap,
    distance,
    from_padic,
    gamma_estimate,
    orbit,
)

__all__ = [
    "PAdic",
    "PrecisionError",
    "expand",
    "from_int",
    "residues",
    "MapParams",
    "PlaneMap",
    "PointCloud2D",
    "EmbeddingCertificate",
    "s_zero",
    "delta_lower",
    "delta_certificate",
    "rotate_digits",
    "SolenoidPoint",
    "SolenoidParams",
    "PointCloud3D",
    "TorusMap",
    "distance",
    "from_padic",
    "orbit",
    "gamma_estimate",
    "MomentResult",
    "DimensionEstimate",
    "moment",
    "tuple_coefficient",
    "box_dimension",
    "metric_divergence",
    "measure_consistency",
    "RasterConfig",
    "FigurePreset",
    "PRESETS",
    "preset",
    "build_cloud",
]

__version__ = "0.1.0"
