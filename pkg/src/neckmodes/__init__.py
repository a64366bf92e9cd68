"""Mode-by-mode harmonic solver and verification harness for model
3-manifolds with long cylindrical necks."""

__version__ = "0.1.0"

from .geometry import DEFAULT_CONFIG, GeometryError, ModelGeometry, build_geometry
from .profile import NeckProfile, ProfileError

__all__ = [
    "DEFAULT_CONFIG",
    "GeometryError",
    "ModelGeometry",
    "NeckProfile",
    "ProfileError",
    "build_geometry",
    "__version__",
]
