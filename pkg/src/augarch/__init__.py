"""Simulation and Monte Carlo verification of augmented GARCH(1,1) processes."""

__version__ = "0.1.0"

from augarch.exceptions import (  # noqa: E402
    AugGarchError,
    ConfigError,
    DomainError,
    ModelError,
    NoCertificateError,
    PreconditionError,
)
from augarch.model import FAMILIES, InnovationDist, LinkFunction, ModelSpec, Transform, make_builtin  # noqa: E402
from augarch.seeding import SeedSpec  # noqa: E402

__all__ = [
    "FAMILIES",
    "AugGarchError",
    "ConfigError",
    "DomainError",
    "InnovationDist",
    "LinkFunction",
    "ModelError",
    "ModelSpec",
    "NoCertificateError",
    "PreconditionError",
    "SeedSpec",
    "Transform",
    "make_builtin",
]
