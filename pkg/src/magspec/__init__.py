"""Ground-state energies of magnetic Schroedinger operators with radial fields."""
from .discretize import Annulus, Disc, Domain, ExteriorDisc, Plane
from .errors import ConfigError, DomainError, MagspecError, NumericalError, ResolutionError
from .field import Constant, Custom, ParabolicWell, RadialField

__all__ = ["Annulus", "Disc", "Domain", "ExteriorDisc", "Plane", "ConfigError", "DomainError",
           "MagspecError", "NumericalError", "ResolutionError", "Constant", "Custom",
           "ParabolicWell", "RadialField"]
