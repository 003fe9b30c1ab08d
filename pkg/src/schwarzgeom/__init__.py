"""Curve dynamics by Schwarz reflection: Möbius circle geometry, Schwarz-function jets,
continuous reflection flows, singular geodesics and symmetric-space checks."""

from .errors import SchwarzGeomError
from .geometry import SchwarzFn
from .moebius import MobiusMap, mobius_product, pencil_solution
from .series import Jet, PolyRat

__version__ = "0.1.0"
