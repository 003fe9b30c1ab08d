"""Exception taxonomy shared by all modules."""


class SchwarzGeomError(Exception):
    """Base class; ``code`` is the machine-readable tag used by the CLI."""

    @property
    def code(self):
        return type(self).__name__


# analytic core
class CenterMismatch(SchwarzGeomError):
    pass


class NotInvertible(SchwarzGeomError):
    pass


class BoundaryRoot(SchwarzGeomError):
    pass


# moebius
class Degenerate(SchwarzGeomError):
    pass


class LightlikeCoordinate(SchwarzGeomError):
    pass


class ZeroVector(SchwarzGeomError):
    pass


class NonrealTrace(SchwarzGeomError):
    pass


# schwarz geometry
class NoConvergence(SchwarzGeomError):
    pass


class OutOfDomain(SchwarzGeomError):
    pass


class OffCurve(SchwarzGeomError):
    pass


class ZeroSchwarzian(SchwarzGeomError):
    pass


# dynamics
class DomainExhausted(SchwarzGeomError):
    pass


class StepFailure(SchwarzGeomError):
    pass


class SingularityHit(SchwarzGeomError):
    pass


class GridTooCoarse(SchwarzGeomError):
    pass


class InsufficientResolution(SchwarzGeomError):
    pass


class ZeroField(SchwarzGeomError):
    pass


# geodesic fields
class PoleOnCircle(SchwarzGeomError):
    pass


class WindingMismatch(SchwarzGeomError):
    pass


class DegenerateRatio(SchwarzGeomError):
    pass


# symmetric checks
class NotAFixedPoint(SchwarzGeomError):
    pass


# cli
class ConfigParse(SchwarzGeomError):
    pass


class Validation(SchwarzGeomError):
    pass


class ComputeFailure(SchwarzGeomError):
    pass


class IoFailure(SchwarzGeomError):
    pass
