"""Exception hierarchy shared across the package."""


class OrbitactError(Exception):
    """Base class for all errors raised by this package."""


class GridTooCoarse(OrbitactError):
    """Sampling grid cannot resolve the highest retained harmonic."""


class SingleBody(OrbitactError):
    """Pairwise quantity requested for a configuration with one body."""


class ShapeMismatch(OrbitactError):
    """Two objects disagree on body count, dimension, or period."""


class NonPositiveSeparation(OrbitactError):
    """Radial potential evaluated at separation <= 0."""


class SelfPair(OrbitactError):
    """Pair interaction requested for i == j."""


class CollisionSample(OrbitactError):
    """Two bodies coincide at a quadrature node; the integrand is singular there."""


class OutOfWitnessRange(OrbitactError):
    """Strong-force witness queried at or beyond its validity radius."""


class ThetaOutOfRange(OrbitactError):
    """Tail growth exponent violates the theta < 2 hypothesis."""


class InvalidStart(OrbitactError):
    """Descent asked to start from a loop touching the collision set."""


class ConfigInvalid(OrbitactError):
    """Run configuration failed validation."""


class OrbitFileInvalid(OrbitactError):
    """Orbit file is missing required structure or contains bad values."""
