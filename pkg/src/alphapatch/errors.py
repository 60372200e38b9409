"""Exception and warning types raised across the package."""


class AlphaPatchError(ValueError):
    """Base class for every error raised by alphapatch."""


# curve
class TooFewNodes(AlphaPatchError):
    pass


class DegenerateSegment(AlphaPatchError):
    pass


class OrderTooHigh(AlphaPatchError):
    pass


class DegenerateCurve(AlphaPatchError):
    pass


class NoConvergence(AlphaPatchError):
    pass


class SelfIntersection(AlphaPatchError):
    pass


class BadExponent(AlphaPatchError):
    pass


# dynamics
class ChordBelowFloor(AlphaPatchError):
    pass


class PatchOverlap(AlphaPatchError):
    pass


class SpeedDefectTooLarge(AlphaPatchError):
    pass


class PointOnBoundary(AlphaPatchError):
    pass


# evolve
class VelocityBlowup(AlphaPatchError):
    pass


class StepRejected(AlphaPatchError):
    pass


# diagnostics
class NegativeInput(AlphaPatchError):
    pass


class NonpositiveInput(AlphaPatchError):
    pass


# singularity
class CoincidentPoints(AlphaPatchError):
    pass


class UnresolvedSingularity(AlphaPatchError):
    pass


class OutsideApplicabilityRegion(AlphaPatchError):
    pass


class BadParameters(AlphaPatchError):
    pass


class NoSignChange(AlphaPatchError):
    pass


class TimeOutOfRange(AlphaPatchError):
    pass


class ConstraintInfeasible(AlphaPatchError):
    pass


# configuration
class ParseError(AlphaPatchError):
    pass


class ValidationError(AlphaPatchError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class WallSingularity(UserWarning):
    """A reflected chord fell below the floor at a wall-touching node."""
