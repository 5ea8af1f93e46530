"""Exception hierarchy shared by all toricflow modules."""


class ToricflowError(Exception):
    """Base class for all library errors."""


class DependentRows(ToricflowError):
    """Input rows are linearly dependent over the rationals."""


class EmptyInterior(ToricflowError):
    """The half-space intersection has empty interior."""


class OutsidePolytope(ToricflowError):
    """A query point violates one of the defining inequalities."""


class UnboundedSlice(ToricflowError):
    """Operation requires a bounded slice polytope."""


class SingularSlice(ToricflowError):
    """Slice meets a singular stratum; the requested structure is undefined."""


class NotSpecial(ToricflowError):
    """The direction data does not satisfy the integrality condition."""


class StationaryFlow(ToricflowError):
    """All flow speeds vanish; the motion is trivial."""


class OutsideInterval(ToricflowError):
    """Requested time lies outside the existence interval."""


class DegeneratePotential(ToricflowError):
    """Potential Hessian is not positive definite at the evaluation point."""


class EmptyLevelSet(ToricflowError):
    """No chart point satisfies the level-set constraints."""


class DegenerateFrame(ToricflowError):
    """Tangent frame determinant underflowed; angle is unreliable."""


class StepSizeFailure(ToricflowError):
    """Finite-difference results disagree across step halving."""


class MeshTooCoarse(ToricflowError):
    """Local mesh cannot resolve the requested operator."""


class ConfigError(ToricflowError):
    """Problem configuration could not be parsed or validated."""
