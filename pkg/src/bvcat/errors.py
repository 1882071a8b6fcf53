"""Exception hierarchy.

``DomainError`` subclasses signal mathematically meaningful refusals (the
CLI maps them to exit code 2); ``MalformedInput`` covers unparseable or
schema-violating data (exit code 3).
"""


class DomainError(Exception):
    pass


class MalformedInput(Exception):
    pass


class MixedAmbient(DomainError):
    """Subspaces of different ambient spaces were combined."""


class MixedDegree(DomainError):
    """A spanning vector is not homogeneous."""


class NotASubspace(DomainError):
    pass


class NotSymplectic(DomainError):
    """The form is not a valid degree -1 symplectic form."""


class NotCoisotropic(DomainError):
    pass


class NotIsotropic(DomainError):
    pass


class NotLagrangian(DomainError):
    pass


class SourceTargetMismatch(DomainError):
    pass


class NotOrthogonal(DomainError):
    pass


class DoesNotFactor(DomainError):
    pass


class NotInvertible(DomainError):
    pass


class NotABasis(DomainError):
    pass


class NotComplementary(DomainError):
    pass


class SpaceMismatch(DomainError):
    pass


class WeightNotPositive(DomainError):
    pass


class NotUnital(DomainError):
    pass


class NotCompatible(DomainError):
    """A differential does not satisfy the compatibility with the form."""


class NonComposable(DomainError):
    pass


class Degenerate(NonComposable):
    """An isotrope is degenerate with respect to the quadratic action.

    The Gaussian integral along it does not exist, so this is a special case
    of a composition that is not defined.
    """


class SingularForm(DomainError):
    pass


class MalformedAction(DomainError):
    pass


class ObstructedQME(DomainError):
    """The order-by-order master equation solver hit a non-exact obstruction."""
