"""Exception types shared across the package."""


class QdoeError(Exception):
    """Base class for every error raised by this package."""


class WrongDimension(QdoeError):
    """Matrices or vectors with incompatible shapes or dimensions."""


class NonPsdElement(QdoeError):
    """A POVM element has an eigenvalue below the PSD tolerance."""


class NotResolutionOfIdentity(QdoeError):
    """POVM elements do not sum to the identity."""


class OutOfDomain(QdoeError):
    """Parameter vector outside the model's open domain."""


class SingularProbability(QdoeError):
    """A vanishing outcome probability with a non-vanishing derivative."""


class RankDeficientState(QdoeError):
    """Density matrix is not full rank where full rank is required."""


class NotUnitVector(QdoeError):
    """Vector expected to have unit Euclidean norm does not."""


class DegenerateObservable(QdoeError):
    """Observable proportional to the identity; no measurement direction."""


class Infeasible(QdoeError):
    """Direction vector outside the range of a singular information matrix."""


class SingularInformation(QdoeError):
    """Information matrix is singular where an inverse is required."""


class UnsupportedParamCount(QdoeError):
    """Operation undefined for this number of model parameters."""


class SingularSeed(QdoeError):
    """Candidate set cannot seed a full-rank information matrix."""


class InfeasibleApportionment(QdoeError):
    """Sample count too small for the mandatory support of the weights."""
