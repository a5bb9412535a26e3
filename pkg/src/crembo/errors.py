"""Exception hierarchy for the crembo package.

``InputError`` subclasses signal bad user input and map to CLI exit
code 2; everything else maps to exit code 1.
"""


class CremboError(Exception):
    """Base class for all package errors."""


class InputError(CremboError):
    """Invalid user-supplied data or parameters (CLI exit code 2)."""


# --- dataset ingestion / splitting -----------------------------------------

class MissingColumn(InputError):
    pass


class NonNumericFeature(InputError):
    pass


class EmptyDataset(InputError):
    pass


class ClassTooSmall(InputError):
    pass


class FoldCountExceedsRows(InputError):
    pass


class UnlabeledDataset(InputError):
    pass


# --- oracle adapters --------------------------------------------------------

class ShapeMismatch(InputError):
    pass


class RowNotStochastic(InputError):
    pass


class NegativeEntry(InputError):
    pass


class NonPositiveTemperature(InputError):
    pass


class FeatureDimensionMismatch(InputError):
    pass


# --- depth ------------------------------------------------------------------

class EmptySample(InputError):
    pass


class EmptyHypothesisSample(InputError):
    pass


class TrimExceedsSample(InputError):
    pass


class LengthMismatch(InputError):
    pass


class InstanceTooLarge(InputError):
    pass


# --- learners / search ------------------------------------------------------

class ConflictingDuplicate(CremboError):
    """Two identical feature vectors carry disjoint allowed-label sets."""


class EnumerationBudgetExceeded(CremboError):
    pass


class LearnerAlwaysFails(CremboError):
    """The learner failed even at the minimal threshold, violating its contract."""


class ConstraintViolation(CremboError):
    """A learner returned a model that does not satisfy its constraints."""


class AllEpsilonInfeasible(CremboError):
    pass
