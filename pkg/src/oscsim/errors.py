"""Exception types shared across the package.

Every checked failure mode has its own class so callers (and the CLI) can
report the failing contract by name.
"""


class OscsimError(Exception):
    """Base class for all package errors."""


# -- model construction ------------------------------------------------------

class NonSymmetric(OscsimError):
    pass


class NegativeEntry(OscsimError):
    pass


class InvalidIncidence(OscsimError):
    pass


class ZeroFrequency(OscsimError):
    pass


class ZeroWallSpring(OscsimError):
    pass


# -- integration -------------------------------------------------------------

class StepLimitExceeded(OscsimError):
    pass


class Blowup(OscsimError):
    pass


class BoundViolated(OscsimError):
    pass


# -- encodings / evolution ---------------------------------------------------

class SingularStiffness(OscsimError):
    pass


class SingularK1(OscsimError):
    pass


class ZeroEnergy(OscsimError):
    pass


class NotHermitian(OscsimError):
    pass


class NotHermitianObservable(OscsimError):
    pass


class DimensionMismatch(OscsimError):
    pass


class DimensionBudget(OscsimError):
    pass


class RegimeViolated(OscsimError):
    pass


class SubnormalizationViolated(OscsimError):
    pass


# -- misc --------------------------------------------------------------------

class EmptySubset(OscsimError):
    pass


class OutOfRange(OscsimError):
    pass


class ConfigInvalid(OscsimError):
    pass
