"""Exception types shared across the package."""

from __future__ import annotations


class OrientError(Exception):
    """Base class for all errors raised by this package."""


class TableMismatchError(OrientError):
    """Two series with different variable tables were combined."""


class ProfileError(OrientError):
    """A monomial outside the truncation profile was requested."""


class SubstitutionError(OrientError):
    """A substitution violated the composition contract."""


class NotInvertibleError(OrientError):
    """Series inversion was requested for a non-unit."""


class TruncationInsufficientError(OrientError):
    """The working truncation cannot certify the requested computation.

    ``needed`` carries the smallest sufficient value of the named knob
    (``"cap"`` for the equivariant exponent, ``"order"`` for the group-law
    truncation order) so a driver can re-run at a bigger size.
    """

    def __init__(self, message: str, *, knob: str = "cap", needed: int | None = None):
        super().__init__(message)
        self.knob = knob
        self.needed = needed


class MalformedTowerError(OrientError):
    """A model-space tree could not be built into a ring."""


class UnsupportedIntegrationError(OrientError):
    """Direct integration is not defined for this tower or theory."""


class CharacterError(OrientError):
    """A torus character violated a nonvanishing requirement."""


class TaskError(OrientError):
    """A task file failed to parse or validate."""


class DenominatorError(OrientError):
    """A localized element is not divisible by its denominator."""
