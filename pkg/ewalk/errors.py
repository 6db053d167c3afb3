"""
Exception hierarchy for the electric walk toolkit.

Every error is a ``ValueError`` so callers that only care about bad input can
catch the builtin; the CLI maps ``EwalkError`` to exit code 2.
"""


class EwalkError(ValueError):
    """Base class for all validation failures raised by ``ewalk``."""


class NotUnitary(EwalkError):
    """A coin or symbol failed the unitarity check."""


class NotNormalized(EwalkError):
    """A Verblunsky pair or state is not on the unit sphere."""


class IncompatibleRing(EwalkError):
    """A ring size does not fit the field period or the required parity."""


class NotTranslationInvariant(EwalkError):
    """A Fourier symbol was requested for a walk containing field layers."""


class NotRepresentable(EwalkError):
    """A walk cannot be written as a GECMV matrix."""


class ConfigurationError(EwalkError):
    """An environment setting has an invalid value."""
