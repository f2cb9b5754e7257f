"""Isogeny graphs with level structure, voltage coverings and volcano recognizers."""

from .errors import CapExceeded, ParameterError, TheoremCheckFailure
from .field import ExtensionField, FieldElement, make_extension

__all__ = [
    "CapExceeded",
    "ExtensionField",
    "FieldElement",
    "ParameterError",
    "TheoremCheckFailure",
    "make_extension",
]
