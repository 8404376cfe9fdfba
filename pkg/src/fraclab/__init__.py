"""Inhomogeneous self-similar sets: construction, box counting and dimension bounds."""

__version__ = "0.1.0"

from .errors import DomainError, FraclabError, RefinementError, ResourceError, UndecidableError  # noqa: E402

__all__ = [
    "__version__",
    "DomainError",
    "FraclabError",
    "RefinementError",
    "ResourceError",
    "UndecidableError",
]
