"""Exact verification of Hadamard-product gluing for relative periods of LG models."""
from .errors import LgError

__version__ = "0.1.0"
__all__ = ["LgError", "__version__"]
