"""Mod-p modular forms, weight one through weight p, and non-liftable Katz forms."""

from .errors import ThetaDoublerError
from .ff import FieldCtx, FieldElement, make_field
from .kernels import BACKEND
from .qseries import QExpansion

__version__ = "0.1.0"

__all__ = ["BACKEND", "FieldCtx", "FieldElement", "QExpansion", "ThetaDoublerError", "make_field", "__version__"]
