"""Uniform random Motzkin and Schröder lattice paths by recovery instead of rejection."""

from __future__ import annotations

from .exact import R, SQRT2, QSqrt2
from .paths import ContractError, Model, Path, Rejected, Step
from .randomness import BitSource, Meter

__all__ = ["R", "SQRT2", "QSqrt2", "ContractError", "Model", "Path", "Rejected", "Step",
           "BitSource", "Meter"]
__version__ = "0.1.0"
