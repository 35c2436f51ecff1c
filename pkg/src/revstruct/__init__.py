"""Time-reversal structures and mechanical checks of their algebraic laws."""

from .core import (
    Cascade,
    DomainError,
    Flow,
    IrreversibleDynamicsError,
    Orientation,
    Reversal,
    ReversalError,
    StateSpace,
    VerificationReport,
)
from .exactnum import BilateralWord, Dyadic, TorusPoint, WindowError, decode, encode

__version__ = "0.1.0"

__all__ = [
    "BilateralWord",
    "Cascade",
    "DomainError",
    "Dyadic",
    "Flow",
    "IrreversibleDynamicsError",
    "Orientation",
    "Reversal",
    "ReversalError",
    "StateSpace",
    "TorusPoint",
    "VerificationReport",
    "WindowError",
    "decode",
    "encode",
]
