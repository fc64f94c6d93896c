"""Entropy vectors of multi-party quantum states and the 4-party Ingleton cone."""

from .entvec import (
    EntropyVector,
    ExactLog,
    LinearFunctional,
    ModularPart,
    NUMERIC_BITS,
    PartySystem,
    evaluate,
    is_balanced,
    mutual_information_functional,
    subset_complement,
)

__version__ = "0.1.0"

__all__ = [
    "EntropyVector",
    "ExactLog",
    "LinearFunctional",
    "ModularPart",
    "NUMERIC_BITS",
    "PartySystem",
    "evaluate",
    "is_balanced",
    "mutual_information_functional",
    "subset_complement",
]
