"""Coalitional-stability scores for finite games, sequential resource
selection and position auctions, with exact rational arithmetic throughout."""

__version__ = "0.1.0"

from .errors import (BudgetExceededError, ContractError, ContractWarning,
                     InputError, TieError)

__all__ = [
    "__version__",
    "BudgetExceededError",
    "ContractError",
    "ContractWarning",
    "InputError",
    "TieError",
]
