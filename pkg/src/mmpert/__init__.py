"""Perturbative optimal market making: closed-form quotes, PNL simulation, oracles."""

from .core import ControlSet, DomainError, Horizon, MarketEnv, MarketState, validate_env
from .multi import (MultiEnv, PenaltyMatrix, VectorControls, iso_risk, penalty_matrix,
                    rank_inventory_configs, vector_quotes)
from .price_models import ModelKind, PriceModel, directional_bet, expected_terminal
from .quotes import (Mode, bias_integral, penalty_terms, quotes_first_order,
                     quotes_with_costs, quotes_zero_order, unitary_penalty,
                     value_function_zero)
from .simulation import PnlSample, Policy, SimConfig, run_batch, run_batch_multi, run_path
from .stats import SummaryStats, histogram, summarize, write_csv

__version__ = "0.1.0"

__all__ = [
    "ControlSet", "DomainError", "Horizon", "MarketEnv", "MarketState", "validate_env",
    "MultiEnv", "PenaltyMatrix", "VectorControls", "iso_risk", "penalty_matrix",
    "rank_inventory_configs", "vector_quotes",
    "ModelKind", "PriceModel", "directional_bet", "expected_terminal",
    "Mode", "bias_integral", "penalty_terms", "quotes_first_order", "quotes_with_costs",
    "quotes_zero_order", "unitary_penalty", "value_function_zero",
    "PnlSample", "Policy", "SimConfig", "run_batch", "run_batch_multi", "run_path",
    "SummaryStats", "histogram", "summarize", "write_csv",
]
