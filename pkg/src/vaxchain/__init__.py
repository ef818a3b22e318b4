"""Deterministic simulator of a blockchain-backed vaccination incentive workflow."""

from .address import Address
from .bench import BenchReport, compare, export, median, run
from .contracts import ContractState, CycleState, OperationKind, PaymentMode
from .costmodel import (
    DEFAULT_QUOTE,
    EthQuote,
    GasKind,
    GasSchedule,
    InfraCost,
    break_even_cycles,
    default_calibration,
    full_cycle_cost,
    onboarding_cost,
    op_cost,
    scenario_cost,
)
from .ledger import Chain, NetworkProfile, create_chain, current_state, default_profile
from .scenario import Scenario, default_scenario, load_scenario

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_QUOTE",
    "Address",
    "BenchReport",
    "Chain",
    "ContractState",
    "CycleState",
    "EthQuote",
    "GasKind",
    "GasSchedule",
    "InfraCost",
    "NetworkProfile",
    "OperationKind",
    "PaymentMode",
    "Scenario",
    "break_even_cycles",
    "compare",
    "create_chain",
    "current_state",
    "default_calibration",
    "default_profile",
    "default_scenario",
    "export",
    "full_cycle_cost",
    "median",
    "onboarding_cost",
    "op_cost",
    "run",
    "scenario_cost",
]
