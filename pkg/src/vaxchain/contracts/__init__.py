"""Vaccination workflow contracts: registries, incentive token and cycles."""

from .models import (
    GAS_KINDS,
    OPEN_STATES,
    TRANSITIONS,
    ClientRecord,
    CycleState,
    Member,
    OperationKind,
    Partner,
    PaymentMode,
    QrNonce,
    RecordSource,
    VaccinationCycle,
    VaccineOffer,
    VaccineRecord,
    VaccineSchedule,
)
from .state import ContractState
from .tokens import TokenLedger

__all__ = [
    "GAS_KINDS",
    "OPEN_STATES",
    "TRANSITIONS",
    "ClientRecord",
    "ContractState",
    "CycleState",
    "Member",
    "OperationKind",
    "Partner",
    "PaymentMode",
    "QrNonce",
    "RecordSource",
    "TokenLedger",
    "VaccinationCycle",
    "VaccineOffer",
    "VaccineRecord",
    "VaccineSchedule",
]
