"""Records stored by the vaccination contracts."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from ..address import Address
from ..costmodel import GasKind


class PaymentMode(str, enum.Enum):
    FULL_PRICE = "full_price"
    TOKEN_PAYMENT = "token_payment"


class CycleState(str, enum.Enum):
    CHECKED_IN = "checked_in"
    RELEASE_QR_ISSUED = "release_qr_issued"
    RELEASE_CONFIRMED = "release_confirmed"
    PARTNER_CONFIRMED = "partner_confirmed"
    COMPLETED = "completed"
    CANCELLED = "cancelled"


# the declared transition graph; anything else is a bug
TRANSITIONS: dict[CycleState, frozenset[CycleState]] = {
    CycleState.CHECKED_IN: frozenset({CycleState.RELEASE_QR_ISSUED, CycleState.CANCELLED}),
    CycleState.RELEASE_QR_ISSUED: frozenset({CycleState.RELEASE_CONFIRMED, CycleState.CANCELLED}),
    CycleState.RELEASE_CONFIRMED: frozenset({CycleState.PARTNER_CONFIRMED}),
    CycleState.PARTNER_CONFIRMED: frozenset({CycleState.COMPLETED}),
    CycleState.COMPLETED: frozenset(),
    CycleState.CANCELLED: frozenset(),
}

OPEN_STATES = frozenset(TRANSITIONS) - {CycleState.COMPLETED, CycleState.CANCELLED}


class RecordSource(str, enum.Enum):
    IMPORTED = "imported"
    CYCLE_COMPLETED = "cycle_completed"


class OperationKind(str, enum.Enum):
    """Every contract entry point. ``gas_kind`` is None for calls that never hit the chain."""

    REGISTER_CLIENT = "register_client"
    ADD_MEMBER = "add_member"
    REGISTER_PARTNER = "register_partner"
    PURCHASE_TOKENS = "purchase_tokens"
    CHECKIN = "checkin"
    ISSUE_RELEASE_QR = "issue_release_qr"
    CONFIRM_RELEASE = "confirm_release"
    PARTNER_CHECKOUT = "partner_checkout"
    CLIENT_CHECKOUT = "client_checkout"
    CANCEL_CYCLE = "cancel_cycle"

    @property
    def gas_kind(self) -> GasKind | None:
        return GAS_KINDS[self]

    @property
    def on_chain(self) -> bool:
        return GAS_KINDS[self] is not None


GAS_KINDS: dict[OperationKind, GasKind | None] = {
    OperationKind.REGISTER_CLIENT: GasKind.CREATE_ACCOUNT,
    OperationKind.ADD_MEMBER: GasKind.ADD_MEMBER,
    OperationKind.REGISTER_PARTNER: GasKind.ADD_MEMBER,
    OperationKind.PURCHASE_TOKENS: GasKind.CHECKOUT,
    OperationKind.CHECKIN: GasKind.CHECKIN,
    OperationKind.ISSUE_RELEASE_QR: None,
    OperationKind.CONFIRM_RELEASE: GasKind.CONFIRMATION,
    OperationKind.PARTNER_CHECKOUT: GasKind.CHECKOUT,
    OperationKind.CLIENT_CHECKOUT: GasKind.CONFIRMATION,
    OperationKind.CANCEL_CYCLE: GasKind.CHECKIN,
}


@dataclass
class VaccineRecord:
    vaccine_id: str
    applied_at: float
    source: RecordSource = RecordSource.IMPORTED
    cycle_id: int | None = None

    def to_dict(self) -> dict:
        return {
            "vaccine_id": self.vaccine_id,
            "applied_at": self.applied_at,
            "source": self.source.value,
            "cycle_id": self.cycle_id,
        }


@dataclass
class Member:
    member_id: int
    name: str
    vaccine_history: list[VaccineRecord] = field(default_factory=list)

    def last_applied(self, vaccine_id: str) -> float | None:
        times = [r.applied_at for r in self.vaccine_history if r.vaccine_id == vaccine_id]
        return max(times) if times else None

    def to_dict(self) -> dict:
        return {
            "member_id": self.member_id,
            "name": self.name,
            "vaccine_history": [r.to_dict() for r in self.vaccine_history],
        }


@dataclass
class ClientRecord:
    address: Address
    personal_data: str
    members: list[Member] = field(default_factory=list)
    reputation: int = 0

    def member(self, member_id: int) -> Member | None:
        if 0 <= member_id < len(self.members):
            return self.members[member_id]
        return None

    def to_dict(self) -> dict:
        return {
            "address": str(self.address),
            "personal_data": self.personal_data,
            "members": [m.to_dict() for m in self.members],
            "reputation": self.reputation,
        }


@dataclass
class VaccineOffer:
    vaccine_id: str
    price_eth: str = "0"
    stock: int = 0
    bonus_tokens: int = 0
    token_discount_price: int = 0

    def to_dict(self) -> dict:
        return {
            "vaccine_id": self.vaccine_id,
            "price_eth": self.price_eth,
            "stock": self.stock,
            "bonus_tokens": self.bonus_tokens,
            "token_discount_price": self.token_discount_price,
        }


@dataclass
class Partner:
    address: Address
    business_data: str
    offers: dict[str, VaccineOffer] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "address": str(self.address),
            "business_data": self.business_data,
            "offers": [o.to_dict() for o in self.offers.values()],
        }


@dataclass
class QrNonce:
    value: int
    consumed: bool = False

    @property
    def hex(self) -> str:
        return f"{self.value:032x}"

    def to_dict(self) -> dict:
        return {"value": self.hex, "consumed": self.consumed}


@dataclass
class VaccinationCycle:
    cycle_id: int
    client: Address
    member_id: int
    partner: Address
    vaccine_id: str
    payment_mode: PaymentMode
    state: CycleState = CycleState.CHECKED_IN
    release_nonce: QrNonce | None = None
    checkout_nonce: QrNonce | None = None
    # FullPrice bonus that could not be paid at partner checkout
    settlement_pending: bool = False
    history: list[CycleState] = field(default_factory=lambda: [CycleState.CHECKED_IN])

    @property
    def is_open(self) -> bool:
        return self.state in OPEN_STATES

    def move_to(self, new: CycleState) -> None:
        if new not in TRANSITIONS[self.state]:
            raise AssertionError(f"illegal transition {self.state.value} -> {new.value}")
        self.state = new
        self.history.append(new)

    def to_dict(self) -> dict:
        return {
            "cycle_id": self.cycle_id,
            "client": str(self.client),
            "member_id": self.member_id,
            "partner": str(self.partner),
            "vaccine_id": self.vaccine_id,
            "payment_mode": self.payment_mode.value,
            "state": self.state.value,
            "release_nonce": self.release_nonce.to_dict() if self.release_nonce else None,
            "checkout_nonce": self.checkout_nonce.to_dict() if self.checkout_nonce else None,
            "settlement_pending": self.settlement_pending,
            "history": [s.value for s in self.history],
        }


@dataclass
class VaccineSchedule:
    """Vaccines a member should hold, with their reapplication interval in seconds.

    An interval of None means a single lifetime dose.
    """

    intervals: dict[str, float | None] = field(default_factory=dict)
