"""Business logic of the vaccination dApp as one deterministic state machine.

The four on-chain contracts (system and partner registry, client/member
registry, incentive token, vaccination cycle) share a single
:class:`ContractState`. Every public operation validates all of its
preconditions before touching anything, so a raised
:class:`~vaxchain.errors.ContractError` leaves the state exactly as it was.
"""

from __future__ import annotations

import inspect
from typing import Any, Iterable, Mapping

from .. import errors
from ..address import Address
from ..rng import ChainRandom
from .models import (
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
from .tokens import TokenLedger

NONCE_BITS = 128


def _as_record(item) -> VaccineRecord:
    if isinstance(item, VaccineRecord):
        return VaccineRecord(item.vaccine_id, item.applied_at, RecordSource.IMPORTED)
    if isinstance(item, Mapping):
        return VaccineRecord(str(item["vaccine_id"]), float(item.get("applied_at", 0.0)))
    vaccine_id, applied_at = item
    return VaccineRecord(str(vaccine_id), float(applied_at))


def _as_offer(item) -> VaccineOffer:
    if isinstance(item, VaccineOffer):
        return VaccineOffer(**item.to_dict())
    try:
        offer = VaccineOffer(
            vaccine_id=str(item["vaccine_id"]),
            price_eth=str(item.get("price_eth", "0")),
            stock=item.get("stock", 0),
            bonus_tokens=item.get("bonus_tokens", 0),
            token_discount_price=item.get("token_discount_price", 0),
        )
    except (KeyError, TypeError) as exc:
        raise errors.InvalidOffer(f"malformed offer {item!r}") from exc
    return offer


def _parse_nonce(value) -> int | None:
    if isinstance(value, QrNonce):
        return value.value
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        try:
            return int(value, 16)
        except ValueError:
            return None
    return None


class ContractState:
    """Registries, token balances and vaccination cycles."""

    def __init__(self, rng: ChainRandom | None = None):
        self.rng = rng or ChainRandom(0)
        self.clients: dict[Address, ClientRecord] = {}
        self.partners: dict[Address, Partner] = {}
        self.tokens = TokenLedger()
        self.cycles: list[VaccinationCycle] = []
        self.consumed_nonces: set[int] = set()
        self._issued_nonces: set[int] = set()
        # (client, member_id, vaccine_id) -> cycle_id of the open cycle
        self._open: dict[tuple[Address, int, str], int] = {}

    # -- dispatch -------------------------------------------------------

    def apply(self, kind: OperationKind | str, sender: Address, payload: Mapping[str, Any] | None = None,
              now: float = 0.0):
        """Run ``kind`` on behalf of ``sender`` with keyword ``payload``."""
        try:
            kind = OperationKind(kind)
        except ValueError:
            raise errors.UnknownOperation(f"no contract operation {kind!r}") from None
        method = getattr(self, kind.value)
        kwargs = dict(payload or {})
        try:
            inspect.signature(method).bind(sender, now=now, **kwargs)
        except TypeError as exc:
            raise errors.UnknownOperation(f"bad arguments for {kind.value}: {exc}") from None
        return method(sender, now=now, **kwargs)

    # -- lookups --------------------------------------------------------

    def _client(self, address: Address) -> ClientRecord:
        try:
            return self.clients[address]
        except KeyError:
            raise errors.UnknownClient(f"{address} is not a registered client") from None

    def _partner(self, address: Address) -> Partner:
        try:
            return self.partners[address]
        except KeyError:
            raise errors.UnknownPartner(f"{address} is not a registered partner") from None

    def _member(self, client: ClientRecord, member_id: int) -> Member:
        member = client.member(member_id) if isinstance(member_id, int) else None
        if member is None:
            raise errors.UnknownMember(f"client {client.address} has no member {member_id!r}")
        return member

    def cycle(self, cycle_id: int) -> VaccinationCycle:
        if isinstance(cycle_id, int) and 0 <= cycle_id < len(self.cycles):
            return self.cycles[cycle_id]
        raise errors.UnknownCycle(f"no cycle {cycle_id!r}")

    def token_balance(self, address: Address) -> int:
        return self.tokens.balance(address)

    def offer(self, partner: Address, vaccine_id: str) -> VaccineOffer:
        offer = self._partner(partner).offers.get(vaccine_id)
        if offer is None:
            raise errors.UnknownOffer(f"{partner} does not offer {vaccine_id!r}")
        return offer

    def _fresh_nonce(self) -> QrNonce:
        value = self.rng.bits(NONCE_BITS)
        while value in self._issued_nonces:
            value = self.rng.bits(NONCE_BITS)
        self._issued_nonces.add(value)
        return QrNonce(value)

    # -- registries -----------------------------------------------------

    def register_client(self, sender: Address, personal_data: str = "", name: str | None = None,
                        now: float = 0.0) -> ClientRecord:
        if sender in self.clients:
            raise errors.DuplicateClient(f"{sender} is already a client")
        record = ClientRecord(sender, str(personal_data))
        record.members.append(Member(0, str(name if name is not None else personal_data)))
        self.clients[sender] = record
        return record

    def add_member(self, sender: Address, name: str, imported_vaccines: Iterable = (),
                   now: float = 0.0) -> Member:
        client = self._client(sender)
        try:
            records = [_as_record(v) for v in imported_vaccines]
        except (KeyError, TypeError, ValueError) as exc:
            raise errors.InvalidRecord(f"malformed vaccine record: {exc}") from None
        if any(r.applied_at < 0 or r.applied_at > now for r in records):
            raise errors.InvalidRecord("imported vaccines must be applied between t=0 and now")
        member = Member(len(client.members), str(name), sorted(records, key=lambda r: r.applied_at))
        client.members.append(member)
        return member

    def register_partner(self, sender: Address, business_data: str = "", offers: Iterable = (),
                         now: float = 0.0) -> Partner:
        if sender in self.partners:
            raise errors.DuplicatePartner(f"{sender} is already a partner")
        parsed: dict[str, VaccineOffer] = {}
        for item in offers:
            offer = _as_offer(item)
            numbers = (offer.stock, offer.bonus_tokens, offer.token_discount_price)
            if any(not isinstance(n, int) or isinstance(n, bool) or n < 0 for n in numbers):
                raise errors.InvalidOffer(f"offer {offer.vaccine_id!r} has a negative or non-integer field")
            if offer.vaccine_id in parsed:
                raise errors.InvalidOffer(f"vaccine {offer.vaccine_id!r} offered twice")
            parsed[offer.vaccine_id] = offer
        partner = Partner(sender, str(business_data), parsed)
        self.partners[sender] = partner
        return partner

    def purchase_tokens(self, sender: Address, amount: int, now: float = 0.0) -> int:
        self._partner(sender)
        if not isinstance(amount, int) or isinstance(amount, bool) or amount <= 0:
            raise errors.InvalidAmount(f"token purchase must be a positive integer, got {amount!r}")
        return self.tokens.mint(sender, amount)

    def list_due_vaccines(self, client: Address, member_id: int, schedule: VaccineSchedule | Mapping,
                          now: float) -> list[str]:
        """Vaccines in ``schedule`` the member has never had or whose reapplication is due."""
        member = self._member(self._client(client), member_id)
        intervals = schedule.intervals if isinstance(schedule, VaccineSchedule) else dict(schedule)
        due = []
        for vaccine_id, interval in intervals.items():
            last = member.last_applied(vaccine_id)
            if last is None or (interval is not None and last + interval <= now):
                due.append(vaccine_id)
        return due

    # -- vaccination cycle ----------------------------------------------

    def checkin(self, sender: Address, member_id: int, partner: Address, vaccine_id: str,
                payment_mode: PaymentMode | str = PaymentMode.FULL_PRICE, now: float = 0.0) -> VaccinationCycle:
        client = self._client(sender)
        self._member(client, member_id)
        offer = self.offer(partner, vaccine_id)
        try:
            mode = PaymentMode(payment_mode)
        except ValueError:
            raise errors.InvalidOffer(f"unknown payment mode {payment_mode!r}") from None
        if offer.stock <= 0:
            raise errors.NoStock(f"{vaccine_id!r} is out of stock at {partner}")
        key = (sender, member_id, vaccine_id)
        if key in self._open:
            raise errors.OpenCycleExists(f"cycle {self._open[key]} is still open for this member and vaccine")
        if mode is PaymentMode.TOKEN_PAYMENT and self.tokens.balance(sender) < offer.token_discount_price:
            raise errors.InsufficientTokens(
                f"needs {offer.token_discount_price} tokens, holds {self.tokens.balance(sender)}"
            )
        offer.stock -= 1
        cycle = VaccinationCycle(len(self.cycles), sender, member_id, partner, vaccine_id, mode)
        self.cycles.append(cycle)
        self._open[key] = cycle.cycle_id
        return cycle

    def issue_release_qr(self, sender: Address, cycle_id: int, now: float = 0.0) -> QrNonce:
        cycle = self.cycle(cycle_id)
        if sender != cycle.partner:
            raise errors.NotCyclePartner(f"{sender} is not the partner of cycle {cycle_id}")
        if cycle.state is not CycleState.CHECKED_IN:
            raise errors.WrongState(f"cycle {cycle_id} is {cycle.state.value}")
        cycle.release_nonce = self._fresh_nonce()
        cycle.move_to(CycleState.RELEASE_QR_ISSUED)
        return cycle.release_nonce

    def _check_nonce(self, presented, expected: QrNonce | None) -> None:
        value = _parse_nonce(presented)
        if value is None or expected is None or value != expected.value:
            raise errors.BadNonce("QR code does not match")

    def _precheck_consumed(self, presented) -> None:
        value = _parse_nonce(presented)
        if value is not None and value in self.consumed_nonces:
            raise errors.NonceConsumed("QR code was already used")

    def _consume(self, nonce: QrNonce) -> None:
        nonce.consumed = True
        self.consumed_nonces.add(nonce.value)

    def confirm_release(self, sender: Address, cycle_id: int, nonce, now: float = 0.0) -> CycleState:
        cycle = self.cycle(cycle_id)
        if sender != cycle.client:
            raise errors.NotCycleClient(f"{sender} is not the client of cycle {cycle_id}")
        self._precheck_consumed(nonce)
        if cycle.state is not CycleState.RELEASE_QR_ISSUED:
            raise errors.WrongState(f"cycle {cycle_id} is {cycle.state.value}")
        self._check_nonce(nonce, cycle.release_nonce)
        self._consume(cycle.release_nonce)
        cycle.move_to(CycleState.RELEASE_CONFIRMED)
        return cycle.state

    def _complete(self, cycle: VaccinationCycle, now: float) -> None:
        client = self.clients[cycle.client]
        client.members[cycle.member_id].vaccine_history.append(
            VaccineRecord(cycle.vaccine_id, float(now), RecordSource.CYCLE_COMPLETED, cycle.cycle_id)
        )
        client.reputation += 1
        cycle.settlement_pending = False
        cycle.move_to(CycleState.COMPLETED)
        del self._open[(cycle.client, cycle.member_id, cycle.vaccine_id)]

    def partner_checkout(self, sender: Address, cycle_id: int, now: float = 0.0) -> CycleState:
        """Partner-side confirmation.

        FullPrice cycles settle the bonus right away. If the partner cannot
        cover the bonus the cycle waits at PartnerConfirmed, and calling this
        again after a top-up retries the settlement.
        """
        cycle = self.cycle(cycle_id)
        if sender != cycle.partner:
            raise errors.NotCyclePartner(f"{sender} is not the partner of cycle {cycle_id}")
        offer = self.partners[cycle.partner].offers[cycle.vaccine_id]
        retry = (
            cycle.state is CycleState.PARTNER_CONFIRMED
            and cycle.payment_mode is PaymentMode.FULL_PRICE
            and cycle.settlement_pending
        )
        if retry:
            if not self.tokens.can_transfer(cycle.partner, offer.bonus_tokens):
                raise errors.InsufficientPartnerTokens(
                    f"partner holds {self.tokens.balance(cycle.partner)} tokens, bonus is {offer.bonus_tokens}"
                )
            self.tokens.transfer(cycle.partner, cycle.client, offer.bonus_tokens)
            self._complete(cycle, now)
            return cycle.state
        if cycle.state is not CycleState.RELEASE_CONFIRMED:
            raise errors.WrongState(f"cycle {cycle_id} is {cycle.state.value}")

        if cycle.payment_mode is PaymentMode.TOKEN_PAYMENT:
            cycle.checkout_nonce = self._fresh_nonce()
            cycle.move_to(CycleState.PARTNER_CONFIRMED)
        elif self.tokens.can_transfer(cycle.partner, offer.bonus_tokens):
            cycle.move_to(CycleState.PARTNER_CONFIRMED)
            self.tokens.transfer(cycle.partner, cycle.client, offer.bonus_tokens)
            self._complete(cycle, now)
        else:
            cycle.move_to(CycleState.PARTNER_CONFIRMED)
            cycle.settlement_pending = True
        return cycle.state

    def client_checkout(self, sender: Address, cycle_id: int, nonce, now: float = 0.0) -> VaccinationCycle:
        cycle = self.cycle(cycle_id)
        if sender != cycle.client:
            raise errors.NotCycleClient(f"{sender} is not the client of cycle {cycle_id}")
        self._precheck_consumed(nonce)
        if cycle.payment_mode is not PaymentMode.TOKEN_PAYMENT or cycle.state is not CycleState.PARTNER_CONFIRMED:
            raise errors.WrongState(f"cycle {cycle_id} is {cycle.state.value} ({cycle.payment_mode.value})")
        self._check_nonce(nonce, cycle.checkout_nonce)
        price = self.partners[cycle.partner].offers[cycle.vaccine_id].token_discount_price
        if not self.tokens.can_transfer(cycle.client, price):
            raise errors.InsufficientTokens(f"needs {price} tokens, holds {self.tokens.balance(cycle.client)}")
        self._consume(cycle.checkout_nonce)
        self.tokens.transfer(cycle.client, cycle.partner, price)
        self._complete(cycle, now)
        return cycle

    def cancel_cycle(self, sender: Address, cycle_id: int, now: float = 0.0) -> VaccinationCycle:
        cycle = self.cycle(cycle_id)
        if sender not in (cycle.client, cycle.partner):
            raise errors.NotParty(f"{sender} is not a party to cycle {cycle_id}")
        if cycle.state not in (CycleState.CHECKED_IN, CycleState.RELEASE_QR_ISSUED):
            raise errors.WrongState(f"cycle {cycle_id} is {cycle.state.value}")
        self.partners[cycle.partner].offers[cycle.vaccine_id].stock += 1
        cycle.move_to(CycleState.CANCELLED)
        del self._open[(cycle.client, cycle.member_id, cycle.vaccine_id)]
        return cycle

    # -- export ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "clients": {str(a): c.to_dict() for a, c in sorted(self.clients.items())},
            "partners": {
                str(a): {**p.to_dict(), "token_balance": self.tokens.balance(a)}
                for a, p in sorted(self.partners.items())
            },
            "tokens": self.tokens.to_dict(),
            "cycles": [c.to_dict() for c in self.cycles],
            "consumed_nonces": sorted(f"{v:032x}" for v in self.consumed_nonces),
        }
