"""A minimal simulated Ethereum-like chain.

Each transaction is included in its own block after an exponential
waiting time drawn from the network profile (plus an occasional
congestion delay). Contract calls execute at inclusion; a failing call
is rejected without charging gas, consuming randomness or moving the
clock.
"""

from __future__ import annotations

import enum
import json
from decimal import Decimal
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

from .address import Address
from .contracts import ContractState, OperationKind
from .costmodel import WEI_PER_ETH, GasSchedule, default_calibration
from .errors import ConfigurationError, ContractError, ScenarioParseError, TransactionRejected
from .rng import ChainRandom

UNKNOWN_SENDER = "unknown sender"
INSUFFICIENT_FUNDS = "insufficient funds"


class NetworkName(str, enum.Enum):
    MAIN = "Main"
    ROPSTEN = "Ropsten"
    PRIVATE = "Private"


class DifficultyClass(str, enum.Enum):
    HIGH = "High"
    MEDIUM = "Medium"
    SETTABLE = "Settable"


@dataclass(frozen=True)
class NetworkProfile:
    """Timing, difficulty and fee behaviour of one network."""

    name: NetworkName
    mean_block_interval: float
    difficulty_class: DifficultyClass
    per_tx_fee_applies: bool
    congestion_probability: float = 0.0
    congestion_extra_mean: float = 0.0

    def __post_init__(self):
        try:
            object.__setattr__(self, "name", NetworkName(self.name))
            object.__setattr__(self, "difficulty_class", DifficultyClass(self.difficulty_class))
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from None
        if not isinstance(self.per_tx_fee_applies, bool):
            raise ConfigurationError("per_tx_fee_applies must be a boolean")
        if not self.mean_block_interval > 0:
            raise ConfigurationError("mean_block_interval must be > 0")
        if not 0.0 <= self.congestion_probability <= 1.0:
            raise ConfigurationError("congestion_probability must lie in [0, 1]")
        if not self.congestion_extra_mean >= 0:
            raise ConfigurationError("congestion_extra_mean must be >= 0")

    @property
    def uses_faucet(self) -> bool:
        # test and private networks hand out Ether for free
        return self.name is not NetworkName.MAIN

    def to_dict(self) -> dict:
        d = asdict(self)
        d["name"] = self.name.value
        d["difficulty_class"] = self.difficulty_class.value
        return d

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "NetworkProfile":
        expected = {f.name for f in fields(cls)}
        missing, extra = expected - set(data), set(data) - expected
        if missing or extra:
            raise ConfigurationError(
                f"profile keys must be exactly {sorted(expected)}; "
                f"missing {sorted(missing)}, unexpected {sorted(extra)}"
            )
        return cls(
            name=data["name"],
            mean_block_interval=float(data["mean_block_interval"]),
            difficulty_class=data["difficulty_class"],
            per_tx_fee_applies=data["per_tx_fee_applies"],
            congestion_probability=float(data["congestion_probability"]),
            congestion_extra_mean=float(data["congestion_extra_mean"]),
        )


# Calibrated so simulated full-cycle medians sit inside the observed band;
# see scripts/calibrate_profiles.py.
DEFAULT_PROFILES: dict[NetworkName, NetworkProfile] = {
    NetworkName.MAIN: NetworkProfile(NetworkName.MAIN, 330.0, DifficultyClass.HIGH, True, 0.0, 0.0),
    NetworkName.ROPSTEN: NetworkProfile(NetworkName.ROPSTEN, 17.0, DifficultyClass.MEDIUM, True, 0.2, 30.0),
    NetworkName.PRIVATE: NetworkProfile(NetworkName.PRIVATE, 16.5, DifficultyClass.SETTABLE, False, 0.0, 0.0),
}


def default_profile(name: str | NetworkName) -> NetworkProfile:
    """Look a default profile up by name, case-insensitively."""
    if isinstance(name, NetworkProfile):
        return name
    for key, profile in DEFAULT_PROFILES.items():
        if str(getattr(name, "value", name)).lower() == key.value.lower():
            return profile
    raise ConfigurationError(f"unknown network profile {name!r}; choose from main, ropsten, private")


def load_profile(path: str | Path) -> NetworkProfile:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"{path}: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: a profile must be a JSON object")
    return NetworkProfile.from_dict(data)


class TxStatus(str, enum.Enum):
    PENDING = "pending"
    INCLUDED = "included"
    REJECTED = "rejected"


@dataclass
class Transaction:
    tx_id: int
    sender: Address
    operation: OperationKind
    payload: dict
    submitted_at: float
    gas_used: int = 0
    status: TxStatus = TxStatus.PENDING
    reason: str | None = None
    result: Any = None
    error: ContractError | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "tx_id": self.tx_id,
            "sender": str(self.sender),
            "operation": self.operation.value,
            "submitted_at": self.submitted_at,
            "gas_used": self.gas_used,
            "status": self.status.value,
            "reason": self.reason,
        }


@dataclass(frozen=True)
class TxHandle:
    tx_id: int
    status: TxStatus
    reason: str | None = None


@dataclass
class Block:
    height: int
    produced_at: float
    transactions: list[int]
    parent: int | None
    difficulty: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class InclusionReceipt:
    tx_id: int
    latency: float
    block_height: int
    gas_used: int
    fee_wei: int

    @property
    def fee_eth(self) -> Decimal:
        return Decimal(self.fee_wei) / WEI_PER_ETH


@dataclass(frozen=True)
class JournalEntry:
    tx_id: int | None  # None for off-chain calls
    sender: Address
    operation: OperationKind
    payload: dict
    at: float
    result: Any = field(compare=False, repr=False)


@dataclass(frozen=True)
class StateSnapshot:
    height: int
    clock: float
    balances: dict[str, int]
    storage: dict

    def to_dict(self) -> dict:
        return {"height": self.height, "clock": self.clock, "balances": self.balances, "storage": self.storage}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


class Chain:
    """One simulated network instance. Not thread-safe; use one per trial."""

    def __init__(self, profile: NetworkProfile, seed: int, schedule: GasSchedule | None = None):
        if not isinstance(profile, NetworkProfile):
            raise ConfigurationError("profile must be a NetworkProfile")
        self.profile = profile
        self.schedule = schedule or default_calibration()
        self.rng = ChainRandom(seed)
        self.clock = 0.0
        self.blocks = [Block(0, 0.0, [], None, profile.difficulty_class.value)]
        self.balances: dict[Address, int] = {}
        self.faucet_dispensed_wei = 0
        self.transactions: list[Transaction] = []
        self.mempool: list[int] = []
        self.receipts: dict[int, InclusionReceipt] = {}
        self.contracts = ContractState(self.rng)
        # every successful contract execution, on- or off-chain, in order
        self.journal: list[JournalEntry] = []

    @property
    def height(self) -> int:
        return self.blocks[-1].height

    # -- accounts -------------------------------------------------------

    def create_account(self, address: Address | None = None, balance_wei: int = 0) -> Address:
        if address is None:
            address = Address.from_int(self.rng.bits(160))
            while address in self.balances:
                address = Address.from_int(self.rng.bits(160))
        elif address in self.balances:
            raise ConfigurationError(f"account {address} already exists")
        if balance_wei < 0:
            raise ConfigurationError("initial balance must be >= 0")
        self.balances[address] = int(balance_wei)
        return address

    def fund(self, address: Address, amount_wei: int) -> None:
        if address not in self.balances:
            raise ConfigurationError(f"unknown account {address}")
        self.balances[address] += int(amount_wei)

    # -- transactions ---------------------------------------------------

    def submit(self, sender: Address, operation: OperationKind | str, payload: Mapping | None = None) -> TxHandle:
        """Queue a contract call. Unknown senders get a Rejected handle."""
        operation = OperationKind(operation)
        if not operation.on_chain:
            raise ConfigurationError(f"{operation.value} is an off-chain call; use Chain.call")
        tx = Transaction(len(self.transactions), sender, operation, dict(payload or {}), self.clock)
        self.transactions.append(tx)
        if sender not in self.balances:
            tx.status, tx.reason = TxStatus.REJECTED, UNKNOWN_SENDER
        else:
            self.mempool.append(tx.tx_id)
        return TxHandle(tx.tx_id, tx.status, tx.reason)

    def call(self, sender: Address, operation: OperationKind | str, payload: Mapping | None = None):
        """Execute an off-chain contract call immediately: no block, no gas, no latency."""
        operation = OperationKind(operation)
        if operation.on_chain:
            raise ConfigurationError(f"{operation.value} must be submitted as a transaction")
        if sender not in self.balances:
            raise TransactionRejected(UNKNOWN_SENDER)
        result = self.contracts.apply(operation, sender, payload, now=self.clock)
        self.journal.append(JournalEntry(None, sender, operation, dict(payload or {}), self.clock, result))
        return result

    def _waiting_time(self) -> float:
        wait = self.rng.exponential(self.profile.mean_block_interval)
        p = self.profile.congestion_probability
        extra = self.profile.congestion_extra_mean
        if p > 0 and self.rng.uniform() < p and extra > 0:
            wait += self.rng.exponential(extra)
        return wait

    def _process(self, tx: Transaction) -> None:
        gas = self.schedule.units(tx.operation.gas_kind)
        fee = gas * self.schedule.gas_price_wei if self.profile.per_tx_fee_applies else 0
        if fee > self.balances[tx.sender] and not self.profile.uses_faucet:
            tx.status, tx.reason = TxStatus.REJECTED, INSUFFICIENT_FUNDS
            return
        saved = self.rng.getstate()
        produced_at = max(self.clock, tx.submitted_at) + self._waiting_time()
        try:
            tx.result = self.contracts.apply(tx.operation, tx.sender, tx.payload, now=produced_at)
        except ContractError as exc:
            self.rng.setstate(saved)
            tx.status, tx.reason, tx.error = TxStatus.REJECTED, f"{exc.code}: {exc}", exc
            return
        if fee > self.balances[tx.sender]:
            top_up = fee - self.balances[tx.sender]
            self.balances[tx.sender] += top_up
            self.faucet_dispensed_wei += top_up
        self.balances[tx.sender] -= fee
        block = Block(self.height + 1, produced_at, [tx.tx_id], self.height)
        self.blocks.append(block)
        self.clock = produced_at
        tx.gas_used, tx.status = gas, TxStatus.INCLUDED
        self.journal.append(JournalEntry(tx.tx_id, tx.sender, tx.operation, tx.payload, produced_at, tx.result))
        self.receipts[tx.tx_id] = InclusionReceipt(tx.tx_id, produced_at - tx.submitted_at, block.height, gas, fee)

    def advance_until_included(self, handle: TxHandle | int) -> InclusionReceipt:
        """Mine queued transactions in FIFO order until ``handle`` is settled."""
        tx_id = handle.tx_id if isinstance(handle, TxHandle) else int(handle)
        tx = self.transactions[tx_id]
        while tx.status is TxStatus.PENDING:
            self._process(self.transactions[self.mempool.pop(0)])
        if tx.status is TxStatus.REJECTED:
            raise TransactionRejected(tx.reason or "rejected", tx.error)
        return self.receipts[tx_id]

    def execute(self, sender: Address, operation: OperationKind | str, payload: Mapping | None = None):
        """Submit one call and mine it. Returns ``(receipt, result)``."""
        handle = self.submit(sender, operation, payload)
        receipt = self.advance_until_included(handle)
        return receipt, self.transactions[handle.tx_id].result

    def tx(self, handle: TxHandle | int) -> Transaction:
        return self.transactions[handle.tx_id if isinstance(handle, TxHandle) else handle]

    # -- export ---------------------------------------------------------

    def current_state(self) -> StateSnapshot:
        return StateSnapshot(
            height=self.height,
            clock=self.clock,
            balances={str(a): b for a, b in sorted(self.balances.items())},
            storage=self.contracts.to_dict(),
        )

    def history(self) -> dict:
        """Blocks, transactions and receipts: everything deterministic about a run."""
        return {
            "profile": self.profile.to_dict(),
            "seed": self.rng.seed,
            "blocks": [b.to_dict() for b in self.blocks],
            "transactions": [t.to_dict() for t in self.transactions],
            "receipts": [asdict(r) for _, r in sorted(self.receipts.items())],
            "state": self.current_state().to_dict(),
        }

    def history_json(self) -> str:
        return json.dumps(self.history(), sort_keys=True)


def create_chain(profile: NetworkProfile | str, seed: int, schedule: GasSchedule | None = None) -> Chain:
    return Chain(default_profile(profile) if not isinstance(profile, NetworkProfile) else profile, seed, schedule)


def current_state(chain: Chain) -> StateSnapshot:
    return chain.current_state()
