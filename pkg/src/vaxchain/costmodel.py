"""Gas, Ether and USD cost computation.

Money is kept in exact integers: Ether in wei (10**-18 ETH) and USD in
micro-dollars. Conversions to USD are rounded half-up to six decimals.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Mapping

from .errors import ConfigurationError

WEI_PER_ETH = 10**18
MICRO_PER_USD = 10**6
GWEI = 10**9


class InvalidQuote(ConfigurationError):
    """Exchange rate is missing or not strictly positive."""


class GasKind(str, enum.Enum):
    """Billing categories, one per row of the execution-cost table."""

    CREATE_ACCOUNT = "create_account"
    ADD_MEMBER = "add_member"
    CHECKIN = "checkin"
    CONFIRMATION = "confirmation"
    CHECKOUT = "checkout"

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    GasKind.CREATE_ACCOUNT: "Create new account",
    GasKind.ADD_MEMBER: "Add a member",
    GasKind.CHECKIN: "Checkin",
    GasKind.CONFIRMATION: "Vaccination confirmation",
    GasKind.CHECKOUT: "Checkout",
}

CYCLE_KINDS = (GasKind.CHECKIN, GasKind.CONFIRMATION, GasKind.CHECKOUT)
ONBOARDING_KINDS = (GasKind.CREATE_ACCOUNT, GasKind.ADD_MEMBER)


def eth_to_wei(value) -> int:
    """Convert an Ether amount (str, int, Decimal) to integer wei."""
    wei = Decimal(str(value)) * WEI_PER_ETH
    if wei != wei.to_integral_value():
        raise ConfigurationError(f"{value} ETH is finer than 1 wei")
    return int(wei)


def usd_to_micro(value) -> int:
    micro = Decimal(str(value)) * MICRO_PER_USD
    if micro != micro.to_integral_value():
        raise ConfigurationError(f"US${value} is finer than one micro-dollar")
    return int(micro)


def _round_half_up(x: Fraction) -> int:
    # x >= 0 everywhere this is used
    return (x.numerator * 2 + x.denominator) // (x.denominator * 2)


@dataclass(frozen=True)
class GasSchedule:
    """Gas units per billing kind plus the gas price in wei."""

    gas_price_wei: int
    create_account: int
    add_member: int
    checkin: int
    confirmation: int
    checkout: int

    def __post_init__(self):
        if self.gas_price_wei <= 0:
            raise ConfigurationError("gas_price_wei must be > 0")
        for kind in GasKind:
            units = getattr(self, kind.value)
            if not isinstance(units, int) or units <= 0:
                raise ConfigurationError(f"gas units for {kind.value} must be a positive integer")

    def units(self, kind: GasKind | str) -> int:
        try:
            return getattr(self, GasKind(kind).value)
        except ValueError:
            raise ConfigurationError(f"unknown gas kind {kind!r}") from None

    def fee_wei(self, kind: GasKind | str) -> int:
        return self.units(kind) * self.gas_price_wei

    @property
    def gas_price_eth(self) -> Decimal:
        return Decimal(self.gas_price_wei) / WEI_PER_ETH

    def to_dict(self) -> dict:
        return {"gas_price_wei": self.gas_price_wei, **{k.value: self.units(k) for k in GasKind}}


def default_calibration() -> GasSchedule:
    """20 Gwei gas price with units back-derived from the published Ether costs."""
    return GasSchedule(
        gas_price_wei=20 * GWEI,
        create_account=20_900,
        add_member=135_900,
        checkin=36_950,
        confirmation=150,
        checkout=1_700,
    )


@dataclass(frozen=True)
class EthQuote:
    usd_per_eth: Decimal
    quote_date: str = ""

    def __post_init__(self):
        try:
            rate = Decimal(str(self.usd_per_eth))
        except ArithmeticError:
            raise InvalidQuote(f"bad exchange rate {self.usd_per_eth!r}") from None
        if not rate.is_finite() or rate <= 0:
            raise InvalidQuote(f"usd_per_eth must be > 0, got {self.usd_per_eth}")
        object.__setattr__(self, "usd_per_eth", rate)

    def wei_to_micro_usd(self, wei: int) -> int:
        return _round_half_up(Fraction(wei) * Fraction(self.usd_per_eth) * MICRO_PER_USD / WEI_PER_ETH)


DEFAULT_QUOTE = EthQuote(Decimal("167"), "2019-09-26")


@dataclass(frozen=True)
class InfraCost:
    """Fixed monthly cost of running a private network."""

    node_count: int = 5
    usd_per_node_month: Decimal = Decimal("24.75")

    def __post_init__(self):
        if self.node_count < 1:
            raise ConfigurationError("node_count must be >= 1")
        rate = Decimal(str(self.usd_per_node_month))
        if rate < 0:
            raise ConfigurationError("usd_per_node_month must be >= 0")
        object.__setattr__(self, "usd_per_node_month", rate)

    @property
    def monthly_micro_usd(self) -> int:
        return self.node_count * usd_to_micro(self.usd_per_node_month)

    @property
    def monthly_usd(self) -> Decimal:
        return Decimal(self.monthly_micro_usd) / MICRO_PER_USD


@dataclass(frozen=True, order=True)
class Cost:
    """An Ether amount and its USD equivalent, both exact integers."""

    wei: int = 0
    micro_usd: int = 0

    @property
    def eth(self) -> Decimal:
        return Decimal(self.wei) / WEI_PER_ETH

    @property
    def usd(self) -> Decimal:
        return Decimal(self.micro_usd) / MICRO_PER_USD

    def to_dict(self) -> dict:
        return {"eth": format_eth(self.wei), "usd": format_usd(self.micro_usd)}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Cost":
        return cls(eth_to_wei(data["eth"]), usd_to_micro(data["usd"]))


def format_eth(wei: int) -> str:
    """Plain decimal Ether string, trailing zeros kept to 6 places minimum."""
    text = f"{Decimal(wei) / WEI_PER_ETH:.18f}".rstrip("0")
    whole, _, frac = text.partition(".")
    return f"{whole}.{frac.ljust(6, '0')}"


def format_usd(micro: int) -> str:
    return str((Decimal(micro) / MICRO_PER_USD).quantize(Decimal("0.000001"), rounding=ROUND_HALF_UP))


def _cost_from_wei(wei: int, quote: EthQuote) -> Cost:
    return Cost(wei, quote.wei_to_micro_usd(wei))


def op_cost(schedule: GasSchedule, quote: EthQuote, kind: GasKind | str) -> Cost:
    """Ether fee of one call of ``kind`` and its USD value at ``quote``."""
    return _cost_from_wei(schedule.fee_wei(kind), quote)


def full_cycle_cost(schedule: GasSchedule, quote: EthQuote) -> Cost:
    return _cost_from_wei(sum(schedule.fee_wei(k) for k in CYCLE_KINDS), quote)


def onboarding_cost(schedule: GasSchedule, quote: EthQuote) -> Cost:
    """Cost of registering one client and adding one member."""
    return _cost_from_wei(sum(schedule.fee_wei(k) for k in ONBOARDING_KINDS), quote)


def break_even_cycles(infra: InfraCost, schedule: GasSchedule, quote: EthQuote) -> int:
    """Whole public-network cycles that one month of private infrastructure buys."""
    cycle = full_cycle_cost(schedule, quote)
    if cycle.micro_usd <= 0:
        raise ConfigurationError("full-cycle cost is zero; break-even is undefined")
    return infra.monthly_micro_usd // cycle.micro_usd


@dataclass
class CostReport:
    profile: str
    per_op: dict[GasKind, Cost]
    full_cycle: Cost
    onboarding: Cost
    infra_monthly_usd: Decimal
    break_even_cycles: int
    counts: dict[GasKind, int] = field(default_factory=dict)
    total: Cost = field(default_factory=Cost)

    def to_dict(self) -> dict:
        return {
            "profile": self.profile,
            "per_op": {k.value: c.to_dict() for k, c in self.per_op.items()},
            "full_cycle": self.full_cycle.to_dict(),
            "onboarding": self.onboarding.to_dict(),
            "infra_monthly_usd": format_usd(usd_to_micro(self.infra_monthly_usd)),
            "break_even_cycles": self.break_even_cycles,
            "counts": {k.value: n for k, n in self.counts.items()},
            "total": self.total.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "CostReport":
        return cls(
            profile=data["profile"],
            per_op={GasKind(k): Cost.from_dict(v) for k, v in data["per_op"].items()},
            full_cycle=Cost.from_dict(data["full_cycle"]),
            onboarding=Cost.from_dict(data["onboarding"]),
            infra_monthly_usd=Decimal(data["infra_monthly_usd"]),
            break_even_cycles=int(data["break_even_cycles"]),
            counts={GasKind(k): int(n) for k, n in data.get("counts", {}).items()},
            total=Cost.from_dict(data["total"]) if "total" in data else Cost(),
        )


def _profile_name(profile) -> str:
    return str(getattr(profile, "name", profile)).lower()


def scenario_cost(
    counts: Mapping[GasKind | str, int],
    profile,
    schedule: GasSchedule | None = None,
    quote: EthQuote = DEFAULT_QUOTE,
    infra: InfraCost | None = None,
) -> CostReport:
    """Real-money cost of a workload on one network.

    Main bills every call in Ether and has no fixed cost. Private bills no
    per-call Ether but carries the monthly infrastructure cost. Ropsten
    fees are paid in faucet Ether and cost nothing.
    """
    schedule = schedule or default_calibration()
    infra = infra or InfraCost()
    name = _profile_name(profile)
    if name not in ("main", "ropsten", "private"):
        raise ConfigurationError(f"unknown profile {profile!r}")
    norm = {kind: 0 for kind in GasKind}
    for kind, n in counts.items():
        if n < 0:
            raise ConfigurationError(f"negative count for {kind}")
        norm[GasKind(kind)] += int(n)

    if name == "main":
        per_op = {k: op_cost(schedule, quote, k) for k in GasKind}
        full, onboard = full_cycle_cost(schedule, quote), onboarding_cost(schedule, quote)
        total = _cost_from_wei(sum(schedule.fee_wei(k) * n for k, n in norm.items()), quote)
        infra_usd = Decimal("0")
    else:
        per_op = {k: Cost() for k in GasKind}
        full = onboard = total = Cost()
        infra_usd = infra.monthly_usd if name == "private" else Decimal("0")
    return CostReport(
        profile=name,
        per_op=per_op,
        full_cycle=full,
        onboarding=onboard,
        infra_monthly_usd=infra_usd,
        break_even_cycles=break_even_cycles(infra, schedule, quote),
        counts=norm,
        total=total,
    )


def format_cost_table(
    schedule: GasSchedule | None = None,
    quote: EthQuote = DEFAULT_QUOTE,
    infra: InfraCost | None = None,
    profiles: tuple[str, ...] = ("main", "private"),
) -> str:
    """Aligned text table with one column per profile, rows as in the cost table."""
    schedule = schedule or default_calibration()
    infra = infra or InfraCost()
    rows: list[tuple[str, GasKind | None]] = [(k.label, k) for k in GasKind]
    rows.append(("Full vaccination cycle", None))

    def cell(profile: str, kind: GasKind | None) -> str:
        if profile != "main":
            return "-"
        c = op_cost(schedule, quote, kind) if kind else full_cycle_cost(schedule, quote)
        return f"{format_eth(c.wei)} ETH (~US${format_usd(c.micro_usd)})"

    headers = {"main": "Ethereum (Main)", "ropsten": "Ropsten (testnet)", "private": "Private Instance"}
    table = [["", *(headers[p] for p in profiles)]]
    table += [[label, *(cell(p, kind) for p in profiles)] for label, kind in rows]
    table.append(
        ["Infrastructure (Monthly)", *(f"US${infra.monthly_usd:.2f}" if p == "private" else "-" for p in profiles)]
    )
    widths = [max(len(r[i]) for r in table) for i in range(len(table[0]))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in table]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
