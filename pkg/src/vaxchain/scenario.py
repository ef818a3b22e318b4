"""Scenario documents: actors, their offers, and an ordered script of contract calls.

A scenario is a JSON object::

    {
      "name": "vaccination",
      "profile": "private",          # main | ropsten | private
      "repetitions": 10,
      "seed": 42,
      "actors": [
        {"id": "alice", "role": "client", "balance_eth": "1"},
        {"id": "pharmacy", "role": "partner", "balance_eth": "1"}
      ],
      "script": [
        {"op": "register_client", "actor": "alice", "personal_data": "Alice"},
        {"op": "checkin", "actor": "alice", "member": 0, "partner": "pharmacy",
         "vaccine": "flu", "payment_mode": "full_price"},
        ...
      ]
    }

Step keys besides ``op``/``actor``/``label`` are the call arguments. Actor
ids stand in for addresses (``partner``); ``cycle`` defaults to the most
recent checkin of the trial and ``nonce`` defaults to the QR code the
counterparty is currently displaying.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .contracts import OperationKind
from .costmodel import eth_to_wei
from .errors import ConfigurationError, ScenarioParseError

ROLES = ("client", "partner")

# accepted keys per operation, beyond op/actor/label
STEP_ARGS: dict[OperationKind, frozenset[str]] = {
    OperationKind.REGISTER_CLIENT: frozenset({"personal_data", "name"}),
    OperationKind.ADD_MEMBER: frozenset({"name", "imported_vaccines"}),
    OperationKind.REGISTER_PARTNER: frozenset({"business_data", "offers"}),
    OperationKind.PURCHASE_TOKENS: frozenset({"amount"}),
    OperationKind.CHECKIN: frozenset({"member", "partner", "vaccine", "payment_mode"}),
    OperationKind.ISSUE_RELEASE_QR: frozenset({"cycle"}),
    OperationKind.CONFIRM_RELEASE: frozenset({"cycle", "nonce"}),
    OperationKind.PARTNER_CHECKOUT: frozenset({"cycle"}),
    OperationKind.CLIENT_CHECKOUT: frozenset({"cycle", "nonce"}),
    OperationKind.CANCEL_CYCLE: frozenset({"cycle"}),
}


@dataclass(frozen=True)
class Actor:
    id: str
    role: str
    balance_wei: int = 0


@dataclass(frozen=True)
class Step:
    op: OperationKind
    actor: str
    args: Mapping[str, Any] = field(default_factory=dict)
    label: str | None = None


@dataclass
class Scenario:
    name: str
    profile: str
    script: list[Step]
    actors: list[Actor]
    repetitions: int = 10
    seed: int = 42

    def __post_init__(self):
        if self.repetitions < 1:
            raise ConfigurationError("repetitions must be >= 1")
        if not self.script:
            raise ConfigurationError("script must not be empty")
        ids = [a.id for a in self.actors]
        if len(set(ids)) != len(ids):
            raise ConfigurationError("actor ids must be unique")
        for i, step in enumerate(self.script):
            if step.actor not in ids:
                raise ConfigurationError(f"script[{i}]: unknown actor {step.actor!r}")
            partner = step.args.get("partner")
            if partner is not None and partner not in ids:
                raise ConfigurationError(f"script[{i}]: unknown partner actor {partner!r}")

    def trial_seed(self, trial: int) -> int:
        return self.seed + trial

    def labels(self) -> list[str]:
        """One unique label per step; repeated ops get ``#2``, ``#3``, ... suffixes."""
        seen: Counter[str] = Counter()
        out = []
        for step in self.script:
            base = step.label or step.op.value
            seen[base] += 1
            out.append(base if seen[base] == 1 else f"{base}#{seen[base]}")
        return out

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "profile": self.profile,
            "repetitions": self.repetitions,
            "seed": self.seed,
            "actors": [
                {"id": a.id, "role": a.role, "balance_wei": a.balance_wei} for a in self.actors
            ],
            "script": [
                {"op": s.op.value, "actor": s.actor, **({"label": s.label} if s.label else {}), **dict(s.args)}
                for s in self.script
            ],
        }


def _parse_actor(i: int, raw) -> Actor:
    if not isinstance(raw, Mapping) or "id" not in raw:
        raise ConfigurationError(f"actors[{i}]: expected an object with an 'id'")
    role = raw.get("role", "client")
    if role not in ROLES:
        raise ConfigurationError(f"actors[{i}]: role must be one of {ROLES}")
    if "balance_wei" in raw:
        balance = int(raw["balance_wei"])
    else:
        balance = eth_to_wei(raw.get("balance_eth", "0"))
    return Actor(str(raw["id"]), role, balance)


def _parse_step(i: int, raw) -> Step:
    if not isinstance(raw, Mapping) or "op" not in raw or "actor" not in raw:
        raise ConfigurationError(f"script[{i}]: expected an object with 'op' and 'actor'")
    try:
        op = OperationKind(raw["op"])
    except ValueError:
        raise ConfigurationError(f"script[{i}]: unknown op {raw['op']!r}") from None
    args = {k: v for k, v in raw.items() if k not in ("op", "actor", "label")}
    unknown = set(args) - STEP_ARGS[op]
    if unknown:
        raise ConfigurationError(f"script[{i}]: unexpected keys {sorted(unknown)} for {op.value}")
    return Step(op, str(raw["actor"]), args, raw.get("label"))


def scenario_from_dict(data: Mapping) -> Scenario:
    if not isinstance(data, Mapping):
        raise ConfigurationError("a scenario must be a JSON object")
    for key in ("name", "script"):
        if key not in data:
            raise ConfigurationError(f"scenario is missing {key!r}")
    script = data["script"]
    if not isinstance(script, list):
        raise ConfigurationError("'script' must be a list")
    return Scenario(
        name=str(data["name"]),
        profile=str(data.get("profile", "private")).lower(),
        script=[_parse_step(i, s) for i, s in enumerate(script)],
        actors=[_parse_actor(i, a) for i, a in enumerate(data.get("actors", []))],
        repetitions=int(data.get("repetitions", 10)),
        seed=int(data.get("seed", 42)),
    )


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"{source}: {exc.msg}", exc.lineno, exc.colno) from None
    return scenario_from_dict(data)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), str(path))


def default_scenario_data(profile: str = "private", seed: int = 42, repetitions: int = 10) -> dict:
    """Onboarding plus one complete vaccination cycle, as a scenario document."""
    return {
        "name": "vaccination",
        "profile": profile,
        "repetitions": repetitions,
        "seed": seed,
        "actors": [
            {"id": "client", "role": "client", "balance_eth": "1"},
            {"id": "pharmacy", "role": "partner", "balance_eth": "1"},
        ],
        "script": [
            {"op": "register_client", "actor": "client", "personal_data": "Maria"},
            {"op": "add_member", "actor": "client", "name": "Joao",
             "imported_vaccines": [{"vaccine_id": "bcg", "applied_at": 0}]},
            {"op": "register_partner", "actor": "pharmacy", "business_data": "Pharmacy",
             "offers": [{"vaccine_id": "flu", "price_eth": "0.01", "stock": 10,
                         "bonus_tokens": 50, "token_discount_price": 40}]},
            {"op": "purchase_tokens", "actor": "pharmacy", "amount": 1000},
            {"op": "checkin", "actor": "client", "member": 1, "partner": "pharmacy",
             "vaccine": "flu", "payment_mode": "full_price"},
            {"op": "issue_release_qr", "actor": "pharmacy"},
            {"op": "confirm_release", "actor": "client"},
            {"op": "partner_checkout", "actor": "pharmacy"},
        ],
    }


def default_scenario(profile: str = "private", seed: int = 42, repetitions: int = 10) -> Scenario:
    return scenario_from_dict(default_scenario_data(profile, seed, repetitions))
