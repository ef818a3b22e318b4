from pathlib import Path

import pytest

from vaxchain.address import Address
from vaxchain.contracts import ContractState
from vaxchain.rng import ChainRandom

CLIENT = Address.from_int(0xC1)
OTHER_CLIENT = Address.from_int(0xC2)
PARTNER = Address.from_int(0xA1)
OTHER_PARTNER = Address.from_int(0xA2)
STRANGER = Address.from_int(0xFF)

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

FLU = {"vaccine_id": "flu", "price_eth": "0.01", "stock": 10, "bonus_tokens": 50, "token_discount_price": 40}


@pytest.fixture
def state():
    return ContractState(ChainRandom(1))


@pytest.fixture
def world(state):
    """One client, one partner offering flu, partner holding 1000 tokens."""
    state.register_client(CLIENT, "Maria")
    state.register_partner(PARTNER, "Pharmacy", [dict(FLU)])
    state.purchase_tokens(PARTNER, 1000)
    return state


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
