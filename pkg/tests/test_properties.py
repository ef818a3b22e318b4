from collections import Counter

import pytest

from vaxchain.contracts import CycleState
from vaxchain.contracts.tokens import TokenLedger
from vaxchain.errors import WrongState

from .fuzz import Fuzzer, Violation, run_sequence


def test_random_sequences_hold_invariants():
    calls = Counter()
    for seed in range(2000):
        calls += run_sequence(seed).calls
    # the mix must actually exercise every operation both ways
    for op in ("checkin", "confirm_release", "partner_checkout", "client_checkout", "cancel_cycle"):
        assert calls[op, True] > 50 and calls[op, False] > 50, op


def test_sequences_complete_both_payment_modes():
    modes = Counter()
    for seed in range(300):
        for c in run_sequence(seed).state.cycles:
            if c.state is CycleState.COMPLETED:
                modes[c.payment_mode] += 1
    assert len(modes) == 2


def test_fuzzer_catches_token_leak(monkeypatch):
    real = TokenLedger.transfer

    def leaky(self, src, dst, amount, **kw):
        real(self, src, dst, amount, **kw)
        self.balances[dst] = self.balance(dst) + 1

    monkeypatch.setattr(TokenLedger, "transfer", leaky)
    with pytest.raises(Violation, match="token supply"):
        for seed in range(200):
            run_sequence(seed)


def test_fuzzer_catches_nonce_reuse(monkeypatch):
    fuzz = Fuzzer(1)
    fuzz.setup()
    fuzz.accepted_nonces.add(0xABC)
    # a contract that accepts anything would validate the same code twice
    monkeypatch.setattr(fuzz.state, "apply", lambda *a, **k: None)
    client = next(iter(fuzz.state.clients))
    with pytest.raises(Violation, match="twice"):
        fuzz.do("confirm_release", client, {"cycle_id": 0, "nonce": "abc"})


def test_fuzzer_catches_mutating_rejection(monkeypatch):
    fuzz = Fuzzer(2)
    fuzz.setup()

    def sloppy(kind, sender, payload, now):
        fuzz.state.clients[sender].reputation += 1
        raise WrongState("nope")

    monkeypatch.setattr(fuzz.state, "apply", sloppy)
    with pytest.raises(Violation, match="mutated"):
        fuzz.do("cancel_cycle", next(iter(fuzz.state.clients)), {"cycle_id": 0})
