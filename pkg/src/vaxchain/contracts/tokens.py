from __future__ import annotations

from ..address import Address
from ..errors import InsufficientTokens, InvalidAmount


class TokenLedger:
    """Balances of the incentive token.

    Tokens enter circulation only through :meth:`mint` and are never
    destroyed, so the sum of balances always equals ``total_minted``.
    """

    def __init__(self):
        self.balances: dict[Address, int] = {}
        self.total_minted = 0

    def balance(self, who: Address) -> int:
        return self.balances.get(who, 0)

    def mint(self, to: Address, amount: int) -> int:
        if not isinstance(amount, int) or amount <= 0:
            raise InvalidAmount(f"mint amount must be a positive integer, got {amount!r}")
        self.balances[to] = self.balance(to) + amount
        self.total_minted += amount
        return self.balances[to]

    def can_transfer(self, src: Address, amount: int) -> bool:
        return 0 <= amount <= self.balance(src)

    def transfer(self, src: Address, dst: Address, amount: int, error=InsufficientTokens) -> None:
        if amount < 0:
            raise InvalidAmount(f"negative transfer {amount}")
        if amount > self.balance(src):
            raise error(f"{src} holds {self.balance(src)} tokens, needs {amount}")
        if amount == 0:
            return
        self.balances[src] = self.balance(src) - amount
        self.balances[dst] = self.balance(dst) + amount

    def to_dict(self) -> dict:
        return {
            "balances": {str(a): b for a, b in sorted(self.balances.items())},
            "total_minted": self.total_minted,
        }
