from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class Address:
    """20-byte account identifier, rendered as ``0x``-prefixed hex."""

    raw: bytes

    def __post_init__(self):
        if not isinstance(self.raw, bytes) or len(self.raw) != 20:
            raise ValueError("an address is exactly 20 bytes")

    @classmethod
    def from_hex(cls, text: str) -> "Address":
        text = text[2:] if text.startswith(("0x", "0X")) else text
        return cls(bytes.fromhex(text))

    @classmethod
    def from_int(cls, value: int) -> "Address":
        return cls(value.to_bytes(20, "big"))

    @property
    def hex(self) -> str:
        return "0x" + self.raw.hex()

    def __str__(self) -> str:
        return self.hex

    def __repr__(self) -> str:
        return f"Address({self.hex})"
