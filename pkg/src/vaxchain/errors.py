"""Exception hierarchy shared by the ledger, contracts and bench layers."""

from __future__ import annotations


class VaxchainError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(VaxchainError, ValueError):
    """Invalid profile, schedule, quote or scenario parameters."""


class ScenarioParseError(ConfigurationError):
    """A scenario or profile document could not be parsed.

    ``line`` and ``column`` are 1-based when the position is known.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class TransactionRejected(VaxchainError):
    """Raised when asking for the receipt of a rejected transaction."""

    def __init__(self, reason: str, cause: Exception | None = None):
        self.reason = reason
        self.cause = cause
        super().__init__(reason)


class ContractError(VaxchainError):
    """A contract precondition failed; the call left state untouched.

    ``code`` is the stable, machine-readable name of the failure.
    """

    code = "ContractError"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


def _contract_error(code: str, base: type[ContractError] = ContractError) -> type[ContractError]:
    return type(code, (base,), {"code": code, "__doc__": f"Contract failure ``{code}``."})


DuplicateClient = _contract_error("DuplicateClient")
DuplicatePartner = _contract_error("DuplicatePartner")
UnknownClient = _contract_error("UnknownClient")
UnknownMember = _contract_error("UnknownMember")
UnknownPartner = _contract_error("UnknownPartner")
UnknownOffer = _contract_error("UnknownOffer")
InvalidOffer = _contract_error("InvalidOffer")
InvalidRecord = _contract_error("InvalidRecord")
InvalidAmount = _contract_error("InvalidAmount")
NoStock = _contract_error("NoStock")
OpenCycleExists = _contract_error("OpenCycleExists")
InsufficientTokens = _contract_error("InsufficientTokens")
InsufficientPartnerTokens = _contract_error("InsufficientPartnerTokens")
WrongState = _contract_error("WrongState")
# a cycle id that was never created has no state at all
UnknownCycle = _contract_error("UnknownCycle", WrongState)
NotCyclePartner = _contract_error("NotCyclePartner")
NotCycleClient = _contract_error("NotCycleClient")
NotParty = _contract_error("NotParty")
BadNonce = _contract_error("BadNonce")
NonceConsumed = _contract_error("NonceConsumed")
UnknownOperation = _contract_error("UnknownOperation")
