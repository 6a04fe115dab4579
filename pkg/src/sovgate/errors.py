"""Exception hierarchy shared by all gateway modules.

Every error carries a stable machine-readable ``code`` so the API layer can
surface module errors without translation tables.
"""


class GatewayError(Exception):
    """Base class for all gateway errors."""

    code = "GATEWAY_ERROR"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


# --- ingest ---

class RejectedDomain(GatewayError):
    code = "REJECTED_DOMAIN"


class MalformedRequest(GatewayError):
    code = "MALFORMED_REQUEST"


# --- adapters ---

class InvalidDescriptor(GatewayError):
    code = "INVALID_DESCRIPTOR"


class UnknownAdapter(GatewayError):
    code = "UNKNOWN_ADAPTER"


class NormalizationFailure(GatewayError):
    code = "NORMALIZATION_FAILURE"


# --- orchestrator ---

class UnconfiguredDomain(GatewayError):
    code = "UNCONFIGURED_DOMAIN"


class UnauthorizedPrincipal(GatewayError):
    code = "UNAUTHORIZED_PRINCIPAL"


class NothingToRollback(GatewayError):
    code = "NOTHING_TO_ROLLBACK"


# --- constraints ---

class MalformedPolicy(GatewayError):
    code = "MALFORMED_POLICY"

    def __init__(self, message: str = "", line: int | None = None):
        super().__init__(message)
        self.line = line


# --- authority ---

class DeniedVerdict(GatewayError):
    code = "DENIED_VERDICT"


class AlreadyDecided(GatewayError):
    code = "ALREADY_DECIDED"


class EmptyRationale(GatewayError):
    code = "EMPTY_RATIONALE"


class MaxLevelReached(GatewayError):
    code = "MAX_LEVEL_REACHED"


class RejectedDecision(GatewayError):
    code = "REJECTED_DECISION"


class UnknownItem(GatewayError):
    code = "UNKNOWN_ITEM"


class UnknownPrincipal(GatewayError):
    code = "UNKNOWN_PRINCIPAL"


# --- audit ---

class UnknownTask(GatewayError):
    code = "UNKNOWN_TASK"


class UnknownSnapshot(GatewayError):
    code = "UNKNOWN_SNAPSHOT"


class BrokenChain(GatewayError):
    code = "BROKEN_CHAIN"


# --- threat-sim ---

class InvalidScenario(GatewayError):
    code = "INVALID_SCENARIO"


class IncompleteSuite(GatewayError):
    code = "INCOMPLETE_SUITE"


# --- gateway ---

class MalformedConfig(GatewayError):
    code = "MALFORMED_CONFIG"
