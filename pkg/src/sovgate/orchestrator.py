"""Layer 3: sovereign routing, fallback, confidence gates, and version pins.

Routing walks a per-domain total preference order; supplier refusals and
withdrawals are recorded attempts, never crashes. Version pins are
append-only: rollback appends the previous version rather than truncating
history, so version changes are always admin-attributable.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .adapters import (
    AdapterRegistry,
    AnalyticalOutput,
    Availability,
    RawSupplierResponse,
    SupplierStatus,
    normalize,
)
from .audit import AuditLog, EventKind
from .errors import (
    MalformedPolicy,
    NormalizationFailure,
    NothingToRollback,
    UnauthorizedPrincipal,
    UnconfiguredDomain,
    UnknownAdapter,
)
from .ingest import TaskEnvelope

logger = logging.getLogger(__name__)

DEGRADED = "DEGRADED"

# Adapters with this supplier name count as internal for internal_only mode.
INTERNAL_SUPPLIER = "internal"


class DegradedMode(str, Enum):
    FAIL_CLOSED = "fail_closed"
    QUEUE_FOR_HUMAN = "queue_for_human"
    INTERNAL_ONLY = "internal_only"


class AttemptOutcome(str, Enum):
    OK = "ok"
    REFUSED = "refused"
    UNAVAILABLE = "unavailable"
    VERSION_MISMATCH = "version_mismatch"
    LOW_CONFIDENCE = "low_confidence"


class FinalState(str, Enum):
    ROUTED = "routed"
    DEGRADED_FAIL_CLOSED = "degraded_fail_closed"
    DEGRADED_QUEUED = "degraded_queued"


class VersionVerdict(str, Enum):
    MATCH = "match"
    MISMATCH = "mismatch"
    UNPINNED = "unpinned"


@dataclass(frozen=True)
class DomainRoute:
    preference: Tuple[str, ...]
    confidence_threshold: float
    degraded_mode: DegradedMode


@dataclass(frozen=True)
class RoutingPolicy:
    domains: Dict[str, DomainRoute]


@dataclass(frozen=True)
class PinEntry:
    version: str
    pinned_at: float
    principal: str


@dataclass(frozen=True)
class VersionPin:
    adapter_id: str
    pin_history: Tuple[PinEntry, ...]

    @property
    def pinned_version(self) -> str:
        return self.pin_history[-1].version


@dataclass
class PinStore:
    pins: Dict[str, VersionPin] = field(default_factory=dict)

    def pin_for(self, adapter_id: str) -> Optional[VersionPin]:
        return self.pins.get(adapter_id)


@dataclass(frozen=True)
class RoutingDecision:
    task_id: str
    chosen_adapter: str  # adapter_id or DEGRADED
    attempts: Tuple[Tuple[str, AttemptOutcome], ...]
    final_state: FinalState


# --- version sovereignty ---


def verify_version(raw: RawSupplierResponse, pins: PinStore) -> VersionVerdict:
    pin = pins.pin_for(raw.adapter_id)
    if pin is None:
        return VersionVerdict.UNPINNED
    if raw.reported_version == pin.pinned_version:
        return VersionVerdict.MATCH
    return VersionVerdict.MISMATCH


def pin_version(
    adapter_id: str,
    version: str,
    principal,
    pins: PinStore,
    registry: AdapterRegistry,
    audit: Optional[AuditLog] = None,
    now: float = 0.0,
) -> None:
    """Append a new pin; requires an admin principal."""
    if not getattr(principal, "admin", False):
        raise UnauthorizedPrincipal(f"{getattr(principal, 'principal_id', principal)} is not admin")
    registry.descriptor(adapter_id)  # raises UnknownAdapter
    entry = PinEntry(version, now, principal.principal_id)
    existing = pins.pins.get(adapter_id)
    history = (existing.pin_history if existing else ()) + (entry,)
    pins.pins[adapter_id] = VersionPin(adapter_id, history)
    if audit is not None:
        audit.append(
            EventKind.ADMIN_PIN,
            {"adapter_id": adapter_id, "version": version, "principal": principal.principal_id},
        )


def rollback_version(
    adapter_id: str,
    principal,
    pins: PinStore,
    audit: Optional[AuditLog] = None,
    now: float = 0.0,
) -> None:
    """Re-pin the previous version as a fresh append (history is never cut)."""
    if not getattr(principal, "admin", False):
        raise UnauthorizedPrincipal(f"{getattr(principal, 'principal_id', principal)} is not admin")
    pin = pins.pins.get(adapter_id)
    if pin is None or len(pin.pin_history) < 2:
        raise NothingToRollback(adapter_id)
    previous = pin.pin_history[-2].version
    entry = PinEntry(previous, now, principal.principal_id)
    pins.pins[adapter_id] = VersionPin(adapter_id, pin.pin_history + (entry,))
    if audit is not None:
        audit.append(
            EventKind.ADMIN_ROLLBACK,
            {"adapter_id": adapter_id, "version": previous, "principal": principal.principal_id},
        )


# --- routing ---


def route(
    envelope: TaskEnvelope,
    registry: AdapterRegistry,
    policy: RoutingPolicy,
    pins: PinStore,
    audit: Optional[AuditLog] = None,
    strict_unpinned: bool = True,
    now: float = 0.0,
) -> Tuple[RoutingDecision, Optional[AnalyticalOutput]]:
    """Walk the domain's preference list and return the first acceptable output.

    A mismatched (or, under strict pinning, unpinned) version is never
    normalized. On exhaustion the domain's degraded mode applies;
    internal_only makes one more pass over internal adapters before failing
    closed.
    """
    domain = envelope.domain_tag
    if domain not in policy.domains:
        raise UnconfiguredDomain(domain)
    route_cfg = policy.domains[domain]

    attempts: List[Tuple[str, AttemptOutcome]] = []

    def log_attempt(adapter_id: str, outcome: AttemptOutcome, raw: Optional[RawSupplierResponse]):
        attempts.append((adapter_id, outcome))
        if audit is not None:
            pin = pins.pin_for(adapter_id)
            audit.append(
                EventKind.ROUTE_ATTEMPT,
                {
                    "phase": "attempt",
                    "origin": "policy",
                    "adapter_id": adapter_id,
                    "outcome": outcome.value,
                    "reported_version": raw.reported_version if raw else None,
                    "pinned_version": pin.pinned_version if pin else None,
                },
                task_id=envelope.task_id,
            )

    def try_adapter(adapter_id: str) -> Optional[AnalyticalOutput]:
        try:
            descriptor = registry.descriptor(adapter_id)
        except UnknownAdapter:
            logger.warning("preference list names unregistered adapter %s", adapter_id)
            return None
        if domain not in descriptor.certified_domains:
            return None
        if registry.health_probe(adapter_id) is Availability.WITHDRAWN:
            # Recorded, not invoked: withdrawal is an observable attempt.
            log_attempt(adapter_id, AttemptOutcome.UNAVAILABLE, None)
            return None
        raw = registry.invoke(adapter_id, envelope, produced_at=now)
        if raw.status is SupplierStatus.REFUSED:
            log_attempt(adapter_id, AttemptOutcome.REFUSED, raw)
            return None
        if raw.status is SupplierStatus.UNAVAILABLE:
            log_attempt(adapter_id, AttemptOutcome.UNAVAILABLE, raw)
            return None
        verdict = verify_version(raw, pins)
        if verdict is VersionVerdict.MISMATCH or (
            verdict is VersionVerdict.UNPINNED and strict_unpinned
        ):
            log_attempt(adapter_id, AttemptOutcome.VERSION_MISMATCH, raw)
            return None
        try:
            output = normalize(raw, descriptor, envelope.task_id, produced_at=now)
        except NormalizationFailure:
            log_attempt(adapter_id, AttemptOutcome.UNAVAILABLE, raw)
            return None
        if output.confidence < route_cfg.confidence_threshold:
            log_attempt(adapter_id, AttemptOutcome.LOW_CONFIDENCE, raw)
            return None
        log_attempt(adapter_id, AttemptOutcome.OK, raw)
        if audit is not None:
            audit.append(
                EventKind.NORMALIZE,
                {
                    "adapter_id": adapter_id,
                    "version_used": output.version_used,
                    "kind": output.kind.value,
                    "confidence": output.confidence,
                    "rationale_digest": output.rationale_digest,
                },
                task_id=envelope.task_id,
            )
        return output

    def finish(chosen: str, state: FinalState, output: Optional[AnalyticalOutput]):
        if audit is not None:
            audit.append(
                EventKind.ROUTE_ATTEMPT,
                {
                    "phase": "decision",
                    "origin": "policy",
                    "final_state": state.value,
                    "chosen_adapter": chosen,
                },
                task_id=envelope.task_id,
            )
        return RoutingDecision(envelope.task_id, chosen, tuple(attempts), state), output

    for adapter_id in route_cfg.preference:
        output = try_adapter(adapter_id)
        if output is not None:
            return finish(adapter_id, FinalState.ROUTED, output)

    if route_cfg.degraded_mode is DegradedMode.INTERNAL_ONLY:
        for adapter_id in route_cfg.preference:
            try:
                descriptor = registry.descriptor(adapter_id)
            except UnknownAdapter:
                continue
            if descriptor.supplier_name != INTERNAL_SUPPLIER:
                continue
            # Internal adapters were already attempted above; a second pass
            # only matters when the first failed on confidence, so re-invoke.
            output = try_adapter(adapter_id)
            if output is not None:
                return finish(adapter_id, FinalState.ROUTED, output)
        return finish(DEGRADED, FinalState.DEGRADED_FAIL_CLOSED, None)

    if route_cfg.degraded_mode is DegradedMode.QUEUE_FOR_HUMAN:
        return finish(DEGRADED, FinalState.DEGRADED_QUEUED, None)
    return finish(DEGRADED, FinalState.DEGRADED_FAIL_CLOSED, None)


# --- routing policy file grammar ---
#
#   [domain summarization]
#   prefer = alpha,bravo
#   threshold = 0.7
#   degraded_mode = queue_for_human


def load_routing_policy(
    document: str,
    taxonomy: frozenset,
    registry: Optional[AdapterRegistry] = None,
) -> RoutingPolicy:
    domains: Dict[str, DomainRoute] = {}
    current: Optional[str] = None
    fields_acc: Dict[str, str] = {}

    def flush(lineno: int):
        nonlocal current, fields_acc
        if current is None:
            return
        missing = {"prefer", "threshold", "degraded_mode"} - set(fields_acc)
        if missing:
            raise MalformedPolicy(
                f"line {lineno}: domain {current!r} missing {sorted(missing)}", line=lineno
            )
        preference = tuple(a.strip() for a in fields_acc["prefer"].split(",") if a.strip())
        if registry is not None:
            for adapter_id in preference:
                if adapter_id not in registry.descriptors:
                    raise MalformedPolicy(
                        f"line {lineno}: unknown adapter {adapter_id!r} in preference list",
                        line=lineno,
                    )
        try:
            threshold = float(fields_acc["threshold"])
            mode = DegradedMode(fields_acc["degraded_mode"])
        except ValueError as exc:
            raise MalformedPolicy(f"line {lineno}: {exc}", line=lineno) from exc
        if not 0.0 <= threshold <= 1.0:
            raise MalformedPolicy(f"line {lineno}: threshold outside [0,1]", line=lineno)
        domains[current] = DomainRoute(preference, threshold, mode)
        current, fields_acc = None, {}

    lineno = 0
    for lineno, rawline in enumerate(document.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[domain") and line.endswith("]"):
            flush(lineno)
            name = line[len("[domain") : -1].strip()
            if name not in taxonomy:
                raise MalformedPolicy(f"line {lineno}: unknown domain {name!r}", line=lineno)
            if name in domains:
                raise MalformedPolicy(f"line {lineno}: duplicate domain {name!r}", line=lineno)
            current = name
            continue
        if current is None:
            raise MalformedPolicy(f"line {lineno}: statement outside [domain] block", line=lineno)
        if "=" not in line:
            raise MalformedPolicy(f"line {lineno}: expected key = value", line=lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in ("prefer", "threshold", "degraded_mode"):
            raise MalformedPolicy(f"line {lineno}: unknown key {key!r}", line=lineno)
        fields_acc[key] = value
    flush(lineno + 1)
    return RoutingPolicy(domains)


def load_routing_policy_file(
    path: str | Path, taxonomy: frozenset, registry: Optional[AdapterRegistry] = None
) -> RoutingPolicy:
    return load_routing_policy(Path(path).read_text(), taxonomy, registry)


def serialize_routing_policy(policy: RoutingPolicy) -> str:
    blocks = []
    for name in sorted(policy.domains):
        cfg = policy.domains[name]
        blocks.append(
            "\n".join(
                [
                    f"[domain {name}]",
                    f"prefer = {','.join(cfg.preference)}",
                    f"threshold = {cfg.confidence_threshold}",
                    f"degraded_mode = {cfg.degraded_mode.value}",
                ]
            )
        )
    return "\n\n".join(blocks) + ("\n" if blocks else "")
