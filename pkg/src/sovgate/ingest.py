"""Layer 1: controlled task intake with source classification and provenance.

Unknown or conflicting sources never fail the request; they degrade the
resolved reliability tier instead (fail-safe, never fail-open).
"""

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, FrozenSet, List

from .errors import MalformedRequest, RejectedDomain


class ReliabilityTier(str, Enum):
    A_VERIFIED = "A_verified"
    B_CORROBORATED = "B_corroborated"
    C_SINGLE_SOURCE = "C_single_source"
    D_UNVERIFIED = "D_unverified"


# Most reliable first; a higher index is a less reliable tier.
RELIABILITY_ORDER: List[ReliabilityTier] = [
    ReliabilityTier.A_VERIFIED,
    ReliabilityTier.B_CORROBORATED,
    ReliabilityTier.C_SINGLE_SOURCE,
    ReliabilityTier.D_UNVERIFIED,
]


def least_reliable(*tiers: ReliabilityTier) -> ReliabilityTier:
    return max(tiers, key=RELIABILITY_ORDER.index)


class Channel(str, Enum):
    SENSOR = "sensor"
    REPORT = "report"
    OPEN_SOURCE = "open_source"
    SYNTHETIC = "synthetic"


class UncertaintyFlag(str, Enum):
    UNKNOWN_SOURCE = "unknown_source"
    CONFLICTING_DECLARATIONS = "conflicting_declarations"
    STALE_DATA = "stale_data"


@dataclass(frozen=True)
class SourceDescriptor:
    source_id: str
    declared_tier: ReliabilityTier
    channel: Channel


@dataclass(frozen=True)
class ProvenanceRecord:
    source_id: str
    resolved_tier: ReliabilityTier
    uncertainty_flags: FrozenSet[UncertaintyFlag]
    ingest_time: float


@dataclass(frozen=True)
class RawRequest:
    """The wire-shaped request before it becomes a TaskEnvelope."""

    source_id: str
    domain_tag: str
    body: bytes
    requested_by: str


@dataclass(frozen=True)
class TaskEnvelope:
    task_id: str
    domain_tag: str
    payload_digest: str
    provenance: ProvenanceRecord
    requested_by: str


@dataclass
class SourceRegistry:
    """Registry of declared sources; duplicate declarations are retained so
    conflicts stay observable at classification time."""

    entries: Dict[str, List[SourceDescriptor]] = field(default_factory=dict)

    def add(self, descriptor: SourceDescriptor) -> None:
        self.entries.setdefault(descriptor.source_id, []).append(descriptor)

    def declarations(self, source_id: str) -> List[SourceDescriptor]:
        return list(self.entries.get(source_id, []))


def load_source_registry(path: str | Path) -> SourceRegistry:
    """Parse the line-oriented source registry file.

    Format: one ``source_id declared_tier channel`` record per line,
    whitespace separated; ``#`` starts a comment.
    """
    registry = SourceRegistry()
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise MalformedRequest(
                f"source registry line {lineno}: expected 3 fields, got {len(parts)}"
            )
        source_id, tier_s, channel_s = parts
        try:
            tier = ReliabilityTier(tier_s)
            channel = Channel(channel_s)
        except ValueError as exc:
            raise MalformedRequest(f"source registry line {lineno}: {exc}") from exc
        registry.add(SourceDescriptor(source_id, tier, channel))
    return registry


def payload_digest(body: bytes) -> str:
    return hashlib.sha256(body).hexdigest()


def classify_source(
    source_id: str, registry: SourceRegistry, now: float = 0.0
) -> ProvenanceRecord:
    """Resolve a source's reliability tier against the registry.

    Unknown sources resolve to D_unverified with the unknown_source flag;
    conflicting declarations resolve to the least reliable declared tier.
    Resolution never upgrades a source.
    """
    declarations = registry.declarations(source_id)
    if not declarations:
        return ProvenanceRecord(
            source_id=source_id,
            resolved_tier=ReliabilityTier.D_UNVERIFIED,
            uncertainty_flags=frozenset({UncertaintyFlag.UNKNOWN_SOURCE}),
            ingest_time=now,
        )
    tiers = {d.declared_tier for d in declarations}
    flags: set[UncertaintyFlag] = set()
    if len(tiers) > 1:
        flags.add(UncertaintyFlag.CONFLICTING_DECLARATIONS)
    return ProvenanceRecord(
        source_id=source_id,
        resolved_tier=least_reliable(*tiers),
        uncertainty_flags=frozenset(flags),
        ingest_time=now,
    )


def ingest_task(
    raw: RawRequest,
    registry: SourceRegistry,
    taxonomy: FrozenSet[str] | set[str],
    allocate_task_id: Callable[[], str],
    now: float = 0.0,
) -> TaskEnvelope:
    """Turn a raw request into a provenance-tagged envelope.

    Raises RejectedDomain for tags outside the configured taxonomy and
    MalformedRequest when required fields are missing; both are terminal.
    """
    if not raw.source_id or raw.body is None or not raw.domain_tag or not raw.requested_by:
        raise MalformedRequest("request missing source_id, domain_tag, body or requested_by")
    if raw.domain_tag not in taxonomy:
        raise RejectedDomain(f"domain_tag {raw.domain_tag!r} not in configured taxonomy")
    return TaskEnvelope(
        task_id=allocate_task_id(),
        domain_tag=raw.domain_tag,
        payload_digest=payload_digest(raw.body),
        provenance=classify_source(raw.source_id, registry, now=now),
        requested_by=raw.requested_by,
    )
