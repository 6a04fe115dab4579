"""Layer 6: hash-chained append-only audit log, trace reconstruction,
configuration snapshots, and completeness reporting.

The log is the system's memory: every scorecard metric and every trace is
computed from it alone. Append is the only mutation; configuration rollback
never rewrites history.
"""

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from .errors import UnknownSnapshot, UnknownTask

GENESIS_DIGEST = hashlib.sha256(b"").hexdigest()

NOT_APPLICABLE = "not_applicable"

TRACE_FIELDS = (
    "model_choice",
    "version",
    "prompt",
    "context_boundaries",
    "rule_triggers",
    "human_interventions",
    "action_outcome",
)


class EventKind(str, Enum):
    INGEST = "ingest"
    ROUTE_ATTEMPT = "route_attempt"
    NORMALIZE = "normalize"
    CONSTRAINT_VERDICT = "constraint_verdict"
    ENQUEUE = "enqueue"
    HUMAN_DECISION = "human_decision"
    ESCALATION = "escalation"
    ACTION = "action"
    ADMIN_PIN = "admin_pin"
    ADMIN_ROLLBACK = "admin_rollback"
    POLICY_RELOAD = "policy_reload"
    SCENARIO_MARKER = "scenario_marker"


def canonical_payload(payload: Dict[str, Any]) -> str:
    """Canonical serialization: JSON with sorted keys and fixed separators."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def event_digest(seq: int, kind: str, payload: Dict[str, Any], prev_digest: str) -> str:
    material = f"{seq}|{kind}|{canonical_payload(payload)}|{prev_digest}"
    return hashlib.sha256(material.encode()).hexdigest()


@dataclass(frozen=True)
class AuditEvent:
    seq: int
    event_kind: EventKind
    task_id: Optional[str]
    payload: Dict[str, Any]
    prev_digest: str
    this_digest: str

    def to_line(self) -> str:
        record = {
            "seq": self.seq,
            "kind": self.event_kind.value,
            "task_id": self.task_id,
            "payload": self.payload,
            "prev_digest": self.prev_digest,
            "this_digest": self.this_digest,
        }
        return json.dumps(record, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_line(cls, line: str) -> "AuditEvent":
        record = json.loads(line)
        return cls(
            seq=record["seq"],
            event_kind=EventKind(record["kind"]),
            task_id=record["task_id"],
            payload=record["payload"],
            prev_digest=record["prev_digest"],
            this_digest=record["this_digest"],
        )


@dataclass(frozen=True)
class ChainVerdict:
    valid: bool
    broken_at: Optional[int] = None

    def __str__(self) -> str:
        return "valid" if self.valid else f"broken_at({self.broken_at})"


class AuditLog:
    """Append-only hash-chained event log."""

    def __init__(self, events: Optional[List[AuditEvent]] = None, sink: Optional[Any] = None):
        self.events: List[AuditEvent] = list(events or [])
        self.sink = sink  # optional writable text stream; one line per event

    def append(
        self, kind: EventKind, payload: Dict[str, Any], task_id: Optional[str] = None
    ) -> AuditEvent:
        seq = len(self.events)
        prev = self.events[-1].this_digest if self.events else GENESIS_DIGEST
        event = AuditEvent(
            seq=seq,
            event_kind=kind,
            task_id=task_id,
            payload=payload,
            prev_digest=prev,
            this_digest=event_digest(seq, kind.value, payload, prev),
        )
        self.events.append(event)
        if self.sink is not None:
            self.sink.write(event.to_line() + "\n")
            self.sink.flush()
        return event

    def verify_chain(self) -> ChainVerdict:
        prev = GENESIS_DIGEST
        for i, event in enumerate(self.events):
            if event.seq != i or event.prev_digest != prev:
                return ChainVerdict(False, i)
            expected = event_digest(event.seq, event.event_kind.value, event.payload, prev)
            if event.this_digest != expected:
                return ChainVerdict(False, i)
            prev = event.this_digest
        return ChainVerdict(True)

    # --- persistence: one canonical JSON record per line ---

    def to_text(self) -> str:
        return "".join(e.to_line() + "\n" for e in self.events)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "AuditLog":
        return cls([AuditEvent.from_line(line) for line in text.splitlines() if line.strip()])

    @classmethod
    def read(cls, path: str | Path) -> "AuditLog":
        return cls.from_text(Path(path).read_text())

    # --- queries ---

    def task_events(self, task_id: str) -> List[AuditEvent]:
        return [e for e in self.events if e.task_id == task_id]

    def task_ids(self) -> List[str]:
        seen: Dict[str, None] = {}
        for e in self.events:
            if e.task_id is not None and e.task_id not in seen:
                seen[e.task_id] = None
        return list(seen)


@dataclass(frozen=True)
class DecisionTrace:
    """The seven trace fields for one task.

    A field is None when the log never populated it, or NOT_APPLICABLE when
    the task legitimately terminated before that stage.
    """

    task_id: str
    model_choice: Any = None
    version: Any = None
    prompt: Any = None
    context_boundaries: Any = None
    rule_triggers: Any = None
    human_interventions: Any = None
    action_outcome: Any = None
    rationale_digest: Any = None  # availability of the supplier's rationale

    def field_values(self) -> Dict[str, Any]:
        return {name: getattr(self, name) for name in TRACE_FIELDS}

    def is_complete(self) -> bool:
        return not self.missing_fields()

    def missing_fields(self) -> List[str]:
        missing = [name for name, value in self.field_values().items() if value is None]
        # An action taken on an output whose rationale the supplier withheld
        # is an audit gap even though the seven fields are populated.
        if (
            isinstance(self.action_outcome, dict)
            and "action_id" in self.action_outcome
            and self.model_choice not in (None, NOT_APPLICABLE)
            and self.rationale_digest is None
        ):
            missing.append("rationale")
        return missing


def reconstruct_trace(task_id: str, log: AuditLog) -> DecisionTrace:
    """Assemble the seven trace fields from the task's events."""
    return _trace_from_events(task_id, log.task_events(task_id))


def _trace_from_events(task_id: str, events: List[AuditEvent]) -> DecisionTrace:
    if not events:
        raise UnknownTask(task_id)

    fields: Dict[str, Any] = {name: None for name in TRACE_FIELDS}
    rationale_digest = None
    interventions: List[Dict[str, Any]] = []
    terminal: Optional[str] = None

    for e in events:
        p = e.payload
        if e.event_kind is EventKind.INGEST:
            if p.get("status") == "rejected":
                terminal = p.get("reason", "rejected_at_ingest")
                fields["model_choice"] = NOT_APPLICABLE
                fields["version"] = NOT_APPLICABLE
                fields["rule_triggers"] = NOT_APPLICABLE
                fields["human_interventions"] = NOT_APPLICABLE
                fields["prompt"] = p.get("payload_digest", NOT_APPLICABLE)
                fields["context_boundaries"] = {
                    "domain_tag": p.get("domain_tag", NOT_APPLICABLE),
                    "provenance_tier": NOT_APPLICABLE,
                }
            else:
                fields["prompt"] = p["payload_digest"]
                fields["context_boundaries"] = {
                    "domain_tag": p["domain_tag"],
                    "provenance_tier": p["provenance_tier"],
                }
        elif e.event_kind is EventKind.ROUTE_ATTEMPT and p.get("phase") == "decision":
            if p["final_state"] != "routed":
                terminal = "degraded"
                fields["model_choice"] = NOT_APPLICABLE
                fields["version"] = NOT_APPLICABLE
                fields["rule_triggers"] = NOT_APPLICABLE
                if p["final_state"] == "degraded_fail_closed":
                    fields["human_interventions"] = NOT_APPLICABLE
        elif e.event_kind is EventKind.NORMALIZE:
            fields["model_choice"] = p["adapter_id"]
            fields["version"] = p["version_used"]
            rationale_digest = p.get("rationale_digest")
        elif e.event_kind is EventKind.CONSTRAINT_VERDICT:
            fields["rule_triggers"] = list(p["triggered_rules"])
            if p["outcome"] == "denied":
                terminal = "denied"
                fields["human_interventions"] = NOT_APPLICABLE
        elif e.event_kind is EventKind.ESCALATION:
            interventions.append({"escalation": p.get("item_id"), "to_level": p.get("to_level")})
        elif e.event_kind is EventKind.HUMAN_DECISION:
            interventions.append(
                {
                    "principal": p["principal"],
                    "decision": p["decision"],
                    "origin": p.get("origin", "human"),
                }
            )
            if p["decision"] == "reject":
                terminal = "rejected"
        elif e.event_kind is EventKind.ACTION:
            fields["action_outcome"] = {"action_id": p["action_id"]}

    if interventions:
        fields["human_interventions"] = interventions
    if fields["action_outcome"] is None and terminal is not None:
        fields["action_outcome"] = {"terminal": terminal}
    return DecisionTrace(task_id=task_id, rationale_digest=rationale_digest, **fields)


@dataclass(frozen=True)
class AuditCompleteness:
    tasks_total: int
    tasks_complete_trace: int
    completeness_ratio: float
    missing_field_histogram: Dict[str, int]


def completeness_report(log: AuditLog) -> AuditCompleteness:
    """Classify every task's trace completeness; ratio is 1.0 for empty logs."""
    by_task: Dict[str, List[AuditEvent]] = {}
    for event in log.events:
        if event.task_id is not None:
            by_task.setdefault(event.task_id, []).append(event)
    task_ids = list(by_task)
    histogram: Dict[str, int] = {}
    complete = 0
    for task_id in task_ids:
        missing = _trace_from_events(task_id, by_task[task_id]).missing_fields()
        if missing:
            for name in missing:
                histogram[name] = histogram.get(name, 0) + 1
        else:
            complete += 1
    total = len(task_ids)
    ratio = complete / total if total else 1.0
    return AuditCompleteness(total, complete, ratio, histogram)


# --- configuration snapshots ---


@dataclass(frozen=True)
class SnapshotRef:
    label: str
    digest: str


class SnapshotStore:
    """Stores canonical configuration serializations by label.

    Snapshots capture configuration only; the audit log is never part of a
    snapshot and never rolled back.
    """

    def __init__(self):
        self._snapshots: Dict[str, Tuple[str, str]] = {}

    def snapshot(self, label: str, config_text: str) -> SnapshotRef:
        digest = hashlib.sha256(config_text.encode()).hexdigest()
        self._snapshots[label] = (config_text, digest)
        return SnapshotRef(label, digest)

    def restore(self, ref: SnapshotRef) -> str:
        entry = self._snapshots.get(ref.label)
        if entry is None or entry[1] != ref.digest:
            raise UnknownSnapshot(ref.label)
        return entry[0]
