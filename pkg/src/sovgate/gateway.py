"""Composes the six layers into the seven-step pipeline and owns runtime
configuration: loading, atomic reload, snapshots, and config rollback.

Startup is fail-closed: every referenced file must load or boot aborts.
"""

import itertools
import logging
import os
import time
import uuid
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, Optional

from . import adapters as adapters_mod
from .adapters import (
    AdapterDescriptor,
    AdapterRegistry,
    MockSupplier,
    SupplierBehaviorScript,
    parse_script,
)
from .audit import AuditLog, EventKind, SnapshotRef, SnapshotStore, reconstruct_trace
from .authority import (
    AuthorizationDecision,
    DecisionKind,
    Principal,
    ReviewQueue,
    load_principals,
)
from .constraints import RuleSet, VerdictOutcome, evaluate, load_ruleset, serialize_ruleset
from .errors import (
    GatewayError,
    MalformedConfig,
    MalformedPolicy,
    MalformedRequest,
    RejectedDomain,
    UnauthorizedPrincipal,
    UnknownTask,
)
from .ingest import RawRequest, SourceRegistry, ingest_task, load_source_registry
from .orchestrator import (
    FinalState,
    PinStore,
    RoutingPolicy,
    load_routing_policy,
    pin_version,
    rollback_version,
    serialize_routing_policy,
)
from .orchestrator import route as route_task

logger = logging.getLogger(__name__)


class TaskState(str, Enum):
    ACTION_ISSUED = "action_issued"
    REJECTED = "rejected"
    DENIED = "denied"
    DEGRADED = "degraded"
    PENDING = "pending"


@dataclass
class GatewayConfig:
    taxonomy: frozenset
    sources_path: Path
    routing_policy_path: Path
    ruleset_path: Path
    principals_path: Path
    audit_log_path: Optional[Path] = None
    adapters_path: Optional[Path] = None
    max_escalation_level: int = 3
    listen: str = "127.0.0.1:8470"
    strict_unpinned: bool = True


_PATH_KEYS = {
    "sources": "sources_path",
    "routing_policy": "routing_policy_path",
    "ruleset": "ruleset_path",
    "principals": "principals_path",
    "adapters": "adapters_path",
    "audit_log": "audit_log_path",
}


def load_config(path: str | Path) -> GatewayConfig:
    """Parse the gateway config file (``key = value`` lines).

    Path keys accept environment overrides via ``SOVGATE_<KEY>``.
    """
    base = Path(path).parent
    values: Dict[str, str] = {}
    for lineno, rawline in enumerate(Path(path).read_text().splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise MalformedConfig(f"config line {lineno}: expected key = value")
        key, value = (p.strip() for p in line.split("=", 1))
        values[key] = value

    for key in _PATH_KEYS:
        override = os.environ.get(f"SOVGATE_{key.upper()}")
        if override:
            values[key] = override

    missing = {"taxonomy", "sources", "routing_policy", "ruleset", "principals"} - set(values)
    if missing:
        raise MalformedConfig(f"config missing keys: {sorted(missing)}")

    def resolve(key: str) -> Optional[Path]:
        if key not in values:
            return None
        p = Path(values[key])
        return p if p.is_absolute() else base / p

    return GatewayConfig(
        taxonomy=frozenset(d.strip() for d in values["taxonomy"].split(",") if d.strip()),
        sources_path=resolve("sources"),
        routing_policy_path=resolve("routing_policy"),
        ruleset_path=resolve("ruleset"),
        principals_path=resolve("principals"),
        adapters_path=resolve("adapters"),
        audit_log_path=resolve("audit_log"),
        max_escalation_level=int(values.get("max_escalation_level", 3)),
        listen=values.get("listen", "127.0.0.1:8470"),
        strict_unpinned=values.get("strict_unpinned", "true") == "true",
    )


def load_adapters_file(path: str | Path, registry: AdapterRegistry, taxonomy: frozenset) -> None:
    """Register scripted mock suppliers from the adapters file.

    One ``adapter_id supplier_name version dialect domains script`` record
    per line; domains is a comma list or ``*``; script is a path relative to
    the file or ``none``.
    """
    base = Path(path).parent
    for lineno, rawline in enumerate(Path(path).read_text().splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 6:
            raise MalformedConfig(f"adapters line {lineno}: expected 6 fields")
        adapter_id, supplier, version, dialect, domains_s, script_s = parts
        domains = taxonomy if domains_s == "*" else frozenset(domains_s.split(","))
        script = SupplierBehaviorScript()
        if script_s != "none":
            script_path = Path(script_s)
            script = parse_script((script_path if script_path.is_absolute() else base / script_path).read_text())
        descriptor = AdapterDescriptor(adapter_id, supplier, domains, version)
        registry.register(descriptor, MockSupplier(descriptor, script, dialect=dialect))


class Gateway:
    """The running composition of all six layers."""

    def __init__(
        self,
        *,
        taxonomy: frozenset,
        sources: SourceRegistry,
        principals: Dict[str, Principal],
        registry: AdapterRegistry,
        policy: RoutingPolicy,
        ruleset: RuleSet,
        max_escalation_level: int = 3,
        strict_unpinned: bool = True,
        clock: Optional[Callable[[], float]] = None,
        deterministic_ids: bool = False,
        audit_sink=None,
    ):
        self.taxonomy = taxonomy
        self.max_escalation_level = max_escalation_level
        self.strict_unpinned = strict_unpinned
        self.clock = clock or time.time
        if deterministic_ids:
            counter = itertools.count(1)
            self._new_task_id = lambda: f"task-{next(counter):06d}"
        else:
            self._new_task_id = lambda: f"task-{uuid.uuid4().hex}"

        self.audit = AuditLog(sink=audit_sink)
        self.sources = sources
        self.principals = principals
        self.registry = registry
        self.policy = policy
        self.ruleset = ruleset
        self.pins = PinStore()
        self.queue = ReviewQueue(principals, max_level=max_escalation_level, audit=self.audit)
        self.snapshots = SnapshotStore()
        self.task_states: Dict[str, TaskState] = {}
        self._outputs: Dict[str, object] = {}

    @classmethod
    def from_config(
        cls,
        config: GatewayConfig,
        clock: Optional[Callable[[], float]] = None,
        deterministic_ids: bool = False,
    ) -> "Gateway":
        """Build a gateway from a loaded config. Boot is fail-closed: any
        referenced file that does not load aborts startup."""
        sink = None
        if config.audit_log_path is not None:
            config.audit_log_path.parent.mkdir(parents=True, exist_ok=True)
            sink = open(config.audit_log_path, "a")
        registry = AdapterRegistry(taxonomy=config.taxonomy)
        if config.adapters_path is not None:
            load_adapters_file(config.adapters_path, registry, config.taxonomy)
        gateway = cls(
            taxonomy=config.taxonomy,
            sources=load_source_registry(config.sources_path),
            principals=load_principals(config.principals_path),
            registry=registry,
            policy=load_routing_policy(
                config.routing_policy_path.read_text(), config.taxonomy, registry
            ),
            ruleset=load_ruleset(config.ruleset_path.read_text(), config.taxonomy),
            max_escalation_level=config.max_escalation_level,
            strict_unpinned=config.strict_unpinned,
            clock=clock,
            deterministic_ids=deterministic_ids,
            audit_sink=sink,
        )
        gateway.config = config
        return gateway

    # --- pipeline ---

    def process_task(self, raw: RawRequest) -> tuple[str, TaskState]:
        """Run one task through ingest, routing, constraints, and enqueue.

        Returns (task_id, state); the state is pending until a human decides.
        Every stage outcome is logged; nothing is silently dropped.
        """
        now = self.clock()
        task_id = self._new_task_id()
        try:
            envelope = ingest_task(
                raw, self.sources, self.taxonomy, lambda: task_id, now=now
            )
        except (RejectedDomain, MalformedRequest) as exc:
            self.audit.append(
                EventKind.INGEST,
                {
                    "status": "rejected",
                    "reason": exc.code,
                    "domain_tag": raw.domain_tag,
                    "source_id": raw.source_id,
                },
                task_id=task_id,
            )
            return self._finish(task_id, TaskState.REJECTED)

        self.audit.append(
            EventKind.INGEST,
            {
                "status": "accepted",
                "payload_digest": envelope.payload_digest,
                "domain_tag": envelope.domain_tag,
                "source_id": envelope.provenance.source_id,
                "provenance_tier": envelope.provenance.resolved_tier.value,
                "uncertainty_flags": sorted(f.value for f in envelope.provenance.uncertainty_flags),
                "requested_by": envelope.requested_by,
            },
            task_id=task_id,
        )

        decision, output = route_task(
            envelope,
            self.registry,
            self.policy,
            self.pins,
            audit=self.audit,
            strict_unpinned=self.strict_unpinned,
            now=now,
        )
        if decision.final_state is not FinalState.ROUTED:
            if decision.final_state is FinalState.DEGRADED_QUEUED:
                self.queue.enqueue_degraded(task_id, now=now)
                return self._finish(task_id, TaskState.PENDING)
            return self._finish(task_id, TaskState.DEGRADED)

        verdict = evaluate(output, envelope, self.ruleset)
        self.audit.append(
            EventKind.CONSTRAINT_VERDICT,
            {
                "outcome": verdict.outcome.value,
                "triggered_rules": list(verdict.triggered_rules),
                "red_team_flags": sorted(verdict.red_team_flags),
            },
            task_id=task_id,
        )
        if verdict.outcome is VerdictOutcome.DENIED:
            return self._finish(task_id, TaskState.DENIED)

        item = self.queue.enqueue_for_review(output, verdict, now=now)
        self._outputs[item.item_id] = output
        return self._finish(task_id, TaskState.PENDING)

    def _finish(self, task_id: str, state: TaskState) -> tuple[str, TaskState]:
        self.task_states[task_id] = state
        return task_id, state

    def decide_item(
        self, item_id: str, principal_id: str, decision: DecisionKind, rationale: str
    ) -> Optional[AuthorizationDecision]:
        """Record a human decision; approvals on reviewable outputs convert
        to an ActionRecord, the only path from analysis to action."""
        now = self.clock()
        record = self.queue.decide(item_id, principal_id, decision, rationale, now=now)
        item = self.queue.items[item_id]
        if decision is DecisionKind.REJECT:
            state = TaskState.REJECTED if item.output_ref is not None else TaskState.DEGRADED
            self.task_states[item.task_id] = state
            return record
        if item.output_ref is None:
            # Degraded-queue items carry no output; an approval acknowledges
            # the degradation but cannot issue an action.
            self.task_states[item.task_id] = TaskState.DEGRADED
            return record
        self.queue.authorize_action(record, now=now)
        self.task_states[item.task_id] = TaskState.ACTION_ISSUED
        return record

    def escalate_item(self, item_id: str, reason: str):
        return self.queue.escalate(item_id, reason, now=self.clock())

    def get_task_state(self, task_id: str) -> TaskState:
        try:
            return self.task_states[task_id]
        except KeyError:
            raise UnknownTask(task_id) from None

    def get_trace(self, task_id: str):
        return reconstruct_trace(task_id, self.audit)

    # --- admin operations ---

    def _admin(self, principal_id: str) -> Principal:
        principal = self.principals.get(principal_id)
        if principal is None or not principal.admin:
            raise UnauthorizedPrincipal(f"{principal_id} is not an admin principal")
        return principal

    def admin_pin(self, principal_id: str, adapter_id: str, version: str) -> None:
        principal = self._admin(principal_id)
        pin_version(
            adapter_id, version, principal, self.pins, self.registry, audit=self.audit,
            now=self.clock(),
        )

    def admin_rollback_version(self, principal_id: str, adapter_id: str) -> None:
        principal = self._admin(principal_id)
        rollback_version(adapter_id, principal, self.pins, audit=self.audit, now=self.clock())

    def admin_reload_policy(self, principal_id: str, *, ruleset_text: Optional[str] = None,
                            routing_text: Optional[str] = None) -> None:
        """Atomically swap the ruleset and/or routing policy.

        Parse errors leave the previous configuration fully active.
        """
        self._admin(principal_id)
        new_ruleset = self.ruleset
        new_policy = self.policy
        if ruleset_text is not None:
            new_ruleset = load_ruleset(ruleset_text, self.taxonomy)
        if routing_text is not None:
            new_policy = load_routing_policy(routing_text, self.taxonomy, self.registry)
        self.ruleset = new_ruleset
        self.policy = new_policy
        self.audit.append(
            EventKind.POLICY_RELOAD,
            {
                "principal": principal_id,
                "ruleset_reloaded": ruleset_text is not None,
                "routing_reloaded": routing_text is not None,
            },
        )

    # --- configuration snapshots ---

    def effective_config_text(self) -> str:
        """Canonical serialization of the live configuration: routing policy,
        ruleset, adapter descriptors, and effective pins."""
        sections = ["## routing", serialize_routing_policy(self.policy)]
        sections += ["## rules", serialize_ruleset(self.ruleset)]
        adapter_lines = []
        for adapter_id in sorted(self.registry.descriptors):
            d = self.registry.descriptors[adapter_id]
            adapter_lines.append(
                f"{d.adapter_id} {d.supplier_name} {d.advertised_version} "
                f"{','.join(sorted(d.certified_domains))}"
            )
        sections += ["## adapters", "\n".join(adapter_lines)]
        pin_lines = [
            f"{adapter_id} {self.pins.pins[adapter_id].pinned_version}"
            for adapter_id in sorted(self.pins.pins)
        ]
        sections += ["## pins", "\n".join(pin_lines)]
        return "\n".join(sections) + "\n"

    def admin_snapshot(self, principal_id: str, label: str) -> SnapshotRef:
        self._admin(principal_id)
        return self.snapshots.snapshot(label, self.effective_config_text())

    def admin_rollback_config(self, principal_id: str, ref: SnapshotRef) -> None:
        """Restore a snapshot's configuration. Pin restoration is append-only:
        history keeps every change plus the restoration entries. The audit
        log itself is never rolled back."""
        principal = self._admin(principal_id)
        text = self.snapshots.restore(ref)
        sections: Dict[str, list] = {}
        name = None
        for line in text.splitlines():
            if line.startswith("## "):
                name = line[3:]
                sections[name] = []
            elif name is not None:
                sections[name].append(line)
        self.policy = load_routing_policy(
            "\n".join(sections.get("routing", [])), self.taxonomy, self.registry
        )
        self.ruleset = load_ruleset("\n".join(sections.get("rules", [])), self.taxonomy)
        snapshot_pins = {}
        for line in sections.get("pins", []):
            if line.strip():
                adapter_id, version = line.split()
                snapshot_pins[adapter_id] = version
        for adapter_id, version in snapshot_pins.items():
            pin = self.pins.pins.get(adapter_id)
            if pin is None or pin.pinned_version != version:
                pin_version(
                    adapter_id, version, principal, self.pins, self.registry,
                    audit=self.audit, now=self.clock(),
                )
        self.audit.append(
            EventKind.ADMIN_ROLLBACK,
            {"target": "config", "label": ref.label, "principal": principal_id},
        )

    @classmethod
    def from_config_file(cls, path: str | Path, **kwargs) -> "Gateway":
        return cls.from_config(load_config(path), **kwargs)
