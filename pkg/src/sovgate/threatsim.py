"""Adversarial supplier-simulation harness.

Runs seeded task workloads against scripted suppliers under two
architecture modes, scores each run on the six sovereignty axes using only
the audit log, and emits the eight-dimension architecture comparison.
Everything is deterministic under (scenario, seed): replays are
byte-identical.
"""

import itertools
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .adapters import (
    AdapterDescriptor,
    AdapterRegistry,
    MockSupplier,
    SupplierBehaviorScript,
    SupplierStatus,
    normalize,
    parse_script,
)
from .audit import AuditLog, EventKind, completeness_report
from .authority import DecisionKind, Principal
from .constraints import load_ruleset
from .errors import BrokenChain, IncompleteSuite, InvalidScenario, NormalizationFailure
from .gateway import Gateway, TaskState
from .ingest import Channel, RawRequest, ReliabilityTier, SourceDescriptor, SourceRegistry
from .orchestrator import DegradedMode, DomainRoute, RoutingPolicy


class ScenarioId(str, Enum):
    NEUTRAL = "neutral"
    POLICY_INJECTION = "policy_injection"
    VERSION_DRIFT = "version_drift"
    WITHDRAWAL = "withdrawal"
    AUDIT_ASYMMETRY = "audit_asymmetry"
    NORMATIVE_DRIFT = "normative_drift"


THREAT_SCENARIOS = (
    ScenarioId.POLICY_INJECTION,
    ScenarioId.VERSION_DRIFT,
    ScenarioId.WITHDRAWAL,
    ScenarioId.AUDIT_ASYMMETRY,
    ScenarioId.NORMATIVE_DRIFT,
)


class ArchitectureMode(str, Enum):
    MODEL_CENTRIC = "model_centric"
    SOVEREIGNTY_CENTRIC = "sovereignty_centric"


DOMAINS = ("summarization", "anomaly_detection", "option_generation", "planning_support")
TAXONOMY = frozenset(DOMAINS)

SCORE_AXES = (
    "policy_sovereignty",
    "routing_sovereignty",
    "version_sovereignty",
    "constraint_sovereignty",
    "audit_sovereignty",
    "action_sovereignty",
)


@dataclass(frozen=True)
class AdapterSpec:
    adapter_id: str
    supplier_name: str
    version: str
    dialect: str
    script_text: str = "none"
    pin: Optional[str] = None  # defaults to the advertised version


@dataclass(frozen=True)
class ThreatScenario:
    scenario_id: ScenarioId
    mode: ArchitectureMode
    seed: int
    task_count: int
    adapters: Tuple[AdapterSpec, ...]
    degraded_mode: DegradedMode = DegradedMode.QUEUE_FOR_HUMAN
    rationale_rules: bool = True
    drift_domain_shift: bool = False  # late workload collapses onto one domain
    confidence_threshold: float = 0.5


@dataclass(frozen=True)
class SovereigntyScorecard:
    policy_sovereignty: float
    routing_sovereignty: float
    version_sovereignty: float
    constraint_sovereignty: float
    audit_sovereignty: float
    action_sovereignty: float

    def as_dict(self) -> Dict[str, float]:
        return {axis: getattr(self, axis) for axis in SCORE_AXES}


@dataclass
class ScenarioReport:
    scenario: ThreatScenario
    log: AuditLog
    scorecard: SovereigntyScorecard
    task_states: Dict[str, TaskState]
    concentration: float


# --- standard scenario environment ---


def standard_sources() -> SourceRegistry:
    registry = SourceRegistry()
    registry.add(SourceDescriptor("src-a", ReliabilityTier.A_VERIFIED, Channel.SENSOR))
    registry.add(SourceDescriptor("src-b", ReliabilityTier.B_CORROBORATED, Channel.REPORT))
    registry.add(SourceDescriptor("src-c", ReliabilityTier.C_SINGLE_SOURCE, Channel.OPEN_SOURCE))
    registry.add(SourceDescriptor("src-d", ReliabilityTier.D_UNVERIFIED, Channel.SYNTHETIC))
    return registry


SOURCES_CYCLE = ("src-a", "src-b", "src-c", "src-d")


def standard_principals() -> Dict[str, Principal]:
    return {
        "reviewer-1": Principal("reviewer-1", "Line Reviewer", 1),
        "reviewer-2": Principal("reviewer-2", "Senior Reviewer", 2),
        "commander": Principal("commander", "Commanding Reviewer", 3, admin=True),
    }


STANDARD_RULES = """
[rule deny-unverified-planning]
domains = planning_support
tiers = D_unverified
kinds = *
effect = deny

[rule flag-weak-anomaly]
domains = anomaly_detection
tiers = C_single_source,D_unverified
kinds = *
effect = red_team_flag
"""

RATIONALE_RULE = """
[rule require-supplier-rationale]
domains = *
tiers = *
kinds = *
effect = admit
rationale_required = true
"""


def standard_ruleset(rationale_rules: bool):
    text = STANDARD_RULES + (RATIONALE_RULE if rationale_rules else "")
    return load_ruleset(text, TAXONOMY)


def build_routing_policy(scenario: ThreatScenario) -> RoutingPolicy:
    ids = tuple(a.adapter_id for a in scenario.adapters)
    domains: Dict[str, DomainRoute] = {}
    for i, domain in enumerate(DOMAINS):
        # Alternate preference order across domains so a mixed workload
        # spreads over suppliers; sovereignty preference stays a total order.
        preference = ids if (i % 2 == 0 or len(ids) < 2) else ids[::-1]
        domains[domain] = DomainRoute(preference, scenario.confidence_threshold, scenario.degraded_mode)
    return RoutingPolicy(domains)


def build_registry(scenario: ThreatScenario) -> AdapterRegistry:
    registry = AdapterRegistry(taxonomy=TAXONOMY)
    for spec in scenario.adapters:
        descriptor = AdapterDescriptor(
            spec.adapter_id, spec.supplier_name, TAXONOMY, spec.version
        )
        registry.register(
            descriptor,
            MockSupplier(descriptor, parse_script(spec.script_text), seed=scenario.seed,
                         dialect=spec.dialect),
        )
    return registry


def workload(scenario: ThreatScenario) -> List[RawRequest]:
    """Deterministic seeded workload: domains round-robin (collapsing onto
    the first domain late in the run for drift scenarios), sources cycle
    through the four tiers."""
    rng = random.Random(scenario.seed)
    requests = []
    for i in range(scenario.task_count):
        if scenario.drift_domain_shift and i >= scenario.task_count // 2:
            domain = DOMAINS[0]
        else:
            domain = DOMAINS[i % len(DOMAINS)]
        source = rng.choice(SOURCES_CYCLE)
        body = f"{scenario.scenario_id.value}:{scenario.seed}:{i}:{rng.randrange(1 << 30)}"
        requests.append(RawRequest(source, domain, body.encode(), "operator-1"))
    return requests


# --- scenario construction ---


def build_scenario(
    scenario_id: ScenarioId | str,
    mode: ArchitectureMode | str,
    seed: int = 7,
    task_count: int = 40,
    single_adapter: bool = False,
    rationale_rules: Optional[bool] = None,
    degraded_mode: Optional[DegradedMode] = None,
) -> ThreatScenario:
    scenario_id = ScenarioId(scenario_id)
    mode = ArchitectureMode(mode)
    drift_step = max(1, task_count // 4)

    alpha_script = "none"
    if scenario_id is ScenarioId.POLICY_INJECTION:
        alpha_script = "inject_policy domains=anomaly_detection,planning_support from=0"
    elif scenario_id is ScenarioId.VERSION_DRIFT:
        alpha_script = f"drift_version at={drift_step} version=2.0 perturb=0.0"
    elif scenario_id is ScenarioId.WITHDRAWAL:
        alpha_script = f"withdraw at={max(1, task_count // 4)}"
    elif scenario_id is ScenarioId.AUDIT_ASYMMETRY:
        alpha_script = f"omit_rationale from={drift_step}"

    adapters = [AdapterSpec("alpha", "acme-analytics", "1.0", "alpha", alpha_script)]
    if not single_adapter:
        bravo_script = alpha_script if scenario_id is ScenarioId.AUDIT_ASYMMETRY else "none"
        adapters.append(AdapterSpec("bravo", "borealis-systems", "3.2", "bravo", bravo_script))

    if rationale_rules is None:
        rationale_rules = True
    if degraded_mode is None:
        degraded_mode = DegradedMode.FAIL_CLOSED if single_adapter else DegradedMode.QUEUE_FOR_HUMAN
    return ThreatScenario(
        scenario_id=scenario_id,
        mode=mode,
        seed=seed,
        task_count=task_count,
        adapters=tuple(adapters),
        degraded_mode=degraded_mode,
        rationale_rules=rationale_rules,
        drift_domain_shift=scenario_id is ScenarioId.NORMATIVE_DRIFT,
    )


def parse_scenario_file(path: str | Path) -> ThreatScenario:
    """Parse a scenario definition file.

    Top-level ``key = value`` lines (scenario, mode, seed, tasks, and the
    optional degraded_mode, rationale_rules, single_adapter) plus optional
    ``[adapter <id>]`` blocks with supplier/version/dialect/pin keys and
    repeatable ``script = <directive>`` lines.
    """
    values: Dict[str, str] = {}
    adapter_blocks: List[Dict[str, object]] = []
    current: Optional[Dict[str, object]] = None
    for lineno, rawline in enumerate(Path(path).read_text().splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[adapter") and line.endswith("]"):
            current = {"adapter_id": line[len("[adapter") : -1].strip(), "script": []}
            adapter_blocks.append(current)
            continue
        if "=" not in line:
            raise InvalidScenario(f"scenario line {lineno}: expected key = value")
        key, value = (p.strip() for p in line.split("=", 1))
        if current is None:
            values[key] = value
        elif key == "script":
            current["script"].append(value)
        else:
            current[key] = value

    try:
        scenario_id = ScenarioId(values["scenario"])
        mode = ArchitectureMode(values["mode"])
        seed = int(values.get("seed", 7))
        task_count = int(values.get("tasks", 40))
    except (KeyError, ValueError) as exc:
        raise InvalidScenario(f"bad scenario header: {exc}") from exc

    scenario = build_scenario(
        scenario_id,
        mode,
        seed=seed,
        task_count=task_count,
        single_adapter=values.get("single_adapter", "false") == "true",
        rationale_rules=values.get("rationale_rules", "true") == "true",
        degraded_mode=DegradedMode(values["degraded_mode"]) if "degraded_mode" in values else None,
    )
    if adapter_blocks:
        adapters = tuple(
            AdapterSpec(
                adapter_id=str(block["adapter_id"]),
                supplier_name=str(block.get("supplier", "scripted-supplier")),
                version=str(block.get("version", "1.0")),
                dialect=str(block.get("dialect", "alpha")),
                script_text="\n".join(block["script"]) or "none",
                pin=str(block["pin"]) if "pin" in block else None,
            )
            for block in adapter_blocks
        )
        scenario = replace(scenario, adapters=adapters)
    return scenario


# --- execution ---


def _counter_clock():
    counter = itertools.count()
    return lambda: float(next(counter))


def scripted_review(gateway: Gateway) -> None:
    """Deterministic stand-in for interactive reviewers: approve admissible
    unflagged outputs, reject flagged / review-required / degraded items.
    Level >= 2 items are decided by the top-clearance principal."""
    for item in gateway.queue.pending():
        principal = "reviewer-1" if item.level <= 1 else "commander"
        verdict = item.verdict_ref
        approvable = (
            item.output_ref is not None
            and verdict is not None
            and verdict.outcome.value == "admissible"
            and not verdict.red_team_flags
        )
        if approvable:
            gateway.decide_item(item.item_id, principal, DecisionKind.APPROVE,
                                "scripted approval: admissible and unflagged")
        else:
            gateway.decide_item(item.item_id, principal, DecisionKind.REJECT,
                                "scripted rejection: flagged, review-required, or degraded")


def _build_gateway(scenario: ThreatScenario) -> Gateway:
    gateway = Gateway(
        taxonomy=TAXONOMY,
        sources=standard_sources(),
        principals=standard_principals(),
        registry=build_registry(scenario),
        policy=build_routing_policy(scenario),
        ruleset=standard_ruleset(scenario.rationale_rules),
        max_escalation_level=3,
        strict_unpinned=True,
        clock=_counter_clock(),
        deterministic_ids=True,
    )
    for spec in scenario.adapters:
        gateway.admin_pin("commander", spec.adapter_id, spec.pin or spec.version)
    return gateway


def _run_sovereignty_centric(scenario: ThreatScenario) -> Tuple[AuditLog, Dict[str, TaskState]]:
    gateway = _build_gateway(scenario)
    for raw in workload(scenario):
        gateway.process_task(raw)
        scripted_review(gateway)
    return gateway.audit, dict(gateway.task_states)


def _run_model_centric(scenario: ThreatScenario) -> Tuple[AuditLog, Dict[str, TaskState]]:
    """Direct coupling to the first supplier: no pins, no fallback, no
    constraint layer; an auto-approve stub converts output to action.
    Logging stays on so the run remains scoreable."""
    log = AuditLog()
    clock = _counter_clock()
    registry = build_registry(scenario)
    primary = scenario.adapters[0].adapter_id
    sources = standard_sources()
    states: Dict[str, TaskState] = {}
    from .ingest import ingest_task  # local import keeps module deps one-way

    action_counter = itertools.count(1)
    for i, raw in enumerate(workload(scenario), start=1):
        task_id = f"task-{i:06d}"
        now = clock()
        envelope = ingest_task(raw, sources, TAXONOMY, lambda: task_id, now=now)
        log.append(
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
        raw_response = registry.invoke(primary, envelope, produced_at=now)
        outcome = "ok" if raw_response.status is SupplierStatus.OK else raw_response.status.value
        log.append(
            EventKind.ROUTE_ATTEMPT,
            {
                "phase": "attempt",
                "origin": "direct",
                "adapter_id": primary,
                "outcome": outcome,
                "reported_version": raw_response.reported_version or None,
                "pinned_version": None,
            },
            task_id=task_id,
        )
        if raw_response.status is not SupplierStatus.OK:
            log.append(
                EventKind.ROUTE_ATTEMPT,
                {
                    "phase": "decision",
                    "origin": "direct",
                    "final_state": "degraded_fail_closed",
                    "chosen_adapter": "DEGRADED",
                },
                task_id=task_id,
            )
            states[task_id] = TaskState.DEGRADED
            continue
        try:
            output = normalize(raw_response, registry.descriptor(primary), task_id, produced_at=now)
        except NormalizationFailure:
            states[task_id] = TaskState.DEGRADED
            continue
        log.append(
            EventKind.ROUTE_ATTEMPT,
            {
                "phase": "decision",
                "origin": "direct",
                "final_state": "routed",
                "chosen_adapter": primary,
            },
            task_id=task_id,
        )
        log.append(
            EventKind.NORMALIZE,
            {
                "adapter_id": primary,
                "version_used": output.version_used,
                "kind": output.kind.value,
                "confidence": output.confidence,
                "rationale_digest": output.rationale_digest,
            },
            task_id=task_id,
        )
        # Auto-approve stub: labeled so action_sovereignty measures it.
        log.append(
            EventKind.HUMAN_DECISION,
            {
                "item_id": f"auto-{task_id}",
                "principal": "auto-approve-stub",
                "decision": "approve",
                "rationale": "auto-approved by supplier-coupled workflow",
                "origin": "auto",
            },
            task_id=task_id,
        )
        log.append(
            EventKind.ACTION,
            {
                "action_id": f"action-{next(action_counter):06d}",
                "item_id": f"auto-{task_id}",
                "principal": "auto-approve-stub",
                "effect": "advisory",
            },
            task_id=task_id,
        )
        states[task_id] = TaskState.ACTION_ISSUED
    return log, states


def run_scenario(scenario: ThreatScenario) -> ScenarioReport:
    if scenario.task_count <= 0 or not scenario.adapters:
        raise InvalidScenario("scenario needs a positive task count and at least one adapter")
    scenario_marker = {
        "scenario": scenario.scenario_id.value,
        "mode": scenario.mode.value,
        "seed": scenario.seed,
        "tasks": scenario.task_count,
    }
    if scenario.mode is ArchitectureMode.SOVEREIGNTY_CENTRIC:
        log, states = _run_sovereignty_centric(scenario)
    else:
        log, states = _run_model_centric(scenario)
    log.append(EventKind.SCENARIO_MARKER, scenario_marker)
    window = max(1, scenario.task_count // 4)
    return ScenarioReport(
        scenario=scenario,
        log=log,
        scorecard=score_sovereignty(log),
        task_states=states,
        concentration=concentration_metric(log, window),
    )


# --- scoring (log-only inputs) ---


def _ratio(numerator: int, denominator: int) -> float:
    return numerator / denominator if denominator else 1.0


def score_sovereignty(log: AuditLog) -> SovereigntyScorecard:
    """Compute the six axis metrics from audit events alone."""
    verdict = log.verify_chain()
    if not verdict.valid:
        raise BrokenChain(str(verdict))

    by_task: Dict[str, List] = {}
    for event in log.events:
        if event.task_id is not None:
            by_task.setdefault(event.task_id, []).append(event)

    sovereign_restrictions = 0
    supplier_restrictions = 0
    routed_policy = 0
    routed_any = 0
    version_changes = 0
    version_detected = 0
    constraint_origin = 0
    supplier_refusal_events = 0
    actions_total = 0
    actions_human = 0

    for task_id, events in by_task.items():
        had_refusal = False
        final = None
        human_decided = None
        denied = False
        for e in events:
            p = e.payload
            if e.event_kind is EventKind.ROUTE_ATTEMPT and p.get("phase") == "attempt":
                if p["outcome"] == "refused":
                    had_refusal = True
                    supplier_refusal_events += 1
                reported = p.get("reported_version")
                pinned = p.get("pinned_version")
                baseline = pinned
                if baseline is None:
                    # No sovereign pin on record: fall back to the first
                    # version this adapter ever reported in this log.
                    for e2 in log.events:
                        if (
                            e2.event_kind is EventKind.ROUTE_ATTEMPT
                            and e2.payload.get("adapter_id") == p.get("adapter_id")
                            and e2.payload.get("reported_version")
                        ):
                            baseline = e2.payload["reported_version"]
                            break
                if reported and baseline and reported != baseline:
                    version_changes += 1
                    if p["outcome"] == "version_mismatch":
                        version_detected += 1
            elif e.event_kind is EventKind.ROUTE_ATTEMPT and p.get("phase") == "decision":
                final = p
            elif e.event_kind is EventKind.CONSTRAINT_VERDICT:
                if p["outcome"] in ("denied", "review_required"):
                    constraint_origin += 1
                if p["outcome"] == "denied":
                    denied = True
            elif e.event_kind is EventKind.ESCALATION:
                constraint_origin += 1
            elif e.event_kind is EventKind.HUMAN_DECISION:
                human_decided = p
            elif e.event_kind is EventKind.ACTION:
                actions_total += 1
                if human_decided is not None and human_decided.get("origin") == "human":
                    actions_human += 1

        if final is not None:
            routed_any += 1
            if final.get("origin") == "policy":
                routed_policy += 1
        if denied or (human_decided is not None and human_decided.get("decision") == "reject"
                      and human_decided.get("origin") == "human"):
            sovereign_restrictions += 1
        elif final is not None and final.get("final_state") != "routed" and had_refusal \
                and human_decided is None:
            supplier_restrictions += 1

    return SovereigntyScorecard(
        policy_sovereignty=_ratio(
            sovereign_restrictions, sovereign_restrictions + supplier_restrictions
        ),
        routing_sovereignty=_ratio(routed_policy, routed_any),
        version_sovereignty=_ratio(version_detected, version_changes),
        constraint_sovereignty=_ratio(
            constraint_origin, constraint_origin + supplier_refusal_events
        ),
        audit_sovereignty=completeness_report(log).completeness_ratio,
        action_sovereignty=_ratio(actions_human, actions_total),
    )


def concentration_metric(log: AuditLog, window: int) -> float:
    """Max over sliding windows of the share of the single most-used adapter
    among routed tasks (the routing-concentration proxy for normative drift)."""
    sequence = [
        e.payload["chosen_adapter"]
        for e in log.events
        if e.event_kind is EventKind.ROUTE_ATTEMPT
        and e.payload.get("phase") == "decision"
        and e.payload.get("final_state") == "routed"
    ]
    if not sequence:
        return 0.0
    window = min(window, len(sequence))
    best = 0.0
    for start in range(len(sequence) - window + 1):
        chunk = sequence[start : start + window]
        top = max(chunk.count(adapter) for adapter in set(chunk))
        best = max(best, top / window)
    return best


DRIFT_WARNING_THRESHOLD = 0.9


# --- architecture comparison (Table-style, 8 dimensions) ---


@dataclass(frozen=True)
class ComparisonRow:
    dimension: str
    model_centric: float
    sovereignty_centric: float
    definition: str


@dataclass(frozen=True)
class ComparisonReport:
    rows: Tuple[ComparisonRow, ...]
    drift_warning: bool


def _mean(values: List[float]) -> float:
    return sum(values) / len(values) if values else 1.0


def _substitution_stats(reports: List[ScenarioReport]) -> Tuple[int, int]:
    recovered = 0
    with_failure = 0
    for report in reports:
        by_task: Dict[str, List] = {}
        for e in report.log.events:
            if e.task_id is not None and e.event_kind is EventKind.ROUTE_ATTEMPT:
                by_task.setdefault(e.task_id, []).append(e)
        for events in by_task.values():
            failed = any(
                e.payload.get("phase") == "attempt" and e.payload["outcome"] != "ok"
                for e in events
            )
            if not failed:
                continue
            with_failure += 1
            if any(
                e.payload.get("phase") == "decision" and e.payload["final_state"] == "routed"
                for e in events
            ):
                recovered += 1
    return recovered, with_failure


def _withdrawal_resilience(report: ScenarioReport) -> float:
    withdrawn_tasks = set()
    routed_tasks = set()
    for e in report.log.events:
        if e.event_kind is not EventKind.ROUTE_ATTEMPT or e.task_id is None:
            continue
        p = e.payload
        if p.get("phase") == "attempt" and p["outcome"] == "unavailable":
            withdrawn_tasks.add(e.task_id)
        if p.get("phase") == "decision" and p["final_state"] == "routed":
            routed_tasks.add(e.task_id)
    if not withdrawn_tasks:
        return 1.0
    return len(withdrawn_tasks & routed_tasks) / len(withdrawn_tasks)


def _interop_probe(mode: ArchitectureMode, seed: int, task_count: int) -> float:
    """Same workload and sovereign policy over two disjoint adapter sets,
    one of which carries a vendor refusal policy; returns the fraction of
    tasks with identical admissibility outcomes across the two runs."""
    set_a = (
        AdapterSpec("alpha", "acme-analytics", "1.0", "alpha"),
        AdapterSpec("bravo", "borealis-systems", "3.2", "bravo"),
    )
    set_b = (
        AdapterSpec("charlie", "cascade-ml", "7.1", "bravo",
                    "inject_policy domains=option_generation from=0"),
        AdapterSpec("delta", "dorn-labs", "0.9", "alpha"),
    )

    def outcomes(adapters: Tuple[AdapterSpec, ...]) -> List[str]:
        scenario = ThreatScenario(
            scenario_id=ScenarioId.NEUTRAL,
            mode=mode,
            seed=seed,
            task_count=task_count,
            adapters=adapters,
        )
        report = run_scenario(scenario)
        result = []
        for task_id in sorted(report.task_states):
            verdict = None
            for e in report.log.task_events(task_id):
                if e.event_kind is EventKind.CONSTRAINT_VERDICT:
                    verdict = e.payload["outcome"]
            result.append(verdict or f"unrouted:{report.task_states[task_id].value}")
        return result

    a, b = outcomes(set_a), outcomes(set_b)
    return sum(1 for x, y in zip(a, b) if x == y) / len(a) if a else 1.0


def compare_architectures(suite: List[ScenarioReport]) -> ComparisonReport:
    """Fill the eight comparison dimensions from a full 5-scenario x 2-mode
    suite. Raises IncompleteSuite when any pairing is missing."""
    by_key: Dict[Tuple[ScenarioId, ArchitectureMode], ScenarioReport] = {}
    for report in suite:
        by_key[(report.scenario.scenario_id, report.scenario.mode)] = report
    missing = [
        (s.value, m.value)
        for s in THREAT_SCENARIOS
        for m in ArchitectureMode
        if (s, m) not in by_key
    ]
    if missing:
        raise IncompleteSuite(f"missing scenario/mode pairs: {missing}")

    def mode_reports(mode: ArchitectureMode) -> List[ScenarioReport]:
        return [by_key[(s, mode)] for s in THREAT_SCENARIOS]

    mc_reports = mode_reports(ArchitectureMode.MODEL_CENTRIC)
    sc_reports = mode_reports(ArchitectureMode.SOVEREIGNTY_CENTRIC)

    def axis_mean(reports: List[ScenarioReport], axis: str) -> float:
        return _mean([getattr(r.scorecard, axis) for r in reports])

    def row(dimension: str, mc: float, sc: float, definition: str) -> ComparisonRow:
        return ComparisonRow(dimension, round(mc, 6), round(sc, 6), definition)

    mc_sub = _substitution_stats(mc_reports)
    sc_sub = _substitution_stats(sc_reports)
    probe_seed = sc_reports[0].scenario.seed
    probe_tasks = sc_reports[0].scenario.task_count

    rows = (
        row(
            "operational_boundary_source",
            axis_mean(mc_reports, "policy_sovereignty"),
            axis_mean(sc_reports, "policy_sovereignty"),
            "share of task-restricting outcomes decided by sovereign rules or reviewers",
        ),
        row(
            "model_substitution",
            _ratio(*mc_sub),
            _ratio(*sc_sub),
            "share of tasks with a failed supplier attempt that still completed routing",
        ),
        row(
            "vendor_withdrawal_failure_mode",
            _withdrawal_resilience(by_key[(ScenarioId.WITHDRAWAL, ArchitectureMode.MODEL_CENTRIC)]),
            _withdrawal_resilience(
                by_key[(ScenarioId.WITHDRAWAL, ArchitectureMode.SOVEREIGNTY_CENTRIC)]
            ),
            "share of withdrawal-affected tasks completed via substitution",
        ),
        row(
            "version_governance",
            by_key[(ScenarioId.VERSION_DRIFT, ArchitectureMode.MODEL_CENTRIC)].scorecard.version_sovereignty,
            by_key[(ScenarioId.VERSION_DRIFT, ArchitectureMode.SOVEREIGNTY_CENTRIC)].scorecard.version_sovereignty,
            "share of changed-version supplier responses detected and gated",
        ),
        row(
            "auditability",
            axis_mean(mc_reports, "audit_sovereignty"),
            axis_mean(sc_reports, "audit_sovereignty"),
            "mean trace completeness ratio across scenarios",
        ),
        row(
            "human_authority",
            axis_mean(mc_reports, "action_sovereignty"),
            axis_mean(sc_reports, "action_sovereignty"),
            "share of issued actions preceded by a human decision",
        ),
        row(
            "alliance_interoperability",
            _interop_probe(ArchitectureMode.MODEL_CENTRIC, probe_seed, probe_tasks),
            _interop_probe(ArchitectureMode.SOVEREIGNTY_CENTRIC, probe_seed, probe_tasks),
            "share of identical admissibility outcomes across disjoint adapter sets under one policy",
        ),
        row(
            "strategic_sovereignty",
            _mean([axis_mean(mc_reports, axis) for axis in SCORE_AXES]),
            _mean([axis_mean(sc_reports, axis) for axis in SCORE_AXES]),
            "mean of the six sovereignty axes across scenarios",
        ),
    )
    drift = max(
        by_key[(ScenarioId.NORMATIVE_DRIFT, mode)].concentration for mode in ArchitectureMode
    )
    return ComparisonReport(rows=rows, drift_warning=drift >= DRIFT_WARNING_THRESHOLD)


def run_full_suite(seed: int = 7, task_count: int = 40) -> List[ScenarioReport]:
    return [
        run_scenario(build_scenario(scenario_id, mode, seed=seed, task_count=task_count))
        for scenario_id in THREAT_SCENARIOS
        for mode in ArchitectureMode
    ]
