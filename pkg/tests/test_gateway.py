"""Pipeline composition, terminal states, config loading, and admin ops."""

import pytest

from conftest import TAXONOMY, counter_clock, make_registry
from sovgate.audit import EventKind
from sovgate.authority import DecisionKind, Principal
from sovgate.constraints import VerdictOutcome, evaluate, load_ruleset
from sovgate.errors import (
    MalformedConfig,
    MalformedPolicy,
    UnauthorizedPrincipal,
    UnknownTask,
)
from sovgate.gateway import Gateway, TaskState, load_config
from sovgate.ingest import (
    Channel,
    RawRequest,
    ReliabilityTier,
    SourceDescriptor,
    SourceRegistry,
)
from sovgate.orchestrator import DegradedMode, DomainRoute, RoutingPolicy

RULES = """
[rule deny-unverified-planning]
domains = planning_support
tiers = D_unverified
kinds = *
effect = deny
"""


def make_sources():
    registry = SourceRegistry()
    registry.add(SourceDescriptor("src-a", ReliabilityTier.A_VERIFIED, Channel.SENSOR))
    registry.add(SourceDescriptor("src-d", ReliabilityTier.D_UNVERIFIED, Channel.SYNTHETIC))
    return registry


def make_gateway(principals, adapter_specs=None, degraded_mode=DegradedMode.QUEUE_FOR_HUMAN,
                 rules=RULES, pin=True):
    registry = make_registry(*(adapter_specs or [{"adapter_id": "alpha"}]))
    preference = tuple(registry.descriptors)
    policy = RoutingPolicy(
        {d: DomainRoute(preference, 0.0, degraded_mode) for d in TAXONOMY}
    )
    gateway = Gateway(
        taxonomy=TAXONOMY,
        sources=make_sources(),
        principals=principals,
        registry=registry,
        policy=policy,
        ruleset=load_ruleset(rules, TAXONOMY),
        clock=counter_clock(),
        deterministic_ids=True,
    )
    if pin:
        for adapter_id, descriptor in registry.descriptors.items():
            gateway.admin_pin("commander", adapter_id, descriptor.advertised_version)
    return gateway


PIPELINE_ORDER = [
    EventKind.INGEST,
    EventKind.ROUTE_ATTEMPT,
    EventKind.NORMALIZE,
    EventKind.CONSTRAINT_VERDICT,
    EventKind.ENQUEUE,
    EventKind.HUMAN_DECISION,
    EventKind.ACTION,
]


def test_pipeline_stages_appear_in_order(principals):
    gateway = make_gateway(principals)
    task_id, state = gateway.process_task(
        RawRequest("src-a", "summarization", b"report body", "operator-1")
    )
    assert state is TaskState.PENDING
    item = gateway.queue.pending()[0]
    gateway.decide_item(item.item_id, "reviewer-1", DecisionKind.APPROVE, "sound analysis")
    assert gateway.get_task_state(task_id) is TaskState.ACTION_ISSUED

    kinds = [e.event_kind for e in gateway.audit.task_events(task_id)]
    # Every pipeline stage present, each only after its predecessors.
    positions = [kinds.index(kind) for kind in PIPELINE_ORDER]
    assert positions == sorted(positions)
    assert gateway.audit.verify_chain().valid


def test_unknown_domain_is_rejected_and_logged(principals):
    gateway = make_gateway(principals)
    task_id, state = gateway.process_task(
        RawRequest("src-a", "fire_control", b"x", "operator-1")
    )
    assert state is TaskState.REJECTED
    event = gateway.audit.task_events(task_id)[0]
    assert event.payload["status"] == "rejected"
    assert event.payload["reason"] == "REJECTED_DOMAIN"


def test_denied_task_never_reaches_the_queue(principals):
    gateway = make_gateway(principals)
    task_id, state = gateway.process_task(
        RawRequest("src-d", "planning_support", b"x", "operator-1")
    )
    assert state is TaskState.DENIED
    assert gateway.queue.pending() == []
    kinds = {e.event_kind for e in gateway.audit.task_events(task_id)}
    assert EventKind.ENQUEUE not in kinds
    assert EventKind.ACTION not in kinds


def test_fail_closed_degradation(principals):
    gateway = make_gateway(
        principals,
        adapter_specs=[{"adapter_id": "alpha", "script_text": "withdraw at=0"}],
        degraded_mode=DegradedMode.FAIL_CLOSED,
    )
    task_id, state = gateway.process_task(
        RawRequest("src-a", "summarization", b"x", "operator-1")
    )
    assert state is TaskState.DEGRADED
    assert gateway.queue.pending() == []


def test_degraded_queue_items_cannot_issue_actions(principals):
    gateway = make_gateway(
        principals,
        adapter_specs=[{"adapter_id": "alpha", "script_text": "withdraw at=0"}],
    )
    task_id, state = gateway.process_task(
        RawRequest("src-a", "summarization", b"x", "operator-1")
    )
    assert state is TaskState.PENDING
    item = gateway.queue.pending()[0]
    gateway.decide_item(item.item_id, "reviewer-1", DecisionKind.APPROVE, "acknowledged")
    assert gateway.get_task_state(task_id) is TaskState.DEGRADED
    assert not [e for e in gateway.audit.events if e.event_kind is EventKind.ACTION]


def test_reject_decision_terminates_task(principals):
    gateway = make_gateway(principals)
    task_id, _ = gateway.process_task(RawRequest("src-a", "summarization", b"x", "op"))
    item = gateway.queue.pending()[0]
    gateway.decide_item(item.item_id, "reviewer-1", DecisionKind.REJECT, "not convincing")
    assert gateway.get_task_state(task_id) is TaskState.REJECTED


def test_get_task_state_unknown(principals):
    gateway = make_gateway(principals)
    with pytest.raises(UnknownTask):
        gateway.get_task_state("task-404404")


def test_reload_policy_is_atomic_on_parse_error(principals):
    gateway = make_gateway(principals)
    before = gateway.ruleset
    with pytest.raises(MalformedPolicy):
        gateway.admin_reload_policy("commander", ruleset_text="[rule r]\neffect = obliterate\n")
    assert gateway.ruleset is before
    # A valid reload swaps and logs.
    gateway.admin_reload_policy("commander", ruleset_text="")
    assert gateway.ruleset.rules == ()
    assert gateway.audit.events[-1].event_kind is EventKind.POLICY_RELOAD


def test_admin_operations_require_admin(principals):
    gateway = make_gateway(principals)
    with pytest.raises(UnauthorizedPrincipal):
        gateway.admin_pin("reviewer-1", "alpha", "9.9")
    with pytest.raises(UnauthorizedPrincipal):
        gateway.admin_reload_policy("reviewer-1", ruleset_text="")
    with pytest.raises(UnauthorizedPrincipal):
        gateway.admin_snapshot("reviewer-1", "label")


def test_snapshot_and_config_rollback(principals):
    gateway = make_gateway(principals)
    ref = gateway.admin_snapshot("commander", "baseline")
    gateway.admin_pin("commander", "alpha", "2.0")
    gateway.admin_reload_policy("commander", ruleset_text="")
    assert gateway.pins.pins["alpha"].pinned_version == "2.0"
    assert gateway.ruleset.rules == ()

    gateway.admin_rollback_config("commander", ref)
    assert gateway.pins.pins["alpha"].pinned_version == "1.0"
    assert [r.rule_id for r in gateway.ruleset.rules] == ["deny-unverified-planning"]
    # Pin history is append-only: the rollback appended, it did not rewrite.
    history = [e.version for e in gateway.pins.pins["alpha"].pin_history]
    assert history == ["1.0", "2.0", "1.0"]
    assert gateway.audit.events[-1].payload == {
        "target": "config", "label": "baseline", "principal": "commander",
    }
    assert gateway.audit.verify_chain().valid


# --- config files ---


def write_demo_config(tmp_path, strict_unpinned="false"):
    (tmp_path / "sources.txt").write_text("src-a A_verified sensor\n")
    (tmp_path / "principals.txt").write_text("commander Boss 3 admin\n")
    (tmp_path / "rules.txt").write_text(RULES)
    (tmp_path / "adapters.txt").write_text("alpha acme 1.0 alpha * none\n")
    (tmp_path / "routing.txt").write_text(
        "[domain summarization]\nprefer = alpha\nthreshold = 0.0\n"
        "degraded_mode = queue_for_human\n"
    )
    config = tmp_path / "gateway.conf"
    config.write_text(
        "taxonomy = summarization,anomaly_detection,option_generation,planning_support\n"
        "sources = sources.txt\n"
        "routing_policy = routing.txt\n"
        "ruleset = rules.txt\n"
        "principals = principals.txt\n"
        "adapters = adapters.txt\n"
        f"strict_unpinned = {strict_unpinned}\n"
        "audit_log = audit.log\n"
    )
    return config


def test_gateway_boots_from_config_file(tmp_path):
    gateway = Gateway.from_config_file(write_demo_config(tmp_path), deterministic_ids=True)
    task_id, state = gateway.process_task(
        RawRequest("src-a", "summarization", b"x", "operator-1")
    )
    assert state is TaskState.PENDING
    # The audit sink mirrors every event to disk.
    lines = (tmp_path / "audit.log").read_text().splitlines()
    assert len(lines) == len(gateway.audit.events)


def test_load_config_env_override(tmp_path, monkeypatch):
    config = write_demo_config(tmp_path)
    alt = tmp_path / "alt-rules.txt"
    alt.write_text("")
    monkeypatch.setenv("SOVGATE_RULESET", str(alt))
    loaded = load_config(config)
    assert loaded.ruleset_path == alt


def test_load_config_missing_keys(tmp_path):
    path = tmp_path / "bad.conf"
    path.write_text("taxonomy = summarization\n")
    with pytest.raises(MalformedConfig):
        load_config(path)


def test_adapters_file_field_count(tmp_path):
    config = write_demo_config(tmp_path)
    (tmp_path / "adapters.txt").write_text("alpha acme 1.0 alpha *\n")
    with pytest.raises(MalformedConfig):
        Gateway.from_config_file(config)
