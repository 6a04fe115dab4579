"""Hash chain integrity, trace reconstruction, and config snapshots."""

import dataclasses
import hashlib
import json
import random

import pytest

from sovgate.audit import (
    AuditEvent,
    AuditLog,
    EventKind,
    GENESIS_DIGEST,
    NOT_APPLICABLE,
    SnapshotRef,
    SnapshotStore,
    TRACE_FIELDS,
    canonical_payload,
    completeness_report,
    reconstruct_trace,
)
from sovgate.errors import UnknownSnapshot, UnknownTask


def random_payload(rng):
    return {
        "n": rng.randrange(1000),
        "s": "".join(rng.choices("abcdef", k=6)),
        "flag": rng.random() < 0.5,
    }


def build_log(n, seed=0):
    rng = random.Random(seed)
    kinds = list(EventKind)
    log = AuditLog()
    for i in range(n):
        log.append(rng.choice(kinds), random_payload(rng), task_id=f"task-{i % 7:06d}")
    return log


def test_genesis_digest_is_hash_of_empty_string():
    assert GENESIS_DIGEST == hashlib.sha256(b"").hexdigest()


def test_chain_digests_match_independent_recomputation():
    """Recompute every digest with a from-scratch implementation of the
    material format and compare against the log's own values."""
    log = build_log(1000, seed=3)
    prev = hashlib.sha256(b"").hexdigest()
    for i, event in enumerate(log.events):
        assert event.seq == i
        assert event.prev_digest == prev
        material = "{}|{}|{}|{}".format(
            i,
            event.event_kind.value,
            json.dumps(event.payload, sort_keys=True, separators=(",", ":")),
            prev,
        )
        expected = hashlib.sha256(material.encode()).hexdigest()
        assert event.this_digest == expected
        prev = expected
    assert log.verify_chain().valid


def test_empty_log_is_valid():
    verdict = AuditLog().verify_chain()
    assert verdict.valid
    assert str(verdict) == "valid"


def test_payload_tamper_detected_at_edit():
    log = build_log(50, seed=1)
    for target in (0, 17, 49):
        events = list(log.events)
        tampered_payload = dict(events[target].payload)
        tampered_payload["n"] = tampered_payload["n"] ^ 1
        events[target] = dataclasses.replace(events[target], payload=tampered_payload)
        verdict = AuditLog(events).verify_chain()
        assert not verdict.valid
        assert verdict.broken_at == target
        assert str(verdict) == f"broken_at({target})"


def test_digest_tamper_detected():
    log = build_log(30, seed=2)
    events = list(log.events)
    bad = events[10].this_digest[:-1] + ("0" if events[10].this_digest[-1] != "0" else "1")
    events[10] = dataclasses.replace(events[10], this_digest=bad)
    verdict = AuditLog(events).verify_chain()
    assert not verdict.valid
    assert verdict.broken_at <= 10


def test_truncation_keeps_a_valid_prefix_but_removal_breaks():
    log = build_log(20)
    assert AuditLog(log.events[:10]).verify_chain().valid
    assert AuditLog(log.events[1:]).verify_chain().broken_at == 0
    assert AuditLog(log.events[:5] + log.events[6:]).verify_chain().broken_at == 5


def test_persistence_round_trip(tmp_path):
    log = build_log(25, seed=4)
    path = tmp_path / "audit.log"
    log.write(path)
    loaded = AuditLog.read(path)
    assert loaded.events == log.events
    assert loaded.verify_chain().valid
    assert loaded.to_text() == log.to_text()


def test_canonical_payload_is_key_order_independent():
    assert canonical_payload({"b": 1, "a": 2}) == canonical_payload({"a": 2, "b": 1})
    assert canonical_payload({"a": 2, "b": 1}) == '{"a":2,"b":1}'


# --- trace reconstruction ---


def approved_task_log(task_id="task-000001"):
    log = AuditLog()
    log.append(EventKind.INGEST, {
        "status": "accepted", "payload_digest": "sha-p", "domain_tag": "summarization",
        "source_id": "src-a", "provenance_tier": "A_verified", "uncertainty_flags": [],
        "requested_by": "operator-1",
    }, task_id=task_id)
    log.append(EventKind.ROUTE_ATTEMPT, {
        "phase": "attempt", "origin": "policy", "adapter_id": "alpha", "outcome": "ok",
        "reported_version": "1.0", "pinned_version": "1.0",
    }, task_id=task_id)
    log.append(EventKind.NORMALIZE, {
        "adapter_id": "alpha", "version_used": "1.0", "kind": "summary",
        "confidence": 0.9, "rationale_digest": "sha-r",
    }, task_id=task_id)
    log.append(EventKind.ROUTE_ATTEMPT, {
        "phase": "decision", "origin": "policy", "final_state": "routed",
        "chosen_adapter": "alpha",
    }, task_id=task_id)
    log.append(EventKind.CONSTRAINT_VERDICT, {
        "outcome": "admissible", "triggered_rules": ["r1"], "red_team_flags": [],
    }, task_id=task_id)
    log.append(EventKind.ENQUEUE, {"item_id": "item-000001", "level": 1, "verdict": "admissible"},
               task_id=task_id)
    log.append(EventKind.HUMAN_DECISION, {
        "item_id": "item-000001", "principal": "reviewer-1", "decision": "approve",
        "rationale": "ok", "origin": "human",
    }, task_id=task_id)
    log.append(EventKind.ACTION, {
        "action_id": "action-000001", "item_id": "item-000001",
        "principal": "reviewer-1", "effect": "advisory",
    }, task_id=task_id)
    return log


def test_trace_of_approved_task_has_all_seven_fields():
    trace = reconstruct_trace("task-000001", approved_task_log())
    values = trace.field_values()
    assert set(values) == set(TRACE_FIELDS)
    assert values["model_choice"] == "alpha"
    assert values["version"] == "1.0"
    assert values["prompt"] == "sha-p"
    assert values["context_boundaries"] == {"domain_tag": "summarization",
                                            "provenance_tier": "A_verified"}
    assert values["rule_triggers"] == ["r1"]
    assert values["human_interventions"][0]["decision"] == "approve"
    assert values["action_outcome"] == {"action_id": "action-000001"}
    assert trace.rationale_digest == "sha-r"
    assert trace.is_complete()


def test_trace_of_denied_task_terminates_early_but_completely():
    log = approved_task_log()
    events = log.events[:5]
    log2 = AuditLog()
    for e in events[:4]:
        log2.append(e.event_kind, e.payload, task_id=e.task_id)
    log2.append(EventKind.CONSTRAINT_VERDICT, {
        "outcome": "denied", "triggered_rules": ["deny-rule"], "red_team_flags": [],
    }, task_id="task-000001")
    trace = reconstruct_trace("task-000001", log2)
    assert trace.human_interventions == NOT_APPLICABLE
    assert trace.action_outcome == {"terminal": "denied"}
    assert trace.is_complete()


def test_trace_of_ingest_rejected_task():
    log = AuditLog()
    log.append(EventKind.INGEST, {
        "status": "rejected", "reason": "REJECTED_DOMAIN",
        "domain_tag": "fire_control", "source_id": "src-a",
    }, task_id="task-000009")
    trace = reconstruct_trace("task-000009", log)
    assert trace.model_choice == NOT_APPLICABLE
    assert trace.action_outcome == {"terminal": "REJECTED_DOMAIN"}
    assert trace.is_complete()


def test_trace_action_without_rationale_is_an_audit_gap():
    log = approved_task_log()
    log2 = AuditLog()
    for e in log.events:
        payload = dict(e.payload)
        if e.event_kind is EventKind.NORMALIZE:
            payload["rationale_digest"] = None
        log2.append(e.event_kind, payload, task_id=e.task_id)
    trace = reconstruct_trace("task-000001", log2)
    assert trace.missing_fields() == ["rationale"]
    assert not trace.is_complete()


def test_trace_unknown_task():
    with pytest.raises(UnknownTask):
        reconstruct_trace("task-404404", AuditLog())


def test_completeness_report_counts_and_ratio():
    log = approved_task_log()
    report = completeness_report(log)
    assert report.tasks_total == 1
    assert report.tasks_complete_trace == 1
    assert report.completeness_ratio == 1.0
    assert completeness_report(AuditLog()).completeness_ratio == 1.0


# --- snapshots ---


def test_snapshot_store_restores_exact_text():
    store = SnapshotStore()
    ref = store.snapshot("before-change", "config v1\n")
    assert ref.digest == hashlib.sha256(b"config v1\n").hexdigest()
    assert store.restore(ref) == "config v1\n"


def test_snapshot_store_rejects_unknown_or_mismatched_refs():
    store = SnapshotStore()
    ref = store.snapshot("label", "text")
    with pytest.raises(UnknownSnapshot):
        store.restore(SnapshotRef("missing", ref.digest))
    with pytest.raises(UnknownSnapshot):
        store.restore(SnapshotRef("label", "0" * 64))
