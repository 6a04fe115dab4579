"""HTTP surface: task submission, review flow, traces, and admin endpoints."""

import pytest
from fastapi.testclient import TestClient

from conftest import TAXONOMY, counter_clock, make_registry
from sovgate.api import create_app
from sovgate.audit import NOT_APPLICABLE
from sovgate.constraints import load_ruleset
from sovgate.gateway import Gateway
from sovgate.ingest import Channel, ReliabilityTier, SourceDescriptor, SourceRegistry
from sovgate.orchestrator import DegradedMode, DomainRoute, RoutingPolicy
from sovgate.threatsim import STANDARD_RULES, standard_principals


@pytest.fixture
def client():
    sources = SourceRegistry()
    sources.add(SourceDescriptor("src-a", ReliabilityTier.A_VERIFIED, Channel.SENSOR))
    sources.add(SourceDescriptor("src-d", ReliabilityTier.D_UNVERIFIED, Channel.SYNTHETIC))
    registry = make_registry(
        {"adapter_id": "alpha"},
        {"adapter_id": "bravo", "supplier": "other", "dialect": "bravo", "version": "3.2"},
    )
    gateway = Gateway(
        taxonomy=TAXONOMY,
        sources=sources,
        principals=standard_principals(),
        registry=registry,
        policy=RoutingPolicy({
            d: DomainRoute(("alpha", "bravo"), 0.0, DegradedMode.QUEUE_FOR_HUMAN)
            for d in TAXONOMY
        }),
        ruleset=load_ruleset(STANDARD_RULES, TAXONOMY),
        clock=counter_clock(),
        deterministic_ids=True,
    )
    gateway.admin_pin("commander", "alpha", "1.0")
    gateway.admin_pin("commander", "bravo", "3.2")
    return TestClient(create_app(gateway))


def submit(client, domain="summarization", source="src-a", body="payload"):
    response = client.post("/tasks", json={
        "source_id": source, "domain_tag": domain, "body": body,
    }, headers={"X-Principal": "operator-1"})
    assert response.status_code == 200
    return response.json()


def test_submit_and_approve_round_trip(client):
    task = submit(client)
    assert task["state"] == "pending"

    pending = client.get("/pending").json()["items"]
    assert len(pending) == 1
    item = pending[0]
    assert item["task_id"] == task["task_id"]
    assert item["domain_tag"] == "summarization"
    assert item["provenance_tier"] == "A_verified"

    decided = client.post(f"/pending/{item['item_id']}/decision", json={
        "decision": "approve", "rationale": "sound analysis",
    }, headers={"X-Principal": "reviewer-1"})
    assert decided.status_code == 200
    assert decided.json()["task_state"] == "action_issued"

    state = client.get(f"/tasks/{task['task_id']}").json()
    assert state["state"] == "action_issued"
    assert client.get("/pending").json()["items"] == []


def test_double_decision_is_conflict(client):
    task = submit(client)
    item = client.get("/pending").json()["items"][0]
    body = {"decision": "approve", "rationale": "ok"}
    first = client.post(f"/pending/{item['item_id']}/decision", json=body,
                        headers={"X-Principal": "reviewer-1"})
    assert first.status_code == 200
    second = client.post(f"/pending/{item['item_id']}/decision", json=body,
                         headers={"X-Principal": "reviewer-2"})
    assert second.status_code == 409
    assert second.json()["error"] == "ALREADY_DECIDED"


def test_error_codes(client):
    assert client.get("/tasks/task-404404").status_code == 404
    assert client.get("/trace/task-404404").status_code == 404
    missing = client.post("/pending/item-404404/decision", json={
        "decision": "approve", "rationale": "ok",
    }, headers={"X-Principal": "reviewer-1"})
    assert missing.status_code == 404
    assert missing.json()["error"] == "UNKNOWN_ITEM"
    submit(client)
    item = client.get("/pending").json()["items"][0]
    nobody = client.post(f"/pending/{item['item_id']}/decision", json={
        "decision": "approve", "rationale": "ok",
    }, headers={"X-Principal": "intruder"})
    assert nobody.status_code == 404
    assert nobody.json()["error"] == "UNKNOWN_PRINCIPAL"
    empty = client.post(f"/pending/{item['item_id']}/decision", json={
        "decision": "approve", "rationale": " ",
    }, headers={"X-Principal": "reviewer-1"})
    assert empty.status_code == 400


def test_trace_endpoint_shows_all_seven_fields(client):
    task = submit(client)
    item = client.get("/pending").json()["items"][0]
    client.post(f"/pending/{item['item_id']}/decision", json={
        "decision": "approve", "rationale": "ok",
    }, headers={"X-Principal": "reviewer-1"})
    trace = client.get(f"/trace/{task['task_id']}").json()
    assert set(trace["fields"]) == {
        "model_choice", "version", "prompt", "context_boundaries",
        "rule_triggers", "human_interventions", "action_outcome",
    }
    assert trace["complete"] is True
    assert trace["chain_status"] == "valid"
    assert trace["not_applicable_marker"] == NOT_APPLICABLE


def test_escalation_endpoint(client):
    submit(client, domain="anomaly_detection", source="src-d")  # flagged, level 2
    item = client.get("/pending").json()["items"][0]
    assert item["level"] == 2
    escalated = client.post(f"/pending/{item['item_id']}/escalation",
                            json={"reason": "needs command review"})
    assert escalated.status_code == 200
    assert escalated.json()["level"] == 3
    repeat = client.post(f"/pending/{escalated.json()['new_item_id']}/escalation",
                         json={"reason": "higher"})
    assert repeat.status_code == 409
    assert repeat.json()["error"] == "MAX_LEVEL_REACHED"


def test_pending_filters(client):
    submit(client)  # level 1
    submit(client, domain="anomaly_detection", source="src-d")  # level 2
    assert len(client.get("/pending").json()["items"]) == 2
    assert len(client.get("/pending", params={"level": 2}).json()["items"]) == 1
    assert len(client.get("/pending", params={"principal": "reviewer-1"}).json()["items"]) == 1


def test_scorecard_endpoint(client):
    submit(client)
    scorecard = client.get("/scorecard").json()["scorecard"]
    assert set(scorecard) == {
        "policy_sovereignty", "routing_sovereignty", "version_sovereignty",
        "constraint_sovereignty", "audit_sovereignty", "action_sovereignty",
    }


def test_admin_endpoints_enforce_principal(client):
    forbidden = client.post("/admin/pin", json={"adapter_id": "alpha", "version": "2.0"},
                            headers={"X-Principal": "reviewer-1"})
    assert forbidden.status_code == 403
    pinned = client.post("/admin/pin", json={"adapter_id": "alpha", "version": "2.0"},
                         headers={"X-Principal": "commander"})
    assert pinned.status_code == 200
    rolled = client.post("/admin/rollback-version", json={"adapter_id": "alpha"},
                         headers={"X-Principal": "commander"})
    assert rolled.status_code == 200
    assert rolled.json()["pinned_version"] == "1.0"
    empty_history = client.post("/admin/rollback-version", json={"adapter_id": "ghost"},
                                headers={"X-Principal": "commander"})
    assert empty_history.status_code == 409


def test_admin_snapshot_and_rollback(client):
    snap = client.post("/admin/snapshot", json={"label": "baseline"},
                       headers={"X-Principal": "commander"})
    assert snap.status_code == 200
    ref = snap.json()
    client.post("/admin/reload-policy", json={"ruleset_text": ""},
                headers={"X-Principal": "commander"})
    restored = client.post("/admin/rollback-config", json=ref,
                           headers={"X-Principal": "commander"})
    assert restored.status_code == 200
    missing = client.post("/admin/rollback-config",
                          json={"label": "ghost", "digest": "0" * 64},
                          headers={"X-Principal": "commander"})
    assert missing.status_code == 404
