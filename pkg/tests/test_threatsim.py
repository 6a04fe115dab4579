"""Scenario harness: determinism, scorecards, and the comparison report."""

import pytest

from sovgate.audit import AuditLog, EventKind
from sovgate.errors import BrokenChain, IncompleteSuite, InvalidScenario
from sovgate.gateway import TaskState
from sovgate.threatsim import (
    AdapterSpec,
    ArchitectureMode,
    ScenarioId,
    THREAT_SCENARIOS,
    ThreatScenario,
    build_scenario,
    compare_architectures,
    concentration_metric,
    parse_scenario_file,
    run_scenario,
    score_sovereignty,
)

SOV = ArchitectureMode.SOVEREIGNTY_CENTRIC
MC = ArchitectureMode.MODEL_CENTRIC


def run(scenario_id, mode, **kwargs):
    kwargs.setdefault("task_count", 24)
    return run_scenario(build_scenario(scenario_id, mode, **kwargs))


def test_runs_are_deterministic_and_chains_valid():
    for mode in (SOV, MC):
        first = run(ScenarioId.NEUTRAL, mode)
        second = run(ScenarioId.NEUTRAL, mode)
        assert first.log.to_text() == second.log.to_text()
        assert first.log.verify_chain().valid
        assert first.task_states == second.task_states


def test_neutral_sovereignty_run_scores_ones():
    report = run(ScenarioId.NEUTRAL, SOV, task_count=40)
    assert report.scorecard.as_dict() == {axis: 1.0 for axis in report.scorecard.as_dict()}


def test_policy_injection_is_a_sovereignty_differentiator():
    sov = run(ScenarioId.POLICY_INJECTION, SOV, task_count=40)
    mc = run(ScenarioId.POLICY_INJECTION, MC, task_count=40)
    assert sov.scorecard.policy_sovereignty == 1.0
    assert mc.scorecard.policy_sovereignty < 1.0


def test_version_drift_detection_split():
    sov = run(ScenarioId.VERSION_DRIFT, SOV, task_count=40)
    mc = run(ScenarioId.VERSION_DRIFT, MC, task_count=40)
    assert sov.scorecard.version_sovereignty == 1.0
    assert mc.scorecard.version_sovereignty == 0.0
    # The drifted version must never pass normalization in sovereign mode.
    drifted_normalizations = [
        e for e in sov.log.events
        if e.event_kind is EventKind.NORMALIZE and e.payload["version_used"] == "2.0"
    ]
    assert drifted_normalizations == []


def test_single_adapter_withdrawal_oracle():
    """Fail-closed run: tasks after the scripted withdrawal step terminate
    degraded; the cutoff index is recomputed from the script parameters."""
    task_count = 20
    withdraw_at = max(1, task_count // 4)
    report = run(ScenarioId.WITHDRAWAL, SOV, task_count=task_count, single_adapter=True)
    states = [report.task_states[f"task-{i + 1:06d}"] for i in range(task_count)]
    for i, state in enumerate(states):
        if i >= withdraw_at:
            assert state is TaskState.DEGRADED, i
        else:
            assert state is not TaskState.DEGRADED, i


def test_two_adapter_withdrawal_falls_back():
    report = run(ScenarioId.WITHDRAWAL, SOV, task_count=20)
    assert not any(state is TaskState.PENDING for state in report.task_states.values())
    # Affected tasks recover through the second adapter.
    affected = {
        e.task_id for e in report.log.events
        if e.event_kind is EventKind.ROUTE_ATTEMPT
        and e.payload.get("outcome") == "unavailable"
    }
    routed = {
        e.task_id for e in report.log.events
        if e.event_kind is EventKind.ROUTE_ATTEMPT
        and e.payload.get("final_state") == "routed"
    }
    assert affected and affected <= routed


def test_model_centric_runs_have_no_sovereign_controls():
    report = run(ScenarioId.NEUTRAL, MC, task_count=20)
    kinds = {e.event_kind for e in report.log.events}
    assert EventKind.CONSTRAINT_VERDICT not in kinds
    assert EventKind.ADMIN_PIN not in kinds
    assert report.scorecard.action_sovereignty == 0.0


def test_concentration_matches_brute_force_oracle():
    sequence = ["a", "a", "b", "a", "a", "a", "b", "b", "a", "a"]
    log = AuditLog()
    for i, adapter in enumerate(sequence):
        log.append(EventKind.ROUTE_ATTEMPT, {
            "phase": "decision", "origin": "policy", "final_state": "routed",
            "chosen_adapter": adapter,
        }, task_id=f"task-{i:06d}")

    def brute(window):
        best = 0.0
        for start in range(len(sequence) - window + 1):
            chunk = sequence[start:start + window]
            best = max(best, max(chunk.count(x) for x in set(chunk)) / window)
        return best

    for window in (1, 3, 4, 10):
        assert concentration_metric(log, window) == brute(window)
    assert concentration_metric(AuditLog(), 4) == 0.0


def test_normative_drift_concentrates_routing():
    report = run(ScenarioId.NORMATIVE_DRIFT, SOV, task_count=40)
    assert report.concentration == 1.0


def test_score_refuses_broken_chains():
    import dataclasses
    log = AuditLog()
    log.append(EventKind.SCENARIO_MARKER, {"scenario": "neutral"})
    log.events[0] = dataclasses.replace(log.events[0], this_digest="0" * 64)
    with pytest.raises(BrokenChain):
        score_sovereignty(log)


def test_run_scenario_rejects_empty_configs():
    scenario = ThreatScenario(ScenarioId.NEUTRAL, SOV, 1, 0,
                              (AdapterSpec("a", "s", "1.0", "alpha"),))
    with pytest.raises(InvalidScenario):
        run_scenario(scenario)


def test_compare_requires_a_complete_suite():
    reports = [run(s, SOV, task_count=8) for s in THREAT_SCENARIOS]
    with pytest.raises(IncompleteSuite):
        compare_architectures(reports)


def test_parse_scenario_file(tmp_path):
    path = tmp_path / "demo.scenario"
    path.write_text(
        "scenario = withdrawal\n"
        "mode = sovereignty_centric\n"
        "seed = 11\n"
        "tasks = 16\n"
        "\n"
        "[adapter custom]\n"
        "supplier = vendor-x\n"
        "version = 4.2\n"
        "dialect = bravo\n"
        "script = withdraw at=3\n"
    )
    scenario = parse_scenario_file(path)
    assert scenario.scenario_id is ScenarioId.WITHDRAWAL
    assert scenario.seed == 11
    assert scenario.task_count == 16
    assert scenario.adapters == (
        AdapterSpec("custom", "vendor-x", "4.2", "bravo", "withdraw at=3"),
    )
    path.write_text("scenario = apocalypse\nmode = sovereignty_centric\n")
    with pytest.raises(InvalidScenario):
        parse_scenario_file(path)
