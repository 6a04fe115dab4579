"""HTTP API: thin validated wrappers over module operations.

Principals are asserted via the X-Principal header (no authn stack; this is
a reference artifact, not a production identity integration). Every admin
endpoint requires an admin principal and produces an admin audit event.
Errors carry stable machine-readable codes mirroring module errors.
"""

from typing import Optional

from fastapi import FastAPI, Header, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .audit import NOT_APPLICABLE, SnapshotRef
from .authority import DecisionKind
from .errors import GatewayError
from .gateway import Gateway
from .ingest import RawRequest
from .threatsim import score_sovereignty

_STATUS_BY_CODE = {
    "UNKNOWN_ADAPTER": 404,
    "UNKNOWN_TASK": 404,
    "UNKNOWN_ITEM": 404,
    "UNKNOWN_PRINCIPAL": 404,
    "UNKNOWN_SNAPSHOT": 404,
    "UNAUTHORIZED_PRINCIPAL": 403,
    "ALREADY_DECIDED": 409,
    "MAX_LEVEL_REACHED": 409,
    "NOTHING_TO_ROLLBACK": 409,
}


class SubmitTaskBody(BaseModel):
    source_id: str
    domain_tag: str
    body: str


class DecisionBody(BaseModel):
    decision: str
    rationale: str


class EscalationBody(BaseModel):
    reason: str


class PinBody(BaseModel):
    adapter_id: str
    version: str


class RollbackVersionBody(BaseModel):
    adapter_id: str


class ReloadPolicyBody(BaseModel):
    ruleset_text: Optional[str] = None
    routing_text: Optional[str] = None


class SnapshotBody(BaseModel):
    label: str


class RollbackConfigBody(BaseModel):
    label: str
    digest: str


def create_app(gateway: Gateway) -> FastAPI:
    app = FastAPI(title="sovgate", version="0.1.0")

    @app.exception_handler(GatewayError)
    async def gateway_error_handler(request: Request, exc: GatewayError):
        status = _STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse(status_code=status, content={"error": exc.code, "detail": exc.message})

    def item_view(item):
        verdict = item.verdict_ref
        output = item.output_ref
        return {
            "item_id": item.item_id,
            "task_id": item.task_id,
            "level": item.level,
            "state": item.state.value,
            "created_at": item.created_at,
            "domain_tag": None,  # filled from the task's ingest event
            "verdict": verdict.outcome.value if verdict else "degraded",
            "triggered_rules": list(verdict.triggered_rules) if verdict else [],
            "red_team_flags": sorted(verdict.red_team_flags) if verdict else [],
            "confidence": output.confidence if output is not None else None,
            "output_kind": output.kind.value if output is not None else None,
        }

    @app.post("/tasks")
    def submit_task(body: SubmitTaskBody, x_principal: str = Header(default="anonymous")):
        task_id, state = gateway.process_task(
            RawRequest(body.source_id, body.domain_tag, body.body.encode(), x_principal)
        )
        return {"task_id": task_id, "state": state.value}

    @app.get("/tasks/{task_id}")
    def get_task_state(task_id: str):
        return {"task_id": task_id, "state": gateway.get_task_state(task_id).value}

    @app.get("/pending")
    def list_pending(level: Optional[int] = None, principal: Optional[str] = None):
        items = gateway.queue.pending(level=level, principal_id=principal)
        views = []
        for item in items:
            view = item_view(item)
            # Surface the task's domain and provenance tier for the console.
            for event in gateway.audit.task_events(item.task_id):
                if event.event_kind.value == "ingest" and event.payload.get("status") == "accepted":
                    view["domain_tag"] = event.payload["domain_tag"]
                    view["provenance_tier"] = event.payload["provenance_tier"]
            views.append(view)
        return {"items": views}

    @app.post("/pending/{item_id}/decision")
    def post_decision(item_id: str, body: DecisionBody, x_principal: str = Header(default="")):
        try:
            decision = DecisionKind(body.decision)
        except ValueError:
            raise GatewayError(f"unknown decision kind {body.decision!r}")
        record = gateway.decide_item(item_id, x_principal, decision, body.rationale)
        item = gateway.queue.items[item_id]
        return {
            "item_id": item_id,
            "decision": record.decision.value,
            "task_id": item.task_id,
            "task_state": gateway.get_task_state(item.task_id).value,
        }

    @app.post("/pending/{item_id}/escalation")
    def post_escalation(item_id: str, body: EscalationBody, x_principal: str = Header(default="")):
        child = gateway.escalate_item(item_id, body.reason)
        return {"item_id": item_id, "new_item_id": child.item_id, "level": child.level}

    @app.get("/trace/{task_id}")
    def get_trace(task_id: str):
        trace = gateway.get_trace(task_id)
        chain = gateway.audit.verify_chain()
        return {
            "task_id": trace.task_id,
            "fields": trace.field_values(),
            "rationale_digest": trace.rationale_digest,
            "complete": trace.is_complete(),
            "not_applicable_marker": NOT_APPLICABLE,
            "chain_status": str(chain),
        }

    @app.get("/scorecard")
    def get_scorecard():
        return {"scorecard": score_sovereignty(gateway.audit).as_dict()}

    @app.post("/admin/pin")
    def admin_pin(body: PinBody, x_principal: str = Header(default="")):
        gateway.admin_pin(x_principal, body.adapter_id, body.version)
        return {"adapter_id": body.adapter_id, "pinned_version": body.version}

    @app.post("/admin/rollback-version")
    def admin_rollback_version(body: RollbackVersionBody, x_principal: str = Header(default="")):
        gateway.admin_rollback_version(x_principal, body.adapter_id)
        return {
            "adapter_id": body.adapter_id,
            "pinned_version": gateway.pins.pins[body.adapter_id].pinned_version,
        }

    @app.post("/admin/reload-policy")
    def admin_reload_policy(body: ReloadPolicyBody, x_principal: str = Header(default="")):
        gateway.admin_reload_policy(
            x_principal, ruleset_text=body.ruleset_text, routing_text=body.routing_text
        )
        return {"reloaded": True}

    @app.post("/admin/snapshot")
    def admin_snapshot(body: SnapshotBody, x_principal: str = Header(default="")):
        ref = gateway.admin_snapshot(x_principal, body.label)
        return {"label": ref.label, "digest": ref.digest}

    @app.post("/admin/rollback-config")
    def admin_rollback_config(body: RollbackConfigBody, x_principal: str = Header(default="")):
        gateway.admin_rollback_config(x_principal, SnapshotRef(body.label, body.digest))
        return {"restored": body.label}

    return app
