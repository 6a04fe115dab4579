"""Layer 5: pending-review queue, escalation hierarchy, and the sole
constructor of action records.

Model output can never become an ActionRecord directly: authorize_action
accepts only an approving AuthorizationDecision made by a registered human
principal. Items get exactly one decision; escalation chains are paths.
"""

import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional

from .audit import AuditLog, EventKind
from .constraints import ConstraintVerdict, VerdictOutcome
from .errors import (
    AlreadyDecided,
    DeniedVerdict,
    EmptyRationale,
    MalformedRequest,
    MaxLevelReached,
    RejectedDecision,
    UnauthorizedPrincipal,
    UnknownItem,
    UnknownPrincipal,
)


class ItemState(str, Enum):
    PENDING = "pending"
    APPROVED = "approved"
    REJECTED = "rejected"
    ESCALATED = "escalated"
    EXPIRED = "expired"


class DecisionKind(str, Enum):
    APPROVE = "approve"
    REJECT = "reject"
    OVERRIDE_MODIFY = "override_modify"


@dataclass(frozen=True)
class Principal:
    principal_id: str
    display_name: str
    clearance: int
    admin: bool = False


def load_principals(path: str | Path) -> Dict[str, Principal]:
    """Parse the principal registry file.

    One ``principal_id display_name clearance [admin]`` record per line;
    display names use underscores instead of spaces.
    """
    principals: Dict[str, Principal] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (3, 4):
            raise MalformedRequest(f"principal registry line {lineno}: expected 3 or 4 fields")
        principal_id, display, clearance_s = parts[:3]
        admin = len(parts) == 4 and parts[3] == "admin"
        try:
            clearance = int(clearance_s)
        except ValueError as exc:
            raise MalformedRequest(f"principal registry line {lineno}: {exc}") from exc
        principals[principal_id] = Principal(principal_id, display.replace("_", " "), clearance, admin)
    return principals


@dataclass
class PendingItem:
    item_id: str
    task_id: str
    output_ref: Optional[object]  # AnalyticalOutput, or None for degraded-queue items
    verdict_ref: Optional[ConstraintVerdict]
    level: int
    state: ItemState
    created_at: float
    parent_item: Optional[str] = None
    child_item: Optional[str] = None


@dataclass(frozen=True)
class AuthorizationDecision:
    item_id: str
    principal: str
    decision: DecisionKind
    rationale_text: str
    decided_at: float


@dataclass(frozen=True)
class ActionRecord:
    action_id: str
    task_id: str
    authorizing_decision: AuthorizationDecision
    effect_descriptor: str  # inert label, no executable semantics


class ReviewQueue:
    """Escalation queue with atomic single-decision state transitions."""

    def __init__(
        self,
        principals: Dict[str, Principal],
        max_level: int = 3,
        audit: Optional[AuditLog] = None,
        expiry_timeout: float = float("inf"),
    ):
        self.principals = dict(principals)
        self.max_level = max_level
        self.audit = audit
        self.expiry_timeout = expiry_timeout
        self.items: Dict[str, PendingItem] = {}
        self.decisions: Dict[str, AuthorizationDecision] = {}
        self._lock = threading.Lock()
        self._item_counter = 0
        self._action_counter = 0
        self._actioned: set = set()

    def _next_item_id(self) -> str:
        self._item_counter += 1
        return f"item-{self._item_counter:06d}"

    # --- enqueue ---

    def enqueue_for_review(
        self,
        output,
        verdict: ConstraintVerdict,
        now: float = 0.0,
    ) -> PendingItem:
        """Queue an admissible or review-required output for a human decision.

        Red-team flags promote the initial escalation level to 2.
        """
        if verdict.outcome is VerdictOutcome.DENIED:
            raise DeniedVerdict(f"denied verdict for task {verdict.task_id} must not enqueue")
        with self._lock:
            level = 2 if verdict.red_team_flags else 1
            item = PendingItem(
                item_id=self._next_item_id(),
                task_id=verdict.task_id,
                output_ref=output,
                verdict_ref=verdict,
                level=min(level, self.max_level),
                state=ItemState.PENDING,
                created_at=now,
            )
            self.items[item.item_id] = item
        self._log(
            EventKind.ENQUEUE,
            {"item_id": item.item_id, "level": item.level, "verdict": verdict.outcome.value},
            item.task_id,
        )
        return item

    def enqueue_degraded(self, task_id: str, now: float = 0.0) -> PendingItem:
        """Queue a degraded-mode escalation item (no output to approve)."""
        with self._lock:
            item = PendingItem(
                item_id=self._next_item_id(),
                task_id=task_id,
                output_ref=None,
                verdict_ref=None,
                level=1,
                state=ItemState.PENDING,
                created_at=now,
            )
            self.items[item.item_id] = item
        self._log(
            EventKind.ENQUEUE,
            {"item_id": item.item_id, "level": item.level, "verdict": "degraded"},
            task_id,
        )
        return item

    # --- decisions ---

    def decide(
        self,
        item_id: str,
        principal_id: str,
        decision: DecisionKind,
        rationale: str,
        now: float = 0.0,
    ) -> AuthorizationDecision:
        item = self._get(item_id)
        principal = self.principals.get(principal_id)
        if principal is None:
            raise UnknownPrincipal(principal_id)
        if not rationale or not rationale.strip():
            raise EmptyRationale("rationale_text must be non-empty")
        with self._lock:
            if item.state is not ItemState.PENDING:
                raise AlreadyDecided(f"{item_id} is {item.state.value}")
            if principal.clearance < item.level:
                raise UnauthorizedPrincipal(
                    f"{principal_id} clearance {principal.clearance} < level {item.level}"
                )
            item.state = (
                ItemState.APPROVED if decision is not DecisionKind.REJECT else ItemState.REJECTED
            )
            record = AuthorizationDecision(item_id, principal_id, decision, rationale, now)
            self.decisions[item_id] = record
        self._log(
            EventKind.HUMAN_DECISION,
            {
                "item_id": item_id,
                "principal": principal_id,
                "decision": decision.value,
                "rationale": rationale,
                "origin": "human",
            },
            item.task_id,
        )
        return record

    def escalate(self, item_id: str, reason: str, now: float = 0.0) -> PendingItem:
        item = self._get(item_id)
        with self._lock:
            if item.state is not ItemState.PENDING:
                raise AlreadyDecided(f"{item_id} is {item.state.value}")
            if item.level >= self.max_level:
                raise MaxLevelReached(f"{item_id} already at level {item.level}")
            item.state = ItemState.ESCALATED
            child = PendingItem(
                item_id=self._next_item_id(),
                task_id=item.task_id,
                output_ref=item.output_ref,
                verdict_ref=item.verdict_ref,
                level=item.level + 1,
                state=ItemState.PENDING,
                created_at=now,
                parent_item=item.item_id,
            )
            item.child_item = child.item_id
            self.items[child.item_id] = child
        self._log(
            EventKind.ESCALATION,
            {
                "item_id": item_id,
                "new_item_id": child.item_id,
                "to_level": child.level,
                "reason": reason,
            },
            item.task_id,
        )
        return child

    def expire_stale(self, now: float) -> List[PendingItem]:
        """Expire timed-out pending items into a mandatory escalation so the
        queue cannot silently stall. Items already at max level stay pending:
        a top-level human decision is mandatory."""
        spawned: List[PendingItem] = []
        for item in list(self.items.values()):
            if item.state is not ItemState.PENDING:
                continue
            if now - item.created_at < self.expiry_timeout:
                continue
            if item.level >= self.max_level:
                continue
            with self._lock:
                if item.state is not ItemState.PENDING:
                    continue
                item.state = ItemState.EXPIRED
                child = PendingItem(
                    item_id=self._next_item_id(),
                    task_id=item.task_id,
                    output_ref=item.output_ref,
                    verdict_ref=item.verdict_ref,
                    level=item.level + 1,
                    state=ItemState.PENDING,
                    created_at=now,
                    parent_item=item.item_id,
                )
                item.child_item = child.item_id
                self.items[child.item_id] = child
            self._log(
                EventKind.ESCALATION,
                {
                    "item_id": item.item_id,
                    "new_item_id": child.item_id,
                    "to_level": child.level,
                    "reason": "expired",
                },
                item.task_id,
            )
            spawned.append(child)
        return spawned

    # --- the only ActionRecord constructor in the system ---

    def authorize_action(
        self, decision: AuthorizationDecision, effect_descriptor: str = "advisory", now: float = 0.0
    ) -> ActionRecord:
        if decision.decision is DecisionKind.REJECT:
            raise RejectedDecision(f"cannot authorize action from a reject on {decision.item_id}")
        item = self._get(decision.item_id)
        with self._lock:
            if self.decisions.get(decision.item_id) != decision:
                raise RejectedDecision(f"decision for {decision.item_id} is not on record")
            if item.item_id in self._actioned:
                raise RejectedDecision(f"{item.item_id} already actioned")
            self._actioned.add(item.item_id)
            self._action_counter += 1
            record = ActionRecord(
                action_id=f"action-{self._action_counter:06d}",
                task_id=item.task_id,
                authorizing_decision=decision,
                effect_descriptor=effect_descriptor,
            )
        self._log(
            EventKind.ACTION,
            {
                "action_id": record.action_id,
                "item_id": decision.item_id,
                "principal": decision.principal,
                "effect": effect_descriptor,
            },
            item.task_id,
        )
        return record

    # --- queries ---

    def pending(self, level: Optional[int] = None, principal_id: Optional[str] = None) -> List[PendingItem]:
        items = [i for i in self.items.values() if i.state is ItemState.PENDING]
        if level is not None:
            items = [i for i in items if i.level == level]
        if principal_id is not None:
            principal = self.principals.get(principal_id)
            if principal is None:
                raise UnknownPrincipal(principal_id)
            items = [i for i in items if i.level <= principal.clearance]
        return sorted(items, key=lambda i: i.item_id)

    def chain_of(self, item_id: str) -> List[PendingItem]:
        item = self._get(item_id)
        while item.parent_item is not None:
            item = self._get(item.parent_item)
        chain = [item]
        while item.child_item is not None:
            item = self._get(item.child_item)
            chain.append(item)
        return chain

    def _get(self, item_id: str) -> PendingItem:
        try:
            return self.items[item_id]
        except KeyError:
            raise UnknownItem(item_id) from None

    def _log(self, kind: EventKind, payload: dict, task_id: str) -> None:
        if self.audit is not None:
            self.audit.append(kind, payload, task_id=task_id)
