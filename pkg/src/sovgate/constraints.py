"""Layer 4: sovereign admissibility rules evaluated after normalization.

Rules are conjunctive predicates over (domain, provenance tier, output kind).
Evaluation is total and deterministic; deny dominates review, review
dominates admit, and adding a rule can only restrict a verdict.
"""

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .adapters import AnalyticalOutput, OutputKind
from .errors import MalformedPolicy
from .ingest import RELIABILITY_ORDER, ReliabilityTier, TaskEnvelope


class RuleEffect(str, Enum):
    ADMIT = "admit"
    DENY = "deny"
    REQUIRE_REVIEW = "require_review"
    RED_TEAM_FLAG = "red_team_flag"


class VerdictOutcome(str, Enum):
    ADMISSIBLE = "admissible"
    DENIED = "denied"
    REVIEW_REQUIRED = "review_required"


@dataclass(frozen=True)
class ConstraintRule:
    rule_id: str
    domains: frozenset  # empty = any
    tiers: frozenset  # empty = any
    kinds: frozenset  # empty = any
    effect: RuleEffect
    min_tier: Optional[ReliabilityTier] = None
    rationale_required: bool = False

    def matches(self, domain: str, tier: ReliabilityTier, kind: OutputKind) -> bool:
        if self.domains and domain not in self.domains:
            return False
        if self.tiers and tier not in self.tiers:
            return False
        if self.kinds and kind not in self.kinds:
            return False
        if self.min_tier is not None:
            # Rule fires only when provenance is less reliable than the floor.
            if RELIABILITY_ORDER.index(tier) <= RELIABILITY_ORDER.index(self.min_tier):
                return False
        return True


@dataclass(frozen=True)
class RuleSet:
    rules: Tuple[ConstraintRule, ...] = ()


@dataclass(frozen=True)
class ConstraintVerdict:
    task_id: str
    outcome: VerdictOutcome
    triggered_rules: Tuple[str, ...]
    red_team_flags: frozenset


def evaluate(output: AnalyticalOutput, envelope: TaskEnvelope, ruleset: RuleSet) -> ConstraintVerdict:
    """Evaluate every rule; aggregation is deny > review_required > admissible.

    A rationale_required rule whose output lacks a rationale digest triggers
    review regardless of its base effect (audit-asymmetry countermeasure).
    Unmatched outputs default to admissible.
    """
    domain = envelope.domain_tag
    tier = envelope.provenance.resolved_tier
    triggered: List[str] = []
    red_flags: set = set()
    denied = False
    review = False
    for rule in ruleset.rules:
        if not rule.matches(domain, tier, output.kind):
            continue
        triggered.append(rule.rule_id)
        if rule.effect is RuleEffect.DENY:
            denied = True
        elif rule.effect is RuleEffect.REQUIRE_REVIEW:
            review = True
        elif rule.effect is RuleEffect.RED_TEAM_FLAG:
            red_flags.add(rule.rule_id)
        if rule.rationale_required and output.rationale_digest is None:
            review = True
    if denied:
        outcome = VerdictOutcome.DENIED
    elif review:
        outcome = VerdictOutcome.REVIEW_REQUIRED
    else:
        outcome = VerdictOutcome.ADMISSIBLE
    return ConstraintVerdict(
        task_id=output.task_id,
        outcome=outcome,
        triggered_rules=tuple(triggered),
        red_team_flags=frozenset(red_flags),
    )


# --- policy document grammar ---
#
# One rule per block:
#
#   [rule <rule_id>]
#   domains = summarization,planning_support   (or *)
#   tiers = C_single_source,D_unverified       (or *)
#   kinds = option_set                         (or *)
#   effect = deny
#   min_tier = B_corroborated                  (optional)
#   rationale_required = true                  (optional, default false)
#
# Blank lines and # comments are ignored. The format round-trips through
# load_ruleset + serialize_ruleset.

_RULE_KEYS = {"domains", "tiers", "kinds", "effect", "min_tier", "rationale_required"}


def _parse_set(value: str, line: int, caster, label: str) -> frozenset:
    if value.strip() == "*":
        return frozenset()
    items = [v.strip() for v in value.split(",") if v.strip()]
    try:
        return frozenset(caster(v) for v in items)
    except ValueError as exc:
        raise MalformedPolicy(f"line {line}: bad {label} value: {exc}", line=line) from exc


def load_ruleset(document: str, taxonomy: frozenset) -> RuleSet:
    """Parse and validate a policy document.

    Rejects unknown domains, tiers, kinds, effects and duplicate rule ids,
    with line-level diagnostics. An empty document is an empty (default
    admit) ruleset.
    """
    rules: List[ConstraintRule] = []
    seen: Dict[str, int] = {}
    current: Optional[Dict] = None
    current_line = 0

    def flush():
        nonlocal current
        if current is None:
            return
        if "effect" not in current:
            raise MalformedPolicy(
                f"line {current_line}: rule {current['rule_id']!r} missing effect",
                line=current_line,
            )
        rules.append(
            ConstraintRule(
                rule_id=current["rule_id"],
                domains=current.get("domains", frozenset()),
                tiers=current.get("tiers", frozenset()),
                kinds=current.get("kinds", frozenset()),
                effect=current["effect"],
                min_tier=current.get("min_tier"),
                rationale_required=current.get("rationale_required", False),
            )
        )
        current = None

    for lineno, rawline in enumerate(document.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[rule") and line.endswith("]"):
            flush()
            rule_id = line[len("[rule") : -1].strip()
            if not rule_id:
                raise MalformedPolicy(f"line {lineno}: empty rule id", line=lineno)
            if rule_id in seen:
                raise MalformedPolicy(
                    f"line {lineno}: duplicate rule id {rule_id!r} (first at line {seen[rule_id]})",
                    line=lineno,
                )
            seen[rule_id] = lineno
            current = {"rule_id": rule_id}
            current_line = lineno
            continue
        if current is None:
            raise MalformedPolicy(f"line {lineno}: statement outside a [rule] block", line=lineno)
        if "=" not in line:
            raise MalformedPolicy(f"line {lineno}: expected key = value", line=lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in _RULE_KEYS:
            raise MalformedPolicy(f"line {lineno}: unknown key {key!r}", line=lineno)
        if key == "domains":
            domains = _parse_set(value, lineno, str, "domain")
            unknown = domains - taxonomy
            if unknown:
                raise MalformedPolicy(
                    f"line {lineno}: unknown domains {sorted(unknown)}", line=lineno
                )
            current["domains"] = domains
        elif key == "tiers":
            current["tiers"] = _parse_set(value, lineno, ReliabilityTier, "tier")
        elif key == "kinds":
            current["kinds"] = _parse_set(value, lineno, OutputKind, "kind")
        elif key == "effect":
            try:
                current["effect"] = RuleEffect(value)
            except ValueError:
                raise MalformedPolicy(f"line {lineno}: unknown effect {value!r}", line=lineno)
        elif key == "min_tier":
            try:
                current["min_tier"] = ReliabilityTier(value)
            except ValueError:
                raise MalformedPolicy(f"line {lineno}: unknown tier {value!r}", line=lineno)
        elif key == "rationale_required":
            if value not in ("true", "false"):
                raise MalformedPolicy(f"line {lineno}: expected true/false", line=lineno)
            current["rationale_required"] = value == "true"
    flush()
    return RuleSet(tuple(rules))


def load_ruleset_file(path: str | Path, taxonomy: frozenset) -> RuleSet:
    return load_ruleset(Path(path).read_text(), taxonomy)


def serialize_ruleset(ruleset: RuleSet) -> str:
    blocks = []
    for rule in ruleset.rules:
        lines = [f"[rule {rule.rule_id}]"]
        lines.append("domains = " + (",".join(sorted(rule.domains)) if rule.domains else "*"))
        lines.append("tiers = " + (",".join(sorted(t.value for t in rule.tiers)) if rule.tiers else "*"))
        lines.append("kinds = " + (",".join(sorted(k.value for k in rule.kinds)) if rule.kinds else "*"))
        lines.append(f"effect = {rule.effect.value}")
        if rule.min_tier is not None:
            lines.append(f"min_tier = {rule.min_tier.value}")
        if rule.rationale_required:
            lines.append("rationale_required = true")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")
