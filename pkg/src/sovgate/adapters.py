"""Layer 2: replaceable analytical suppliers behind a common normalized schema.

Refusals and withdrawals are in-band response statuses, never exceptions,
so the orchestrator can observe them and route around them. Simulated
suppliers are fully scripted: behavior is a deterministic function of
(script, seed, envelope, step counter).
"""

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Protocol, Tuple

from .errors import InvalidDescriptor, MalformedRequest, NormalizationFailure, UnknownAdapter
from .ingest import TaskEnvelope


class Availability(str, Enum):
    AVAILABLE = "available"
    DEGRADED = "degraded"
    WITHDRAWN = "withdrawn"


class SupplierStatus(str, Enum):
    OK = "ok"
    REFUSED = "refused"
    UNAVAILABLE = "unavailable"
    MALFORMED = "malformed"


class OutputKind(str, Enum):
    SUMMARY = "summary"
    ANOMALY_FLAGS = "anomaly_flags"
    OPTION_SET = "option_set"
    STRUCTURED_ANALYSIS = "structured_analysis"


# Which normalized kind each task domain maps to. There is deliberately no
# "command" or "action" kind: supplier output is analysis, never execution.
DOMAIN_KIND: Dict[str, OutputKind] = {
    "summarization": OutputKind.SUMMARY,
    "anomaly_detection": OutputKind.ANOMALY_FLAGS,
    "option_generation": OutputKind.OPTION_SET,
    "planning_support": OutputKind.STRUCTURED_ANALYSIS,
}


@dataclass(frozen=True)
class AdapterDescriptor:
    adapter_id: str
    supplier_name: str
    certified_domains: frozenset
    advertised_version: str
    availability: Availability = Availability.AVAILABLE


@dataclass(frozen=True)
class RawSupplierResponse:
    adapter_id: str
    reported_version: str
    status: SupplierStatus
    refusal_reason: Optional[str]
    body: dict
    rationale_fields_present: bool


@dataclass(frozen=True)
class Option:
    option_id: str
    description_digest: str
    score: float


@dataclass(frozen=True)
class AnalyticalOutput:
    task_id: str
    adapter_id: str
    version_used: str
    kind: OutputKind
    options: Tuple[Option, ...]
    confidence: float
    rationale_digest: Optional[str]
    produced_at: float


# --- supplier behavior scripts ---


class DirectiveKind(str, Enum):
    NONE = "none"
    INJECT_POLICY = "inject_policy"
    DRIFT_VERSION = "drift_version"
    WITHDRAW = "withdraw"
    OMIT_RATIONALE = "omit_rationale"


@dataclass(frozen=True)
class Directive:
    kind: DirectiveKind
    at_step: int = 0
    domains: frozenset = frozenset()
    new_version: str = ""
    perturbation: float = 0.0


@dataclass(frozen=True)
class SupplierBehaviorScript:
    directives: Tuple[Directive, ...] = ()

    def withdraw_step(self) -> Optional[int]:
        steps = [d.at_step for d in self.directives if d.kind is DirectiveKind.WITHDRAW]
        return min(steps) if steps else None

    def omit_rationale_step(self) -> Optional[int]:
        steps = [d.at_step for d in self.directives if d.kind is DirectiveKind.OMIT_RATIONALE]
        return min(steps) if steps else None

    def refused_domains(self, step: int) -> frozenset:
        refused: set = set()
        for d in self.directives:
            if d.kind is DirectiveKind.INJECT_POLICY and step >= d.at_step:
                refused |= d.domains
        return frozenset(refused)

    def version_at(self, step: int, advertised: str) -> Tuple[str, float]:
        """Effective (version, score perturbation) at a step."""
        version, perturbation = advertised, 0.0
        for d in sorted(
            (d for d in self.directives if d.kind is DirectiveKind.DRIFT_VERSION),
            key=lambda d: d.at_step,
        ):
            if step >= d.at_step:
                version, perturbation = d.new_version, d.perturbation
        return version, perturbation


def parse_script(text: str) -> SupplierBehaviorScript:
    """Parse a behavior script from its line-oriented form.

    One directive per line, e.g.::

        inject_policy domains=anomaly_detection,planning_support from=0
        drift_version at=5 version=2.0 perturb=0.15
        withdraw at=3
        omit_rationale from=2
        none
    """
    directives: List[Directive] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind_s, kv = parts[0], dict(p.split("=", 1) for p in parts[1:] if "=" in p)
        try:
            kind = DirectiveKind(kind_s)
        except ValueError as exc:
            raise MalformedRequest(f"script line {lineno}: unknown directive {kind_s!r}") from exc
        if kind is DirectiveKind.NONE:
            continue
        step = int(kv.get("at", kv.get("from", 0)))
        directives.append(
            Directive(
                kind=kind,
                at_step=step,
                domains=frozenset(d for d in kv.get("domains", "").split(",") if d),
                new_version=kv.get("version", ""),
                perturbation=float(kv.get("perturb", 0.0)),
            )
        )
    return SupplierBehaviorScript(tuple(directives))


def serialize_script(script: SupplierBehaviorScript) -> str:
    lines = []
    for d in script.directives:
        if d.kind is DirectiveKind.INJECT_POLICY:
            lines.append(f"inject_policy domains={','.join(sorted(d.domains))} from={d.at_step}")
        elif d.kind is DirectiveKind.DRIFT_VERSION:
            lines.append(f"drift_version at={d.at_step} version={d.new_version} perturb={d.perturbation}")
        elif d.kind is DirectiveKind.WITHDRAW:
            lines.append(f"withdraw at={d.at_step}")
        elif d.kind is DirectiveKind.OMIT_RATIONALE:
            lines.append(f"omit_rationale from={d.at_step}")
    return "\n".join(lines) if lines else "none"


# --- supplier port and scripted mock ---


class SupplierPort(Protocol):
    def invoke(self, envelope: TaskEnvelope, produced_at: float) -> RawSupplierResponse: ...

    def availability(self) -> Availability: ...


def _unit_floats(seed_material: str, n: int) -> List[float]:
    """Deterministic floats in [0,1) derived from a digest of the material."""
    out: List[float] = []
    counter = 0
    while len(out) < n:
        digest = hashlib.sha256(f"{seed_material}:{counter}".encode()).digest()
        for i in range(0, len(digest) - 3, 4):
            if len(out) >= n:
                break
            out.append(int.from_bytes(digest[i : i + 4], "big") / 2**32)
        counter += 1
    return out


class MockSupplier:
    """Deterministic scripted supplier.

    The analytical content is derived only from (seed, envelope), never from
    the adapter identity, so two mocks with identical scripts are
    script-identical: they produce payloads that normalize to equal outputs.
    Each mock owns a step counter; invocations are serialized on it.
    """

    def __init__(
        self,
        descriptor: AdapterDescriptor,
        script: SupplierBehaviorScript | None = None,
        seed: int = 0,
        dialect: str = "alpha",
    ):
        if dialect not in ("alpha", "bravo"):
            raise InvalidDescriptor(f"unknown mock dialect {dialect!r}")
        self.descriptor = descriptor
        self.script = script or SupplierBehaviorScript()
        self.seed = seed
        self.dialect = dialect
        self.step = 0

    def availability(self) -> Availability:
        withdraw = self.script.withdraw_step()
        if withdraw is not None and self.step >= withdraw:
            return Availability.WITHDRAWN
        omit = self.script.omit_rationale_step()
        if omit is not None and self.step >= omit:
            return Availability.DEGRADED
        return self.descriptor.availability

    def invoke(self, envelope: TaskEnvelope, produced_at: float = 0.0) -> RawSupplierResponse:
        step = self.step
        self.step += 1
        adapter_id = self.descriptor.adapter_id

        withdraw = self.script.withdraw_step()
        if withdraw is not None and step >= withdraw:
            return RawSupplierResponse(adapter_id, "", SupplierStatus.UNAVAILABLE, None, {}, False)

        if envelope.domain_tag in self.script.refused_domains(step):
            return RawSupplierResponse(
                adapter_id,
                self.descriptor.advertised_version,
                SupplierStatus.REFUSED,
                "policy",
                {},
                False,
            )

        version, perturbation = self.script.version_at(step, self.descriptor.advertised_version)
        omit = self.script.omit_rationale_step()
        rationale_present = not (omit is not None and step >= omit)

        material = f"{self.seed}:{envelope.payload_digest}:{envelope.domain_tag}"
        floats = _unit_floats(material, 4)
        confidence = min(1.0, max(0.0, 0.55 + 0.45 * floats[0] - perturbation))
        options = []
        for i, f in enumerate(floats[1:]):
            score = min(1.0, max(0.0, f - perturbation))
            desc_digest = hashlib.sha256(f"{material}:opt{i}".encode()).hexdigest()
            options.append({"id": f"opt-{i}", "digest": desc_digest, "score": score})
        rationale = hashlib.sha256(f"{material}:rationale".encode()).hexdigest()

        kind = DOMAIN_KIND.get(envelope.domain_tag, OutputKind.OPTION_SET).value
        if self.dialect == "alpha":
            body = {
                "dialect": "alpha",
                "kind": kind,
                "conf": confidence,
                "results": [
                    {"id": o["id"], "text_sha": o["digest"], "weight": o["score"]} for o in options
                ],
            }
            if rationale_present:
                body["rationale_sha"] = rationale
        else:
            body = {
                "dialect": "bravo",
                "analysis": {
                    "category": kind,
                    "certainty": confidence,
                    "candidates": [[o["id"], o["digest"], o["score"]] for o in options],
                },
            }
            if rationale_present:
                body["analysis"]["why_sha"] = rationale
        return RawSupplierResponse(
            adapter_id, version, SupplierStatus.OK, None, body, rationale_present
        )


# --- registry ---


@dataclass
class AdapterRegistry:
    taxonomy: frozenset
    descriptors: Dict[str, AdapterDescriptor] = field(default_factory=dict)
    suppliers: Dict[str, SupplierPort] = field(default_factory=dict)

    def register(self, descriptor: AdapterDescriptor, supplier: SupplierPort) -> None:
        if not descriptor.certified_domains <= self.taxonomy:
            unknown = sorted(descriptor.certified_domains - self.taxonomy)
            raise InvalidDescriptor(f"certified domains not in taxonomy: {unknown}")
        self.descriptors[descriptor.adapter_id] = descriptor
        self.suppliers[descriptor.adapter_id] = supplier

    def descriptor(self, adapter_id: str) -> AdapterDescriptor:
        try:
            return self.descriptors[adapter_id]
        except KeyError:
            raise UnknownAdapter(adapter_id) from None

    def invoke(
        self, adapter_id: str, envelope: TaskEnvelope, produced_at: float = 0.0
    ) -> RawSupplierResponse:
        self.descriptor(adapter_id)
        return self.suppliers[adapter_id].invoke(envelope, produced_at)

    def health_probe(self, adapter_id: str) -> Availability:
        self.descriptor(adapter_id)
        return self.suppliers[adapter_id].availability()


def normalize(
    raw: RawSupplierResponse,
    descriptor: AdapterDescriptor,
    task_id: str,
    produced_at: float = 0.0,
) -> AnalyticalOutput:
    """Map a supplier-shaped payload into the common schema.

    This is the schema firewall: supplier idiosyncrasies must not leak past
    this function. Raises NormalizationFailure for non-ok responses or
    unparseable payloads.
    """
    if raw.status is not SupplierStatus.OK:
        raise NormalizationFailure(f"cannot normalize {raw.status.value} response")
    try:
        dialect = raw.body.get("dialect")
        if dialect == "alpha":
            kind = OutputKind(raw.body["kind"])
            confidence = float(raw.body["conf"])
            options = tuple(
                Option(r["id"], r["text_sha"], float(r["weight"])) for r in raw.body["results"]
            )
            rationale = raw.body.get("rationale_sha")
        elif dialect == "bravo":
            analysis = raw.body["analysis"]
            kind = OutputKind(analysis["category"])
            confidence = float(analysis["certainty"])
            options = tuple(Option(c[0], c[1], float(c[2])) for c in analysis["candidates"])
            rationale = analysis.get("why_sha")
        else:
            raise KeyError(f"unknown payload dialect {dialect!r}")
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise NormalizationFailure(f"unparseable supplier payload: {exc}") from exc
    if not raw.rationale_fields_present:
        rationale = None
    if not 0.0 <= confidence <= 1.0 or any(not 0.0 <= o.score <= 1.0 for o in options):
        raise NormalizationFailure("confidence or option score outside [0,1]")
    return AnalyticalOutput(
        task_id=task_id,
        adapter_id=raw.adapter_id,
        version_used=raw.reported_version,
        kind=kind,
        options=options,
        confidence=confidence,
        rationale_digest=rationale,
        produced_at=produced_at,
    )
