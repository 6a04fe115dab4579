import itertools

import pytest

from sovgate.adapters import AdapterDescriptor, AdapterRegistry, MockSupplier, parse_script
from sovgate.authority import Principal
from sovgate.ingest import Channel, ReliabilityTier, SourceDescriptor, SourceRegistry

TAXONOMY = frozenset(
    {"summarization", "anomaly_detection", "option_generation", "planning_support"}
)


@pytest.fixture
def taxonomy():
    return TAXONOMY


@pytest.fixture
def sources():
    registry = SourceRegistry()
    registry.add(SourceDescriptor("src-a", ReliabilityTier.A_VERIFIED, Channel.SENSOR))
    registry.add(SourceDescriptor("src-b", ReliabilityTier.B_CORROBORATED, Channel.REPORT))
    registry.add(SourceDescriptor("src-c", ReliabilityTier.C_SINGLE_SOURCE, Channel.OPEN_SOURCE))
    registry.add(SourceDescriptor("src-d", ReliabilityTier.D_UNVERIFIED, Channel.SYNTHETIC))
    return registry


@pytest.fixture
def principals():
    return {
        "reviewer-1": Principal("reviewer-1", "Line Reviewer", 1),
        "reviewer-2": Principal("reviewer-2", "Senior Reviewer", 2),
        "commander": Principal("commander", "Commanding Reviewer", 3, admin=True),
    }


def make_mock(adapter_id="alpha", script_text="none", version="1.0", dialect="alpha",
              supplier="acme", seed=0, domains=None):
    descriptor = AdapterDescriptor(
        adapter_id, supplier, frozenset(domains) if domains else TAXONOMY, version
    )
    return descriptor, MockSupplier(descriptor, parse_script(script_text), seed=seed,
                                    dialect=dialect)


def make_registry(*specs):
    """specs: tuples of kwargs for make_mock."""
    registry = AdapterRegistry(taxonomy=TAXONOMY)
    for spec in specs:
        descriptor, mock = make_mock(**spec)
        registry.register(descriptor, mock)
    return registry


def counter_clock():
    counter = itertools.count()
    return lambda: float(next(counter))
