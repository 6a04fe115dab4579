"""Decision-sovereignty gateway: sovereign routing, constraints, human
authorization, tamper-evident audit, and an adversarial supplier-simulation
harness."""

__version__ = "0.1.0"
