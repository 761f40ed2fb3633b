"""Desk-scale policy-space response oracles, cognitive hierarchies and their evaluation."""

__version__ = "0.1.0"
