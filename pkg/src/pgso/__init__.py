"""Ontology-driven property graph schema optimization."""
from __future__ import annotations

__version__ = "0.1.0"
