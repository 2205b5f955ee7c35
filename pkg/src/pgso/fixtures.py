"""Shipped MED-shaped fixture files."""
from __future__ import annotations

from importlib import resources


def data_path(name: str):
    return resources.files("pgso") / "data" / name


def _text(name: str) -> str:
    return data_path(name).read_text()


def med_ontology():
    from .ontology import parse_ontology

    return parse_ontology(_text("med_ontology.json"))


def med_stats():
    from .ontology import parse_stats

    return parse_stats(_text("med_stats.json"), med_ontology())


def med_workload():
    from .ontology import parse_workload

    return parse_workload(_text("med_workload.json"), med_ontology())


def med_instances():
    from .bench import parse_instances

    return parse_instances(_text("med_instances.json"))


def med_templates():
    from .bench import parse_templates

    return parse_templates(_text("med_templates.json"))
