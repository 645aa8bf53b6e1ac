"""Shared vocabularies for message content.

An ontology names a set of terms; each term is a top-level content key with
a declared value type.  Term schemas are loaded from a YAML config file so
operators can extend the vocabulary without touching code.  Validation runs
at envelope construction only: decoding accepts foreign-but-well-formed
content so the admin side can display any traffic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from typing import Any

import yaml

from .messaging import ProtocolError

__all__ = ["Ontology", "OntologyRegistry", "load_ontologies", "default_ontologies"]

_TYPE_CHECKS = {
    "string": lambda v: isinstance(v, str),
    "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    "integer": lambda v: isinstance(v, int) and not isinstance(v, bool),
    "boolean": lambda v: isinstance(v, bool),
    "object": lambda v: isinstance(v, dict),
    "list": lambda v: isinstance(v, list),
    "any": lambda v: True,
}


@dataclass(frozen=True)
class Ontology:
    """A named vocabulary: term name -> value type name."""

    name: str
    terms: dict[str, str] = field(default_factory=dict)

    def validate(self, content: Any) -> None:
        """Check a content object against this vocabulary.

        Only map contents are term-checked; scalar and list contents carry
        no term names to validate.
        """
        if not isinstance(content, dict):
            return
        for key, value in content.items():
            if key not in self.terms:
                raise ProtocolError(
                    f"ontology {self.name!r} does not define term {key!r}"
                )
            type_name = self.terms[key]
            check = _TYPE_CHECKS.get(type_name)
            if check is None:
                raise ProtocolError(
                    f"ontology {self.name!r} term {key!r} has unknown type {type_name!r}"
                )
            if not check(value):
                raise ProtocolError(
                    f"ontology {self.name!r} term {key!r} expects {type_name}, "
                    f"got {type(value).__name__}"
                )


class OntologyRegistry:
    """Lookup table of declared ontologies.

    Unknown ontology names pass validation untouched: agents may speak
    vocabularies this runtime has no schema for.
    """

    def __init__(self, ontologies: dict[str, Ontology] | None = None):
        self._ontologies = dict(ontologies or {})

    def add(self, ontology: Ontology) -> None:
        self._ontologies[ontology.name] = ontology

    def get(self, name: str) -> Ontology | None:
        return self._ontologies.get(name)

    def validate(self, name: str, content: Any) -> None:
        ontology = self._ontologies.get(name)
        if ontology is not None:
            ontology.validate(content)


def load_ontologies(source: str | bytes) -> OntologyRegistry:
    """Parse a YAML mapping ``ontology name -> {term: type}``."""
    data = yaml.safe_load(source) or {}
    if not isinstance(data, dict):
        raise ValueError("ontology config must be a mapping")
    registry = OntologyRegistry()
    for name, terms in data.items():
        if not isinstance(terms, dict):
            raise ValueError(f"ontology {name!r}: terms must be a mapping")
        for term, type_name in terms.items():
            if type_name not in _TYPE_CHECKS:
                raise ValueError(
                    f"ontology {name!r} term {term!r}: unknown type {type_name!r}"
                )
        registry.add(Ontology(str(name), {str(t): str(v) for t, v in terms.items()}))
    return registry


def default_ontologies() -> OntologyRegistry:
    """Registry built from the packaged ``data/ontologies.yaml``."""
    text = resources.files("supplynet.data").joinpath("ontologies.yaml").read_text()
    return load_ontologies(text)
