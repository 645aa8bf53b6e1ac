"""Vocabulary schemas and construction-time content validation."""

import pytest

from supplynet.messaging import CFP, CONTRACT_NET, AgentAddress, ProtocolError, make_envelope
from supplynet.ontology import Ontology, OntologyRegistry, default_ontologies, load_ontologies

A, B = AgentAddress("a"), AgentAddress("b")


def test_declared_terms_accepted():
    registry = default_ontologies()
    registry.validate("meat-trade", {"order": {"product": "beef"}, "type": "cfp"})


def test_undeclared_term_rejected():
    registry = default_ontologies()
    with pytest.raises(ProtocolError, match="does not define term"):
        registry.validate("meat-trade", {"bogus": 1})


def test_term_type_mismatch_rejected():
    registry = OntologyRegistry({"x": Ontology("x", {"count": "integer"})})
    registry.validate("x", {"count": 3})
    with pytest.raises(ProtocolError, match="expects integer"):
        registry.validate("x", {"count": "three"})
    with pytest.raises(ProtocolError):  # bool is not an integer here
        registry.validate("x", {"count": True})


def test_unknown_ontology_passes_untouched():
    registry = default_ontologies()
    registry.validate("somebody-elses-vocabulary", {"anything": [1, 2, 3]})


def test_envelope_construction_validates_against_registry():
    registry = default_ontologies()
    make_envelope(A, B, CONTRACT_NET, "meat-trade", "c1", CFP,
                  {"order": {"qty": 5}}, 0, ontologies=registry)
    with pytest.raises(ProtocolError):
        make_envelope(A, B, CONTRACT_NET, "meat-trade", "c1", CFP,
                      {"volume": 5}, 0, ontologies=registry)


def test_non_map_content_is_not_term_checked():
    registry = default_ontologies()
    registry.validate("meat-trade", "plain string payload")
    registry.validate("meat-trade", [1, 2, 3])


def test_yaml_loading_and_errors():
    registry = load_ontologies("pets:\n  name: string\n  age: integer\n")
    assert registry.get("pets").terms == {"name": "string", "age": "integer"}
    with pytest.raises(ValueError, match="unknown type"):
        load_ontologies("pets:\n  name: stringy\n")
    with pytest.raises(ValueError):
        load_ontologies("- a\n- b\n")
