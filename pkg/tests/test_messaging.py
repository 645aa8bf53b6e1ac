"""Envelope construction, performative sets, and the wire codec."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from supplynet.messaging import (
    CFP,
    CONTRACT_NET,
    INFORM,
    PROPOSE,
    PROTOCOL_PERFORMATIVES,
    REQUEST_GET,
    REQUEST_POST,
    REQUEST_RESPONSE,
    RESPONSE,
    AgentAddress,
    CodecError,
    Performative,
    ProtocolError,
    decode,
    decode_stream,
    encode,
    make_envelope,
    valid_performative,
)

from helpers import random_envelope

W = AgentAddress("wholesaler")
S = AgentAddress("supplier")


def test_constructor_echoes_fields():
    e = make_envelope(W, S, CONTRACT_NET, "meat-trade", "c1", CFP,
                      {"product": "beef", "qty": 50}, timestamp=77)
    assert e.sender == W and e.receiver == S
    assert e.protocol == CONTRACT_NET and e.ontology == "meat-trade"
    assert e.conversation == "c1"
    assert e.performative == CFP
    assert e.content == {"product": "beef", "qty": 50}
    assert e.timestamp == 77


def test_request_get_is_valid_for_request_response():
    e = make_envelope(AgentAddress("retailer"), W, REQUEST_RESPONSE, "meat-trade",
                      "c2", REQUEST_GET, {"resource": "price", "product": "beef"})
    assert e.performative.method == "get"


def test_propose_invalid_in_request_response():
    with pytest.raises(ProtocolError):
        make_envelope(AgentAddress("a"), AgentAddress("b"), REQUEST_RESPONSE, "x",
                      "c3", PROPOSE, {})


def test_empty_conversation_rejected():
    with pytest.raises(ProtocolError):
        make_envelope(W, S, CONTRACT_NET, "meat-trade", "", CFP, {})


def test_closed_performative_sets():
    cn = {"cfp", "propose", "accept-proposal", "reject-proposal", "refuse",
          "inform", "failure"}
    rr = {"request/get", "request/post", "response"}
    assert {p.wire() for p in PROTOCOL_PERFORMATIVES[CONTRACT_NET]} == cn
    assert {p.wire() for p in PROTOCOL_PERFORMATIVES[REQUEST_RESPONSE]} == rr
    # everything outside the set is rejected, both directions
    assert not valid_performative(CONTRACT_NET, REQUEST_GET)
    assert not valid_performative(CONTRACT_NET, RESPONSE)
    assert not valid_performative(REQUEST_RESPONSE, INFORM)
    assert not valid_performative("unknown-protocol", CFP)


def test_bare_request_performative_needs_method():
    with pytest.raises(ProtocolError):
        Performative.parse("request")
    assert Performative.parse("request/post") == REQUEST_POST


def test_structural_equality_ignores_construction_order():
    a = make_envelope(W, S, CONTRACT_NET, "o", "c", CFP, {"x": 1, "y": 2}, 5)
    b = make_envelope(W, S, CONTRACT_NET, "o", "c", CFP, {"y": 2, "x": 1}, 5)
    assert a == b
    assert encode(a) == encode(b)


def test_content_normalises_tuples_and_rejects_junk():
    e = make_envelope(W, S, CONTRACT_NET, "o", "c", CFP, {"loc": (52.2, 0.1)}, 0)
    assert e.content == {"loc": [52.2, 0.1]}
    with pytest.raises(ProtocolError):
        make_envelope(W, S, CONTRACT_NET, "o", "c", CFP, {"bad": object()}, 0)
    with pytest.raises(ProtocolError):
        make_envelope(W, S, CONTRACT_NET, "o", "c", CFP, {"inf": float("inf")}, 0)
    with pytest.raises(ProtocolError):
        make_envelope(W, S, CONTRACT_NET, "o", "c", CFP, {1: "non-string-key"}, 0)


def test_round_trip_identity_and_determinism():
    e = make_envelope(W, S, CONTRACT_NET, "meat-trade", "c9", CFP,
                      {"qty": 50, "nested": [1, 2.5, {"deep": None}]}, 123,
                      reply_with="r1")
    assert decode(encode(e)) == e
    assert encode(e) == encode(e)


def test_decode_rejects_garbage():
    with pytest.raises(CodecError):
        decode(b"")
    with pytest.raises(CodecError):
        decode(b"hello world")
    with pytest.raises(CodecError):
        decode(b"5:abc,")  # wrong length
    good = encode(make_envelope(W, S, CONTRACT_NET, "o", "c", CFP, {}, 0))
    with pytest.raises(CodecError):
        decode(good[:-2])  # truncated
    with pytest.raises(CodecError):
        decode(good + b"extra")


def test_decode_rejects_unknown_performative_and_fields():
    e = make_envelope(W, S, CONTRACT_NET, "o", "c", CFP, {}, 0)
    payload = json.loads(encode(e).split(b":", 1)[1][:-1])
    payload["performative"] = "shout"
    raw = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    with pytest.raises(CodecError):
        decode(b"%d:%s," % (len(raw), raw))
    payload["performative"] = "cfp"
    payload["surprise"] = 1
    raw = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    with pytest.raises(CodecError):
        decode(b"%d:%s," % (len(raw), raw))


def test_decode_stream_reads_concatenated_frames(rng):
    envs = [random_envelope(rng) for _ in range(10)]
    blob = b"".join(encode(e) for e in envs)
    assert decode_stream(blob) == envs


def test_many_random_round_trips(rng):
    for _ in range(2000):
        e = random_envelope(rng)
        assert decode(encode(e)) == e


def test_single_byte_mutations_never_yield_invalid_envelope(rng):
    """Flipped bytes either fail to decode or decode to a valid envelope."""
    for _ in range(30):
        e = random_envelope(rng)
        raw = bytearray(encode(e))
        positions = rng.sample(range(len(raw)), min(60, len(raw)))
        for pos in positions:
            mutated = bytearray(raw)
            mutated[pos] ^= 1 << rng.randint(0, 7)
            try:
                out = decode(bytes(mutated))
            except CodecError:
                continue
            # Whatever decoded must be a valid envelope: its own encoding
            # round-trips and its performative fits its protocol.
            assert valid_performative(out.protocol, out.performative)
            assert decode(encode(out)) == out


@st.composite
def content_trees(draw, depth=0):
    if depth >= 3:
        return draw(st.one_of(st.integers(), st.text(max_size=8), st.booleans(), st.none()))
    return draw(
        st.one_of(
            st.integers(min_value=-(2**40), max_value=2**40),
            st.floats(allow_nan=False, allow_infinity=False),
            st.text(max_size=12),
            st.booleans(),
            st.none(),
            st.lists(content_trees(depth=depth + 1), max_size=3),
            st.dictionaries(st.text(min_size=1, max_size=6),
                            content_trees(depth=depth + 1), max_size=3),
        )
    )


@given(content=content_trees(), conversation=st.text(min_size=1, max_size=16),
       ts=st.integers(min_value=0, max_value=2**50))
@settings(max_examples=200, deadline=None)
def test_round_trip_property(content, conversation, ts):
    e = make_envelope(W, S, CONTRACT_NET, "meat-trade", conversation, CFP, content, ts)
    assert decode(encode(e)) == e
