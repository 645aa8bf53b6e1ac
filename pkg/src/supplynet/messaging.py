"""Agent communication language: envelopes, performatives, and the wire codec.

Every exchange between agents is an :class:`Envelope` carrying routing
metadata, a performative, and a JSON-shaped content tree.  The wire format
is a netstring-framed UTF-8 JSON object (``<length>:<json>,``): deterministic,
self-delimiting, and readable enough to tail a message log or feed the chat
room display.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any

__all__ = [
    "AgentAddress",
    "Performative",
    "Envelope",
    "ProtocolError",
    "CodecError",
    "CONTRACT_NET",
    "REQUEST_RESPONSE",
    "DISCOVERY",
    "PROTOCOL_PERFORMATIVES",
    "CFP",
    "PROPOSE",
    "ACCEPT_PROPOSAL",
    "REJECT_PROPOSAL",
    "REFUSE",
    "INFORM",
    "FAILURE",
    "REQUEST_GET",
    "REQUEST_POST",
    "RESPONSE",
    "make_envelope",
    "encode",
    "decode",
    "decode_stream",
]


class ProtocolError(ValueError):
    """A message violates the communication contract (bad performative,
    empty conversation, content outside the ontology)."""


class CodecError(ValueError):
    """A byte sequence is not a valid envelope encoding."""


@dataclass(frozen=True)
class AgentAddress:
    """Identity plus routing locator of one agent.

    ``name`` is unique within a running system; ``endpoint`` is an opaque
    string the router resolves (``local:<name>`` for in-process agents).
    """

    name: str
    endpoint: str = ""

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("agent name must be non-empty")
        if not self.endpoint:
            object.__setattr__(self, "endpoint", f"local:{self.name}")


@dataclass(frozen=True)
class Performative:
    """Communicative act label.  ``request`` carries a method qualifier."""

    kind: str
    method: str | None = None

    def wire(self) -> str:
        return f"{self.kind}/{self.method}" if self.method else self.kind

    @classmethod
    def parse(cls, text: str) -> "Performative":
        kind, sep, method = text.partition("/")
        if sep:
            if kind != "request" or method not in ("get", "post"):
                raise ProtocolError(f"bad performative {text!r}")
            return cls(kind, method)
        if kind == "request":
            raise ProtocolError("request performative needs a get/post qualifier")
        return cls(kind)

    def __str__(self) -> str:
        return self.wire()


CFP = Performative("cfp")
PROPOSE = Performative("propose")
ACCEPT_PROPOSAL = Performative("accept-proposal")
REJECT_PROPOSAL = Performative("reject-proposal")
REFUSE = Performative("refuse")
INFORM = Performative("inform")
FAILURE = Performative("failure")
REQUEST_GET = Performative("request", "get")
REQUEST_POST = Performative("request", "post")
RESPONSE = Performative("response")

CONTRACT_NET = "contract-net"
REQUEST_RESPONSE = "request-response"
DISCOVERY = "discovery"

# Closed performative sets per protocol.  The discovery protocol is the
# registry's service surface and reuses the single-round request/response
# vocabulary.
PROTOCOL_PERFORMATIVES: dict[str, frozenset[Performative]] = {
    CONTRACT_NET: frozenset(
        [CFP, PROPOSE, ACCEPT_PROPOSAL, REJECT_PROPOSAL, REFUSE, INFORM, FAILURE]
    ),
    REQUEST_RESPONSE: frozenset([REQUEST_GET, REQUEST_POST, RESPONSE]),
    DISCOVERY: frozenset([REQUEST_GET, REQUEST_POST, RESPONSE]),
}


def valid_performative(protocol: str, performative: Performative) -> bool:
    allowed = PROTOCOL_PERFORMATIVES.get(protocol)
    return allowed is not None and performative in allowed


@dataclass(frozen=True)
class Envelope:
    """One agent-to-agent message.  Immutable; equality is structural."""

    sender: AgentAddress
    receiver: AgentAddress
    protocol: str
    ontology: str
    conversation: str
    performative: Performative
    content: Any
    timestamp: int  # milliseconds since epoch (virtual or real)
    reply_with: str | None = None
    in_reply_to: str | None = None


def _check_content(value: Any, path: str = "content") -> Any:
    """Validate and normalise a content tree to JSON-native values.

    Tuples become lists so that ``decode(encode(e)) == e`` holds; anything
    that JSON cannot represent faithfully is rejected.
    """
    if value is None or isinstance(value, (str, bool, int)):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ProtocolError(f"{path}: non-finite number")
        return value
    if isinstance(value, (list, tuple)):
        return [_check_content(v, f"{path}[{i}]") for i, v in enumerate(value)]
    if isinstance(value, dict):
        out = {}
        for k, v in value.items():
            if not isinstance(k, str):
                raise ProtocolError(f"{path}: map keys must be strings, got {k!r}")
            out[k] = _check_content(v, f"{path}.{k}")
        return out
    raise ProtocolError(f"{path}: unsupported value type {type(value).__name__}")


def make_envelope(
    sender: AgentAddress,
    receiver: AgentAddress,
    protocol: str,
    ontology: str,
    conversation: str,
    performative: Performative,
    content: Any,
    timestamp: int = 0,
    reply_with: str | None = None,
    in_reply_to: str | None = None,
    ontologies: "Any | None" = None,
) -> Envelope:
    """Construct a validated envelope.

    Raises :class:`ProtocolError` when the performative is not in the
    protocol's closed set, the conversation id is empty, or (when an
    ontology registry is supplied and knows ``ontology``) the content
    uses undeclared terms.
    """
    if not valid_performative(protocol, performative):
        raise ProtocolError(
            f"performative {performative} not valid for protocol {protocol!r}"
        )
    if not conversation:
        raise ProtocolError("conversation id must be non-empty")
    content = _check_content(content)
    if ontologies is not None:
        ontologies.validate(ontology, content)
    return Envelope(
        sender=sender,
        receiver=receiver,
        protocol=protocol,
        ontology=ontology,
        conversation=conversation,
        performative=performative,
        content=content,
        timestamp=int(timestamp),
        reply_with=reply_with,
        in_reply_to=in_reply_to,
    )


def reply_to(
    original: Envelope,
    performative: Performative,
    content: Any,
    timestamp: int,
    ontologies: "Any | None" = None,
) -> Envelope:
    """Envelope answering ``original`` on the same conversation."""
    return make_envelope(
        sender=original.receiver,
        receiver=original.sender,
        protocol=original.protocol,
        ontology=original.ontology,
        conversation=original.conversation,
        performative=performative,
        content=content,
        timestamp=timestamp,
        in_reply_to=original.reply_with,
        ontologies=ontologies,
    )


# --- wire codec -------------------------------------------------------------

_FIELDS = (
    "sender",
    "receiver",
    "protocol",
    "ontology",
    "conversation",
    "performative",
    "content",
    "timestamp",
)


def _to_wire(e: Envelope) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "sender": {"name": e.sender.name, "endpoint": e.sender.endpoint},
        "receiver": {"name": e.receiver.name, "endpoint": e.receiver.endpoint},
        "protocol": e.protocol,
        "ontology": e.ontology,
        "conversation": e.conversation,
        "performative": e.performative.wire(),
        "content": e.content,
        "timestamp": e.timestamp,
    }
    if e.reply_with is not None:
        obj["reply_with"] = e.reply_with
    if e.in_reply_to is not None:
        obj["in_reply_to"] = e.in_reply_to
    return obj


def encode(e: Envelope) -> bytes:
    """Deterministic, self-delimiting byte encoding of an envelope.

    Frame: ``<decimal payload length>:<payload>,`` where the payload is the
    envelope as a canonical JSON object (sorted keys, no whitespace, UTF-8).
    """
    payload = json.dumps(
        _to_wire(e), sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")
    return b"%d:%s," % (len(payload), payload)


def _parse_address(obj: Any, field_name: str) -> AgentAddress:
    if (
        not isinstance(obj, dict)
        or not isinstance(obj.get("name"), str)
        or not obj["name"]
        or not isinstance(obj.get("endpoint"), str)
    ):
        raise CodecError(f"bad {field_name} address")
    return AgentAddress(obj["name"], obj["endpoint"])


def _from_wire(obj: Any) -> Envelope:
    if not isinstance(obj, dict):
        raise CodecError("envelope payload is not an object")
    for name in _FIELDS:
        if name not in obj:
            raise CodecError(f"missing field {name!r}")
    unknown = set(obj) - set(_FIELDS) - {"reply_with", "in_reply_to"}
    if unknown:
        raise CodecError(f"unknown fields {sorted(unknown)}")
    for name in ("protocol", "ontology", "conversation", "performative"):
        if not isinstance(obj[name], str):
            raise CodecError(f"field {name!r} must be a string")
    for name in ("reply_with", "in_reply_to"):
        if name in obj and not isinstance(obj[name], str):
            raise CodecError(f"field {name!r} must be a string")
    if not isinstance(obj["timestamp"], int) or isinstance(obj["timestamp"], bool):
        raise CodecError("timestamp must be an integer")
    try:
        performative = Performative.parse(obj["performative"])
        sender = _parse_address(obj["sender"], "sender")
        receiver = _parse_address(obj["receiver"], "receiver")
        return make_envelope(
            sender=sender,
            receiver=receiver,
            protocol=obj["protocol"],
            ontology=obj["ontology"],
            conversation=obj["conversation"],
            performative=performative,
            content=obj["content"],
            timestamp=obj["timestamp"],
            reply_with=obj.get("reply_with"),
            in_reply_to=obj.get("in_reply_to"),
        )
    except (ProtocolError, ValueError) as exc:
        raise CodecError(str(exc)) from exc


def decode(b: bytes) -> Envelope:
    """Inverse of :func:`encode`.

    Raises :class:`CodecError` on anything that is not exactly one valid
    frame; never crashes on foreign bytes.
    """
    env, rest = _decode_one(b)
    if rest:
        raise CodecError("trailing bytes after envelope frame")
    return env


def _decode_one(b: bytes) -> tuple[Envelope, bytes]:
    if not isinstance(b, (bytes, bytearray, memoryview)):
        raise CodecError("expected bytes")
    b = bytes(b)
    head, sep, rest = b.partition(b":")
    if not sep:
        raise CodecError("missing length prefix")
    if not head.isdigit() or (len(head) > 1 and head.startswith(b"0")):
        raise CodecError("bad length prefix")
    length = int(head)
    if len(rest) < length + 1:
        raise CodecError("truncated frame")
    payload, trailer = rest[:length], rest[length : length + 1]
    if trailer != b",":
        raise CodecError("missing frame terminator")
    try:
        obj = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CodecError(f"payload is not valid JSON: {exc}") from exc
    return _from_wire(obj), rest[length + 1 :]


def decode_stream(b: bytes) -> list[Envelope]:
    """Decode a concatenation of frames (e.g. a message log)."""
    out = []
    while b:
        env, b = _decode_one(b)
        out.append(env)
    return out
