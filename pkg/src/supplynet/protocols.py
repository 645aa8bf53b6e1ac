"""Interaction protocols as explicit dialogue state machines.

Two protocols are implemented: the contract-net negotiation (call for
proposals, collect, single award, result report) and the single-round
request/response exchange.  Transitions are pure: given a dialogue value and
an input they return a new dialogue value plus the actions (sends, timers,
owner notifications) the caller must execute.  This keeps every dialogue
replayable and lets the owning agent's event loop stay the only side-effect
channel.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Any, Union

from .messaging import (
    ACCEPT_PROPOSAL,
    CFP,
    CONTRACT_NET,
    FAILURE,
    INFORM,
    PROPOSE,
    REFUSE,
    REJECT_PROPOSAL,
    REQUEST_GET,
    REQUEST_POST,
    REQUEST_RESPONSE,
    RESPONSE,
    AgentAddress,
    Envelope,
    make_envelope,
)

__all__ = [
    "CnState",
    "RrState",
    "Send",
    "NotifyOwner",
    "SetTimer",
    "Close",
    "DialogueAction",
    "TimerExpiry",
    "ContractNetDialogue",
    "RequestResponseDialogue",
    "DialogueError",
    "cn_initiate",
    "cn_step",
    "cn_award",
    "cn_reject_all",
    "cn_respond_propose",
    "cn_respond_refuse",
    "cn_complete",
    "cn_fail",
    "rr_request",
    "rr_step",
    "rr_respond",
    "DialogueManager",
    "RouteOutcome",
]


class DialogueError(RuntimeError):
    """Precondition failure on a dialogue operation (caller bug, not peer)."""


# --- actions ----------------------------------------------------------------


@dataclass(frozen=True)
class Send:
    envelope: Envelope


@dataclass(frozen=True)
class NotifyOwner:
    event: str
    data: Any = None


@dataclass(frozen=True)
class SetTimer:
    deadline: int  # absolute ms


@dataclass(frozen=True)
class Close:
    pass


DialogueAction = Union[Send, NotifyOwner, SetTimer, Close]


@dataclass(frozen=True)
class TimerExpiry:
    conversation: str
    due: int


# --- contract-net -----------------------------------------------------------


class CnState(enum.Enum):
    CREATED = "created"
    CFP_SENT = "cfp-sent"
    COLLECTING = "proposals-collecting"
    AWARD_PENDING = "award-pending"
    AWARDED = "awarded"
    CFP_RECEIVED = "cfp-received"
    PROPOSAL_SENT = "proposal-sent"
    REFUSED = "refused"
    FAILED = "failed"
    TIMED_OUT = "timed-out"
    DONE = "done"


CN_TERMINAL = frozenset(
    [CnState.DONE, CnState.FAILED, CnState.TIMED_OUT, CnState.REFUSED]
)


@dataclass(frozen=True)
class ContractNetDialogue:
    """One contract-net conversation, from either side.

    ``proposals`` and ``refusals`` are keyed by participant name; on the
    participant side ``participants`` holds the initiator only.
    """

    role: str  # "initiator" | "participant"
    state: CnState
    self_address: AgentAddress
    participants: tuple[AgentAddress, ...]
    conversation: str
    ontology: str
    deadline: int = 0
    proposals: dict[str, Any] = field(default_factory=dict)
    refusals: tuple[str, ...] = ()
    cfp_content: Any = None
    winner: str | None = None

    @property
    def terminal(self) -> bool:
        return self.state in CN_TERMINAL

    def _participant(self, name: str) -> AgentAddress | None:
        for p in self.participants:
            if p.name == name:
                return p
        return None


def _violation(d: ContractNetDialogue, why: str):
    return d, [NotifyOwner("protocol-violation", {"conversation": d.conversation, "reason": why})]


def cn_initiate(
    self_address: AgentAddress,
    participants: list[AgentAddress],
    cfp_content: Any,
    deadline_ms: int,
    conversation: str,
    ontology: str,
    now: int,
) -> tuple[ContractNetDialogue, list[DialogueAction]]:
    """Open a negotiation: one cfp per participant plus a collection timer."""
    if not participants:
        raise DialogueError("no-participants")
    if deadline_ms <= 0:
        raise DialogueError("deadline must be positive")
    deadline = now + deadline_ms
    dialogue = ContractNetDialogue(
        role="initiator",
        state=CnState.CFP_SENT,
        self_address=self_address,
        participants=tuple(participants),
        conversation=conversation,
        ontology=ontology,
        deadline=deadline,
        cfp_content=cfp_content,
    )
    actions: list[DialogueAction] = [
        Send(
            make_envelope(
                self_address, p, CONTRACT_NET, ontology, conversation, CFP,
                cfp_content, now,
            )
        )
        for p in participants
    ]
    actions.append(SetTimer(deadline))
    return dialogue, actions


def cn_received_cfp(env: Envelope) -> tuple[ContractNetDialogue, list[DialogueAction]]:
    """Participant-side dialogue for a fresh incoming cfp."""
    dialogue = ContractNetDialogue(
        role="participant",
        state=CnState.CFP_RECEIVED,
        self_address=env.receiver,
        participants=(env.sender,),
        conversation=env.conversation,
        ontology=env.ontology,
        cfp_content=env.content,
    )
    return dialogue, [NotifyOwner("cfp", env)]


def _close_collection(d: ContractNetDialogue) -> tuple[ContractNetDialogue, list[DialogueAction]]:
    if d.proposals:
        new = replace(d, state=CnState.AWARD_PENDING)
        return new, [NotifyOwner("select", dict(d.proposals))]
    new = replace(d, state=CnState.REFUSED)
    return new, [NotifyOwner("all-refused", tuple(d.refusals)), Close()]


def cn_step(
    d: ContractNetDialogue, inp: Envelope | TimerExpiry, now: int
) -> tuple[ContractNetDialogue, list[DialogueAction]]:
    """Pure transition on an incoming envelope or timer expiry.

    Peer misbehaviour never wedges the dialogue: illegal inputs leave the
    state untouched and surface as a protocol-violation notification.
    """
    if isinstance(inp, TimerExpiry):
        if d.state in (CnState.CFP_SENT, CnState.COLLECTING):
            if d.proposals:
                return _close_collection(d)
            new = replace(d, state=CnState.TIMED_OUT)
            return new, [NotifyOwner("timeout", d.conversation), Close()]
        # Stale timer after early close or termination: inert.
        return d, []

    env = inp
    if env.conversation != d.conversation:
        raise DialogueError("envelope routed to wrong dialogue")
    perf = env.performative

    if d.terminal:
        return _violation(d, f"{perf} after terminal state {d.state.value}")

    if d.role == "initiator":
        return _cn_step_initiator(d, env, perf)
    return _cn_step_participant(d, env, perf)


def _cn_step_initiator(d, env, perf):
    sender = env.sender.name
    if d.state in (CnState.CFP_SENT, CnState.COLLECTING):
        if perf not in (PROPOSE, REFUSE):
            return _violation(d, f"{perf} while collecting proposals")
        if d._participant(sender) is None:
            return _violation(d, f"response from non-participant {sender!r}")
        if sender in d.proposals or sender in d.refusals:
            return _violation(d, f"duplicate response from {sender!r}")
        if perf == PROPOSE:
            proposals = dict(d.proposals)
            proposals[sender] = env.content
            new = replace(d, state=CnState.COLLECTING, proposals=proposals)
        else:
            new = replace(
                d, state=CnState.COLLECTING, refusals=d.refusals + (sender,)
            )
        answered = len(new.proposals) + len(new.refusals)
        if answered == len(new.participants):
            # Early close: every participant has answered before the deadline.
            return _close_collection(new)
        return new, []
    if d.state == CnState.AWARD_PENDING:
        return _violation(d, f"{perf} while awaiting award decision")
    if d.state == CnState.AWARDED:
        if perf == INFORM:
            new = replace(d, state=CnState.DONE)
            return new, [NotifyOwner("inform", env), Close()]
        if perf == FAILURE:
            new = replace(d, state=CnState.FAILED)
            return new, [NotifyOwner("failure", env), Close()]
        return _violation(d, f"{perf} while awaiting result")
    return _violation(d, f"{perf} in state {d.state.value}")


def _cn_step_participant(d, env, perf):
    if d.state == CnState.CFP_RECEIVED:
        return _violation(d, f"{perf} before this participant responded")
    if d.state == CnState.PROPOSAL_SENT:
        if perf == ACCEPT_PROPOSAL:
            new = replace(d, state=CnState.AWARDED)
            return new, [NotifyOwner("awarded", env)]
        if perf == REJECT_PROPOSAL:
            new = replace(d, state=CnState.DONE)
            return new, [NotifyOwner("rejected", env), Close()]
        return _violation(d, f"{perf} while awaiting award")
    if d.state == CnState.AWARDED:
        return _violation(d, f"{perf} while fulfilling the award")
    return _violation(d, f"{perf} in state {d.state.value}")


def cn_award(
    d: ContractNetDialogue, winner: AgentAddress, now: int, extra: Any = None
) -> tuple[ContractNetDialogue, list[DialogueAction]]:
    """Emit exactly one accept-proposal (winner) and rejects to the rest.

    ``extra`` is merged into the accept content next to the winning proposal
    (e.g. the chosen delivery option).
    """
    if d.role != "initiator":
        raise DialogueError("only the initiator awards")
    if d.state != CnState.AWARD_PENDING:
        raise DialogueError(f"cannot award from state {d.state.value}")
    if winner.name not in d.proposals:
        raise DialogueError("unknown-winner")
    accept_content = {"proposal": d.proposals[winner.name]}
    if extra:
        accept_content.update(extra)
    actions: list[DialogueAction] = [
        Send(
            make_envelope(
                d.self_address, winner, CONTRACT_NET, d.ontology, d.conversation,
                ACCEPT_PROPOSAL, accept_content, now,
            )
        )
    ]
    for name in d.proposals:
        if name == winner.name:
            continue
        loser = d._participant(name)
        actions.append(
            Send(
                make_envelope(
                    d.self_address, loser, CONTRACT_NET, d.ontology, d.conversation,
                    REJECT_PROPOSAL, {"reason": "not-selected"}, now,
                )
            )
        )
    new = replace(d, state=CnState.AWARDED, winner=winner.name)
    return new, actions


def cn_reject_all(
    d: ContractNetDialogue, reason: str, now: int
) -> tuple[ContractNetDialogue, list[DialogueAction]]:
    """Decline every collected proposal without awarding anyone."""
    if d.role != "initiator" or d.state != CnState.AWARD_PENDING:
        raise DialogueError(f"cannot reject-all from state {d.state.value}")
    actions: list[DialogueAction] = []
    for name in d.proposals:
        proposer = d._participant(name)
        actions.append(
            Send(
                make_envelope(
                    d.self_address, proposer, CONTRACT_NET, d.ontology, d.conversation,
                    REJECT_PROPOSAL, {"reason": reason}, now,
                )
            )
        )
    actions.append(Close())
    return replace(d, state=CnState.DONE), actions


def cn_respond_propose(
    d: ContractNetDialogue, content: Any, now: int
) -> tuple[ContractNetDialogue, list[DialogueAction]]:
    if d.role != "participant" or d.state != CnState.CFP_RECEIVED:
        raise DialogueError(f"cannot propose from state {d.state.value}")
    initiator = d.participants[0]
    env = make_envelope(
        d.self_address, initiator, CONTRACT_NET, d.ontology, d.conversation,
        PROPOSE, content, now,
    )
    return replace(d, state=CnState.PROPOSAL_SENT), [Send(env)]


def cn_respond_refuse(
    d: ContractNetDialogue, reason: str, now: int
) -> tuple[ContractNetDialogue, list[DialogueAction]]:
    if d.role != "participant" or d.state != CnState.CFP_RECEIVED:
        raise DialogueError(f"cannot refuse from state {d.state.value}")
    initiator = d.participants[0]
    env = make_envelope(
        d.self_address, initiator, CONTRACT_NET, d.ontology, d.conversation,
        REFUSE, {"reason": reason}, now,
    )
    return replace(d, state=CnState.REFUSED), [Send(env), Close()]


def cn_complete(
    d: ContractNetDialogue, result: Any, now: int
) -> tuple[ContractNetDialogue, list[DialogueAction]]:
    """Participant reports successful completion of the awarded task."""
    if d.role != "participant" or d.state != CnState.AWARDED:
        raise DialogueError(f"cannot complete from state {d.state.value}")
    initiator = d.participants[0]
    env = make_envelope(
        d.self_address, initiator, CONTRACT_NET, d.ontology, d.conversation,
        INFORM, result, now,
    )
    return replace(d, state=CnState.DONE), [Send(env), Close()]


def cn_fail(
    d: ContractNetDialogue, error: Any, now: int
) -> tuple[ContractNetDialogue, list[DialogueAction]]:
    if d.role != "participant" or d.state != CnState.AWARDED:
        raise DialogueError(f"cannot fail from state {d.state.value}")
    initiator = d.participants[0]
    env = make_envelope(
        d.self_address, initiator, CONTRACT_NET, d.ontology, d.conversation,
        FAILURE, error, now,
    )
    return replace(d, state=CnState.FAILED), [Send(env), Close()]


# --- request/response -------------------------------------------------------


class RrState(enum.Enum):
    CREATED = "created"
    REQUEST_SENT = "request-sent"
    RESPONDED = "responded"
    TIMED_OUT = "timed-out"


RR_TERMINAL = frozenset([RrState.RESPONDED, RrState.TIMED_OUT])


@dataclass(frozen=True)
class RequestResponseDialogue:
    role: str  # "client" | "server"
    state: RrState
    self_address: AgentAddress
    counterpart: AgentAddress
    conversation: str
    ontology: str
    method: str  # "get" | "post"
    protocol: str = REQUEST_RESPONSE
    deadline: int = 0
    request_content: Any = None

    @property
    def terminal(self) -> bool:
        return self.state in RR_TERMINAL


def rr_request(
    self_address: AgentAddress,
    target: AgentAddress,
    method: str,
    content: Any,
    timeout_ms: int,
    conversation: str,
    ontology: str,
    now: int,
    protocol: str = REQUEST_RESPONSE,
) -> tuple[RequestResponseDialogue, list[DialogueAction]]:
    """Client side: send one request, arm the response timer."""
    if timeout_ms <= 0:
        raise DialogueError("timeout must be positive")
    performative = REQUEST_GET if method == "get" else REQUEST_POST
    dialogue = RequestResponseDialogue(
        role="client",
        state=RrState.REQUEST_SENT,
        self_address=self_address,
        counterpart=target,
        conversation=conversation,
        ontology=ontology,
        method=method,
        protocol=protocol,
        deadline=now + timeout_ms,
        request_content=content,
    )
    env = make_envelope(
        self_address, target, protocol, ontology, conversation, performative,
        content, now,
    )
    return dialogue, [Send(env), SetTimer(dialogue.deadline)]


def rr_received_request(env: Envelope) -> tuple[RequestResponseDialogue, list[DialogueAction]]:
    """Server side: a fresh request opens a dialogue awaiting one response."""
    dialogue = RequestResponseDialogue(
        role="server",
        state=RrState.CREATED,
        self_address=env.receiver,
        counterpart=env.sender,
        conversation=env.conversation,
        ontology=env.ontology,
        method=env.performative.method or "get",
        protocol=env.protocol,
        request_content=env.content,
    )
    return dialogue, [NotifyOwner("request", env)]


def rr_step(
    d: RequestResponseDialogue, inp: Envelope | TimerExpiry, now: int
) -> tuple[RequestResponseDialogue, list[DialogueAction]]:
    if isinstance(inp, TimerExpiry):
        if d.state == RrState.REQUEST_SENT:
            new = replace(d, state=RrState.TIMED_OUT)
            return new, [NotifyOwner("timeout", d.conversation), Close()]
        return d, []
    env = inp
    if env.conversation != d.conversation:
        raise DialogueError("envelope routed to wrong dialogue")
    if d.state == RrState.REQUEST_SENT and env.performative == RESPONSE:
        new = replace(d, state=RrState.RESPONDED)
        return new, [NotifyOwner("response", env), Close()]
    return d, [
        NotifyOwner(
            "protocol-violation",
            {"conversation": d.conversation,
             "reason": f"{env.performative} in state {d.state.value}"},
        )
    ]


def rr_respond(
    d: RequestResponseDialogue, content: Any, now: int
) -> tuple[RequestResponseDialogue, list[DialogueAction]]:
    """Server side: emit the single response."""
    if d.role != "server" or d.state != RrState.CREATED:
        raise DialogueError(f"cannot respond from state {d.state.value}")
    env = make_envelope(
        d.self_address, d.counterpart, d.protocol, d.ontology, d.conversation,
        RESPONSE, content, now,
    )
    return replace(d, state=RrState.RESPONDED), [Send(env), Close()]


# --- routing ----------------------------------------------------------------

Dialogue = Union[ContractNetDialogue, RequestResponseDialogue]


@dataclass
class RouteOutcome:
    kind: str  # "existing" | "new-participant" | "new-server" | "orphan"
    dialogue: Dialogue | None = None
    actions: list[DialogueAction] = field(default_factory=list)


class DialogueManager:
    """Per-agent table of live dialogues keyed by conversation id.

    Envelopes with a known conversation go to their dialogue; fresh cfp or
    request performatives open participant/server dialogues; anything else
    is an orphan, reported and dropped.
    """

    def __init__(self):
        self._dialogues: dict[str, Dialogue] = {}

    def __len__(self) -> int:
        return len(self._dialogues)

    def get(self, conversation: str) -> Dialogue | None:
        return self._dialogues.get(conversation)

    def put(self, dialogue: Dialogue) -> None:
        self._dialogues[dialogue.conversation] = dialogue

    def remove(self, conversation: str) -> None:
        self._dialogues.pop(conversation, None)

    def open_conversations(self) -> list[str]:
        return sorted(self._dialogues)

    def route(self, env: Envelope) -> RouteOutcome:
        if env.conversation in self._dialogues:
            return RouteOutcome("existing", self._dialogues[env.conversation])
        if env.performative == CFP:
            dialogue, actions = cn_received_cfp(env)
            self._dialogues[dialogue.conversation] = dialogue
            return RouteOutcome("new-participant", dialogue, actions)
        if env.performative.kind == "request":
            dialogue, actions = rr_received_request(env)
            self._dialogues[dialogue.conversation] = dialogue
            return RouteOutcome("new-server", dialogue, actions)
        return RouteOutcome("orphan")
