"""Contract-net and request/response dialogue state machines."""

import pytest

from supplynet.messaging import (
    ACCEPT_PROPOSAL,
    CFP,
    CONTRACT_NET,
    INFORM,
    PROPOSE,
    REFUSE,
    REQUEST_GET,
    RESPONSE,
    AgentAddress,
    make_envelope,
)
from supplynet.protocols import (
    Close,
    CnState,
    DialogueError,
    DialogueManager,
    NotifyOwner,
    RrState,
    Send,
    SetTimer,
    TimerExpiry,
    cn_award,
    cn_complete,
    cn_initiate,
    cn_reject_all,
    cn_respond_propose,
    cn_respond_refuse,
    cn_step,
    rr_request,
    rr_respond,
    rr_step,
)

ME = AgentAddress("wholesaler")
P1, P2, P3 = AgentAddress("p1"), AgentAddress("p2"), AgentAddress("p3")


def sends(actions):
    return [a.envelope for a in actions if isinstance(a, Send)]


def notifications(actions):
    return [a for a in actions if isinstance(a, NotifyOwner)]


def propose_from(p, conversation, price=7.5, now=100):
    return make_envelope(p, ME, CONTRACT_NET, "meat-trade", conversation, PROPOSE,
                         {"proposal": {"unit_price": price}}, now)


def refuse_from(p, conversation, now=100):
    return make_envelope(p, ME, CONTRACT_NET, "meat-trade", conversation, REFUSE,
                         {"reason": "no-stock"}, now)


def test_initiate_sends_one_cfp_per_participant_plus_timer():
    d, actions = cn_initiate(ME, [P1, P2, P3], {"order": {}}, 10_000, "c1", "meat-trade", 0)
    assert d.state == CnState.CFP_SENT
    assert len(sends(actions)) == 3
    assert all(e.performative == CFP for e in sends(actions))
    timers = [a for a in actions if isinstance(a, SetTimer)]
    assert timers == [SetTimer(10_000)]


def test_initiate_single_participant_deadline():
    d, actions = cn_initiate(ME, [P1], {}, 5_000, "c1", "o", 1_000)
    assert d.state == CnState.CFP_SENT
    assert [a for a in actions if isinstance(a, SetTimer)] == [SetTimer(6_000)]


def test_initiate_without_participants_fails():
    with pytest.raises(DialogueError, match="no-participants"):
        cn_initiate(ME, [], {}, 5_000, "c1", "o", 0)


def test_propose_recorded_while_collecting():
    d, _ = cn_initiate(ME, [P1, P2], {}, 10_000, "c1", "o", 0)
    d, actions = cn_step(d, propose_from(P1, "c1"), 100)
    assert d.state == CnState.COLLECTING
    assert "p1" in d.proposals
    assert sends(actions) == []


def test_timer_with_no_proposals_times_out():
    d, _ = cn_initiate(ME, [P1, P2], {}, 10_000, "c1", "o", 0)
    d, actions = cn_step(d, TimerExpiry("c1", 10_000), 10_000)
    assert d.state == CnState.TIMED_OUT
    assert any(n.event == "timeout" for n in notifications(actions))


def test_timer_with_proposals_moves_to_award_pending():
    d, _ = cn_initiate(ME, [P1, P2], {}, 10_000, "c1", "o", 0)
    d, _ = cn_step(d, propose_from(P1, "c1"), 100)
    d, actions = cn_step(d, TimerExpiry("c1", 10_000), 10_000)
    assert d.state == CnState.AWARD_PENDING
    assert any(n.event == "select" for n in notifications(actions))


def test_early_close_when_all_participants_answered():
    d, _ = cn_initiate(ME, [P1, P2], {}, 10_000, "c1", "o", 0)
    d, _ = cn_step(d, propose_from(P1, "c1"), 100)
    d, actions = cn_step(d, refuse_from(P2, "c1"), 200)
    assert d.state == CnState.AWARD_PENDING
    assert any(n.event == "select" for n in notifications(actions))


def test_all_refusals_terminate_refused():
    d, _ = cn_initiate(ME, [P1, P2], {}, 10_000, "c1", "o", 0)
    d, _ = cn_step(d, refuse_from(P1, "c1"), 100)
    d, actions = cn_step(d, refuse_from(P2, "c1"), 200)
    assert d.state == CnState.REFUSED
    assert any(n.event == "all-refused" for n in notifications(actions))
    assert any(isinstance(a, Close) for a in actions)


def test_award_emits_one_accept_and_rejects_for_the_rest():
    d, _ = cn_initiate(ME, [P1, P2, P3], {}, 10_000, "c1", "o", 0)
    for p in (P1, P2, P3):
        d, _ = cn_step(d, propose_from(p, "c1"), 100)
    assert d.state == CnState.AWARD_PENDING
    d, actions = cn_award(d, P2, 500)
    assert d.state == CnState.AWARDED
    emitted = sends(actions)
    performatives = sorted(e.performative.wire() for e in emitted)
    assert performatives == ["accept-proposal", "reject-proposal", "reject-proposal"]
    accept = [e for e in emitted if e.performative == ACCEPT_PROPOSAL]
    assert [e.receiver.name for e in accept] == ["p2"]
    assert {e.receiver.name for e in emitted if e.performative.wire() == "reject-proposal"} == {"p1", "p3"}


def test_award_single_proposer_no_rejects():
    d, _ = cn_initiate(ME, [P1], {}, 10_000, "c1", "o", 0)
    d, _ = cn_step(d, propose_from(P1, "c1"), 100)
    d, actions = cn_award(d, P1, 500)
    assert [e.performative.wire() for e in sends(actions)] == ["accept-proposal"]


def test_award_unknown_winner_rejected():
    d, _ = cn_initiate(ME, [P1, P2], {}, 10_000, "c1", "o", 0)
    d, _ = cn_step(d, propose_from(P1, "c1"), 100)
    d, _ = cn_step(d, propose_from(P2, "c1"), 150)
    with pytest.raises(DialogueError, match="unknown-winner"):
        cn_award(d, AgentAddress("p9"), 500)


def test_reject_all_closes_without_award():
    d, _ = cn_initiate(ME, [P1, P2], {}, 10_000, "c1", "o", 0)
    d, _ = cn_step(d, propose_from(P1, "c1"), 100)
    d, _ = cn_step(d, propose_from(P2, "c1"), 150)
    d, actions = cn_reject_all(d, "too-expensive", 500)
    assert d.state == CnState.DONE
    assert all(e.performative.wire() == "reject-proposal" for e in sends(actions))
    assert len(sends(actions)) == 2


def test_inform_completes_and_failure_fails():
    d, _ = cn_initiate(ME, [P1], {}, 10_000, "c1", "o", 0)
    d, _ = cn_step(d, propose_from(P1, "c1"), 100)
    d, _ = cn_award(d, P1, 500)
    inform = make_envelope(P1, ME, CONTRACT_NET, "o", "c1", INFORM,
                           {"receipt": {"status": "delivered"}}, 900)
    done, actions = cn_step(d, inform, 900)
    assert done.state == CnState.DONE
    assert any(n.event == "inform" for n in notifications(actions))
    assert any(isinstance(a, Close) for a in actions)


def test_terminal_states_absorb_without_sends():
    d, _ = cn_initiate(ME, [P1], {}, 10_000, "c1", "o", 0)
    d, _ = cn_step(d, TimerExpiry("c1", 10_000), 10_000)
    assert d.state == CnState.TIMED_OUT
    before = d
    d2, actions = cn_step(d, propose_from(P1, "c1"), 20_000)
    assert d2 == before
    assert sends(actions) == []
    assert any(n.event == "protocol-violation" for n in notifications(actions))


def test_stale_timer_is_inert_after_award_pending():
    d, _ = cn_initiate(ME, [P1], {}, 10_000, "c1", "o", 0)
    d, _ = cn_step(d, propose_from(P1, "c1"), 100)  # early close
    assert d.state == CnState.AWARD_PENDING
    d2, actions = cn_step(d, TimerExpiry("c1", 10_000), 10_000)
    assert d2 == d and actions == []


def test_duplicate_response_is_violation():
    d, _ = cn_initiate(ME, [P1, P2], {}, 10_000, "c1", "o", 0)
    d, _ = cn_step(d, propose_from(P1, "c1"), 100)
    d2, actions = cn_step(d, propose_from(P1, "c1"), 150)
    assert d2 == d
    assert any(n.event == "protocol-violation" for n in notifications(actions))


def test_transition_purity():
    d, _ = cn_initiate(ME, [P1, P2], {}, 10_000, "c1", "o", 0)
    env = propose_from(P1, "c1")
    out1 = cn_step(d, env, 100)
    out2 = cn_step(d, env, 100)
    assert out1 == out2


def test_participant_full_flow():
    manager = DialogueManager()
    cfp = make_envelope(ME, P1, CONTRACT_NET, "meat-trade", "w/1", CFP,
                        {"order": {"qty": 5}}, 0)
    outcome = manager.route(cfp)
    assert outcome.kind == "new-participant"
    d = outcome.dialogue
    assert d.state == CnState.CFP_RECEIVED and d.role == "participant"
    d, actions = cn_respond_propose(d, {"proposal": {"unit_price": 6.0}}, 10)
    assert d.state == CnState.PROPOSAL_SENT
    assert [e.performative for e in sends(actions)] == [PROPOSE]
    accept = make_envelope(ME, P1, CONTRACT_NET, "meat-trade", "w/1",
                           ACCEPT_PROPOSAL, {}, 20)
    d, actions = cn_step(d, accept, 20)
    assert d.state == CnState.AWARDED
    assert any(n.event == "awarded" for n in notifications(actions))
    d, actions = cn_complete(d, {"receipt": {"status": "delivered"}}, 40)
    assert d.state == CnState.DONE
    assert [e.performative for e in sends(actions)] == [INFORM]


def test_participant_refusal_is_terminal():
    cfp = make_envelope(ME, P1, CONTRACT_NET, "meat-trade", "w/2", CFP, {}, 0)
    manager = DialogueManager()
    d = manager.route(cfp).dialogue
    d, actions = cn_respond_refuse(d, "insufficient-stock", 5)
    assert d.state == CnState.REFUSED and d.terminal
    assert [e.performative for e in sends(actions)] == [REFUSE]


def test_liveness_bound_full_round():
    """Initiator processes at most 3 + 2·|participants| inputs to completion."""
    participants = [AgentAddress(f"p{i}") for i in range(6)]
    d, _ = cn_initiate(ME, participants, {}, 10_000, "c1", "o", 0)
    processed = 0
    for p in participants:
        d, _ = cn_step(d, propose_from(p, "c1"), 100)
        processed += 1
    d, _ = cn_award(d, participants[0], 200)
    inform = make_envelope(participants[0], ME, CONTRACT_NET, "o", "c1", INFORM, {}, 300)
    d, _ = cn_step(d, inform, 300)
    processed += 1
    assert d.state == CnState.DONE
    assert processed <= 3 + 2 * len(participants)


# --- request/response ---


def test_rr_request_get_sends_and_arms_timer():
    d, actions = rr_request(ME, P1, "get", {"resource": "delivery-options"},
                            5_000, "c7", "logistics", 0)
    assert d.state == RrState.REQUEST_SENT
    (env,) = sends(actions)
    assert env.performative.wire() == "request/get"
    assert [a for a in actions if isinstance(a, SetTimer)] == [SetTimer(5_000)]


def test_rr_post_task():
    d, actions = rr_request(ME, P1, "post", {"task": "delivery-order"},
                            5_000, "c8", "logistics", 0)
    (env,) = sends(actions)
    assert env.performative.wire() == "request/post"


def test_rr_timeout_is_absorbing():
    d, _ = rr_request(ME, P1, "get", {}, 5_000, "c9", "logistics", 0)
    d, actions = rr_step(d, TimerExpiry("c9", 5_000), 5_000)
    assert d.state == RrState.TIMED_OUT
    assert any(n.event == "timeout" for n in notifications(actions))
    response = make_envelope(P1, ME, "request-response", "logistics", "c9",
                             RESPONSE, {}, 6_000)
    d2, actions = rr_step(d, response, 6_000)
    assert d2.state == RrState.TIMED_OUT
    assert sends(actions) == []


def test_rr_server_responds_once():
    req = make_envelope(ME, P1, "request-response", "logistics", "c10",
                        REQUEST_GET, {"resource": "status"}, 0)
    manager = DialogueManager()
    outcome = manager.route(req)
    assert outcome.kind == "new-server"
    d, actions = rr_respond(outcome.dialogue, {"status": "ok"}, 10)
    assert d.state == RrState.RESPONDED
    (env,) = sends(actions)
    assert env.performative.wire() == "response"
    with pytest.raises(DialogueError):
        rr_respond(d, {"status": "again"}, 20)


def test_route_orphan_and_existing():
    manager = DialogueManager()
    stray = propose_from(P1, "nobody/unknown")
    assert manager.route(stray).kind == "orphan"
    d, _ = rr_request(ME, P1, "get", {}, 5_000, "c11", "logistics", 0)
    manager.put(d)
    from supplynet.messaging import RESPONSE

    response = make_envelope(P1, ME, "request-response", "logistics", "c11",
                             RESPONSE, {}, 10)
    outcome = manager.route(response)
    assert outcome.kind == "existing"
    assert outcome.dialogue.conversation == "c11"
