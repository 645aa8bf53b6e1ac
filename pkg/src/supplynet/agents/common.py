"""Shared skill machinery for the concrete agents.

``CallbackSkill`` layers per-conversation listeners over the pure dialogue
state machines so concrete skills can write straight-line request/response
and negotiation flows.  ``StatusSkill`` answers the admin's direct status
queries, and ``ClientSkill`` is the thin request surface the gateway and
scenario driver use to talk to agents.
"""

from __future__ import annotations

from typing import Any, Callable

from ..discovery import Query, ServiceDescription
from ..messaging import DISCOVERY, REQUEST_RESPONSE, AgentAddress, Envelope
from ..protocols import RequestResponseDialogue, rr_request, rr_respond
from ..runtime import AgentContext, Behaviour, Skill

__all__ = [
    "CallbackSkill",
    "StatusSkill",
    "ClientSkill",
    "registration_behaviour",
]

# Defaults for dialogue pacing (virtual milliseconds), configurable per agent.
DEFAULT_CFP_DEADLINE_MS = 10_000
DEFAULT_REQUEST_TIMEOUT_MS = 5_000

Listener = Callable[[AgentContext, Any, str, Any], None]


class CallbackSkill(Skill):
    """Skill with per-conversation dialogue event listeners.

    Subclasses declare the protocols they speak in ``protocols``; every
    listed protocol is handled by the generic dialogue-routing handler.
    """

    protocols: tuple[str, ...] = ()

    def __init__(self):
        super().__init__()
        self._listeners: dict[str, Listener] = {}
        self.registration_id: str | None = None

    def handlers(self):
        return {protocol: self.handle for protocol in self.protocols}

    def listen(self, conversation: str, listener: Listener) -> None:
        self._listeners[conversation] = listener

    def on_dialogue_event(self, ctx, dialogue, event, data) -> None:
        listener = self._listeners.get(dialogue.conversation)
        if listener is not None:
            listener(ctx, dialogue, event, data)
            if dialogue.terminal:
                self._listeners.pop(dialogue.conversation, None)
            return
        if event == "cfp":
            self.on_cfp(ctx, dialogue, data)
        elif event == "request":
            self.on_request(ctx, dialogue, data)
        elif event == "protocol-violation":
            ctx.publish(
                "status",
                {"event": "protocol-violation", "agent": ctx.name, "detail": data},
            )

    # Server-side hooks; concrete skills override what they serve.

    def on_cfp(self, ctx: AgentContext, dialogue, env: Envelope) -> None:
        pass

    def on_request(self, ctx: AgentContext, dialogue, env: Envelope) -> None:
        self.respond(ctx, dialogue, {"error": "not-supported"})

    # --- client helpers ---

    def handle(self, ctx: AgentContext, env: Envelope) -> None:
        """Generic protocol handler: route to a live dialogue or open one."""
        if self.step_dialogue(ctx, env):
            return
        outcome = self.dialogues.route(env)
        if outcome.kind == "orphan":
            ctx.publish(
                "status",
                {"event": "orphan-envelope", "agent": ctx.name,
                 "conversation": env.conversation},
            )
            return
        self.run_dialogue(ctx, outcome.dialogue, outcome.actions)

    def request(
        self,
        ctx: AgentContext,
        target: AgentAddress,
        method: str,
        ontology: str,
        content: Any,
        on_response: Callable[[AgentContext, Envelope], None] | None = None,
        on_timeout: Callable[[AgentContext], None] | None = None,
        timeout_ms: int = DEFAULT_REQUEST_TIMEOUT_MS,
        protocol: str = REQUEST_RESPONSE,
    ) -> str:
        """Fire a single-round request; callbacks run on the agent loop."""
        conversation = ctx.new_conversation()
        dialogue, actions = rr_request(
            ctx.address, target, method, content, timeout_ms,
            conversation, ontology, ctx.now_ms(), protocol,
        )

        def listener(ctx, dialogue, event, data):
            if event == "response" and on_response is not None:
                on_response(ctx, data)
            elif event == "timeout" and on_timeout is not None:
                on_timeout(ctx)

        self.listen(conversation, listener)
        self.run_dialogue(ctx, dialogue, actions)
        return conversation

    def respond(self, ctx: AgentContext, dialogue: RequestResponseDialogue, content: Any) -> None:
        new, actions = rr_respond(dialogue, content, ctx.now_ms())
        self.run_dialogue(ctx, new, actions)

    # --- discovery client ---

    def register_service(
        self,
        ctx: AgentContext,
        oef: str,
        description: ServiceDescription,
        on_done: Callable[[AgentContext, str], None] | None = None,
    ) -> None:
        def handled(ctx, env):
            reg_id = env.content.get("registration_id", "")
            ctx.publish(
                "status",
                {"event": "registered", "agent": ctx.name,
                 "kind": description.kind, "registration_id": reg_id},
            )
            if on_done is not None:
                on_done(ctx, reg_id)

        attributes = dict(description.attributes)
        if isinstance(attributes.get("location"), tuple):
            attributes["location"] = list(attributes["location"])
        self.request(
            ctx,
            AgentAddress(oef),
            "post",
            "discovery",
            {"action": "register",
             "service": {"owner": description.owner, "kind": description.kind,
                         "attributes": attributes}},
            on_response=handled,
            protocol=DISCOVERY,
        )

    def unregister_service(
        self,
        ctx: AgentContext,
        oef: str,
        registration_id: str,
        on_done: Callable[[AgentContext, bool], None] | None = None,
    ) -> None:
        """Remove a previously registered service from discovery."""

        def handled(ctx, env):
            ok = bool((env.content or {}).get("ok"))
            ctx.publish(
                "status",
                {"event": "unregistered", "agent": ctx.name,
                 "registration_id": registration_id, "ok": ok},
            )
            if on_done is not None:
                on_done(ctx, ok)

        self.request(
            ctx,
            AgentAddress(oef),
            "post",
            "discovery",
            {"action": "unregister", "registration_id": registration_id},
            on_response=handled,
            protocol=DISCOVERY,
        )

    def search_services(
        self,
        ctx: AgentContext,
        oef: str,
        query: Query,
        on_results: Callable[[AgentContext, list[ServiceDescription]], None],
        on_timeout: Callable[[AgentContext], None] | None = None,
    ) -> None:
        def handled(ctx, env):
            results = [
                ServiceDescription(
                    owner=item["owner"], kind=item["kind"],
                    attributes=item.get("attributes", {}), id=item.get("id", ""),
                )
                for item in env.content.get("results", [])
            ]
            on_results(ctx, results)

        self.request(
            ctx,
            AgentAddress(oef),
            "get",
            "discovery",
            {"action": "search", "query": query.to_wire()},
            on_response=handled,
            on_timeout=on_timeout,
            protocol=DISCOVERY,
        )


def registration_behaviour(
    skill: CallbackSkill, oef: str | None, description_fn: Callable[[AgentContext], ServiceDescription]
) -> Behaviour:
    """One-shot proactive action registering the agent's service at boot."""

    def action(ctx: AgentContext, now: int) -> None:
        if oef is None:
            ctx.publish("status", {"event": "registered", "agent": ctx.name, "kind": None})
            return

        def remember(ctx, reg_id: str) -> None:
            skill.registration_id = reg_id

        skill.register_service(ctx, oef, description_fn(ctx), on_done=remember)

    return Behaviour("register-service", action)


class StatusSkill(CallbackSkill):
    """Answers the admin's direct request/response status queries."""

    name = "status"
    ontologies = ("admin",)
    protocols = (REQUEST_RESPONSE,)

    def __init__(self, overview: Callable[[AgentContext], dict[str, Any]] | None = None):
        super().__init__()
        self._overview = overview

    def on_request(self, ctx, dialogue, env):
        if env.content.get("resource") != "status":
            self.respond(ctx, dialogue, {"error": "not-supported"})
            return
        body: dict[str, Any] = {
            "agent": ctx.name,
            "live": True,
            "open_dialogues": ctx.open_dialogues(),
        }
        if self._overview is not None:
            body["inventory"] = self._overview(ctx)
        self.respond(ctx, dialogue, body)


class ClientSkill(CallbackSkill):
    """Request surface for non-agent callers (gateway, scenario driver)."""

    name = "client"
    protocols = (REQUEST_RESPONSE, DISCOVERY)
