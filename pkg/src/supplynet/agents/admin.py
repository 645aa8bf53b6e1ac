"""Admin agent: system overview via direct status queries.

Maintains the operator portal's view of the agent network: on demand (or
periodically) it queries every known agent directly and aggregates the
replies, reporting silent agents as unreachable rather than omitting them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

from ..discovery import ServiceDescription
from ..messaging import DISCOVERY, REQUEST_RESPONSE, AgentAddress
from ..runtime import AgentConfig, Behaviour, System
from .common import CallbackSkill, registration_behaviour

__all__ = ["AdminConfig", "AdminSkill", "build_admin"]


@dataclass
class AdminConfig:
    name: str = "admin"
    peers: tuple[str, ...] = ()
    oef: str | None = "oef"
    seed: int = 0
    status_timeout_ms: int = 3_000
    poll_interval_ms: int = 30_000


class AdminSkill(CallbackSkill):
    name = "admin"
    ontologies = ("admin",)
    protocols = (REQUEST_RESPONSE, DISCOVERY)

    def __init__(self, config: AdminConfig):
        super().__init__()
        self.config = config
        self.last_overview: list[dict[str, Any]] = []

    def behaviours(self):
        behaviours = [Behaviour("poll-agents", self._poll, self.config.poll_interval_ms)]
        if self.config.oef is not None:
            behaviours.insert(
                0, registration_behaviour(self, self.config.oef, self._description)
            )
        return behaviours

    def _description(self, ctx) -> ServiceDescription:
        return ServiceDescription(owner=ctx.name, kind="admin", attributes={})

    def on_request(self, ctx, dialogue, env):
        resource = (env.content or {}).get("resource")
        if resource == "status":
            self.respond(
                ctx, dialogue,
                {"agent": ctx.name, "live": True,
                 "open_dialogues": ctx.open_dialogues()},
            )
        elif resource == "snapshot":
            self.snapshot(ctx, lambda ctx, entries: self.respond(
                ctx, dialogue, {"agents": entries}
            ))
        else:
            self.respond(ctx, dialogue, {"error": "not-supported"})

    def snapshot(
        self, ctx, done: Callable[[Any, list[dict[str, Any]]], None]
    ) -> None:
        """Query every peer once; silent peers come back as unreachable."""
        peers = list(self.config.peers)
        if not peers:
            done(ctx, [])
            return
        state: dict[str, Any] = {"remaining": len(peers), "entries": {}}

        def one(name: str, entry: dict[str, Any]) -> None:
            state["entries"][name] = entry
            state["remaining"] -= 1
            if state["remaining"] == 0:
                entries = [state["entries"][n] for n in peers]
                self.last_overview = entries
                done(ctx, entries)

        for name in peers:
            def on_response(ctx, env, n=name):
                body = env.content or {}
                one(n, {"agent": n, "live": True,
                        "open_dialogues": body.get("open_dialogues", 0),
                        "inventory": body.get("inventory", {})})

            def on_timeout(ctx, n=name):
                one(n, {"agent": n, "live": False, "unreachable": True})

            self.request(
                ctx, AgentAddress(name), "get", "admin", {"resource": "status"},
                on_response=on_response, on_timeout=on_timeout,
                timeout_ms=self.config.status_timeout_ms,
            )

    def _poll(self, ctx, now) -> None:
        self.snapshot(ctx, lambda ctx, entries: ctx.publish(
            "status", {"event": "system-overview", "agents": entries}
        ))


def build_admin(system: System, config: AdminConfig):
    skill = AdminSkill(config)
    agent = system.spawn_agent(
        AgentConfig(name=config.name, seed=config.seed, discovery=config.oef),
        [skill],
    )
    return agent, skill
