"""The discovery service as an addressable agent.

Wraps the matchmaking :class:`~supplynet.discovery.Registry` behind the
``discovery`` protocol so registration and search traffic travels over the
same envelope wire format as everything else (and shows up in the chat
mirror like any other conversation).
"""

from __future__ import annotations

from ..discovery import Query, Registry, RegistryError, ServiceDescription
from ..messaging import DISCOVERY
from ..runtime import AgentConfig, System
from .common import CallbackSkill

__all__ = ["DiscoverySkill", "build_discovery_agent"]


class DiscoverySkill(CallbackSkill):
    name = "discovery-service"
    protocols = (DISCOVERY,)

    def __init__(self, registry: Registry | None = None):
        super().__init__()
        self.registry = registry or Registry()

    def on_request(self, ctx, dialogue, env):
        content = env.content if isinstance(env.content, dict) else {}
        action = content.get("action")
        try:
            if action == "register":
                service = content.get("service") or {}
                description = ServiceDescription(
                    owner=service.get("owner", env.sender.name),
                    kind=service.get("kind", ""),
                    attributes=service.get("attributes", {}),
                )
                reg_id = self.registry.register(description)
                self.respond(ctx, dialogue, {"ok": True, "registration_id": reg_id})
            elif action == "unregister":
                self.registry.unregister(content.get("registration_id", ""))
                self.respond(ctx, dialogue, {"ok": True})
            elif action == "search":
                query = Query.from_wire(content.get("query") or {})
                hits = self.registry.search(query)
                results = [
                    {"id": d.id, "owner": d.owner, "kind": d.kind,
                     "attributes": {
                         k: list(v) if isinstance(v, tuple) else v
                         for k, v in d.attributes.items()
                     }}
                    for d in hits
                ]
                self.respond(ctx, dialogue, {"ok": True, "results": results})
            else:
                self.respond(ctx, dialogue, {"ok": False, "error": f"unknown action {action!r}"})
        except RegistryError as exc:
            self.respond(ctx, dialogue, {"ok": False, "error": str(exc)})


def build_discovery_agent(system: System, name: str = "oef", seed: int = 0):
    """Spawn the discovery service; must exist before other agents boot."""
    skill = DiscoverySkill()
    agent = system.spawn_agent(AgentConfig(name=name, seed=seed), [skill])
    return agent, skill.registry
