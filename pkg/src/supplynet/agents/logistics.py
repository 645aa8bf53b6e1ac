"""Logistics agent: sells delivery services, outsources fulfilment to 3PLs.

Quotes delivery options to sellers (after checking which fulfilment
partners are available), books a randomly selected eligible 3PL for each
delivery order, and keeps the consolidated job registry the gateway reads
delivery state and summary reports from.  Status posts from the fulfilling
3PL are forwarded to whoever booked the delivery.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..discovery import Query, ServiceDescription
from ..messaging import DISCOVERY, REQUEST_RESPONSE, AgentAddress
from ..orders import DeliveryOption
from ..runtime import AgentConfig, System
from ..strategy import select_3pl
from ..telemetry import DEFAULT_THRESHOLDS
from .common import (
    DEFAULT_REQUEST_TIMEOUT_MS,
    CallbackSkill,
    StatusSkill,
    registration_behaviour,
)

__all__ = ["LogisticsConfig", "LogisticsSkill", "build_logistics_agent"]


def thresholds_to_wire(
    thresholds: dict[str, tuple[float, float] | None]
) -> dict[str, list[float]]:
    return {k: [v[0], v[1]] for k, v in thresholds.items() if v is not None}


@dataclass
class LogisticsConfig:
    name: str
    tiers: tuple[DeliveryOption, ...] = ()
    location: tuple[float, float] = (52.2270, 0.1440)
    performance: float = 0.9
    oef: str = "oef"
    seed: int = 0
    request_timeout_ms: int = DEFAULT_REQUEST_TIMEOUT_MS
    thresholds: dict[str, tuple[float, float] | None] = field(
        default_factory=lambda: dict(DEFAULT_THRESHOLDS)
    )
    # "requester->recipient" -> trace csv path; routes the fulfilling 3PL replays
    route_traces: dict[str, str] = field(default_factory=dict)
    default_trace: str | None = None

    def __post_init__(self):
        if not self.tiers:
            self.tiers = (
                DeliveryOption("standard", self.name, 5.0, 48 * 3_600_000),
                DeliveryOption("express", self.name, 9.0, 24 * 3_600_000),
            )


class LogisticsSkill(CallbackSkill):
    name = "logistics-service"
    ontologies = ("logistics",)
    protocols = (REQUEST_RESPONSE, DISCOVERY)

    def __init__(self, config: LogisticsConfig):
        super().__init__()
        self.config = config
        # tracking number -> job snapshot served to the gateway
        self.jobs: dict[str, dict[str, Any]] = {}

    def behaviours(self):
        return [registration_behaviour(self, self.config.oef, self._description)]

    def _description(self, ctx) -> ServiceDescription:
        return ServiceDescription(
            owner=ctx.name,
            kind="logistics",
            attributes={
                "location": self.config.location,
                "performance": self.config.performance,
            },
        )

    def _tier(self, option_id: str) -> DeliveryOption:
        for tier in self.config.tiers:
            if tier.option_id == option_id:
                return tier
        return self.config.tiers[0]

    def _route_trace(self, requester: str, recipient: str) -> str | None:
        return self.config.route_traces.get(
            f"{requester}->{recipient}", self.config.default_trace
        )

    # --- request dispatch ---

    def on_request(self, ctx, dialogue, env):
        content = env.content if isinstance(env.content, dict) else {}
        resource = content.get("resource")
        task = content.get("task")
        if resource == "delivery-options":
            self._serve_delivery_options(ctx, dialogue)
        elif resource == "delivery":
            self._serve_delivery(ctx, dialogue, content)
        elif resource == "report":
            self._serve_report(ctx, dialogue, content)
        elif task == "delivery-order":
            self._serve_delivery_order(ctx, dialogue, content)
        elif task == "delivery-status":
            self._on_status_post(ctx, dialogue, content)
        elif task == "delivery-alert":
            self._on_alert_post(ctx, dialogue, content)
        else:
            self.respond(ctx, dialogue, {"error": "not-supported"})

    # --- delivery options: availability round with the 3PL partners ---

    def _serve_delivery_options(self, ctx, dialogue) -> None:
        def finish(available: int) -> None:
            options = (
                [t.to_content() for t in self.config.tiers] if available > 0 else []
            )
            self.respond(ctx, dialogue, {"options": options})

        def on_results(ctx, results):
            if not results:
                finish(0)
                return
            state = {"remaining": len(results), "available": 0}

            def one_done():
                state["remaining"] -= 1
                if state["remaining"] == 0:
                    finish(state["available"])

            def on_quote(ctx, env):
                if (env.content or {}).get("available"):
                    state["available"] += 1
                one_done()

            def on_quote_timeout(ctx):
                one_done()

            for d in results:
                self.request(
                    ctx, AgentAddress(d.owner), "get", "logistics",
                    {"resource": "fulfilment-quote"},
                    on_response=on_quote, on_timeout=on_quote_timeout,
                    timeout_ms=self.config.request_timeout_ms,
                )

        def on_search_timeout(ctx):
            finish(0)

        self.search_services(
            ctx, self.config.oef, Query(kind="3pl-fulfilment"),
            on_results, on_search_timeout,
        )

    # --- booking ---

    def _serve_delivery_order(self, ctx, dialogue, content) -> None:
        try:
            order_id = content["order_id"]
            origin = list(content["origin"])
            destination = list(content["destination"])
            quantity = content.get("quantity", 0)
            requester = content.get("requester") or dialogue.counterpart.name
            recipient = content.get("recipient", "")
        except (KeyError, TypeError):
            self.respond(ctx, dialogue, {"error": "bad-order"})
            return
        tier = self._tier(content.get("option_id", ""))
        trace_file = self._route_trace(requester, recipient)
        if trace_file is None:
            self.respond(ctx, dialogue, {"error": "no-route"})
            return

        def on_results(ctx, results):
            if not results:
                self.respond(ctx, dialogue, {"error": "no-fulfilment-provider"})
                return
            chosen = select_3pl([d.owner for d in results], ctx.rng)

            def on_booked(ctx, env):
                body = env.content or {}
                tracking = body.get("tracking_number")
                if not tracking:
                    self.respond(
                        ctx, dialogue,
                        {"error": body.get("error", "fulfilment-failed")},
                    )
                    return
                self.jobs[tracking] = {
                    "tracking_number": tracking,
                    "order_id": order_id,
                    "carrier": body.get("carrier", chosen),
                    "fulfilled_by": chosen,
                    "requester": requester,
                    "recipient": recipient,
                    "origin": origin,
                    "destination": destination,
                    "quantity": quantity,
                    "option_id": tier.option_id,
                    "status": "booked",
                    "alerts": 0,
                    "report": None,
                }
                ctx.publish(
                    "notification",
                    {"event": "delivery-booked", "agent": ctx.name,
                     "tracking_number": tracking, "order_id": order_id,
                     "carrier": body.get("carrier", chosen), "via": chosen},
                )
                self.respond(
                    ctx, dialogue,
                    {"tracking_number": tracking,
                     "carrier": body.get("carrier", chosen),
                     "status": "booked", "eta_ms": tier.eta_ms},
                )

            def on_book_timeout(ctx):
                self.respond(ctx, dialogue, {"error": "fulfilment-unreachable"})

            self.request(
                ctx, AgentAddress(chosen), "post", "logistics",
                {"task": "fulfilment-order",
                 "order_id": order_id,
                 "origin": origin,
                 "destination": destination,
                 "quantity": quantity,
                 "option_id": tier.option_id,
                 "eta_ms": tier.eta_ms,
                 "trace_file": trace_file,
                 "thresholds": thresholds_to_wire(self.config.thresholds),
                 "requester": ctx.name,
                 "recipient": recipient},
                on_response=on_booked, on_timeout=on_book_timeout,
                timeout_ms=self.config.request_timeout_ms,
            )

        def on_search_timeout(ctx):
            self.respond(ctx, dialogue, {"error": "discovery-unreachable"})

        self.search_services(
            ctx, self.config.oef, Query(kind="3pl-fulfilment"),
            on_results, on_search_timeout,
        )

    # --- status, alerts, gateway reads ---

    def _on_status_post(self, ctx, dialogue, content) -> None:
        tracking = content.get("tracking_number", "")
        status = content.get("status", "")
        self.respond(ctx, dialogue, {"status": "ok"})
        job = self.jobs.get(tracking)
        if job is None:
            return
        job["status"] = status
        if isinstance(content.get("report"), dict):
            job["report"] = content["report"]
            ctx.publish(
                "report",
                {"tracking_number": tracking, "order_id": job["order_id"],
                 "report": job["report"]},
            )
        ctx.publish(
            "notification",
            {"event": "delivery-status", "agent": ctx.name,
             "tracking_number": tracking, "status": status,
             "order_id": job["order_id"]},
        )
        requester = job.get("requester")
        if requester and requester != ctx.name:
            self.request(
                ctx, AgentAddress(requester), "post", "logistics",
                {"task": "delivery-status", "tracking_number": tracking,
                 "status": status},
                timeout_ms=self.config.request_timeout_ms,
            )

    def _on_alert_post(self, ctx, dialogue, content) -> None:
        self.respond(ctx, dialogue, {"status": "ok"})
        job = self.jobs.get(content.get("tracking_number", ""))
        if job is not None:
            job["alerts"] += 1

    def _serve_delivery(self, ctx, dialogue, content) -> None:
        job = self.jobs.get(content.get("tracking_number", ""))
        if job is None:
            self.respond(ctx, dialogue, {"error": "not-found"})
            return
        snapshot = {k: v for k, v in job.items() if k != "report"}
        snapshot["has_report"] = job["report"] is not None
        self.respond(ctx, dialogue, {"delivery": snapshot})

    def _serve_report(self, ctx, dialogue, content) -> None:
        job = self.jobs.get(content.get("tracking_number", ""))
        if job is None:
            self.respond(ctx, dialogue, {"error": "not-found"})
            return
        if job["report"] is None:
            self.respond(ctx, dialogue, {"error": "not-ready"})
            return
        self.respond(
            ctx, dialogue,
            {"report": job["report"], "tracking_number": job["tracking_number"]},
        )


def build_logistics_agent(system: System, config: LogisticsConfig):
    skill = LogisticsSkill(config)

    def overview(ctx):
        return {
            "jobs": {
                t: j["status"] for t, j in sorted(skill.jobs.items())
            }
        }

    status = StatusSkill(overview)
    agent = system.spawn_agent(
        AgentConfig(name=config.name, seed=config.seed, discovery=config.oef),
        [skill, status],
    )
    return agent, skill
