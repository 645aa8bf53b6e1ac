"""Third-party fulfilment (3PL) agent: runs and monitors deliveries.

Accepts fulfilment orders from its logistics partner, issues a tracking
number, and replays the assigned journey trace as live telemetry on its own
timers: location and sensor frames per trace point, threshold alerts
forwarded to logistics and pushed to the gateway, and a summary report
generated when the goods arrive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..discovery import ServiceDescription
from ..messaging import DISCOVERY, REQUEST_RESPONSE, AgentAddress
from ..runtime import AgentConfig, AgentContext, System
from ..telemetry import (
    DEFAULT_THRESHOLDS,
    DeliveryJob,
    TraceError,
    TrackingNumbers,
    generate_report,
    load_trace,
    point_alerts,
)
from .common import (
    DEFAULT_REQUEST_TIMEOUT_MS,
    CallbackSkill,
    StatusSkill,
    registration_behaviour,
)

__all__ = ["FulfilmentConfig", "FulfilmentSkill", "DeliveryReplay", "build_fulfilment_agent"]


@dataclass
class FulfilmentConfig:
    name: str
    carrier_name: str = ""  # alphanumeric brand printed on tracking numbers
    location: tuple[float, float] = (52.2000, 0.1100)
    performance: float = 0.85
    oef: str = "oef"
    seed: int = 0
    request_timeout_ms: int = DEFAULT_REQUEST_TIMEOUT_MS

    def __post_init__(self):
        if not self.carrier_name:
            self.carrier_name = "".join(c for c in self.name.title() if c.isalnum())


class DeliveryReplay:
    """Replays one job's trace as telemetry events on the agent's timers."""

    def __init__(
        self,
        skill: "FulfilmentSkill",
        job: DeliveryJob,
        notify: str,
    ):
        self.skill = skill
        self.job = job
        self.notify = notify  # logistics agent to post status and alerts to
        self.emitted = 0
        self._started = False

    def start(self, ctx: AgentContext) -> None:
        if self._started:
            raise RuntimeError(f"already-started: {self.job.tracking_number}")
        self._started = True
        start_ms = ctx.now_ms()
        base = self.job.trace.points[0].t_ms
        self.job = self.job.advance("in-transit")
        self.skill.post_status(ctx, self.notify, self.job.tracking_number, "in-transit")
        for index, point in enumerate(self.job.trace.points):
            due = start_ms + (point.t_ms - base)
            ctx.set_timer(due, lambda now, i=index: self._emit(ctx, i))

    def _emit(self, ctx: AgentContext, index: int) -> None:
        point = self.job.trace.points[index]
        tracking = self.job.tracking_number
        self.emitted += 1
        ctx.publish(
            "location",
            {"tracking_number": tracking, "t_ms": point.t_ms,
             "lat": point.lat, "lon": point.lon, "elevation_m": point.elevation_m},
        )
        ctx.publish(
            "sensor",
            {"tracking_number": tracking, "t_ms": point.t_ms,
             "temperature": point.temperature_c, "humidity": point.humidity_pct,
             "light": point.light_lux},
        )
        for alert in point_alerts(point, self.job.thresholds):
            ctx.publish(
                "notification",
                {"event": "alert", "agent": ctx.name,
                 "tracking_number": tracking, **alert.to_content()},
            )
            self.skill.request(
                ctx, AgentAddress(self.notify), "post", "logistics",
                {"task": "delivery-alert", "tracking_number": tracking,
                 "alert": alert.to_content()},
                timeout_ms=self.skill.config.request_timeout_ms,
            )
        if index == len(self.job.trace.points) - 1:
            self._finish(ctx)

    def _finish(self, ctx: AgentContext) -> None:
        tracking = self.job.tracking_number
        report = generate_report(self.job.trace, self.job.thresholds)
        self.job = self.job.advance("delivered")
        self.skill.post_status(
            ctx, self.notify, tracking, "delivered", report=report.to_content()
        )
        self.skill.replays.pop(tracking, None)


class FulfilmentSkill(CallbackSkill):
    name = "3pl-fulfilment"
    ontologies = ("logistics",)
    protocols = (REQUEST_RESPONSE, DISCOVERY)

    def __init__(self, config: FulfilmentConfig):
        super().__init__()
        self.config = config
        self.tracking_numbers = TrackingNumbers()
        self.replays: dict[str, DeliveryReplay] = {}

    def behaviours(self):
        return [registration_behaviour(self, self.config.oef, self._description)]

    def _description(self, ctx) -> ServiceDescription:
        return ServiceDescription(
            owner=ctx.name,
            kind="3pl-fulfilment",
            attributes={
                "carrier": self.config.carrier_name,
                "location": self.config.location,
                "performance": self.config.performance,
            },
        )

    def on_request(self, ctx, dialogue, env):
        content = env.content if isinstance(env.content, dict) else {}
        if content.get("resource") == "fulfilment-quote":
            self.respond(
                ctx, dialogue,
                {"available": True, "carrier": self.config.carrier_name},
            )
            return
        if content.get("task") == "fulfilment-order":
            self._accept_order(ctx, dialogue, content)
            return
        self.respond(ctx, dialogue, {"error": "not-supported"})

    def _accept_order(self, ctx, dialogue, content) -> None:
        trace_file = content.get("trace_file", "")
        try:
            trace = load_trace(trace_file)
        except (OSError, TraceError) as exc:
            self.respond(ctx, dialogue, {"error": f"trace-unavailable: {exc}"})
            return
        thresholds = dict(DEFAULT_THRESHOLDS)
        for channel, bound in (content.get("thresholds") or {}).items():
            thresholds[channel] = (bound[0], bound[1])
        tracking = self.tracking_numbers.issue(self.config.carrier_name, ctx.now_ms())
        job = DeliveryJob(
            tracking_number=tracking,
            order_id=content.get("order_id", ""),
            origin=tuple(content.get("origin", (0.0, 0.0))),
            destination=tuple(content.get("destination", (0.0, 0.0))),
            carrier=self.config.carrier_name,
            trace=trace,
            thresholds=thresholds,
        )
        notify = content.get("requester") or dialogue.counterpart.name
        replay = DeliveryReplay(self, job, notify)
        self.replays[tracking] = replay
        self.respond(
            ctx, dialogue,
            {"tracking_number": tracking, "carrier": self.config.carrier_name,
             "status": "booked"},
        )
        replay.start(ctx)

    def post_status(
        self,
        ctx: AgentContext,
        notify: str,
        tracking: str,
        status: str,
        report: dict[str, Any] | None = None,
    ) -> None:
        content: dict[str, Any] = {
            "task": "delivery-status",
            "tracking_number": tracking,
            "status": status,
            "carrier": self.config.carrier_name,
        }
        if report is not None:
            content["report"] = report
        self.request(
            ctx, AgentAddress(notify), "post", "logistics", content,
            timeout_ms=self.config.request_timeout_ms,
        )


def build_fulfilment_agent(system: System, config: FulfilmentConfig):
    skill = FulfilmentSkill(config)

    def overview(ctx):
        return {"active_deliveries": sorted(skill.replays)}

    status = StatusSkill(overview)
    agent = system.spawn_agent(
        AgentConfig(name=config.name, seed=config.seed, discovery=config.oef),
        [skill, status],
    )
    return agent, skill
