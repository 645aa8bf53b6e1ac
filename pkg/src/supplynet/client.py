"""Order injection and process tracking on top of a running system.

``SystemClient`` is the request surface external callers share: the HTTP
gateway and the headless scenario driver both spawn one client agent and
talk to the network through it, so headless runs and portal sessions
exercise the identical path.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Any, Callable

from .messaging import AgentAddress
from .runtime import Behaviour, System
from .agents.common import ClientSkill

__all__ = ["OrderRequest", "ProcessTracker", "RequestFailed", "SystemClient"]


class RequestFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class OrderRequest:
    """Operator order as entered in the ordering panel."""

    scenario: str  # "replenish" | "wholesale"
    product: str
    quantity: float
    unit_price: float
    min_performance: float = 0.0
    radius_km: float | None = None

    def validate(self) -> None:
        if self.scenario not in ("replenish", "wholesale"):
            raise ValueError(f"validation-error: unknown scenario {self.scenario!r}")
        if not isinstance(self.quantity, (int, float)) or self.quantity <= 0:
            raise ValueError("validation-error: quantity must be positive")
        if self.unit_price < 0:
            raise ValueError("validation-error: unit price must be non-negative")


class ProcessTracker:
    """Watches notification events for process outcomes."""

    def __init__(self, system: System):
        self._lock = threading.Condition()
        self.outcomes: dict[str, str] = {}
        self.started: list[str] = []
        system.sink.subscribe(self._on_event)

    def _on_event(self, kind: str, payload: dict[str, Any]) -> None:
        if kind != "notification":
            return
        event = payload.get("event")
        if event == "process-started":
            with self._lock:
                self.started.append(payload.get("process", ""))
        elif event == "process-outcome":
            with self._lock:
                self.outcomes[payload.get("process", "")] = payload.get("outcome", "")
                self._lock.notify_all()

    def outcome(self, process_id: str) -> str | None:
        with self._lock:
            return self.outcomes.get(process_id)

    def wait_outcome(self, process_id: str, timeout_s: float) -> str | None:
        """Block until the process reports an outcome (threaded mode)."""
        with self._lock:
            self._lock.wait_for(
                lambda: process_id in self.outcomes, timeout=timeout_s
            )
            return self.outcomes.get(process_id)


class SystemClient:
    """A minimal client agent for gateway and driver use."""

    def __init__(self, system: System, name: str = "gateway"):
        self.system = system
        self.skill = ClientSkill()
        from .runtime import AgentConfig

        self.agent = system.spawn_agent(AgentConfig(name=name), [self.skill])

    def request(
        self,
        target: str,
        method: str,
        ontology: str,
        content: Any,
        on_response: Callable[[Any], None],
        on_timeout: Callable[[], None] | None = None,
        timeout_ms: int = 5_000,
    ) -> None:
        """Queue a request onto the client agent's loop (non-blocking)."""

        def work(ctx, now):
            self.skill.request(
                ctx,
                AgentAddress(target),
                method,
                ontology,
                content,
                on_response=lambda ctx, env: on_response(env.content),
                on_timeout=(lambda ctx: on_timeout()) if on_timeout else None,
                timeout_ms=timeout_ms,
            )

        self.agent.mailbox.put(("behaviour", Behaviour("client-request", work)))

    def request_blocking(
        self,
        target: str,
        method: str,
        ontology: str,
        content: Any,
        timeout_ms: int = 5_000,
        wall_timeout_s: float = 10.0,
    ) -> Any:
        """Threaded-mode request: blocks the calling (HTTP) thread."""
        done = threading.Event()
        holder: dict[str, Any] = {}

        def on_response(body):
            holder["response"] = body
            done.set()

        def on_timeout():
            holder["error"] = "timeout"
            done.set()

        self.request(target, method, ontology, content, on_response, on_timeout, timeout_ms)
        if not done.wait(wall_timeout_s):
            raise RequestFailed(f"no answer from {target} within {wall_timeout_s}s")
        if "error" in holder:
            raise RequestFailed(f"{target} did not respond (dialogue timeout)")
        return holder["response"]

    def place_order(
        self,
        order: OrderRequest,
        wholesaler: str,
        retailer: str,
        on_done: Callable[[str | None, str | None], None],
        timeout_ms: int = 5_000,
    ) -> None:
        """Route an order to its initiating agent; ``on_done(process, error)``."""
        try:
            order.validate()
        except ValueError as exc:
            on_done(None, str(exc))
            return
        target = wholesaler if order.scenario == "replenish" else retailer
        order_body: dict[str, Any] = {
            "scenario": order.scenario,
            "product": order.product,
            "quantity": order.quantity,
            "unit_price": order.unit_price,
        }
        if order.min_performance:
            order_body["min_performance"] = order.min_performance
        if order.radius_km is not None:
            order_body["radius_km"] = order.radius_km
        content = {"type": "place-order", "order": order_body}

        def on_response(body):
            body = body or {}
            if body.get("type") == "order-accepted":
                process = (body.get("order") or {}).get("process")
                on_done(process, None)
            else:
                on_done(None, body.get("reason") or "order-rejected")

        def on_timeout():
            on_done(None, "system-not-ready")

        self.request(
            target, "post", "meat-trade", content, on_response, on_timeout, timeout_ms
        )
