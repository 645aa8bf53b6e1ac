"""HTTP/WebSocket gateway: the microservice boundary in front of the agents.

Request side: ``POST /orders`` plus snapshot reads for agents, inventory,
deliveries, and reports — every read is forwarded to the owning agent, the
gateway keeps no supply-chain state of its own.  Push side: ``/ws`` streams
the system's event frames (chat mirrors of every envelope, telemetry,
notifications, reports) with per-connection sequence numbers and bounded
buffers that drop-and-count rather than stall the agents.
"""

from __future__ import annotations

import json
import queue
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from starlette.concurrency import run_in_threadpool

from .client import OrderRequest, ProcessTracker, RequestFailed, SystemClient
from .events import FRAME_KINDS, EventSink
from .scenario import ScenarioHandles

__all__ = ["FrameBroadcaster", "FrameSubscriber", "GatewayRuntime", "create_app"]

DEFAULT_BUFFER = 4096


class FrameSubscriber:
    """One push connection's bounded frame queue."""

    def __init__(self, kinds: frozenset[str], buffer_size: int = DEFAULT_BUFFER):
        self.kinds = kinds
        self.queue: queue.Queue = queue.Queue(maxsize=buffer_size)
        self.dropped_total = 0
        self._pending_drops = 0
        self._seq = 0
        self._lock = threading.Lock()

    def offer(self, kind: str, payload: dict[str, Any]) -> None:
        if self.kinds and kind not in self.kinds:
            return
        with self._lock:
            if self._pending_drops and self.queue.qsize() < self.queue.maxsize - 1:
                self._put("status", {"event": "frames-dropped", "count": self._pending_drops})
                self._pending_drops = 0
            try:
                self._put(kind, payload)
            except queue.Full:
                self._pending_drops += 1
                self.dropped_total += 1

    def _put(self, kind: str, payload: dict[str, Any]) -> None:
        frame = {"kind": kind, "payload": payload, "seq": self._seq}
        self.queue.put_nowait(frame)
        self._seq += 1

    def get(self, timeout: float) -> dict[str, Any] | None:
        try:
            return self.queue.get(timeout=timeout)
        except queue.Empty:
            return None


class FrameBroadcaster:
    """Fans system events out to every subscribed push connection."""

    def __init__(self, sink: EventSink, buffer_size: int = DEFAULT_BUFFER):
        self._subscribers: list[FrameSubscriber] = []
        self._lock = threading.Lock()
        self.buffer_size = buffer_size
        sink.subscribe(self._on_event)

    def _on_event(self, kind: str, payload: dict[str, Any]) -> None:
        with self._lock:
            subscribers = list(self._subscribers)
        for sub in subscribers:
            sub.offer(kind, payload)

    def subscribe(self, kinds: set[str] | None = None) -> FrameSubscriber:
        sub = FrameSubscriber(frozenset(kinds or FRAME_KINDS), self.buffer_size)
        with self._lock:
            self._subscribers.append(sub)
        return sub

    def unsubscribe(self, sub: FrameSubscriber) -> None:
        with self._lock:
            if sub in self._subscribers:
                self._subscribers.remove(sub)


@dataclass
class GatewayRuntime:
    """Everything the HTTP layer needs from the running system."""

    handles: ScenarioHandles
    client: SystemClient
    tracker: ProcessTracker
    broadcaster: FrameBroadcaster
    wall_timeout_s: float = 15.0

    @property
    def defaults(self):
        return self.handles.scenario.defaults

    def order_targets(self) -> tuple[str, str]:
        wholesalers = self.handles.wholesaler_names()
        retailers = self.handles.retailer_names()
        return (
            wholesalers[0] if wholesalers else "",
            retailers[0] if retailers else "",
        )


def create_app(runtime: GatewayRuntime, portal_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="supplynet gateway")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    scenario = runtime.handles.scenario

    @app.get("/defaults")
    def get_defaults():
        d = runtime.defaults
        return {
            "scenario": d.scenario,
            "product": scenario.product,
            "quantity": d.quantity,
            "unit_price": d.unit_price,
            "wholesale_quantity": d.wholesale_quantity,
            "min_performance": d.min_performance,
            "radius_km": d.radius_km,
        }

    @app.post("/orders", status_code=202)
    def place_order(body: dict):
        order = OrderRequest(
            scenario=body.get("scenario", runtime.defaults.scenario),
            product=body.get("product", scenario.product),
            quantity=body.get("quantity", 0),
            unit_price=body.get("unit_price", runtime.defaults.unit_price),
            min_performance=body.get("min_performance", runtime.defaults.min_performance),
            radius_km=body.get("radius_km"),
        )
        try:
            order.validate()
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        wholesaler, retailer = runtime.order_targets()
        done = threading.Event()
        outcome: dict[str, Any] = {}

        def on_done(process, error):
            outcome["process"] = process
            outcome["error"] = error
            done.set()

        runtime.client.place_order(order, wholesaler, retailer, on_done)
        if not done.wait(runtime.wall_timeout_s):
            raise HTTPException(status_code=503, detail="system-not-ready")
        if outcome.get("error"):
            raise HTTPException(status_code=400, detail=outcome["error"])
        return {"process": outcome["process"], "scenario": order.scenario}

    def _forward(target: str, method: str, ontology: str, content: dict) -> dict:
        try:
            return runtime.client.request_blocking(
                target, method, ontology, content,
                wall_timeout_s=runtime.wall_timeout_s,
            ) or {}
        except RequestFailed as exc:
            raise HTTPException(status_code=503, detail=str(exc)) from exc

    @app.get("/agents")
    def get_agents():
        admin = runtime.handles.admin_name()
        if admin is None:
            raise HTTPException(status_code=503, detail="no admin agent configured")
        body = _forward(admin, "get", "admin", {"resource": "snapshot"})
        return {"agents": body.get("agents", [])}

    @app.get("/inventory/{agent}")
    def get_inventory(agent: str):
        if agent not in runtime.handles.scenario.agent_names():
            raise HTTPException(status_code=404, detail="not-found")
        body = _forward(agent, "get", "admin", {"resource": "status"})
        return {"agent": agent, "inventory": body.get("inventory", {})}

    @app.get("/deliveries/{tracking}")
    def get_delivery(tracking: str):
        logistics = runtime.handles.logistics_names()
        if not logistics:
            raise HTTPException(status_code=503, detail="no logistics agent")
        body = _forward(
            logistics[0], "get", "logistics",
            {"resource": "delivery", "tracking_number": tracking},
        )
        if body.get("error") == "not-found":
            raise HTTPException(status_code=404, detail="not-found")
        return body.get("delivery", {})

    @app.get("/reports/{tracking}")
    def get_report(tracking: str):
        logistics = runtime.handles.logistics_names()
        if not logistics:
            raise HTTPException(status_code=503, detail="no logistics agent")
        body = _forward(
            logistics[0], "get", "logistics",
            {"resource": "report", "tracking_number": tracking},
        )
        if body.get("error") == "not-found":
            raise HTTPException(status_code=404, detail="not-found")
        if body.get("error") == "not-ready":
            raise HTTPException(status_code=409, detail="not-ready")
        return {"tracking_number": tracking, "report": body.get("report")}

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket):
        raw = websocket.query_params.get("kinds", "")
        kinds = {k.strip() for k in raw.split(",") if k.strip()} or set(FRAME_KINDS)
        unknown = kinds - set(FRAME_KINDS)
        if unknown:
            await websocket.close(code=4400)
            return
        sub = runtime.broadcaster.subscribe(kinds)
        await websocket.accept()
        try:
            while True:
                frame = await run_in_threadpool(sub.get, 0.25)
                if frame is None:
                    continue
                await websocket.send_text(json.dumps(frame, sort_keys=True))
        except WebSocketDisconnect:
            pass
        finally:
            runtime.broadcaster.unsubscribe(sub)

    if portal_dir is not None and portal_dir.is_dir():
        app.mount("/", StaticFiles(directory=str(portal_dir), html=True), name="portal")

    return app
