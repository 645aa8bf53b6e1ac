"""Gateway endpoints, push frames, and backpressure."""

import time

import pytest
from fastapi.testclient import TestClient

from supplynet.clock import ScaledClock
from supplynet.client import ProcessTracker, SystemClient
from supplynet.events import EventSink
from supplynet.gateway import FrameBroadcaster, GatewayRuntime, create_app
from supplynet.scenario import build_system, load_scenario

from helpers import write_scenario

SPEED = 200.0


@pytest.fixture
def gateway(tmp_path):
    """Running scaled system + TestClient; shared per test."""
    scenario = load_scenario(write_scenario(tmp_path, trace_points=6,
                                            wholesaler_stock=100, reorder_point=5))
    sink = EventSink()
    handles = build_system(scenario, clock=ScaledClock(SPEED), sink=sink)
    tracker = ProcessTracker(handles.system)
    broadcaster = FrameBroadcaster(sink)
    client = SystemClient(handles.system)
    handles.system.start()
    runtime = GatewayRuntime(handles=handles, client=client, tracker=tracker,
                             broadcaster=broadcaster, wall_timeout_s=10.0)
    app = create_app(runtime)
    test_client = TestClient(app)
    deadline = time.time() + 5
    while len(handles.registry) < 8 and time.time() < deadline:
        time.sleep(0.02)
    yield test_client, runtime
    handles.system.stop()


def wait_outcome(runtime, process, timeout=30.0):
    return runtime.tracker.wait_outcome(process, timeout)


class TestRequestEndpoints:
    def test_agents_lists_seven(self, gateway):
        tc, runtime = gateway
        r = tc.get("/agents")
        assert r.status_code == 200
        assert len(r.json()["agents"]) == 7

    def test_inventory_snapshot(self, gateway):
        tc, _ = gateway
        r = tc.get("/inventory/wholesaler")
        assert r.status_code == 200
        assert r.json()["inventory"]["beef"]["on_hand"] == 100.0

    def test_inventory_unknown_agent_404(self, gateway):
        tc, _ = gateway
        assert tc.get("/inventory/nobody").status_code == 404

    def test_unknown_delivery_and_report_404(self, gateway):
        tc, _ = gateway
        assert tc.get("/deliveries/NOPE123").status_code == 404
        assert tc.get("/reports/NOPE123").status_code == 404

    def test_order_validation_error(self, gateway):
        tc, _ = gateway
        r = tc.post("/orders", json={"scenario": "replenish", "quantity": 0})
        assert r.status_code == 400
        r = tc.post("/orders", json={"scenario": "warp", "quantity": 5})
        assert r.status_code == 400

    def test_defaults_exposed_for_the_ordering_panel(self, gateway):
        tc, _ = gateway
        body = tc.get("/defaults").json()
        assert body["quantity"] == 100
        assert body["scenario"] == "replenish"

    def test_replenish_order_end_to_end(self, gateway):
        tc, runtime = gateway
        r = tc.post("/orders", json={"scenario": "replenish", "quantity": 50,
                                     "unit_price": 10.0})
        assert r.status_code == 202
        process = r.json()["process"]
        assert wait_outcome(runtime, process) == "fulfilled"
        inv = tc.get("/inventory/wholesaler").json()["inventory"]["beef"]
        assert inv["on_hand"] == 150.0

    def test_report_not_ready_while_in_transit_then_available(self, gateway):
        tc, runtime = gateway
        with tc.websocket_connect("/ws?kinds=notification") as ws:
            r = tc.post("/orders", json={"scenario": "wholesale", "quantity": 10,
                                         "unit_price": 10.0})
            assert r.status_code == 202
            process = r.json()["process"]
            tracking = None
            for _ in range(50):
                frame = ws.receive_json()
                payload = frame["payload"]
                if payload.get("event") == "delivery-booked":
                    tracking = payload["tracking_number"]
                    break
            assert tracking
            r = tc.get(f"/reports/{tracking}")
            assert r.status_code in (200, 409)  # usually 409: still in transit
            assert wait_outcome(runtime, process) == "fulfilled"
            deadline = time.time() + 10
            while time.time() < deadline:
                r = tc.get(f"/reports/{tracking}")
                if r.status_code == 200:
                    break
                time.sleep(0.05)
            assert r.status_code == 200
            report = r.json()["report"]
            assert set(report["channels"]) == {"temperature", "humidity", "light"}
            r = tc.get(f"/deliveries/{tracking}")
            assert r.status_code == 200 and r.json()["status"] == "delivered"


class TestPushChannel:
    def test_chat_frames_preserve_negotiation_order(self, gateway):
        tc, runtime = gateway
        with tc.websocket_connect("/ws?kinds=chat") as ws:
            r = tc.post("/orders", json={"scenario": "replenish", "quantity": 25,
                                         "unit_price": 10.0})
            process = r.json()["process"]
            assert wait_outcome(runtime, process) == "fulfilled"
            performatives = []
            seqs = []
            for _ in range(500):
                frame = ws.receive_json()
                seqs.append(frame["seq"])
                payload = frame["payload"]
                if payload["conversation"] == process:
                    performatives.append(payload["performative"])
                    if payload["performative"] == "inform":
                        break
        assert seqs == sorted(seqs) and len(set(seqs)) == len(seqs)
        assert performatives.index("cfp") < performatives.index("propose")
        assert performatives.index("propose") < performatives.index("accept-proposal")
        assert performatives.count("accept-proposal") == 1
        assert "inform" in performatives

    def test_sensor_subscription_quiet_without_delivery(self, gateway):
        tc, runtime = gateway
        sub = runtime.broadcaster.subscribe({"sensor"})
        try:
            assert sub.get(timeout=0.4) is None  # no delivery running, no frames
        finally:
            runtime.broadcaster.unsubscribe(sub)

    def test_two_subscribers_see_identical_sequences(self, gateway):
        tc, runtime = gateway
        with tc.websocket_connect("/ws?kinds=notification") as ws1, \
                tc.websocket_connect("/ws?kinds=notification") as ws2:
            r = tc.post("/orders", json={"scenario": "wholesale", "quantity": 10,
                                         "unit_price": 10.0})
            process = r.json()["process"]
            assert wait_outcome(runtime, process) == "fulfilled"

            def drain(ws):
                events = []
                for _ in range(100):
                    frame = ws.receive_json()
                    events.append((frame["seq"], frame["payload"].get("event")))
                    if frame["payload"].get("event") == "process-outcome":
                        break
                return events

            assert drain(ws1) == drain(ws2)

    def test_unknown_kind_rejected(self, gateway):
        tc, _ = gateway
        from starlette.websockets import WebSocketDisconnect

        with pytest.raises(WebSocketDisconnect):
            with tc.websocket_connect("/ws?kinds=bogus") as ws:
                ws.receive_json()


class TestBackpressure:
    def test_slow_subscriber_drops_and_counts(self):
        sink = EventSink()
        broadcaster = FrameBroadcaster(sink, buffer_size=8)
        sub = broadcaster.subscribe({"status"})
        for n in range(50):
            sink.publish("status", {"event": "tick", "n": n})
        assert sub.dropped_total == 50 - 8
        # consumer drains; a recovery status frame reports the drop count
        drained = []
        while True:
            frame = sub.get(timeout=0.01)
            if frame is None:
                break
            drained.append(frame)
        assert len(drained) == 8
        sink.publish("status", {"event": "tick", "n": 999})
        recovery = sub.get(timeout=0.1)
        assert recovery["payload"]["event"] == "frames-dropped"
        assert recovery["payload"]["count"] == 42
        following = sub.get(timeout=0.1)
        assert following["payload"]["n"] == 999
        seqs = [f["seq"] for f in drained] + [recovery["seq"], following["seq"]]
        assert seqs == sorted(seqs)

    def test_publisher_never_blocks_on_full_subscriber(self):
        sink = EventSink()
        broadcaster = FrameBroadcaster(sink, buffer_size=4)
        broadcaster.subscribe({"status"})
        start = time.time()
        for n in range(10_000):
            sink.publish("status", {"n": n})
        assert time.time() - start < 2.0
