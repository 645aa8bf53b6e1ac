"""Command line interface: scenario runs, the gateway server, report tools.

``supplynet run --headless`` boots discovery, the agents, and a client,
executes the scripted processes, and writes the run artifacts (message log,
inventory log, per-delivery reports with figures) to the output directory.
Without ``--headless`` it serves the gateway for the web portal instead.
"""

from __future__ import annotations

import json
import sys
import threading
import time
from pathlib import Path
from typing import Any

import click

from .client import OrderRequest, ProcessTracker, SystemClient
from .clock import ScaledClock, VirtualClock
from .events import EventSink
from .messaging import encode
from .reporting import TelemetrySeries, write_report_files
from .scenario import ConfigError, ScenarioHandles, build_system, load_scenario
from .telemetry import generate_report, load_trace, synthesize_trace, trace_to_csv

WALL_TIMEOUT_S = 300.0
VIRTUAL_HORIZON_MS = 24 * 3_600_000


class ArtifactWriter:
    """Writes messages.log, inventory.log, and report files during a run."""

    def __init__(self, out_dir: Path, figures: bool = True):
        self.out_dir = out_dir
        self.figures = figures
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "reports").mkdir(exist_ok=True)
        self._lock = threading.Lock()
        self._messages = open(out_dir / "messages.log", "wb")
        self._inventory = open(out_dir / "inventory.log", "w", encoding="utf-8")
        self._series: dict[str, TelemetrySeries] = {}
        self._state: dict[str, Any] = {}
        self.reports_written: list[str] = []

    def attach(self, system) -> None:
        system.router.taps.append(self._tap)
        system.sink.subscribe(self._on_event)

    def _tap(self, env) -> None:
        with self._lock:
            self._messages.write(encode(env) + b"\n")

    def _series_for(self, tracking: str) -> TelemetrySeries:
        if tracking not in self._series:
            self._series[tracking] = TelemetrySeries(tracking)
        return self._series[tracking]

    def _on_event(self, kind: str, payload: dict[str, Any]) -> None:
        if kind == "status" and payload.get("event") == "inventory":
            with self._lock:
                self._inventory.write(json.dumps(payload, sort_keys=True) + "\n")
                self._state[f"{payload.get('agent')}:{payload.get('product')}"] = {
                    "agent": payload.get("agent"),
                    "product": payload.get("product"),
                    "on_hand": payload.get("on_hand"),
                    "reserved": payload.get("reserved"),
                }
                self._write_state_locked()
        elif kind == "sensor":
            self._series_for(payload.get("tracking_number", "")).add_sensor(payload)
        elif kind == "location":
            self._series_for(payload.get("tracking_number", "")).add_location(payload)
        elif kind == "report":
            tracking = payload.get("tracking_number", "")
            report = payload.get("report") or {}
            series = self._series.get(tracking)
            write_report_files(
                self.out_dir / "reports", tracking, report, series, self.figures
            )
            self.reports_written.append(tracking)

    def _write_state_locked(self) -> None:
        state = sorted(self._state.values(),
                       key=lambda s: (s["agent"] or "", s["product"] or ""))
        (self.out_dir / "inventory_state.json").write_text(
            json.dumps(state, indent=2, sort_keys=True) + "\n"
        )

    def close(self) -> None:
        with self._lock:
            self._write_state_locked()
            self._messages.close()
            self._inventory.close()


class ReadyTracker:
    """Waits for every agent's registration behaviour to complete."""

    def __init__(self, sink: EventSink, expected: set[str]):
        self.expected = set(expected)
        self.seen: set[str] = set()
        self._cond = threading.Condition()
        sink.subscribe(self._on_event)

    def _on_event(self, kind: str, payload: dict[str, Any]) -> None:
        if kind == "status" and payload.get("event") == "registered":
            with self._cond:
                self.seen.add(payload.get("agent", ""))
                self._cond.notify_all()

    def ready(self) -> bool:
        with self._cond:
            return self.expected <= self.seen

    def wait(self, timeout_s: float) -> bool:
        with self._cond:
            return self._cond.wait_for(lambda: self.expected <= self.seen, timeout_s)


def _scripted_orders(which: str, handles: ScenarioHandles) -> list[OrderRequest]:
    defaults = handles.scenario.defaults
    product = handles.scenario.product
    orders = []
    if which in ("replenish", "both"):
        orders.append(OrderRequest("replenish", product, defaults.quantity, defaults.unit_price))
    if which in ("wholesale", "both"):
        orders.append(
            OrderRequest("wholesale", product, defaults.wholesale_quantity, defaults.unit_price)
        )
    return orders


def _place_order_virtual(system, client, order, wholesaler, retailer) -> tuple[str | None, str | None]:
    holder: dict[str, Any] = {}
    client.place_order(order, wholesaler, retailer, lambda p, e: holder.update(process=p, error=e))
    system.step_until_idle()
    return holder.get("process"), holder.get("error")


def _place_order_scaled(client, order, wholesaler, retailer) -> tuple[str | None, str | None]:
    done = threading.Event()
    holder: dict[str, Any] = {}

    def on_done(process, error):
        holder["process"] = process
        holder["error"] = error
        done.set()

    client.place_order(order, wholesaler, retailer, on_done)
    if not done.wait(30.0):
        return None, "system-not-ready"
    return holder.get("process"), holder.get("error")


def run_headless(
    handles: ScenarioHandles,
    which: str,
    writer: ArtifactWriter | None,
    virtual: bool,
) -> tuple[int, list[tuple[str, str, str]]]:
    """Execute the scripted processes; returns (exit code, outcome rows)."""
    system = handles.system
    tracker = ProcessTracker(system)
    ready = ReadyTracker(system.sink, set(handles.scenario.agent_names()))
    client = SystemClient(system)

    if virtual:
        system.step_until_idle()
        if not ready.ready():
            raise ConfigError("agents failed to register at discovery")
    else:
        system.start()
        if not ready.wait(30.0):
            system.stop()
            raise ConfigError("agents failed to register at discovery")

    wholesaler = (handles.wholesaler_names() or [""])[0]
    retailer = (handles.retailer_names() or [""])[0]
    rows: list[tuple[str, str, str]] = []
    exit_code = 0
    for order in _scripted_orders(which, handles):
        if virtual:
            process, error = _place_order_virtual(system, client, order, wholesaler, retailer)
        else:
            process, error = _place_order_scaled(client, order, wholesaler, retailer)
        if process is None:
            rows.append((order.scenario, "-", error or "rejected"))
            exit_code = 1
            continue
        if virtual:
            finished = system.run_virtual(
                until=lambda: tracker.outcome(process) is not None,
                max_ms=VIRTUAL_HORIZON_MS,
            )
            outcome = tracker.outcome(process) or ("no-outcome" if finished else "horizon-exhausted")
        else:
            outcome = tracker.wait_outcome(process, WALL_TIMEOUT_S) or "timed-out"
        rows.append((order.scenario, process, outcome))
        if outcome != "fulfilled":
            exit_code = 1
    if not virtual:
        system.stop()
    if writer is not None:
        writer.close()
    return exit_code, rows


@click.group()
def main():
    """Agent-based supply chain scenario runner."""


@main.command()
@click.option("--scenario", "which", type=click.Choice(["replenish", "wholesale", "both"]),
              default="both", show_default=True, help="Scripted process(es) to run headless.")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Scenario file (packaged default when omitted).")
@click.option("--speed", type=float, default=10.0, show_default=True,
              help="Clock speed factor; 0 runs on the virtual clock (deterministic).")
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option("--headless", is_flag=True, help="Run scripted processes and exit.")
@click.option("--out", "out_dir", type=click.Path(), default="supplynet-out",
              show_default=True, help="Artifact directory for headless runs.")
@click.option("--figures/--no-figures", default=True, show_default=True,
              help="Render report figures (PNG) next to the report files.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8700, show_default=True)
@click.option("--portal", "portal_dir", type=click.Path(), default="frontend/dist",
              show_default=True, help="Built web portal to serve at / (if present).")
def run(which, config_path, speed, seed, headless, out_dir, figures, host, port,
        portal_dir):
    """Boot the agent network; headless runs the scripted scenario."""
    try:
        scenario = load_scenario(config_path)
    except ConfigError as exc:
        click.echo(f"config-error: {exc}", err=True)
        sys.exit(2)
    if seed is not None:
        scenario = scenario.with_seed(seed)
    clock = VirtualClock() if speed == 0 else ScaledClock(speed)
    sink = EventSink()
    writer = ArtifactWriter(Path(out_dir), figures=figures) if headless else None

    try:
        handles = build_system(
            scenario, clock=clock, sink=sink,
            before_spawn=(writer.attach if writer else None),
        )
    except ConfigError as exc:
        click.echo(f"config-error: {exc}", err=True)
        sys.exit(2)

    if headless:
        started = time.monotonic()
        try:
            code, rows = run_headless(handles, which, writer, virtual=(speed == 0))
        except ConfigError as exc:
            click.echo(f"config-error: {exc}", err=True)
            sys.exit(2)
        elapsed = time.monotonic() - started
        for scenario_name, process, outcome in rows:
            click.echo(f"{scenario_name}: process={process} outcome={outcome}")
        click.echo(f"artifacts: {out_dir} ({elapsed:.1f}s wall)")
        sys.exit(code)

    # Portal mode: serve the gateway until interrupted.
    from .gateway import FrameBroadcaster, GatewayRuntime, create_app
    import uvicorn

    system = handles.system
    tracker = ProcessTracker(system)
    broadcaster = FrameBroadcaster(sink)
    client = SystemClient(system)
    system.start()
    runtime = GatewayRuntime(
        handles=handles, client=client, tracker=tracker, broadcaster=broadcaster
    )
    app = create_app(runtime, portal_dir=Path(portal_dir))
    click.echo(f"gateway listening on http://{host}:{port} (speed x{speed})")
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    finally:
        system.stop()


@main.command()
@click.option("--trace", "trace_path", type=click.Path(exists=True), required=True,
              help="Journey trace CSV to profile.")
@click.option("--out", "out_dir", type=click.Path(), default="supplynet-out/reports",
              show_default=True)
@click.option("--tracking", default=None, help="Tracking label for the artifacts.")
@click.option("--figures/--no-figures", default=True, show_default=True)
def report(trace_path, out_dir, tracking, figures):
    """Profile a recorded journey into report artifacts (stats + figures)."""
    trace = load_trace(trace_path)
    summary = generate_report(trace)
    label = tracking or Path(trace_path).stem
    series = TelemetrySeries(label)
    for p in trace.points:
        series.add_sensor({"t_ms": p.t_ms, "temperature": p.temperature_c,
                           "humidity": p.humidity_pct, "light": p.light_lux})
        series.add_location({"lat": p.lat, "lon": p.lon})
    written = write_report_files(
        Path(out_dir), label, summary.to_content(), series, figures
    )
    for path in written:
        click.echo(str(path))


@main.command("synth-trace")
@click.option("--origin", nargs=2, type=float, default=(52.2432, 0.0847), show_default=True)
@click.option("--destination", nargs=2, type=float, default=(52.2053, 0.1218), show_default=True)
@click.option("--points", type=int, default=60, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def synth_trace(origin, destination, points, seed, out_path):
    """Generate a synthetic journey trace CSV (5s cadence, seeded noise)."""
    trace = synthesize_trace(tuple(origin), tuple(destination), points, seed=seed)
    Path(out_path).write_text(trace_to_csv(trace))
    click.echo(f"{out_path}: {points} points, {trace.path_km():.2f} km")


if __name__ == "__main__":
    main()
