"""Shared test helpers: generators, oracles, and scenario builders.

Oracles here are deliberately independent of the implementation paths they
check: distances use the spherical law of cosines instead of the haversine
formula, report statistics use a naive two-pass computation instead of the
streaming one, and matchmaking uses a plain linear scan.
"""

from __future__ import annotations

import math
import random
import string
from pathlib import Path

from supplynet.messaging import (
    CONTRACT_NET,
    DISCOVERY,
    PROTOCOL_PERFORMATIVES,
    REQUEST_RESPONSE,
    AgentAddress,
    Envelope,
    make_envelope,
)
from supplynet.telemetry import Trace, TracePoint, trace_to_csv

PROTOCOLS = (CONTRACT_NET, REQUEST_RESPONSE, DISCOVERY)


# --- random envelopes ---------------------------------------------------------

_NAME_CHARS = string.ascii_lowercase + string.digits


def random_name(rng: random.Random) -> str:
    return "".join(rng.choice(_NAME_CHARS) for _ in range(rng.randint(1, 12)))


def random_content(rng: random.Random, depth: int = 0):
    roll = rng.random()
    if depth >= 3 or roll < 0.35:
        return rng.choice(
            [
                rng.randint(-10**9, 10**9),
                rng.uniform(-1e6, 1e6),
                random_name(rng),
                "ünïcode-" + random_name(rng),
                True,
                False,
                None,
            ]
        )
    if roll < 0.6:
        return [random_content(rng, depth + 1) for _ in range(rng.randint(0, 4))]
    return {
        random_name(rng): random_content(rng, depth + 1)
        for _ in range(rng.randint(0, 4))
    }


def random_envelope(rng: random.Random) -> Envelope:
    protocol = rng.choice(PROTOCOLS)
    performative = rng.choice(sorted(PROTOCOL_PERFORMATIVES[protocol], key=str))
    reply_with = random_name(rng) if rng.random() < 0.3 else None
    in_reply_to = random_name(rng) if rng.random() < 0.3 else None
    return make_envelope(
        sender=AgentAddress(random_name(rng)),
        receiver=AgentAddress(random_name(rng)),
        protocol=protocol,
        ontology=rng.choice(["meat-trade", "logistics", "admin", random_name(rng)]),
        conversation=random_name(rng),
        performative=performative,
        content=random_content(rng),
        timestamp=rng.randint(0, 2**45),
        reply_with=reply_with,
        in_reply_to=in_reply_to,
    )


# --- independent geo oracle ---------------------------------------------------


def distance_law_of_cosines_km(a, b) -> float:
    """Great-circle distance via the spherical law of cosines (oracle path)."""
    lat1, lon1 = math.radians(a[0]), math.radians(a[1])
    lat2, lon2 = math.radians(b[0]), math.radians(b[1])
    c = (
        math.sin(lat1) * math.sin(lat2)
        + math.cos(lat1) * math.cos(lat2) * math.cos(lon2 - lon1)
    )
    return 6371.0 * math.acos(max(-1.0, min(1.0, c)))


# --- naive report oracle --------------------------------------------------------


def naive_channel_stats(values):
    """Two-pass mean/stddev plus min/max, independent of the streaming path."""
    n = len(values)
    mean = sum(values) / n
    variance = sum((v - mean) ** 2 for v in values) / n
    return {
        "min": min(values),
        "max": max(values),
        "mean": mean,
        "stddev": math.sqrt(variance),
        "count": n,
    }


def naive_violations(values, bound):
    if bound is None:
        return 0
    lo, hi = bound
    return sum(1 for v in values if v < lo or v > hi)


def rel_close(a: float, b: float, tol: float = 1e-9) -> bool:
    return math.isclose(a, b, rel_tol=tol, abs_tol=1e-12)


def random_trace(rng: random.Random, n_points: int) -> Trace:
    """Random but valid trace, with occasional threshold violations."""
    start = rng.randint(1_500_000_000_000, 1_700_000_000_000)
    lat = rng.uniform(-80, 80)
    lon = rng.uniform(-170, 170)
    points = []
    t = start
    for _ in range(n_points):
        t += rng.randint(1_000, 9_000)
        lat += rng.uniform(-0.001, 0.001)
        lon += rng.uniform(-0.001, 0.001)
        points.append(
            TracePoint(
                t_ms=t,
                lat=max(-90.0, min(90.0, lat)),
                lon=max(-180.0, min(180.0, lon)),
                elevation_m=rng.uniform(-10, 500),
                temperature_c=rng.uniform(-5, 15),
                humidity_pct=rng.uniform(0, 100),
                light_lux=rng.uniform(0, 800),
            )
        )
    return Trace(tuple(points))


# --- scenario builders ----------------------------------------------------------


def write_scenario(
    tmp_path: Path,
    trace_points: int = 12,
    replenish_trace_points: int | None = None,
    wholesaler_stock: float = 0.0,
    reorder_point: float = 20.0,
    reorder_quantity: float = 100.0,
    include_supplier: bool = True,
    include_3pls: bool = True,
    retailers: int = 2,
    seed: int = 42,
    trace_temperature: float = 4.0,
) -> Path:
    """Small scenario file with short synthetic traces for fast virtual runs.

    A longer replenishment trace (``replenish_trace_points``) keeps the
    supplier delivery in flight while wholesale orders complete, which the
    trigger-suppression tests rely on.  ``trace_temperature`` near the 8 °C
    alert bound produces threshold violations during replay.
    """
    from supplynet.telemetry import synthesize_trace

    traces = tmp_path / "traces"
    traces.mkdir(exist_ok=True)
    t1 = synthesize_trace((52.2432, 0.0847), (52.2053, 0.1218),
                          replenish_trace_points or trace_points, seed=7,
                          base_temperature=trace_temperature)
    t2 = synthesize_trace((52.2053, 0.1218), (52.1951, 0.1313), trace_points, seed=8,
                          base_temperature=trace_temperature)
    (traces / "replenish.csv").write_text(trace_to_csv(t1))
    (traces / "wholesale.csv").write_text(trace_to_csv(t2))

    retailer_blocks = "\n".join(
        f"""
  - name: retailer-{i}
    type: retailer
    offered_price: 10.0
    max_price: 12.0
    location: [52.1951, 0.1313]
    performance: 0.8"""
        for i in range(1, retailers + 1)
    )
    supplier_block = """
  - name: supplier
    type: supplier
    unit_price: 6.0
    initial_stock: 10000
    location: [52.2432, 0.0847]
    performance: 0.9""" if include_supplier else ""
    threepl_block = """
  - name: hermes
    type: 3pl
    carrier_name: Hermes
    location: [52.2180, 0.1380]
  - name: dpd
    type: 3pl
    carrier_name: DPD
    location: [52.1990, 0.1260]""" if include_3pls else ""
    routes = "\n".join(
        [f"      supplier->wholesaler: traces/replenish.csv"]
        + [f"      wholesaler->retailer-{i}: traces/wholesale.csv" for i in range(1, retailers + 1)]
    )
    text = f"""
name: test-scenario
seed: {seed}
product: beef
defaults:
  quantity: 100
  unit_price: 10.0
  wholesale_quantity: 30
agents:
  - name: logistics
    type: logistics
    location: [52.2270, 0.1440]
    tiers:
      - {{option_id: standard, rate: 5.0, eta_hours: 48}}
      - {{option_id: express, rate: 9.0, eta_hours: 24}}
    routes:
{routes}
{threepl_block}
{supplier_block}
  - name: wholesaler
    type: wholesaler
    expected_price: 8.0
    max_price: 10.0
    reorder_point: {reorder_point}
    reorder_quantity: {reorder_quantity}
    initial_stock: {wholesaler_stock}
    location: [52.2053, 0.1218]
{retailer_blocks}
  - name: admin
    type: admin
"""
    path = tmp_path / "scenario.yaml"
    path.write_text(text)
    return path


def boot_virtual(scenario_path: Path | None = None, **kwargs):
    """Build a virtual-clock system from a scenario and settle registrations."""
    from supplynet.clock import VirtualClock
    from supplynet.client import ProcessTracker, SystemClient
    from supplynet.scenario import build_system, load_scenario

    scenario = load_scenario(scenario_path)
    handles = build_system(scenario, clock=VirtualClock(), **kwargs)
    tracker = ProcessTracker(handles.system)
    client = SystemClient(handles.system)
    handles.system.step_until_idle()
    return handles, tracker, client


def place_and_run(handles, tracker, client, order, max_ms=24 * 3_600_000):
    """Inject one order on the virtual clock and run it to its outcome."""
    holder = {}
    wholesaler = (handles.wholesaler_names() or [""])[0]
    retailer = (handles.retailer_names() or [""])[0]
    client.place_order(order, wholesaler, retailer,
                       lambda p, e: holder.update(process=p, error=e))
    handles.system.step_until_idle()
    if holder.get("error"):
        return None, holder["error"]
    process = holder["process"]
    handles.system.run_virtual(
        until=lambda: tracker.outcome(process) is not None, max_ms=max_ms
    )
    return process, tracker.outcome(process)
