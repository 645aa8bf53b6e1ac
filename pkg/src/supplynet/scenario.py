"""Scenario files: the full agent network described as editable YAML.

A scenario lists every agent with its strategy parameters, initial
inventory, trace assignments, and seeds, plus the ordering-panel defaults.
Loading validates everything up front — including that every referenced
trace file exists and parses — so a bad configuration fails before any
agent starts.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from .clock import Clock
from .events import EventSink
from .orders import DeliveryOption
from .runtime import System
from .telemetry import TraceError, load_trace
from .agents import (
    build_admin,
    build_discovery_agent,
    build_fulfilment_agent,
    build_logistics_agent,
    build_retailer_agent,
    build_supplier_agent,
    build_wholesaler_agent,
)
from .agents.admin import AdminConfig
from .agents.fulfilment import FulfilmentConfig
from .agents.logistics import LogisticsConfig
from .agents.retailer import RetailerConfig
from .agents.supplier import SupplierConfig
from .agents.wholesaler import WholesalerConfig

__all__ = [
    "ConfigError",
    "OrderDefaults",
    "Scenario",
    "ScenarioHandles",
    "load_scenario",
    "default_scenario_text",
    "build_system",
]

AGENT_TYPES = ("supplier", "wholesaler", "retailer", "logistics", "3pl", "admin")


class ConfigError(ValueError):
    pass


@dataclass
class OrderDefaults:
    scenario: str = "replenish"
    quantity: float = 100.0
    unit_price: float = 10.0
    wholesale_quantity: float = 30.0
    min_performance: float = 0.5
    radius_km: float = 100.0


@dataclass
class Timing:
    cfp_deadline_ms: int = 10_000
    request_timeout_ms: int = 5_000
    status_timeout_ms: int = 3_000
    poll_interval_ms: int = 30_000


@dataclass
class Scenario:
    name: str
    seed: int
    product: str
    discovery_name: str
    agents: list[dict[str, Any]]
    defaults: OrderDefaults
    timing: Timing
    base_dir: Path

    def agent_names(self) -> list[str]:
        return [a["name"] for a in self.agents]

    def names_of(self, agent_type: str) -> list[str]:
        return [a["name"] for a in self.agents if a["type"] == agent_type]

    def agent_seed(self, name: str, explicit: int | None) -> int:
        if explicit is not None:
            return explicit
        return (self.seed * 1_000_003 + zlib.crc32(name.encode())) % (2**31)

    def with_seed(self, seed: int) -> "Scenario":
        return Scenario(
            name=self.name, seed=seed, product=self.product,
            discovery_name=self.discovery_name, agents=self.agents,
            defaults=self.defaults, timing=self.timing, base_dir=self.base_dir,
        )


def default_scenario_text() -> str:
    return resources.files("supplynet.data").joinpath("scenario_default.yaml").read_text()


def _default_base_dir() -> Path:
    return Path(__file__).resolve().parent / "data"


def load_scenario(path: str | Path | None = None) -> Scenario:
    """Load and validate a scenario file (packaged default when ``path`` is None)."""
    if path is None:
        text = default_scenario_text()
        base_dir = _default_base_dir()
        source = "<default>"
    else:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"scenario file not found: {path}")
        text = path.read_text()
        base_dir = path.parent
        source = str(path)
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: invalid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: scenario must be a mapping")

    agents = data.get("agents")
    if not isinstance(agents, list) or not agents:
        raise ConfigError(f"{source}: scenario needs a non-empty agents list")
    seen = set()
    for spec in agents:
        if not isinstance(spec, dict) or "name" not in spec or "type" not in spec:
            raise ConfigError(f"{source}: each agent needs a name and a type")
        if spec["type"] not in AGENT_TYPES:
            raise ConfigError(f"{source}: unknown agent type {spec['type']!r}")
        if spec["name"] in seen:
            raise ConfigError(f"{source}: duplicate agent name {spec['name']!r}")
        seen.add(spec["name"])

    scenario = Scenario(
        name=str(data.get("name", "scenario")),
        seed=int(data.get("seed", 0)),
        product=str(data.get("product", "beef")),
        discovery_name=str(data.get("discovery", {}).get("name", "oef")),
        agents=agents,
        defaults=OrderDefaults(**(data.get("defaults") or {})),
        timing=Timing(**(data.get("timing") or {})),
        base_dir=base_dir,
    )
    _validate_traces(scenario)
    return scenario


def _validate_traces(scenario: Scenario) -> None:
    """Every route trace must exist and parse before any agent starts."""
    for spec in scenario.agents:
        if spec["type"] != "logistics":
            continue
        routes = spec.get("routes") or {}
        default = spec.get("default_trace")
        paths = list(routes.values()) + ([default] if default else [])
        for rel in paths:
            full = scenario.base_dir / rel
            if not full.exists():
                raise ConfigError(f"trace file not found: {full}")
            try:
                load_trace(full)
            except TraceError as exc:
                raise ConfigError(f"trace file {full} invalid: {exc}") from exc


@dataclass
class ScenarioHandles:
    scenario: Scenario
    system: System
    registry: Any
    skills: dict[str, Any] = field(default_factory=dict)

    def wholesaler_names(self) -> list[str]:
        return self.scenario.names_of("wholesaler")

    def retailer_names(self) -> list[str]:
        return self.scenario.names_of("retailer")

    def logistics_names(self) -> list[str]:
        return self.scenario.names_of("logistics")

    def admin_name(self) -> str | None:
        names = self.scenario.names_of("admin")
        return names[0] if names else None


def _location(value: Any, fallback: tuple[float, float]) -> tuple[float, float]:
    if value is None:
        return fallback
    return (float(value[0]), float(value[1]))


def build_system(
    scenario: Scenario,
    clock: Clock | None = None,
    sink: EventSink | None = None,
    before_spawn: Any | None = None,
) -> ScenarioHandles:
    """Boot discovery plus every scenario agent, in file order.

    ``before_spawn(system)`` runs after the system exists but before any
    agent starts, so log writers can tap the router from the first message.
    """
    system = System(clock=clock, sink=sink)
    if before_spawn is not None:
        before_spawn(system)
    _, registry = build_discovery_agent(
        system, scenario.discovery_name,
        seed=scenario.agent_seed(scenario.discovery_name, None),
    )
    handles = ScenarioHandles(scenario=scenario, system=system, registry=registry)
    timing = scenario.timing
    oef = scenario.discovery_name

    for spec in scenario.agents:
        name = spec["name"]
        seed = scenario.agent_seed(name, spec.get("seed"))
        kind = spec["type"]
        if kind == "supplier":
            config = SupplierConfig(
                name=name,
                product=spec.get("product", scenario.product),
                unit_price=float(spec.get("unit_price", 6.0)),
                expected_price=float(spec.get("expected_price", spec.get("unit_price", 6.0))),
                location=_location(spec.get("location"), (52.2432, 0.0847)),
                performance=float(spec.get("performance", 0.9)),
                initial_stock=float(spec.get("initial_stock", 10_000.0)),
                logistics=spec.get("logistics", "logistics"),
                oef=oef,
                seed=seed,
                request_timeout_ms=timing.request_timeout_ms,
            )
            _, skill = build_supplier_agent(system, config)
        elif kind == "wholesaler":
            config = WholesalerConfig(
                name=name,
                product=spec.get("product", scenario.product),
                expected_price=float(spec.get("expected_price", 8.0)),
                max_price=float(spec.get("max_price", 10.0)),
                reorder_point=float(spec.get("reorder_point", 20.0)),
                reorder_quantity=float(spec.get("reorder_quantity", 100.0)),
                initial_stock=float(spec.get("initial_stock", 0.0)),
                location=_location(spec.get("location"), (52.2053, 0.1218)),
                performance=float(spec.get("performance", 0.85)),
                min_supplier_performance=float(
                    spec.get("min_supplier_performance", scenario.defaults.min_performance)
                ),
                supplier_radius_km=float(
                    spec.get("supplier_radius_km", scenario.defaults.radius_km)
                ),
                logistics=spec.get("logistics", "logistics"),
                oef=oef,
                seed=seed,
                cfp_deadline_ms=timing.cfp_deadline_ms,
                request_timeout_ms=timing.request_timeout_ms,
            )
            _, skill = build_wholesaler_agent(system, config)
        elif kind == "retailer":
            config = RetailerConfig(
                name=name,
                product=spec.get("product", scenario.product),
                offered_price=float(spec.get("offered_price", scenario.defaults.unit_price)),
                max_price=float(spec.get("max_price", 12.0)),
                location=_location(spec.get("location"), (52.1951, 0.1313)),
                performance=float(spec.get("performance", 0.8)),
                min_vendor_performance=float(
                    spec.get("min_vendor_performance", scenario.defaults.min_performance)
                ),
                vendor_radius_km=float(
                    spec.get("vendor_radius_km", scenario.defaults.radius_km)
                ),
                oef=oef,
                seed=seed,
                cfp_deadline_ms=timing.cfp_deadline_ms,
            )
            _, skill = build_retailer_agent(system, config)
        elif kind == "logistics":
            tiers = tuple(
                DeliveryOption(
                    option_id=t["option_id"],
                    carrier=name,
                    rate=float(t["rate"]),
                    eta_ms=int(t.get("eta_ms", int(t.get("eta_hours", 24)) * 3_600_000)),
                )
                for t in spec.get("tiers", [])
            )
            thresholds = dict(
                (channel, (float(bound[0]), float(bound[1])) if bound else None)
                for channel, bound in (spec.get("thresholds") or {}).items()
            )
            if not thresholds:
                from .telemetry import DEFAULT_THRESHOLDS

                thresholds = dict(DEFAULT_THRESHOLDS)
            config = LogisticsConfig(
                name=name,
                tiers=tiers,
                location=_location(spec.get("location"), (52.2270, 0.1440)),
                performance=float(spec.get("performance", 0.9)),
                oef=oef,
                seed=seed,
                request_timeout_ms=timing.request_timeout_ms,
                thresholds=thresholds,
                route_traces={
                    route: str(scenario.base_dir / rel)
                    for route, rel in (spec.get("routes") or {}).items()
                },
                default_trace=(
                    str(scenario.base_dir / spec["default_trace"])
                    if spec.get("default_trace")
                    else None
                ),
            )
            _, skill = build_logistics_agent(system, config)
        elif kind == "3pl":
            config = FulfilmentConfig(
                name=name,
                carrier_name=spec.get("carrier_name", ""),
                location=_location(spec.get("location"), (52.2000, 0.1100)),
                performance=float(spec.get("performance", 0.85)),
                oef=oef,
                seed=seed,
                request_timeout_ms=timing.request_timeout_ms,
            )
            _, skill = build_fulfilment_agent(system, config)
        elif kind == "admin":
            config = AdminConfig(
                name=name,
                peers=tuple(n for n in scenario.agent_names() if n != name),
                oef=oef,
                seed=seed,
                status_timeout_ms=timing.status_timeout_ms,
                poll_interval_ms=timing.poll_interval_ms,
            )
            _, skill = build_admin(system, config)
        else:  # pragma: no cover - validated at load
            raise ConfigError(f"unknown agent type {kind!r}")
        handles.skills[name] = skill
    return handles
