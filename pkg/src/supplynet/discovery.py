"""Service discovery and matchmaking.

Agents register service descriptions (kind plus attribute map) and search
with conjunctive attribute constraints.  The registry serialises all
operations through one lock, so observable behaviour is linearizable; an
optional JSON snapshot gives restart convenience at desk scale.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from typing import Any

__all__ = [
    "ServiceDescription",
    "Constraint",
    "Query",
    "Registry",
    "RegistryError",
    "haversine_km",
    "EARTH_RADIUS_KM",
]

EARTH_RADIUS_KM = 6371.0


class RegistryError(ValueError):
    """Invalid description, malformed query, or unknown registration id."""


def haversine_km(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Great-circle distance between two (lat, lon) points in kilometres."""
    lat1, lon1 = math.radians(a[0]), math.radians(a[1])
    lat2, lon2 = math.radians(b[0]), math.radians(b[1])
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(dlat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def _valid_location(value: Any) -> bool:
    return (
        isinstance(value, (list, tuple))
        and len(value) == 2
        and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in value)
        and -90.0 <= value[0] <= 90.0
        and -180.0 <= value[1] <= 180.0
    )


@dataclass(frozen=True)
class ServiceDescription:
    """What one agent offers: a kind plus searchable attributes.

    Well-known attributes: ``product`` (str), ``unit_price`` (currency/kg),
    ``location`` ((lat, lon) degrees), ``performance`` (rating in [0, 1]).
    """

    owner: str
    kind: str
    attributes: dict[str, Any] = field(default_factory=dict)
    id: str = ""

    def validate(self) -> None:
        if not self.owner or not self.kind:
            raise RegistryError("owner and kind must be non-empty")
        attrs = self.attributes
        if "location" in attrs and not _valid_location(attrs["location"]):
            raise RegistryError(f"invalid-description: location {attrs['location']!r}")
        perf = attrs.get("performance")
        if perf is not None and not (
            isinstance(perf, (int, float)) and 0.0 <= perf <= 1.0
        ):
            raise RegistryError(f"invalid-description: performance {perf!r}")
        price = attrs.get("unit_price")
        if price is not None and not (
            isinstance(price, (int, float)) and price >= 0
        ):
            raise RegistryError(f"invalid-description: unit_price {price!r}")


@dataclass(frozen=True)
class Constraint:
    """One conjunct: equals / in-range(lo, hi) / within-km(point, radius)."""

    attribute: str
    operator: str
    operand: Any

    def matches(self, description: ServiceDescription) -> bool:
        value = description.attributes.get(self.attribute)
        if value is None:
            return False
        if self.operator == "equals":
            return value == self.operand
        if self.operator == "in-range":
            lo, hi = self.operand
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                return False
            return lo <= value <= hi
        if self.operator == "within-km":
            point, radius = self.operand
            if not _valid_location(value):
                return False
            return haversine_km(tuple(point), tuple(value)) <= radius
        raise RegistryError(f"malformed-query: unknown operator {self.operator!r}")

    def validate(self) -> None:
        if self.operator not in ("equals", "in-range", "within-km"):
            raise RegistryError(f"malformed-query: unknown operator {self.operator!r}")
        if self.operator == "in-range":
            try:
                lo, hi = self.operand
            except (TypeError, ValueError):
                raise RegistryError("malformed-query: in-range needs (lo, hi)") from None
            if lo > hi:
                raise RegistryError("malformed-query: in-range lo > hi")
        if self.operator == "within-km":
            try:
                point, radius = self.operand
            except (TypeError, ValueError):
                raise RegistryError(
                    "malformed-query: within-km needs (point, radius)"
                ) from None
            if not _valid_location(point):
                raise RegistryError(f"malformed-query: bad point {point!r}")
            if not (isinstance(radius, (int, float)) and radius > 0):
                raise RegistryError(f"malformed-query: radius must be > 0, got {radius!r}")

    def to_wire(self) -> dict[str, Any]:
        operand = self.operand
        if isinstance(operand, tuple):
            operand = [list(v) if isinstance(v, tuple) else v for v in operand]
        return {"attribute": self.attribute, "operator": self.operator, "operand": operand}

    @classmethod
    def from_wire(cls, obj: dict[str, Any]) -> "Constraint":
        operand = obj.get("operand")
        if isinstance(operand, list):
            operand = tuple(
                tuple(v) if isinstance(v, list) else v for v in operand
            )
        return cls(obj["attribute"], obj["operator"], operand)


@dataclass(frozen=True)
class Query:
    """Conjunctive search: kind match plus every constraint satisfied."""

    kind: str
    constraints: tuple[Constraint, ...] = ()

    def validate(self) -> None:
        if not self.kind:
            raise RegistryError("malformed-query: kind must be non-empty")
        for c in self.constraints:
            c.validate()

    def matches(self, description: ServiceDescription) -> bool:
        if description.kind != self.kind:
            return False
        return all(c.matches(description) for c in self.constraints)

    def to_wire(self) -> dict[str, Any]:
        return {"kind": self.kind, "constraints": [c.to_wire() for c in self.constraints]}

    @classmethod
    def from_wire(cls, obj: dict[str, Any]) -> "Query":
        return cls(
            obj["kind"],
            tuple(Constraint.from_wire(c) for c in obj.get("constraints", [])),
        )


class Registry:
    """In-memory, linearizable service registry.

    Re-registration by the same owner+kind replaces the prior entry; search
    results are ordered by owner name for determinism.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._entries: dict[str, ServiceDescription] = {}
        self._by_owner_kind: dict[tuple[str, str], str] = {}
        self._counter = 0

    def register(self, description: ServiceDescription) -> str:
        description.validate()
        with self._lock:
            key = (description.owner, description.kind)
            old = self._by_owner_kind.pop(key, None)
            if old is not None:
                self._entries.pop(old, None)
            self._counter += 1
            reg_id = f"r{self._counter}"
            attrs = dict(description.attributes)
            if isinstance(attrs.get("location"), list):
                attrs["location"] = tuple(attrs["location"])
            self._entries[reg_id] = ServiceDescription(
                owner=description.owner,
                kind=description.kind,
                attributes=attrs,
                id=reg_id,
            )
            self._by_owner_kind[key] = reg_id
            return reg_id

    def unregister(self, reg_id: str) -> None:
        with self._lock:
            entry = self._entries.pop(reg_id, None)
            if entry is None:
                raise RegistryError(f"unknown-id: {reg_id!r}")
            self._by_owner_kind.pop((entry.owner, entry.kind), None)

    def search(self, query: Query) -> list[ServiceDescription]:
        query.validate()
        with self._lock:
            hits = [d for d in self._entries.values() if query.matches(d)]
        return sorted(hits, key=lambda d: d.owner)

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    # --- snapshot persistence ---

    def snapshot(self) -> str:
        with self._lock:
            entries = [
                {"id": d.id, "owner": d.owner, "kind": d.kind, "attributes": d.attributes}
                for d in self._entries.values()
            ]
            return json.dumps(
                {"counter": self._counter, "entries": entries},
                sort_keys=True,
                indent=2,
            )

    def save_snapshot(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.snapshot())

    @classmethod
    def load_snapshot(cls, path) -> "Registry":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_snapshot(fh.read())

    @classmethod
    def from_snapshot(cls, text: str) -> "Registry":
        data = json.loads(text)
        registry = cls()
        registry._counter = int(data.get("counter", 0))
        for item in data.get("entries", []):
            attrs = {
                k: tuple(v) if isinstance(v, list) and k == "location" else v
                for k, v in item["attributes"].items()
            }
            d = ServiceDescription(
                owner=item["owner"], kind=item["kind"], attributes=attrs, id=item["id"]
            )
            registry._entries[item["id"]] = d
            registry._by_owner_kind[(d.owner, d.kind)] = item["id"]
        return registry
