"""Cold-chain delivery telemetry: trace replay, monitoring, summary reports.

Deliveries are simulated by replaying pre-recorded journey traces (GPS plus
ambient conditions sampled every five seconds) as live telemetry.  A trace
is loaded from CSV, validated, replayed point by point on the owning
agent's timers, watched against per-channel alert thresholds, and profiled
into a summary report once the goods arrive.
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Any

from .discovery import haversine_km

__all__ = [
    "TracePoint",
    "Trace",
    "TraceError",
    "DeliveryJob",
    "SummaryReport",
    "ChannelStats",
    "Alert",
    "TrackingNumbers",
    "DEFAULT_THRESHOLDS",
    "CSV_COLUMNS",
    "NOMINAL_CADENCE_MS",
    "load_trace",
    "parse_trace_csv",
    "trace_to_csv",
    "synthesize_trace",
    "make_tracking_number",
    "point_alerts",
    "scan_alerts",
    "generate_report",
]

CSV_COLUMNS = (
    "timestamp_iso8601",
    "lat",
    "lon",
    "elevation_m",
    "temp_c",
    "humidity_pct",
    "light_lux",
)

NOMINAL_CADENCE_MS = 5_000

# Plausible meat-transport bounds; configuration only, light unbounded.
DEFAULT_THRESHOLDS: dict[str, tuple[float, float] | None] = {
    "temperature": (0.0, 8.0),
    "humidity": (30.0, 95.0),
    "light": None,
}

CHANNELS = ("temperature", "humidity", "light")


class TraceError(ValueError):
    """Trace file rejected: malformed-row, non-monotonic-timestamps, empty-trace."""


@dataclass(frozen=True)
class TracePoint:
    t_ms: int
    lat: float
    lon: float
    elevation_m: float
    temperature_c: float
    humidity_pct: float
    light_lux: float

    def channel(self, name: str) -> float:
        if name == "temperature":
            return self.temperature_c
        if name == "humidity":
            return self.humidity_pct
        if name == "light":
            return self.light_lux
        raise KeyError(name)

    def validate(self, row: int = 0) -> None:
        if not (-90.0 <= self.lat <= 90.0 and -180.0 <= self.lon <= 180.0):
            raise TraceError(f"malformed-row: row {row}: coordinates out of range")
        if not (0.0 <= self.humidity_pct <= 100.0):
            raise TraceError(f"malformed-row: row {row}: humidity {self.humidity_pct}")
        if self.light_lux < 0:
            raise TraceError(f"malformed-row: row {row}: negative light level")


@dataclass(frozen=True)
class Trace:
    points: tuple[TracePoint, ...]
    warnings: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.points)

    @property
    def duration_ms(self) -> int:
        return self.points[-1].t_ms - self.points[0].t_ms if self.points else 0

    def path_km(self) -> float:
        total = 0.0
        for a, b in zip(self.points, self.points[1:]):
            total += haversine_km((a.lat, a.lon), (b.lat, b.lon))
        return total


def _parse_timestamp(text: str, row: int) -> int:
    try:
        dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError:
        raise TraceError(f"malformed-row: row {row}: bad timestamp {text!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp() * 1000)


def parse_trace_csv(text: str) -> Trace:
    """Parse and validate the documented CSV layout.

    Cadence deviations (gap above three times the nominal five seconds) are
    collected as warnings, not errors.
    """
    reader = csv.reader(io.StringIO(text))
    rows = [r for r in reader if r and any(cell.strip() for cell in r)]
    if rows and rows[0] == list(CSV_COLUMNS):
        rows = rows[1:]
    points: list[TracePoint] = []
    warnings: list[str] = []
    for i, row in enumerate(rows, start=1):
        if len(row) != len(CSV_COLUMNS):
            raise TraceError(f"malformed-row: row {i}: expected {len(CSV_COLUMNS)} columns")
        try:
            point = TracePoint(
                t_ms=_parse_timestamp(row[0].strip(), i),
                lat=float(row[1]),
                lon=float(row[2]),
                elevation_m=float(row[3]),
                temperature_c=float(row[4]),
                humidity_pct=float(row[5]),
                light_lux=float(row[6]),
            )
        except TraceError:
            raise
        except ValueError as exc:
            raise TraceError(f"malformed-row: row {i}: {exc}") from None
        point.validate(i)
        if points:
            gap = point.t_ms - points[-1].t_ms
            if gap <= 0:
                raise TraceError(
                    f"non-monotonic-timestamps: row {i} does not advance time"
                )
            if gap > 3 * NOMINAL_CADENCE_MS:
                warnings.append(f"row {i}: cadence gap of {gap / 1000:.1f}s")
        points.append(point)
    if not points:
        raise TraceError("empty-trace")
    return Trace(tuple(points), tuple(warnings))


def load_trace(path) -> Trace:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_trace_csv(fh.read())


def trace_to_csv(trace: Trace) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for p in trace.points:
        stamp = datetime.fromtimestamp(p.t_ms / 1000, tz=timezone.utc)
        writer.writerow(
            [
                stamp.isoformat().replace("+00:00", "Z"),
                f"{p.lat:.6f}",
                f"{p.lon:.6f}",
                f"{p.elevation_m:.1f}",
                f"{p.temperature_c:.2f}",
                f"{p.humidity_pct:.2f}",
                f"{p.light_lux:.1f}",
            ]
        )
    return out.getvalue()


def synthesize_trace(
    origin: tuple[float, float],
    destination: tuple[float, float],
    n_points: int,
    seed: int,
    start_ms: int = 1_594_666_000_000,
    cadence_ms: int = NOMINAL_CADENCE_MS,
    base_temperature: float = 4.0,
    temperature_jitter: float = 0.6,
    base_humidity: float = 80.0,
    base_light: float = 5.0,
) -> Trace:
    """Deterministic synthetic journey between two points at fixed cadence.

    Stands in for recorded sensor rides; used for the bundled fixtures and
    randomized report tests.
    """
    if n_points < 1:
        raise ValueError("need at least one point")
    rng = random.Random(seed)
    points = []
    for i in range(n_points):
        frac = i / max(1, n_points - 1)
        wobble = 0.0005 * math.sin(frac * 6 * math.pi)
        lat = origin[0] + (destination[0] - origin[0]) * frac + wobble * rng.uniform(-1, 1)
        lon = origin[1] + (destination[1] - origin[1]) * frac + wobble * rng.uniform(-1, 1)
        points.append(
            TracePoint(
                t_ms=start_ms + i * cadence_ms,
                lat=round(lat, 6),
                lon=round(lon, 6),
                elevation_m=round(12.0 + 3.0 * math.sin(frac * 2 * math.pi) + rng.uniform(-0.5, 0.5), 1),
                temperature_c=round(base_temperature + rng.uniform(-temperature_jitter, temperature_jitter), 2),
                humidity_pct=round(min(100.0, max(0.0, base_humidity + rng.uniform(-4, 4))), 2),
                light_lux=round(max(0.0, base_light + rng.uniform(-3, 8)), 1),
            )
        )
    return Trace(tuple(points))


# --- tracking numbers --------------------------------------------------------


def make_tracking_number(carrier_name: str, now_ms: int) -> str:
    """Carrier name concatenated with decimal epoch milliseconds."""
    if not carrier_name.isalnum():
        raise ValueError(f"carrier name must be alphanumeric: {carrier_name!r}")
    return f"{carrier_name}{now_ms}"


class TrackingNumbers:
    """Issues unique tracking numbers even for same-millisecond calls."""

    def __init__(self):
        self._last: dict[str, int] = {}

    def issue(self, carrier_name: str, now_ms: int) -> str:
        ms = max(int(now_ms), self._last.get(carrier_name, -1) + 1)
        self._last[carrier_name] = ms
        return make_tracking_number(carrier_name, ms)


# --- delivery jobs -----------------------------------------------------------

_JOB_TRANSITIONS = {
    "booked": {"in-transit"},
    "in-transit": {"delivered", "failed"},
    "delivered": set(),
    "failed": set(),
}


@dataclass(frozen=True)
class DeliveryJob:
    tracking_number: str
    order_id: str
    origin: tuple[float, float]
    destination: tuple[float, float]
    carrier: str
    trace: Trace
    status: str = "booked"
    thresholds: dict[str, tuple[float, float] | None] = field(
        default_factory=lambda: dict(DEFAULT_THRESHOLDS)
    )

    def advance(self, status: str) -> "DeliveryJob":
        if status not in _JOB_TRANSITIONS.get(self.status, set()):
            raise ValueError(f"cannot move job from {self.status} to {status}")
        return replace(self, status=status)


# --- monitoring --------------------------------------------------------------


@dataclass(frozen=True)
class Alert:
    channel: str
    value: float
    bound: tuple[float, float]
    t_ms: int

    def to_content(self) -> dict[str, Any]:
        return {
            "channel": self.channel,
            "value": self.value,
            "bound": list(self.bound),
            "t_ms": self.t_ms,
        }


def point_alerts(
    point: TracePoint, thresholds: dict[str, tuple[float, float] | None]
) -> list[Alert]:
    alerts = []
    for channel in CHANNELS:
        bound = thresholds.get(channel)
        if bound is None:
            continue
        lo, hi = bound
        value = point.channel(channel)
        if value < lo or value > hi:
            alerts.append(Alert(channel, value, (lo, hi), point.t_ms))
    return alerts


def scan_alerts(
    trace: Trace, thresholds: dict[str, tuple[float, float] | None]
) -> list[Alert]:
    out: list[Alert] = []
    for p in trace.points:
        out.extend(point_alerts(p, thresholds))
    return out


# --- summary report ----------------------------------------------------------


@dataclass(frozen=True)
class ChannelStats:
    minimum: float
    maximum: float
    mean: float
    stddev: float
    count: int
    violations: int

    def to_content(self) -> dict[str, Any]:
        return {
            "min": self.minimum,
            "max": self.maximum,
            "mean": self.mean,
            "stddev": self.stddev,
            "count": self.count,
            "violations": self.violations,
        }


@dataclass(frozen=True)
class SummaryReport:
    channels: dict[str, ChannelStats]
    duration_ms: int
    path_km: float
    average_speed_kmh: float

    def to_content(self) -> dict[str, Any]:
        return {
            "channels": {k: v.to_content() for k, v in self.channels.items()},
            "journey": {
                "duration_ms": self.duration_ms,
                "path_km": self.path_km,
                "average_speed_kmh": self.average_speed_kmh,
            },
        }


def _welford(values: list[float]) -> tuple[float, float]:
    """Running mean and population standard deviation."""
    mean = 0.0
    m2 = 0.0
    for i, x in enumerate(values, start=1):
        delta = x - mean
        mean += delta / i
        m2 += delta * (x - mean)
    return mean, math.sqrt(m2 / len(values))


def generate_report(
    trace: Trace, thresholds: dict[str, tuple[float, float] | None] | None = None
) -> SummaryReport:
    """Profile a completed journey.

    Per sensor channel: min, max, mean, population stddev, sample count,
    threshold-violation count; for the journey: duration, haversine path
    length, average speed.
    """
    if not trace.points:
        raise TraceError("empty-trace")
    thresholds = thresholds if thresholds is not None else DEFAULT_THRESHOLDS
    violations = {c: 0 for c in CHANNELS}
    for alert in scan_alerts(trace, thresholds):
        violations[alert.channel] += 1
    channels = {}
    for channel in CHANNELS:
        values = [p.channel(channel) for p in trace.points]
        mean, stddev = _welford(values)
        channels[channel] = ChannelStats(
            minimum=min(values),
            maximum=max(values),
            mean=mean,
            stddev=stddev,
            count=len(values),
            violations=violations[channel],
        )
    duration = trace.duration_ms
    path = trace.path_km()
    speed = path / (duration / 3_600_000.0) if duration > 0 else 0.0
    return SummaryReport(
        channels=channels,
        duration_ms=duration,
        path_km=path,
        average_speed_kmh=speed,
    )
