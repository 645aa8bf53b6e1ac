"""Delivery report artifacts: structured document, delimited stats, figures.

Each completed delivery produces ``<tracking>.report`` (the summary as a
JSON tree), ``<tracking>.stats.csv`` (per-channel statistics, delimited),
and ``<tracking>.png`` (ambient-condition series plus the driven route,
rendered with matplotlib) in the run's reports directory.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["TelemetrySeries", "report_stats_csv", "render_report_figure", "write_report_files"]

_STAT_COLUMNS = ("channel", "min", "max", "mean", "stddev", "count", "violations")

_CHANNEL_STYLE = {
    "temperature": ("Temperature (°C)", "tab:blue"),
    "humidity": ("Humidity (%RH)", "tab:green"),
    "light": ("Light (lux)", "tab:orange"),
}


class TelemetrySeries:
    """Accumulates the location/sensor stream of one delivery."""

    def __init__(self, tracking_number: str):
        self.tracking_number = tracking_number
        self.t_ms: list[int] = []
        self.channels: dict[str, list[float]] = {
            "temperature": [], "humidity": [], "light": []
        }
        self.lats: list[float] = []
        self.lons: list[float] = []

    def add_sensor(self, payload: dict[str, Any]) -> None:
        self.t_ms.append(int(payload.get("t_ms", 0)))
        for channel in self.channels:
            self.channels[channel].append(float(payload.get(channel, 0.0)))

    def add_location(self, payload: dict[str, Any]) -> None:
        self.lats.append(float(payload.get("lat", 0.0)))
        self.lons.append(float(payload.get("lon", 0.0)))


def report_stats_csv(report: dict[str, Any]) -> str:
    """Per-channel statistics as delimited text."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(_STAT_COLUMNS)
    for channel, stats in sorted((report.get("channels") or {}).items()):
        writer.writerow(
            [channel] + [stats.get(c) for c in _STAT_COLUMNS[1:]]
        )
    journey = report.get("journey") or {}
    writer.writerow([])
    writer.writerow(["journey", "duration_ms", "path_km", "average_speed_kmh"])
    writer.writerow(
        ["", journey.get("duration_ms"), journey.get("path_km"),
         journey.get("average_speed_kmh")]
    )
    return out.getvalue()


def render_report_figure(path: Path, series: TelemetrySeries) -> None:
    """Three ambient-condition panels plus the route, saved as one PNG."""
    fig, axes = plt.subplots(2, 2, figsize=(10, 7))
    axes = axes.ravel()
    minutes = [
        (t - series.t_ms[0]) / 60_000.0 for t in series.t_ms
    ] if series.t_ms else []
    for ax, (channel, (label, color)) in zip(axes, _CHANNEL_STYLE.items()):
        values = series.channels[channel]
        ax.plot(minutes[: len(values)], values, color=color, linewidth=1.2)
        ax.set_xlabel("minutes into journey")
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
    route = axes[3]
    if series.lons:
        route.plot(series.lons, series.lats, color="tab:red", linewidth=1.4)
        route.plot(series.lons[0], series.lats[0], "o", color="black", markersize=5)
        route.plot(series.lons[-1], series.lats[-1], "s", color="black", markersize=5)
    route.set_xlabel("longitude")
    route.set_ylabel("latitude")
    route.set_title("route")
    route.grid(alpha=0.3)
    fig.suptitle(f"Delivery {series.tracking_number}")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def write_report_files(
    reports_dir: Path,
    tracking_number: str,
    report: dict[str, Any],
    series: TelemetrySeries | None = None,
    figures: bool = True,
) -> list[Path]:
    """Write the report document, the stats CSV, and (optionally) the figure."""
    reports_dir.mkdir(parents=True, exist_ok=True)
    written = []
    doc = reports_dir / f"{tracking_number}.report"
    doc.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    written.append(doc)
    stats = reports_dir / f"{tracking_number}.stats.csv"
    stats.write_text(report_stats_csv(report))
    written.append(stats)
    if figures and series is not None:
        figure = reports_dir / f"{tracking_number}.png"
        render_report_figure(figure, series)
        written.append(figure)
    return written
