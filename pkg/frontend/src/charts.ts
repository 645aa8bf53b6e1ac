// Streaming data panel: one rolling line chart per ambient channel for the
// whole current delivery (traces are short at desk scale; no decimation).

import type { ChartState } from "./panels";
import { SENSOR_CHANNELS, type SensorChannel } from "./types";

const COLORS: Record<SensorChannel, string> = {
  temperature: "#1565c0",
  humidity: "#2e7d32",
  light: "#ef6c00",
};

const LABELS: Record<SensorChannel, string> = {
  temperature: "temperature °C",
  humidity: "humidity %RH",
  light: "light lux",
};

export class ChartsView {
  private contexts = new Map<SensorChannel, CanvasRenderingContext2D | null>();
  private counters = new Map<SensorChannel, HTMLElement>();

  constructor(container: HTMLElement) {
    for (const channel of SENSOR_CHANNELS) {
      const block = document.createElement("div");
      block.className = "chart-block";
      const label = document.createElement("div");
      label.className = "chart-label";
      label.textContent = LABELS[channel];
      const counter = document.createElement("span");
      counter.className = "chart-count";
      counter.dataset.channel = channel;
      label.appendChild(counter);
      const canvas = document.createElement("canvas");
      canvas.width = 320;
      canvas.height = 90;
      canvas.dataset.channel = channel;
      block.append(label, canvas);
      container.appendChild(block);
      this.contexts.set(channel, canvas.getContext("2d"));
      this.counters.set(channel, counter);
    }
  }

  render(state: ChartState): void {
    for (const channel of SENSOR_CHANNELS) {
      const values = state[channel];
      const counter = this.counters.get(channel);
      if (counter) {
        counter.textContent = values.length ? ` (${values.length} samples)` : "";
        counter.dataset.points = String(values.length);
      }
      const ctx = this.contexts.get(channel);
      if (!ctx) continue;
      const { width, height } = ctx.canvas;
      ctx.clearRect(0, 0, width, height);
      if (values.length === 0) continue;
      const min = Math.min(...values);
      const max = Math.max(...values);
      const span = Math.max(max - min, 1e-6);
      ctx.strokeStyle = COLORS[channel];
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      values.forEach((v, i) => {
        const x = (i / Math.max(values.length - 1, 1)) * (width - 8) + 4;
        const y = height - 6 - ((v - min) / span) * (height - 12);
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      });
      ctx.stroke();
    }
  }
}
