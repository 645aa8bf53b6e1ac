// Logistics monitoring panel: vehicle marker, route polyline, tracking
// overlay. Drawn on a plain canvas over a light grid — the offline
// fallback is the default so tests and air-gapped demos need no tile
// service; a tile backdrop can be layered in by CSS when online.

import type { MapState } from "./panels";

const PADDING = 24;

export class MapView {
  private ctx: CanvasRenderingContext2D | null;
  private blink = false;

  constructor(
    private canvas: HTMLCanvasElement,
    private overlay: HTMLElement,
  ) {
    this.ctx = canvas.getContext("2d");
    setInterval(() => {
      this.blink = !this.blink;
    }, 600);
  }

  render(state: MapState): void {
    this.overlay.textContent = state.tracking
      ? `tracking: ${state.tracking}${state.delivered ? " — delivered" : ""}`
      : "no active delivery";
    this.overlay.dataset.tracking = state.tracking ?? "";
    const ctx = this.ctx;
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);
    this.drawGrid(ctx, width, height);

    const allPaths = [...state.completedPaths, state.path];
    const points = allPaths.flat();
    if (points.length === 0) return;
    const project = this.projector(points, width, height);

    ctx.lineWidth = 2;
    for (const [index, path] of allPaths.entries()) {
      if (path.length < 2) continue;
      ctx.strokeStyle = index === allPaths.length - 1 ? "#2b6cb0" : "#90a4ae";
      ctx.beginPath();
      path.forEach(([lat, lon], i) => {
        const [x, y] = project(lat, lon);
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      });
      ctx.stroke();
    }
    if (state.marker) {
      const [x, y] = project(state.marker.lat, state.marker.lon);
      ctx.fillStyle = state.delivered ? "#2e7d32" : "#c62828";
      ctx.beginPath();
      ctx.arc(x, y, this.blink && !state.delivered ? 7 : 5, 0, Math.PI * 2);
      ctx.fill();
    }
  }

  private projector(points: Array<[number, number]>, width: number, height: number) {
    let minLat = Infinity, maxLat = -Infinity, minLon = Infinity, maxLon = -Infinity;
    for (const [lat, lon] of points) {
      minLat = Math.min(minLat, lat);
      maxLat = Math.max(maxLat, lat);
      minLon = Math.min(minLon, lon);
      maxLon = Math.max(maxLon, lon);
    }
    const spanLat = Math.max(maxLat - minLat, 1e-4);
    const spanLon = Math.max(maxLon - minLon, 1e-4);
    return (lat: number, lon: number): [number, number] => [
      PADDING + ((lon - minLon) / spanLon) * (width - 2 * PADDING),
      height - PADDING - ((lat - minLat) / spanLat) * (height - 2 * PADDING),
    ];
  }

  private drawGrid(ctx: CanvasRenderingContext2D, width: number, height: number): void {
    ctx.strokeStyle = "#e3e8ee";
    ctx.lineWidth = 1;
    for (let x = 0; x < width; x += 40) {
      ctx.beginPath();
      ctx.moveTo(x, 0);
      ctx.lineTo(x, height);
      ctx.stroke();
    }
    for (let y = 0; y < height; y += 40) {
      ctx.beginPath();
      ctx.moveTo(0, y);
      ctx.lineTo(width, y);
      ctx.stroke();
    }
  }
}
