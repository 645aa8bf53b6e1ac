// The portal's state: one model per panel, mutated only by applyFrame and
// the resync path. Views render from this model; they never own state.

import type {
  ChatPayload,
  LocationPayload,
  OrderDefaults,
  OrderDraft,
  PushFrame,
  SensorPayload,
} from "./types";
import { SENSOR_CHANNELS } from "./types";

export interface ChatEntry {
  seq: number;
  sender: string;
  recipient: string;
  performative: string;
  body: unknown;
  conversation: string;
}

export interface NotificationEntry {
  seq: number;
  event: string;
  payload: Record<string, any>;
}

export interface MapState {
  tracking: string | null;
  marker: { lat: number; lon: number } | null;
  path: Array<[number, number]>; // prefix of received location frames
  completedPaths: Array<Array<[number, number]>>; // earlier deliveries stay visible
  delivered: boolean;
}

export interface ChartState {
  tracking: string | null;
  t: number[];
  temperature: number[];
  humidity: number[];
  light: number[];
}

export function emptyOrder(defaults: OrderDefaults): OrderDraft {
  return {
    scenario: defaults.scenario === "wholesale" ? "wholesale" : "replenish",
    product: defaults.product,
    quantity: defaults.quantity,
    unit_price: defaults.unit_price,
    min_performance: defaults.min_performance,
    radius_km: defaults.radius_km,
  };
}

/** Inline form validation; returns the error text or null when launchable. */
export function validateOrder(order: OrderDraft): string | null {
  if (order.scenario !== "replenish" && order.scenario !== "wholesale") {
    return "unknown scenario";
  }
  if (!Number.isFinite(order.quantity) || order.quantity <= 0) {
    return "quantity must be a positive number";
  }
  if (!Number.isFinite(order.unit_price) || order.unit_price < 0) {
    return "unit price must be zero or more";
  }
  return null;
}

export class PanelModel {
  chat: ChatEntry[] = [];
  notifications: NotificationEntry[] = [];
  map: MapState = {
    tracking: null,
    marker: null,
    path: [],
    completedPaths: [],
    delivered: false,
  };
  charts: ChartState = { tracking: null, t: [], temperature: [], humidity: [], light: [] };
  reports = new Map<string, Record<string, any>>();
  droppedFrames = 0;

  /** Trackings with a report available; drives the Report control. */
  get reportReady(): string[] {
    return [...this.reports.keys()];
  }

  applyFrame(frame: PushFrame): void {
    switch (frame.kind) {
      case "chat":
        this.applyChat(frame.seq, frame.payload as ChatPayload);
        break;
      case "location":
        this.applyLocation(frame.payload as LocationPayload);
        break;
      case "sensor":
        this.applySensor(frame.payload as SensorPayload);
        break;
      case "notification":
        this.notifications.push({
          seq: frame.seq,
          event: String(frame.payload.event ?? ""),
          payload: frame.payload,
        });
        if (
          frame.payload.event === "delivery-status" &&
          frame.payload.status === "delivered" &&
          frame.payload.tracking_number === this.map.tracking
        ) {
          this.map.delivered = true;
        }
        break;
      case "report":
        this.reports.set(String(frame.payload.tracking_number), frame.payload.report ?? {});
        if (frame.payload.tracking_number === this.map.tracking) {
          this.map.delivered = true;
        }
        break;
      case "status":
        if (frame.payload.event === "frames-dropped") {
          this.droppedFrames += Number(frame.payload.count ?? 0);
        }
        break;
    }
  }

  private applyChat(seq: number, payload: ChatPayload): void {
    this.chat.push({
      seq,
      sender: payload.sender,
      recipient: payload.recipient,
      performative: payload.performative,
      body: payload.body,
      conversation: payload.conversation,
    });
  }

  private applyLocation(payload: LocationPayload): void {
    const tracking = payload.tracking_number;
    if (this.map.tracking !== tracking) {
      // a new delivery starts; keep the finished route on the map
      if (this.map.path.length > 0) {
        this.map.completedPaths.push(this.map.path);
      }
      this.map.tracking = tracking;
      this.map.path = [];
      this.map.delivered = false;
    }
    this.map.marker = { lat: payload.lat, lon: payload.lon };
    this.map.path = [...this.map.path, [payload.lat, payload.lon]];
  }

  private applySensor(payload: SensorPayload): void {
    if (this.charts.tracking !== payload.tracking_number) {
      this.charts = {
        tracking: payload.tracking_number,
        t: [],
        temperature: [],
        humidity: [],
        light: [],
      };
    }
    this.charts.t.push(payload.t_ms);
    for (const channel of SENSOR_CHANNELS) {
      this.charts[channel].push(payload[channel]);
    }
  }

  /** Snapshot-driven repair after a frame gap or reconnect. */
  resyncDelivery(tracking: string, status: string, hasReport: boolean): void {
    if (this.map.tracking === tracking && status === "delivered") {
      this.map.delivered = true;
    }
    if (hasReport && !this.reports.has(tracking)) {
      this.reports.set(tracking, {});
    }
  }
}
