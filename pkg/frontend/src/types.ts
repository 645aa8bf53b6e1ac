// Gateway wire types: push frames and REST payloads.

export type FrameKind =
  | "notification"
  | "chat"
  | "location"
  | "sensor"
  | "report"
  | "status";

export interface PushFrame {
  kind: FrameKind;
  payload: Record<string, any>;
  seq: number;
}

export interface ChatPayload {
  sender: string;
  recipient: string;
  performative: string;
  body: unknown;
  conversation: string;
  protocol: string;
  ontology: string;
  timestamp: number;
}

export interface LocationPayload {
  tracking_number: string;
  t_ms: number;
  lat: number;
  lon: number;
  elevation_m: number;
}

export interface SensorPayload {
  tracking_number: string;
  t_ms: number;
  temperature: number;
  humidity: number;
  light: number;
}

export interface OrderDefaults {
  scenario: string;
  product: string;
  quantity: number;
  unit_price: number;
  wholesale_quantity: number;
  min_performance: number;
  radius_km: number;
}

export interface OrderDraft {
  scenario: "replenish" | "wholesale";
  product: string;
  quantity: number;
  unit_price: number;
  min_performance: number;
  radius_km: number;
}

export interface AgentEntry {
  agent: string;
  live: boolean;
  open_dialogues?: number;
  inventory?: Record<string, unknown>;
  unreachable?: boolean;
}

export const SENSOR_CHANNELS = ["temperature", "humidity", "light"] as const;
export type SensorChannel = (typeof SENSOR_CHANNELS)[number];
