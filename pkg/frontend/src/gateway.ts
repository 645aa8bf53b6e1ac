// REST client and push socket for the gateway. The portal is a pure client:
// everything it shows comes from these two surfaces.

import type { AgentEntry, OrderDefaults, OrderDraft, PushFrame } from "./types";

export class GatewayError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

async function asJson(response: Response): Promise<any> {
  if (!response.ok) {
    let detail = `${response.status}`;
    try {
      const body = await response.json();
      detail = body.detail ?? detail;
    } catch {
      // keep the status text
    }
    throw new GatewayError(detail, response.status);
  }
  return response.json();
}

export class GatewayClient {
  constructor(readonly base: string = "") {}

  defaults(): Promise<OrderDefaults> {
    return fetch(`${this.base}/defaults`).then(asJson);
  }

  placeOrder(order: OrderDraft): Promise<{ process: string; scenario: string }> {
    return fetch(`${this.base}/orders`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(order),
    }).then(asJson);
  }

  agents(): Promise<{ agents: AgentEntry[] }> {
    return fetch(`${this.base}/agents`).then(asJson);
  }

  delivery(tracking: string): Promise<Record<string, any>> {
    return fetch(`${this.base}/deliveries/${encodeURIComponent(tracking)}`).then(asJson);
  }

  report(tracking: string): Promise<{ tracking_number: string; report: any }> {
    return fetch(`${this.base}/reports/${encodeURIComponent(tracking)}`).then(asJson);
  }
}

export interface SocketHooks {
  onFrame: (frame: PushFrame) => void;
  onOpen: () => void;
  onDown: () => void;
}

/** Push connection with automatic reconnect; one per portal session. */
export class PortalSocket {
  private socket: WebSocket | null = null;
  private closed = false;
  private retryMs = 500;

  constructor(
    private url: string,
    private hooks: SocketHooks,
    private makeSocket: (url: string) => WebSocket = (u) => new WebSocket(u),
  ) {}

  connect(): void {
    if (this.closed) return;
    const socket = this.makeSocket(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.retryMs = 500;
      this.hooks.onOpen();
    };
    socket.onmessage = (event: MessageEvent) => {
      try {
        this.hooks.onFrame(JSON.parse(String(event.data)));
      } catch {
        // a malformed frame is dropped; sequencing will force a resync
      }
    };
    socket.onclose = () => {
      this.socket = null;
      if (this.closed) return;
      this.hooks.onDown();
      setTimeout(() => this.connect(), this.retryMs);
      this.retryMs = Math.min(this.retryMs * 2, 10_000);
    };
    socket.onerror = () => {
      socket.close();
    };
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
  }
}

export function websocketUrl(base: string, kinds: string[]): string {
  const origin = base || (typeof window !== "undefined" ? window.location.origin : "");
  const ws = origin.replace(/^http/, "ws");
  return `${ws}/ws?kinds=${kinds.join(",")}`;
}
