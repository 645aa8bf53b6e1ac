// Portal wiring: boot the four panels, subscribe to the push stream, and
// route each ordered frame into the model and out to the views. Closing
// the portal never changes a scenario outcome — this is a pure client.

import { ChartsView } from "./charts";
import { ChatView } from "./chat";
import { FrameSequencer } from "./frames";
import { GatewayClient, PortalSocket, websocketUrl } from "./gateway";
import { MapView } from "./mapview";
import { NotificationsView } from "./notify";
import { OrderingForm } from "./ordering";
import { PanelModel } from "./panels";
import { ReportView } from "./report";
import type { PushFrame } from "./types";

const ALL_KINDS = ["notification", "chat", "location", "sensor", "report", "status"];

export class PortalApp {
  readonly model = new PanelModel();
  readonly sequencer: FrameSequencer;
  private socket: PortalSocket | null = null;

  private mapView: MapView;
  private chartsView: ChartsView;
  private chatView: ChatView;
  private notificationsView: NotificationsView;
  private reportView: ReportView;
  private ordering: OrderingForm;
  private banner: HTMLElement;

  constructor(
    private root: Document | HTMLElement,
    private gateway: GatewayClient,
    private makeSocket?: (url: string) => WebSocket,
  ) {
    const el = (selector: string) => {
      const node = this.root.querySelector(selector);
      if (!node) throw new Error(`portal markup missing ${selector}`);
      return node as HTMLElement;
    };
    this.banner = el("#banner");
    this.mapView = new MapView(
      el("#map-canvas") as HTMLCanvasElement, el("#map-overlay"),
    );
    this.chartsView = new ChartsView(el("#charts"));
    this.chatView = new ChatView(el("#chat-list"));
    this.notificationsView = new NotificationsView(el("#notification-list"));
    this.reportView = new ReportView(
      el("#report-button") as HTMLButtonElement,
      el("#report-modal"),
      (tracking) => this.gateway.report(tracking),
    );
    this.ordering = new OrderingForm(el("#ordering"), async (order) => {
      const { process } = await this.gateway.placeOrder(order);
      return process;
    });
    this.sequencer = new FrameSequencer(
      (frame) => this.applyFrame(frame),
      () => void this.resync(),
    );
  }

  /** Startup: defaults into the form, panels empty, then subscribe. */
  async start(): Promise<void> {
    try {
      const defaults = await this.gateway.defaults();
      this.ordering.fillDefaults(defaults);
      this.banner.textContent = "";
      this.banner.classList.remove("error");
    } catch (err) {
      this.banner.textContent =
        `gateway unreachable: ${err instanceof Error ? err.message : err}`;
      this.banner.classList.add("error");
      this.ordering.disable("gateway unreachable");
      return;
    }
    this.renderAll();
    this.connect();
  }

  connect(): void {
    const url = websocketUrl(this.gateway.base, ALL_KINDS);
    this.socket = new PortalSocket(
      url,
      {
        onFrame: (frame: PushFrame) => this.sequencer.push(frame),
        onOpen: () => {
          // fresh connection, fresh sequence numbers; rebuild from snapshots
          this.sequencer.reset();
          void this.resync();
        },
        onDown: () => {
          this.banner.textContent = "connection lost — reconnecting";
          this.banner.classList.add("error");
        },
      },
      this.makeSocket,
    );
    this.socket.connect();
  }

  applyFrame(frame: PushFrame): void {
    this.model.applyFrame(frame);
    this.renderAll();
  }

  /** Rebuild volatile state from gateway snapshots after a gap or reconnect. */
  async resync(): Promise<void> {
    try {
      await this.gateway.agents();
      const tracking = this.model.map.tracking;
      if (tracking) {
        const delivery = await this.gateway.delivery(tracking);
        this.model.resyncDelivery(
          tracking, String(delivery.status ?? ""), Boolean(delivery.has_report),
        );
      }
      this.banner.textContent = "";
      this.banner.classList.remove("error");
    } catch {
      // gateway briefly unavailable; the reconnect loop keeps trying
    }
    this.renderAll();
  }

  renderAll(): void {
    this.mapView.render(this.model.map);
    this.chartsView.render(this.model.charts);
    this.chatView.render(this.model.chat);
    this.notificationsView.render(this.model.notifications);
    const tracking = this.model.map.tracking;
    this.reportView.setAvailable(
      tracking !== null && this.model.reports.has(tracking) ? tracking : null,
    );
  }

  stop(): void {
    this.socket?.close();
  }
}

declare global {
  interface Window {
    portal?: PortalApp;
  }
}

if (typeof window !== "undefined" && typeof document !== "undefined" &&
    document.querySelector("#ordering")) {
  const app = new PortalApp(document, new GatewayClient(""));
  window.portal = app;
  void app.start();
}
