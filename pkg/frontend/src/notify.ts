// Notification corner: key progress updates (dialogue completed, delivery
// commencing, alerts, process outcomes).

import type { NotificationEntry } from "./panels";

const TEXT: Record<string, (p: Record<string, any>) => string> = {
  "process-started": (p) => `process ${p.process} started (${p.scenario})`,
  "dialogue-completed": (p) => `dialogue completed: ${p.winner} wins at ${p.unit_price}/kg`,
  "delivery-booked": (p) => `delivery booked: ${p.tracking_number} via ${p.via}`,
  "delivery-commencing": (p) => `delivery commencing: ${p.tracking_number}`,
  "delivery-status": (p) => `delivery ${p.tracking_number}: ${p.status}`,
  "delivery-completed": (p) => `delivery completed: ${p.tracking_number}`,
  "replenishment-triggered": (p) => `replenishment triggered (free stock ${p.free_stock})`,
  "process-outcome": (p) => `process ${p.process}: ${p.outcome}`,
  alert: (p) => `ALERT ${p.channel} = ${p.value} outside ${JSON.stringify(p.bound)}`,
};

export class NotificationsView {
  private rendered = 0;

  constructor(private list: HTMLElement) {}

  render(notifications: NotificationEntry[]): void {
    for (; this.rendered < notifications.length; this.rendered++) {
      const entry = notifications[this.rendered];
      const item = document.createElement("li");
      item.className = `notification n-${entry.event}`;
      item.dataset.event = entry.event;
      const toText = TEXT[entry.event];
      item.textContent = toText ? toText(entry.payload) : entry.event;
      this.list.prepend(item);
      while (this.list.children.length > 8) {
        this.list.removeChild(this.list.lastChild!);
      }
    }
  }
}
