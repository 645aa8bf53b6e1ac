// Agent chat room: every envelope the gateway mirrors, in sequence order.
// Each message shows the four properties: sender, recipient, performative,
// and body.

import type { ChatEntry } from "./panels";

export class ChatView {
  private rendered = 0;

  constructor(private list: HTMLElement) {}

  render(chat: ChatEntry[]): void {
    // append-only: the model never reorders, so we only draw the tail
    for (; this.rendered < chat.length; this.rendered++) {
      const entry = chat[this.rendered];
      const item = document.createElement("li");
      item.className = "chat-entry";
      item.dataset.seq = String(entry.seq);
      item.dataset.performative = entry.performative;
      const head = document.createElement("div");
      head.className = "chat-head";
      head.textContent = `${entry.sender} → ${entry.recipient}`;
      const act = document.createElement("span");
      act.className = `chat-performative p-${entry.performative.replace("/", "-")}`;
      act.textContent = entry.performative;
      head.appendChild(act);
      const body = document.createElement("pre");
      body.className = "chat-body";
      body.textContent = JSON.stringify(entry.body);
      item.append(head, body);
      this.list.appendChild(item);
    }
    this.list.scrollTop = this.list.scrollHeight;
  }
}
