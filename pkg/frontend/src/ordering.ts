// Ordering panel: the operator's order form, prefilled with the scenario
// defaults; invalid input surfaces inline and never reaches the gateway.

import type { OrderDefaults, OrderDraft } from "./types";
import { emptyOrder, validateOrder } from "./panels";

export class OrderingForm {
  readonly form: HTMLFormElement;
  private error: HTMLElement;
  private processLabel: HTMLElement;
  private button: HTMLButtonElement;

  constructor(
    root: HTMLElement,
    private onLaunch: (order: OrderDraft) => Promise<string>,
  ) {
    this.form = root.querySelector("form")!;
    this.error = root.querySelector(".order-error")!;
    this.processLabel = root.querySelector(".order-process")!;
    this.button = root.querySelector("button")!;
    this.form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.launch();
    });
  }

  fillDefaults(defaults: OrderDefaults): void {
    this.set("scenario", defaults.scenario);
    this.set("product", defaults.product);
    this.set("quantity", String(defaults.quantity));
    this.set("unit_price", String(defaults.unit_price));
    this.set("min_performance", String(defaults.min_performance));
    this.set("radius_km", String(defaults.radius_km));
    this.button.disabled = false;
  }

  disable(reason: string): void {
    this.button.disabled = true;
    this.error.textContent = reason;
  }

  read(): OrderDraft {
    return {
      scenario: this.get("scenario") as OrderDraft["scenario"],
      product: this.get("product"),
      quantity: Number(this.get("quantity")),
      unit_price: Number(this.get("unit_price")),
      min_performance: Number(this.get("min_performance")),
      radius_km: Number(this.get("radius_km")),
    };
  }

  async launch(): Promise<void> {
    const order = this.read();
    const problem = validateOrder(order);
    if (problem !== null) {
      this.error.textContent = problem;
      return; // no request leaves the browser
    }
    this.error.textContent = "";
    this.button.disabled = true;
    try {
      const process = await this.onLaunch(order);
      this.processLabel.textContent = `process ${process} running`;
      this.processLabel.dataset.process = process;
    } catch (err) {
      this.error.textContent = err instanceof Error ? err.message : String(err);
    } finally {
      this.button.disabled = false;
    }
  }

  private get(name: string): string {
    return (this.form.elements.namedItem(name) as HTMLInputElement | HTMLSelectElement).value;
  }

  private set(name: string, value: string): void {
    (this.form.elements.namedItem(name) as HTMLInputElement | HTMLSelectElement).value = value;
  }
}

export { emptyOrder, validateOrder };
