// Report view: the delivery summary rendered as a table in a modal,
// enabled once the delivered report frame (or snapshot) arrives.

export class ReportView {
  constructor(
    private button: HTMLButtonElement,
    private modal: HTMLElement,
    private fetchReport: (tracking: string) => Promise<any>,
  ) {
    this.button.disabled = true;
    this.button.addEventListener("click", () => void this.open());
    this.modal.addEventListener("click", (event) => {
      if (event.target === this.modal) this.close();
    });
  }

  private tracking: string | null = null;

  setAvailable(tracking: string | null): void {
    this.tracking = tracking;
    this.button.disabled = tracking === null;
    this.button.dataset.tracking = tracking ?? "";
  }

  async open(): Promise<void> {
    if (!this.tracking) return;
    const body = this.modal.querySelector(".report-body")!;
    try {
      const { report } = await this.fetchReport(this.tracking);
      body.innerHTML = "";
      body.appendChild(renderReport(this.tracking, report));
    } catch (err) {
      body.textContent = `report unavailable: ${err instanceof Error ? err.message : err}`;
    }
    this.modal.classList.add("open");
  }

  close(): void {
    this.modal.classList.remove("open");
  }
}

export function renderReport(tracking: string, report: any): HTMLElement {
  const wrap = document.createElement("div");
  const title = document.createElement("h3");
  title.textContent = `Delivery ${tracking}`;
  wrap.appendChild(title);

  const table = document.createElement("table");
  table.className = "report-table";
  const head = table.insertRow();
  for (const column of ["channel", "min", "max", "mean", "stddev", "samples", "violations"]) {
    const cell = document.createElement("th");
    cell.textContent = column;
    head.appendChild(cell);
  }
  for (const [channel, stats] of Object.entries<any>(report.channels ?? {})) {
    const row = table.insertRow();
    row.insertCell().textContent = channel;
    for (const key of ["min", "max", "mean", "stddev"]) {
      row.insertCell().textContent = Number(stats[key]).toFixed(2);
    }
    row.insertCell().textContent = String(stats.count);
    row.insertCell().textContent = String(stats.violations);
  }
  wrap.appendChild(table);

  const journey = report.journey ?? {};
  const summary = document.createElement("p");
  summary.className = "report-journey";
  const minutes = (Number(journey.duration_ms ?? 0) / 60000).toFixed(1);
  const km = Number(journey.path_km ?? 0).toFixed(2);
  const speed = Number(journey.average_speed_kmh ?? 0).toFixed(1);
  summary.textContent = `journey: ${minutes} min, ${km} km, avg ${speed} km/h`;
  wrap.appendChild(summary);
  return wrap;
}
