/** Browser bootstrap: wires DOM events to the app and repaints on change. */

import { ApiClient, fetchHttp } from "./api.js";
import { ReviewApp } from "./app.js";
import type { PropertyKey, ValueSymbol } from "./types.js";
import { renderApp } from "./view.js";

const VALUE_CYCLE: Record<PropertyKey, (ValueSymbol | null)[]> = {
  I: ["+", "-", null],
  U: ["+", "-", "~", null],
  R: ["+", "-", "~", null],
  D: ["+", "-", null],
};

function start(): void {
  const root = document.getElementById("app");
  const baseInput = document.getElementById("base-url") as HTMLInputElement | null;
  if (!root) return;

  const base = baseInput?.value || "http://127.0.0.1:8000";
  const app = new ReviewApp(new ApiClient(fetchHttp(base)));
  app.subscribe((state) => {
    root.innerHTML = renderApp(state);
  });

  root.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (!target || target.hasAttribute("disabled")) return;
    const action = target.dataset.action;

    if (action === "load-benchmark") {
      void app.loadBenchmark(target.dataset.benchmark ?? "pizza");
    } else if (action === "cycle-label") {
      const classId = target.dataset.class!;
      const property = target.dataset.property as PropertyKey;
      const current = app.getState().session?.labeling[classId]?.[property] ?? null;
      const cycle = VALUE_CYCLE[property];
      const next = cycle[(cycle.indexOf(current) + 1) % cycle.length];
      void app.editLabel(classId, property, next);
    } else if (action === "submit-guidance") {
      const input = document.getElementById("guidance-input") as HTMLTextAreaElement | null;
      if (input && input.value.trim()) void app.submitGuidance(input.value);
    } else if (action === "run-labeler") {
      const value = (id: string) =>
        (document.getElementById(id) as HTMLInputElement | HTMLSelectElement | null)?.value ?? "";
      void app.runLabeler({
        strategy: value("run-strategy") === "incontext" ? "incontext" : "zero",
        representation: value("run-representation") === "flat" ? "flat" : "hier",
        seed: Number(value("run-seed")) || 0,
        mode: value("run-mode") === "overwrite" ? "overwrite" : "fill_missing",
        llm: { endpoint_url: value("run-endpoint"), model: value("run-model") || "gpt-4" },
      });
    }
  });
}

start();
