// Browser entry point: wires the app to the DOM and the prover server.

import { ProofApp } from "./app.js";
import { fetchTransport } from "./protocol.js";
import { renderBundle } from "./render.js";

function start(): void {
  const root = document.getElementById("app");
  const form = document.getElementById("goal-form") as HTMLFormElement | null;
  const input = document.getElementById("goal-input") as HTMLInputElement | null;
  const server = (document.getElementById("server-url") as HTMLInputElement | null)?.value
    ?? "http://127.0.0.1:7171/";
  if (root === null || form === null || input === null) return;

  const session = `ui-${Date.now().toString(36)}`;
  const app = new ProofApp(fetchTransport(server), session, (view) => {
    renderBundle(root, view, {
      onSelectGoal: (name) => void app.selectGoal(name),
      onApply: (tactic, goal) => void app.applyTactic(tactic, goal),
      onUndo: () => void app.undo(),
      onQed: () => void app.qed(),
      onExport: () => app.exportScript(),
    });
  });

  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    if (input.value.trim() !== "") void app.newGoal(input.value.trim());
  });
}

document.addEventListener("DOMContentLoaded", start);
