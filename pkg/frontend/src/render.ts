// DOM rendering: side-by-side goal cards so bundle simultaneity is visible,
// a palette gated by server-reported applicability, the binding table, and
// the action history.  Rendering is a pure function of the ViewState; event
// wiring happens through the callbacks argument.

import type { PaletteEntry, TacticId, ViewState } from "./state.js";

export interface Callbacks {
  onSelectGoal(name: string): void;
  onApply(tactic: TacticId, goal: string): void;
  onUndo(): void;
  onQed(): void;
  onExport(): void;
}

function el(tag: string, cls: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderCard(view: ViewState, cb: Callbacks, name: string, sequent: string, open: boolean): HTMLElement {
  const card = el("div", "goal-card");
  card.dataset.goal = name;
  if (!open) card.classList.add("closed");
  if (view.changed.includes(name)) card.classList.add("changed");
  if (view.selectedGoal === name) card.classList.add("selected");
  card.appendChild(el("div", "goal-name", name));
  card.appendChild(el("div", "goal-sequent", sequent));
  card.appendChild(el("div", "goal-status", open ? "open" : "closed"));
  if (open) {
    card.addEventListener("click", () => cb.onSelectGoal(name));
  }
  return card;
}

function renderPalette(view: ViewState, cb: Callbacks): HTMLElement {
  const box = el("div", "palette");
  for (const entry of view.palette as PaletteEntry[]) {
    const btn = el("button", "tactic") as HTMLButtonElement;
    btn.textContent = entry.id;
    btn.dataset.tactic = entry.id;
    btn.disabled = !entry.enabled || view.selectedGoal === null;
    btn.addEventListener("click", () => {
      if (view.selectedGoal !== null) cb.onApply(entry.id, view.selectedGoal);
    });
    box.appendChild(btn);
  }
  return box;
}

function renderBindings(view: ViewState): HTMLElement {
  const table = el("table", "bindings");
  for (const [meta, term] of Object.entries(view.bindings)) {
    const row = el("tr", "binding");
    row.appendChild(el("td", "meta", meta));
    row.appendChild(el("td", "term", term));
    table.appendChild(row);
  }
  return table;
}

function renderHistory(view: ViewState): HTMLElement {
  const list = el("ol", "history");
  for (const action of view.history) {
    const text =
      action.kind === "goal"
        ? `goal ${action.sequent}`
        : action.kind === "apply"
          ? `${action.tactic} @ ${action.goal}`
          : action.kind;
    list.appendChild(el("li", "history-item", text));
  }
  return list;
}

export function renderBundle(root: HTMLElement, view: ViewState, cb: Callbacks): void {
  root.textContent = "";
  const bar = el("div", "toolbar");
  const undo = el("button", "undo", "undo") as HTMLButtonElement;
  undo.addEventListener("click", () => cb.onUndo());
  const qed = el("button", "qed", "qed") as HTMLButtonElement;
  qed.disabled = view.goals.length === 0 || view.goals.some((g) => g.open);
  qed.addEventListener("click", () => cb.onQed());
  const exp = el("button", "export", "export script") as HTMLButtonElement;
  exp.addEventListener("click", () => cb.onExport());
  bar.append(undo, qed, exp);
  root.appendChild(bar);

  const cards = el("div", "goal-cards");
  for (const g of view.goals) {
    cards.appendChild(renderCard(view, cb, g.name, g.sequent, g.open));
  }
  root.appendChild(cards);
  root.appendChild(renderPalette(view, cb));
  root.appendChild(renderBindings(view));
  root.appendChild(renderHistory(view));

  if (view.proved !== null) {
    root.appendChild(el("div", "proved", `proved: ${view.proved}`));
  }
  if (view.lastError !== null) {
    root.appendChild(el("div", "error", view.lastError));
  }
}
