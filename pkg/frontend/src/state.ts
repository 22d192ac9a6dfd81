// ViewState is a pure projection of the last server response plus the
// client-side action log.  No proof logic lives here: cards, bindings, and
// palette gating all come from what the server sent.

import type { GoalCard, ServerState } from "./protocol.js";

export const PALETTE_TACTICS = [
  "basic",
  "conj_l",
  "conj_r",
  "disj_l",
  "disj_r",
  "imp_l",
  "imp_r",
  "neg_l",
  "neg_r",
  "iff_l",
  "iff_r",
  "all_l",
  "all_r",
  "ex_l",
  "ex_r",
] as const;

export type TacticId = (typeof PALETTE_TACTICS)[number];

export interface PaletteEntry {
  id: TacticId;
  enabled: boolean;
}

export type Action =
  | { kind: "goal"; sequent: string }
  | { kind: "apply"; tactic: TacticId; goal: string }
  | { kind: "undo" }
  | { kind: "qed" };

export interface ViewState {
  session: string;
  goals: GoalCard[];
  bindings: Record<string, string>;
  proved: string | null;
  /** cards whose sequent text changed in the latest step (simultaneity) */
  changed: string[];
  palette: PaletteEntry[];
  selectedGoal: string | null;
  history: Action[];
  lastError: string | null;
}

export function emptyView(session: string): ViewState {
  return {
    session,
    goals: [],
    bindings: {},
    proved: null,
    changed: [],
    palette: PALETTE_TACTICS.map((id) => ({ id, enabled: false })),
    selectedGoal: null,
    history: [],
    lastError: null,
  };
}

function changedCards(prev: GoalCard[], next: GoalCard[]): string[] {
  const before = new Map(prev.map((g) => [g.name, g.sequent]));
  const out: string[] = [];
  for (const g of next) {
    const old = before.get(g.name);
    if (old !== undefined && old !== g.sequent) out.push(g.name);
  }
  return out;
}

export function firstOpen(goals: GoalCard[]): string | null {
  const open = goals.filter((g) => g.open);
  if (open.length === 0) return null;
  const key = (n: string) => (/^g\d+$/.test(n) ? parseInt(n.slice(1), 10) : Number.MAX_SAFE_INTEGER);
  return open.reduce((a, b) => (key(a.name) <= key(b.name) ? a : b)).name;
}

/** Fold one server response (plus the action that caused it) into the view. */
export function project(
  view: ViewState,
  state: ServerState,
  action: Action | null,
  applicable: string[] | null,
): ViewState {
  const changed = changedCards(view.goals, state.goals);
  const selected =
    view.selectedGoal !== null && state.goals.some((g) => g.name === view.selectedGoal && g.open)
      ? view.selectedGoal
      : firstOpen(state.goals);
  return {
    session: view.session,
    goals: state.goals,
    bindings: state.bindings,
    proved: state.proved,
    changed,
    palette: PALETTE_TACTICS.map((id) => ({
      id,
      enabled: applicable !== null && applicable.includes(id),
    })),
    selectedGoal: selected,
    history: action === null ? view.history : [...view.history, action],
    lastError: null,
  };
}

export function withError(view: ViewState, message: string): ViewState {
  return { ...view, lastError: message };
}

export function withSelection(view: ViewState, goal: string): ViewState {
  return { ...view, selectedGoal: goal };
}

export function openCount(view: ViewState): number {
  return view.goals.filter((g) => g.open).length;
}
