// Session wiring: one in-flight request per session (actions queue behind a
// promise chain), server state folded into the ViewState after every round
// trip, palette refreshed from a dry-run applicability probe.

import { downloadScript } from "./export.js";
import { ProofClient, ProtocolError, type Transport } from "./protocol.js";
import {
  type Action,
  type TacticId,
  type ViewState,
  emptyView,
  firstOpen,
  project,
  withError,
  withSelection,
} from "./state.js";

export class ProofApp {
  view: ViewState;
  private client: ProofClient;
  private queue: Promise<void> = Promise.resolve();

  constructor(
    transport: Transport,
    session: string,
    private readonly onViewChange: (view: ViewState) => void = () => {},
  ) {
    this.client = new ProofClient(transport, session);
    this.view = emptyView(session);
  }

  /** serialize actions: each queued step starts after the previous settles */
  private enqueue(step: () => Promise<void>): Promise<void> {
    this.queue = this.queue.then(step, step);
    return this.queue;
  }

  private publish(view: ViewState): void {
    this.view = view;
    this.onViewChange(view);
  }

  private async refresh(state: { goals: { name: string; open: boolean }[] }, action: Action | null) {
    const target = this.view.selectedGoal ?? undefined;
    let applicable: string[] | null = null;
    const open = state.goals.some((g) => g.open);
    if (open) {
      applicable = await this.client.applicable(
        target !== undefined && state.goals.some((g) => g.name === target && g.open) ? target : undefined,
      );
    }
    this.publish(project(this.view, state as never, action, applicable));
  }

  newGoal(sequent: string): Promise<void> {
    return this.enqueue(async () => {
      try {
        const state = await this.client.newGoal(sequent);
        this.view = emptyView(this.view.session);
        await this.refresh(state, { kind: "goal", sequent });
      } catch (e) {
        this.publish(withError(this.view, String(e)));
      }
    });
  }

  selectGoal(name: string): Promise<void> {
    return this.enqueue(async () => {
      this.publish(withSelection(this.view, name));
      try {
        const applicable = await this.client.applicable(name);
        this.publish({
          ...this.view,
          palette: this.view.palette.map((p) => ({ id: p.id, enabled: applicable.includes(p.id) })),
        });
      } catch (e) {
        this.publish(withError(this.view, String(e)));
      }
    });
  }

  applyTactic(tactic: TacticId, goal: string): Promise<void> {
    return this.enqueue(async () => {
      try {
        const expr = tactic === "basic" ? "basic" : `rule ${tactic}`;
        const state = await this.client.apply(expr, goal);
        await this.refresh(state, { kind: "apply", tactic, goal });
      } catch (e) {
        const state = e instanceof ProtocolError ? e.state : null;
        this.publish(withError(this.view, String(e)));
        if (state !== null) await this.refresh(state, null);
      }
    });
  }

  undo(): Promise<void> {
    return this.enqueue(async () => {
      try {
        const state = await this.client.undo();
        await this.refresh(state, { kind: "undo" });
      } catch (e) {
        this.publish(withError(this.view, String(e)));
      }
    });
  }

  qed(): Promise<void> {
    return this.enqueue(async () => {
      try {
        const state = await this.client.qed();
        this.publish(project(this.view, state, { kind: "qed" }, null));
      } catch (e) {
        this.publish(withError(this.view, String(e)));
      }
    });
  }

  exportScript(): void {
    downloadScript(this.view.history);
  }

  /** await everything queued so far (used by tests) */
  idle(): Promise<void> {
    return this.queue;
  }
}

export { firstOpen };
