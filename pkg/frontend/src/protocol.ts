// Client for the prover's JSON protocol: one POST endpoint, request
// {op, session, payload}, response {ok, state, error}.  The transport is
// injectable so unit tests can run against a scripted fake.

export interface GoalCard {
  name: string;
  sequent: string;
  open: boolean;
}

export interface ServerState {
  goals: GoalCard[];
  bindings: Record<string, string>;
  proved: string | null;
  applicable?: string[];
}

export interface ServerResponse {
  ok: boolean;
  state: ServerState | null;
  error: string | null;
}

export type Op =
  | "new_goal"
  | "state"
  | "apply"
  | "undo"
  | "qed"
  | "applicable"
  | "load_group";

export interface ServerRequest {
  op: Op;
  session: string;
  payload: Record<string, string>;
}

export type Transport = (request: ServerRequest) => Promise<ServerResponse>;

export function fetchTransport(baseUrl: string): Transport {
  return async (request) => {
    const resp = await fetch(baseUrl, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    return (await resp.json()) as ServerResponse;
  };
}

export class ProtocolError extends Error {
  constructor(message: string, readonly state: ServerState | null) {
    super(message);
  }
}

/** Thin session-scoped wrapper; every call is one protocol round trip. */
export class ProofClient {
  constructor(
    private readonly transport: Transport,
    readonly session: string,
  ) {}

  private async call(op: Op, payload: Record<string, string> = {}): Promise<ServerResponse> {
    return this.transport({ op, session: this.session, payload });
  }

  private async must(op: Op, payload: Record<string, string> = {}): Promise<ServerState> {
    const resp = await this.call(op, payload);
    if (!resp.ok || resp.state === null) {
      throw new ProtocolError(resp.error ?? "request failed", resp.state);
    }
    return resp.state;
  }

  newGoal(sequent: string): Promise<ServerState> {
    return this.must("new_goal", { sequent });
  }

  state(): Promise<ServerState> {
    return this.must("state");
  }

  apply(tactic: string, goal?: string): Promise<ServerState> {
    const payload: Record<string, string> = { tactic };
    if (goal !== undefined) payload.goal = goal;
    return this.must("apply", payload);
  }

  undo(): Promise<ServerState> {
    return this.must("undo");
  }

  qed(): Promise<ServerState> {
    return this.must("qed");
  }

  applicable(goal?: string): Promise<string[]> {
    const payload: Record<string, string> = {};
    if (goal !== undefined) payload.goal = goal;
    return this.must("applicable", payload).then((s) => s.applicable ?? []);
  }

  loadGroup(source: string): Promise<ServerState> {
    return this.must("load_group", { source });
  }
}
