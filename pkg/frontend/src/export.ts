// Turn the session's action log into a proof script the CLI replays with
// `ootp prove`.  Goal naming is deterministic on both sides, so the goal
// names recorded from server responses are valid script arguments.

import type { Action } from "./state.js";

export function exportScript(history: Action[]): string {
  const lines: string[] = ["# exported from the ootp browser session"];
  for (const action of history) {
    switch (action.kind) {
      case "goal":
        lines.push(`goal ${action.sequent}`);
        break;
      case "apply":
        if (action.tactic === "basic") {
          lines.push(`apply basic ${action.goal}`);
        } else {
          lines.push(`apply rule ${action.tactic} ${action.goal}`);
        }
        break;
      case "undo":
        lines.push("undo");
        break;
      case "qed":
        lines.push("qed");
        break;
    }
  }
  return lines.join("\n") + "\n";
}

export function downloadScript(history: Action[], filename = "session.pfs"): void {
  const blob = new Blob([exportScript(history)], { type: "text/plain" });
  const url = URL.createObjectURL(blob);
  const a = document.createElement("a");
  a.href = url;
  a.download = filename;
  a.click();
  URL.revokeObjectURL(url);
}
