"""JSON-over-HTTP session service for interactive proving.

Single POST endpoint.  Requests are ``{"op": ..., "session": ..., "payload":
{...}}`` with ops ``new_goal | state | apply | undo | qed | applicable |
load_group``; responses are ``{"ok": bool, "state": ..., "error": text}``.
Responses are pure functions of (session state, request); state is
serialized with the same printer the CLI uses, so a UI renders exactly what
the REPL would show.  Requests within one session are processed in arrival
order (per-session lock); distinct sessions proceed concurrently.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .cli import CommandError, ProofSession
from .kernel import KernelError
from .logic import ParseError, print_sequent, print_term
from .tactics import TacticError, applicable_tactics, parse_tactic, proof_state_apply

OPS = ("new_goal", "state", "apply", "undo", "qed", "applicable", "load_group")


def serialize_session(ps: ProofSession, applicable: list[str] | None = None) -> dict:
    """Goal cards (ever seen, open/closed), meta bindings, proved sequent."""
    proved = print_sequent(ps.last_theorem.sequent) if ps.last_theorem is not None else None
    if ps.state is None:
        state: dict = {"goals": [], "bindings": {}, "proved": proved}
    else:
        bundle = ps.state.bundle
        latest: dict[str, object] = {}
        order: list[str] = []
        for b in ps.state.bundles:
            for n, g in b.goals:
                if n not in latest:
                    order.append(n)
                latest[n] = g.sequent
        open_names = set(bundle.names())
        goals = []
        for n in order:
            seq = bundle.store.apply_sequent(latest[n])
            goals.append({"name": n, "sequent": print_sequent(seq), "open": n in open_names})
        bindings = {
            f"?{m.name}": print_term(t)
            for m, t in sorted(bundle.store.bindings.items(), key=lambda kv: kv[0].serial)
        }
        state = {"goals": goals, "bindings": bindings, "proved": proved}
    if applicable is not None:
        state["applicable"] = applicable
    return state


class SessionHub:
    """All live sessions; everything here must stay protocol-agnostic so
    tests can drive it directly."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._sessions: dict[str, tuple[ProofSession, threading.Lock]] = {}

    def _get(self, sid: str, create: bool) -> tuple[ProofSession, threading.Lock] | None:
        with self._lock:
            entry = self._sessions.get(sid)
            if entry is None and create:
                entry = (ProofSession(), threading.Lock())
                self._sessions[sid] = entry
            return entry

    def handle(self, request: dict) -> dict:
        op = request.get("op")
        sid = request.get("session")
        payload = request.get("payload") or {}
        if op not in OPS:
            return {"ok": False, "state": None, "error": f"unknown op {op!r}"}
        if not isinstance(sid, str) or not sid:
            return {"ok": False, "state": None, "error": "missing session id"}
        if not isinstance(payload, dict):
            return {"ok": False, "state": None, "error": "payload must be an object"}
        entry = self._get(sid, create=op in ("new_goal", "load_group"))
        if entry is None:
            return {"ok": False, "state": None, "error": f"unknown session {sid!r}"}
        ps, lock = entry
        with lock:
            try:
                return self._dispatch(ps, op, payload)
            except CommandError as e:
                return {"ok": False, "state": serialize_session(ps), "error": str(e)}

    def _dispatch(self, ps: ProofSession, op: str, payload: dict) -> dict:
        if op == "new_goal":
            ps.state = None
            ps.last_theorem = None
            ps.execute(f"goal {payload.get('sequent', '')}")
        elif op == "apply":
            expr = payload.get("tactic", "")
            goal = payload.get("goal")
            if goal:
                if ps.state is None:
                    raise CommandError("no active goal; use new_goal first")
                try:
                    tactic = parse_tactic(expr)
                except ParseError as e:
                    raise CommandError(f"bad tactic expression: {e}") from None
                if tactic.retarget is None:
                    raise CommandError("this tactic expression cannot be redirected to a goal")
                try:
                    ps.state = proof_state_apply(ps.state, tactic.retarget(goal))
                except (TacticError, KernelError) as e:
                    raise CommandError(str(e)) from None
            else:
                ps.execute(f"apply {expr}")
        elif op == "undo":
            ps.execute("undo")
        elif op == "qed":
            ps.execute("qed")
        elif op == "load_group":
            source = payload.get("source", "")
            ps.execute(f"def_group {source if source.startswith('file ') else source}")
        elif op == "applicable":
            if ps.state is None:
                raise CommandError("no active goal")
            names = applicable_tactics(ps.state.bundle, payload.get("goal"))
            return {"ok": True, "state": serialize_session(ps, applicable=names), "error": None}
        # op == "state" falls through to the plain serialization
        return {"ok": True, "state": serialize_session(ps), "error": None}


class _Handler(BaseHTTPRequestHandler):
    hub: SessionHub

    def do_POST(self) -> None:  # noqa: N802 (http.server naming)
        if self.path not in ("/", ""):
            self._reply(404, {"ok": False, "state": None, "error": "unknown endpoint"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            body = self.rfile.read(length)
            request = json.loads(body.decode("utf-8"))
            if not isinstance(request, dict):
                raise ValueError("request must be a JSON object")
        except (ValueError, UnicodeDecodeError) as e:
            self._reply(200, {"ok": False, "state": None, "error": f"malformed request: {e}"})
            return
        self._reply(200, self.hub.handle(request))

    def _reply(self, status: int, response: dict) -> None:
        data = json.dumps(response).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def do_OPTIONS(self) -> None:  # noqa: N802
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def log_message(self, fmt: str, *args) -> None:  # quiet by default
        pass


def make_server(port: int, host: str = "127.0.0.1") -> ThreadingHTTPServer:
    hub = SessionHub()
    handler = type("Handler", (_Handler,), {"hub": hub})
    server = ThreadingHTTPServer((host, port), handler)
    server.hub = hub  # type: ignore[attr-defined]
    return server


def serve(port: int, host: str = "127.0.0.1") -> None:
    server = make_server(port, host)
    print(f"ootp server listening on http://{host}:{server.server_address[1]}/", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
