"""A small localhost HTTP service wrapping sessions and analysis.

Wire protocol (all bodies JSON):

    GET    /scenarios                  -> {"scenarios": [...]}
    POST   /sessions                   {"scenario_id": N, "seed": S} -> 201 {"session": {...}}
                                       (or {"scenario": {...}, "seed": S} with a full
                                        scenario document, id >= 7, same schema as files)
    GET    /sessions/<id>              -> {"session": {...}}
    POST   /sessions/<id>/step         -> {"event": {...}, "session": {...}}
    POST   /sessions/<id>/choice       {"strategy": NAME} -> {"session": {...}}
    GET    /sessions/<id>/transcript   -> transcript document
    POST   /analysis                   {"config": {...}|"hash,enc", "strategies": [...], "seed": S}
    DELETE /sessions/<id>              -> 204

Errors: 404 unknown session or scenario, 409 a step or choice the session
cannot take right now, 400 anything malformed.  This is a teaching tool:
it binds localhost by default and trusts its caller accordingly.
"""

from __future__ import annotations

import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .analyzer import EmptyStrategySet, analyze
from .channel import canonical_json, event_to_dict
from .engine import NotAtInterceptionPoint, Session, SessionFinished
from .scenarios import (
    InvalidConfig,
    ParseError,
    ProtectionConfig,
    Scenario,
    UnknownScenario,
    get_scenario,
    list_scenarios,
    scenario_from_dict,
)
from .strategies import UnknownStrategy

DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 8000


class _HttpError(Exception):
    def __init__(self, status: int, error: str, detail: str):
        super().__init__(detail)
        self.status = status
        self.error = error
        self.detail = detail


class SessionStore:
    """Sessions by id; mutations on one session are serialized by its lock."""

    def __init__(self) -> None:
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def create(self, scenario: Scenario, seed: int) -> Session:
        session = Session(scenario, seed)
        with self._registry_lock:
            self._sessions[session.session_id] = session
            self._locks[session.session_id] = threading.Lock()
        return session

    def get(self, session_id: str) -> tuple[Session, threading.Lock]:
        with self._registry_lock:
            session = self._sessions.get(session_id)
            lock = self._locks.get(session_id)
        if session is None or lock is None:
            raise _HttpError(404, "UnknownSession", f"no session {session_id!r}")
        return session, lock

    def delete(self, session_id: str) -> None:
        with self._registry_lock:
            if session_id not in self._sessions:
                raise _HttpError(404, "UnknownSession", f"no session {session_id!r}")
            del self._sessions[session_id]
            del self._locks[session_id]


def _parse_config(raw) -> ProtectionConfig:
    if isinstance(raw, str):
        return ProtectionConfig.from_label(raw)
    if isinstance(raw, dict):
        return ProtectionConfig.from_dict(raw)
    raise _HttpError(400, "MalformedBody", "config must be an object or a defense label")


class _Api:
    """Route handlers, independent of the HTTP plumbing for testability."""

    def __init__(self) -> None:
        self.store = SessionStore()

    def scenarios(self) -> tuple[int, dict]:
        return 200, {"scenarios": list_scenarios()}

    def create_session(self, body: dict) -> tuple[int, dict]:
        scenario_id = body.get("scenario_id")
        scenario_doc = body.get("scenario")
        seed = body.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise _HttpError(400, "MalformedBody", "seed must be an integer")
        if (scenario_id is None) == (scenario_doc is None):
            raise _HttpError(400, "MalformedBody", "give exactly one of scenario_id, scenario")
        if scenario_doc is not None:
            try:
                scenario = scenario_from_dict(scenario_doc, where="request.scenario")
            except ParseError as exc:
                raise _HttpError(400, "ParseError", str(exc)) from None
        else:
            if not isinstance(scenario_id, int) or isinstance(scenario_id, bool):
                raise _HttpError(400, "MalformedBody", "scenario_id must be an integer")
            try:
                scenario = get_scenario(scenario_id)
            except UnknownScenario as exc:
                raise _HttpError(404, "UnknownScenario", str(exc)) from None
        return 201, {"session": self.store.create(scenario, seed).state()}

    def get_session(self, session_id: str) -> tuple[int, dict]:
        session, _ = self.store.get(session_id)
        return 200, {"session": session.state()}

    def step(self, session_id: str) -> tuple[int, dict]:
        session, lock = self.store.get(session_id)
        with lock:
            try:
                event = session.step()
            except SessionFinished as exc:
                raise _HttpError(409, "SessionFinished", str(exc)) from None
            return 200, {"event": event_to_dict(event), "session": session.state()}

    def choice(self, session_id: str, body: dict) -> tuple[int, dict]:
        strategy = body.get("strategy")
        if not isinstance(strategy, str):
            raise _HttpError(400, "MalformedBody", "strategy must be a string")
        session, lock = self.store.get(session_id)
        with lock:
            try:
                session.inject(strategy)
            except UnknownStrategy as exc:
                raise _HttpError(400, "UnknownStrategy", str(exc)) from None
            except NotAtInterceptionPoint as exc:
                raise _HttpError(409, "NotAtInterceptionPoint", str(exc)) from None
            return 200, {"session": session.state()}

    def transcript(self, session_id: str) -> tuple[int, dict]:
        session, lock = self.store.get(session_id)
        with lock:
            return 200, session.transcript_document()

    def analysis(self, body: dict) -> tuple[int, dict]:
        if "config" not in body:
            raise _HttpError(400, "MalformedBody", "missing 'config'")
        strategies = body.get("strategies")
        if not isinstance(strategies, list) or not all(isinstance(s, str) for s in strategies):
            raise _HttpError(400, "MalformedBody", "strategies must be a list of names")
        seed = body.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise _HttpError(400, "MalformedBody", "seed must be an integer")
        try:
            config = _parse_config(body["config"])
            report = analyze(config, strategies, seed)
        except (InvalidConfig, UnknownStrategy, EmptyStrategySet) as exc:
            raise _HttpError(400, type(exc).__name__, str(exc)) from None
        return 200, report.to_dict()

    def delete_session(self, session_id: str) -> tuple[int, None]:
        self.store.delete(session_id)
        return 204, None


_SESSION_ROUTE = re.compile(r"^/sessions/([0-9a-f]+)(/(step|choice|transcript))?$")


class _Handler(BaseHTTPRequestHandler):
    api: _Api  # set by make_server

    protocol_version = "HTTP/1.1"

    # --- plumbing ---------------------------------------------------------

    def log_message(self, fmt: str, *args) -> None:  # quiet by default
        pass

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise _HttpError(400, "MalformedBody", f"request body is not JSON: {exc.msg}") from None
        if not isinstance(doc, dict):
            raise _HttpError(400, "MalformedBody", "request body must be a JSON object")
        return doc

    def _respond(self, status: int, doc) -> None:
        payload = b"" if doc is None else canonical_json(doc).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        if payload:
            self.wfile.write(payload)

    def _handle(self, method: str) -> None:
        try:
            status, doc = self._route(method)
            self._respond(status, doc)
        except _HttpError as exc:
            self._respond(exc.status, {"error": exc.error, "detail": exc.detail})

    def _route(self, method: str) -> tuple[int, dict | None]:
        path = self.path.split("?", 1)[0].rstrip("/") or "/"
        if method == "GET" and path == "/scenarios":
            return self.api.scenarios()
        if method == "POST" and path == "/sessions":
            return self.api.create_session(self._body())
        if method == "POST" and path == "/analysis":
            return self.api.analysis(self._body())
        match = _SESSION_ROUTE.match(path)
        if match:
            session_id, _, action = match.groups()
            if method == "GET" and action is None:
                return self.api.get_session(session_id)
            if method == "GET" and action == "transcript":
                return self.api.transcript(session_id)
            if method == "POST" and action == "step":
                return self.api.step(session_id)
            if method == "POST" and action == "choice":
                return self.api.choice(session_id, self._body())
            if method == "DELETE" and action is None:
                return self.api.delete_session(session_id)
        raise _HttpError(404, "NotFound", f"no route for {method} {path}")

    # --- verbs ------------------------------------------------------------

    def do_GET(self) -> None:
        self._handle("GET")

    def do_POST(self) -> None:
        self._handle("POST")

    def do_DELETE(self) -> None:
        self._handle("DELETE")

    def do_OPTIONS(self) -> None:
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()


def make_server(host: str = DEFAULT_HOST, port: int = 0) -> ThreadingHTTPServer:
    """Build a ready-to-serve server; port 0 picks a free port."""
    handler = type("BoundHandler", (_Handler,), {"api": _Api()})
    return ThreadingHTTPServer((host, port), handler)


def serve(host: str = DEFAULT_HOST, port: int = DEFAULT_PORT) -> None:
    """Run the service until interrupted; prints the bound address first."""
    server = make_server(host, port)
    actual_host, actual_port = server.server_address[:2]
    print(f"mitmlab service listening on http://{actual_host}:{actual_port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
