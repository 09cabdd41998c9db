"""HTTP session service driving the interactive explorer.

JSON over HTTP, in-memory sessions, no persistence. Within a session every
mutation is serialized under the session lock and appended to a history of
(site descriptor, patch); undo pops and reverts. Stale or re-targeted
sites fail with 409 so a slow client never clobbers newer state.

Endpoints::

    POST   /sessions                {"term": "..."} or {"glc": "..."}
    GET    /sessions/{id}
    GET    /sessions/{id}/moves
    POST   /sessions/{id}/apply     {"site": <descriptor from /moves>}
    POST   /sessions/{id}/undo
    GET    /sessions/{id}/dot
    DELETE /sessions/{id}
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .descriptors import (
    applicable_moves,
    descriptor_json,
    graph_json,
    resolve_descriptor,
    site_descriptor,
)
from .dot import to_dot
from .encoding import encode
from .glcformat import parse_glc
from .graph import Graph, GraphError
from .moves import Patch, SiteStale, apply_move, revert_patch
from .terms import TermSyntaxError, parse

MOVE_LIST_CAP = 200


@dataclass
class SessionState:
    id: str
    graph: Graph
    history: list[tuple[dict, Patch]] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)
    _moves_cache: list | None = None

    def moves(self) -> list[dict]:
        if self._moves_cache is None:
            sites = applicable_moves(self.graph, cap=MOVE_LIST_CAP)
            self._moves_cache = descriptor_json(self.graph, sites)
        return self._moves_cache

    def snapshot(self) -> dict:
        return {
            "id": self.id,
            "graph": graph_json(self.graph),
            "moves": self.moves(),
            "historyLength": len(self.history),
        }


class SessionStore:
    def __init__(self):
        self._sessions: dict[str, SessionState] = {}
        self._lock = threading.Lock()

    def create(self, graph: Graph) -> SessionState:
        sid = uuid.uuid4().hex[:12]
        state = SessionState(sid, graph)
        with self._lock:
            self._sessions[sid] = state
        return state

    def get(self, sid: str) -> SessionState | None:
        with self._lock:
            return self._sessions.get(sid)

    def delete(self, sid: str) -> bool:
        with self._lock:
            return self._sessions.pop(sid, None) is not None


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code


def _create_session(store: SessionStore, body: dict) -> dict:
    if not isinstance(body, dict):
        raise ApiError(400, "BAD_REQUEST", "expected a JSON object")
    if ("term" in body) == ("glc" in body):
        raise ApiError(400, "BAD_REQUEST", "provide exactly one of 'term' or 'glc'")
    try:
        if "term" in body:
            graph = encode(parse(body["term"]))
        else:
            graph = parse_glc(body["glc"])
    except TermSyntaxError as exc:
        raise ApiError(400, "SYNTAX_ERROR", str(exc)) from exc
    except GraphError as exc:
        raise ApiError(400, exc.code, str(exc)) from exc
    return store.create(graph).snapshot()


def _apply(state: SessionState, body: dict) -> dict:
    if not isinstance(body, dict) or "site" not in body:
        raise ApiError(400, "BAD_REQUEST", "expected {'site': <descriptor>}")
    with state.lock:
        try:
            site = resolve_descriptor(state.graph, body["site"])
            new_graph, patch = apply_move(state.graph, site)
        except SiteStale as exc:
            raise ApiError(409, "SITE_STALE", str(exc)) from exc
        except GraphError as exc:
            raise ApiError(409, exc.code, str(exc)) from exc
        state.history.append((site_descriptor(state.graph, site), patch))
        state.graph = new_graph
        state._moves_cache = None
        return state.snapshot()


def _undo(state: SessionState) -> dict:
    with state.lock:
        if not state.history:
            raise ApiError(409, "EMPTY_HISTORY", "nothing to undo")
        _, patch = state.history.pop()
        state.graph = revert_patch(state.graph, patch)
        state._moves_cache = None
        return state.snapshot()


class Handler(BaseHTTPRequestHandler):
    store: SessionStore = None  # injected by make_server

    # -- plumbing ---------------------------------------------------------

    def log_message(self, fmt, *args):  # silence the default stderr noise
        pass

    def _send(self, status: int, payload, content_type="application/json"):
        body = (
            payload.encode()
            if isinstance(payload, str)
            else json.dumps(payload).encode()
        )
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()
        self.wfile.write(body)

    def _error(self, status: int, code: str, message: str):
        self._send(status, {"error": code, "message": message})

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b"{}"
        try:
            return json.loads(raw or b"{}")
        except json.JSONDecodeError as exc:
            raise ApiError(400, "BAD_JSON", str(exc)) from exc

    def _session(self, sid: str) -> SessionState:
        state = self.store.get(sid)
        if state is None:
            raise ApiError(404, "UNKNOWN_SESSION", f"no session {sid!r}")
        return state

    def _route(self, method: str):
        parts = [p for p in self.path.split("?")[0].split("/") if p]
        try:
            if method == "OPTIONS":
                self._send(204, "")
                return
            if parts == ["sessions"] and method == "POST":
                self._send(201, _create_session(self.store, self._body()))
                return
            if len(parts) >= 2 and parts[0] == "sessions":
                state = self._session(parts[1])
                rest = parts[2:]
                if not rest and method == "GET":
                    with state.lock:
                        self._send(200, state.snapshot())
                elif not rest and method == "DELETE":
                    self.store.delete(parts[1])
                    self._send(204, "")
                elif rest == ["moves"] and method == "GET":
                    with state.lock:
                        self._send(200, {"moves": state.moves()})
                elif rest == ["apply"] and method == "POST":
                    self._send(200, _apply(state, self._body()))
                elif rest == ["undo"] and method == "POST":
                    self._send(200, _undo(state))
                elif rest == ["dot"] and method == "GET":
                    with state.lock:
                        self._send(200, to_dot(state.graph), content_type="text/plain; charset=utf-8")
                else:
                    raise ApiError(404, "NOT_FOUND", f"no route {method} {self.path}")
                return
            raise ApiError(404, "NOT_FOUND", f"no route {method} {self.path}")
        except ApiError as exc:
            self._error(exc.status, exc.code, str(exc))
        except Exception as exc:  # defensive: never kill the connection thread
            self._error(500, "INTERNAL", f"{type(exc).__name__}: {exc}")

    def do_GET(self):
        self._route("GET")

    def do_POST(self):
        self._route("POST")

    def do_DELETE(self):
        self._route("DELETE")

    def do_OPTIONS(self):
        self._route("OPTIONS")


def make_server(host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (Handler,), {"store": SessionStore()})
    return ThreadingHTTPServer((host, port), handler)


def serve(host: str = "127.0.0.1", port: int = 8137) -> None:
    server = make_server(host, port)
    print(f"glc session service on http://{host}:{server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
