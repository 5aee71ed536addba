"""HTTP service over a trained store.

Endpoints (JSON bodies, UTF-8):

* ``GET  /api/health``                      liveness probe
* ``GET  /api/players``                     ids plus control provenance
* ``POST /api/solve``                       SolveRequest -> SolveResponse,
                                            cached by request + store hash
* ``POST /api/whatif``                      same contract, never cached
* ``GET  /api/solution/{pitcher}/{batter}`` stored default solution or 404

Errors are ``{"error": code, "message": ...}`` with 400 for validation, 404
for missing resources, 500 for anything unexpected.  Schema-invalid JSON is
always a 400.  Solves write through the store's atomic rename, so concurrent
readers never see partial documents.
"""

from __future__ import annotations

import hashlib
import json
import mimetypes
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from . import pipeline
from .config import AppConfig
from .data import ModelStore, NotFound, canonical_json


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code


class _AppState:
    def __init__(self, store_path: str, config: AppConfig,
                 ui_root: str | None = None):
        self.store = ModelStore(store_path)
        self.config = config
        self.ui_root = ui_root
        self.solve_lock = threading.Lock()

    # -- handlers -------------------------------------------------------------

    def health(self) -> dict:
        return {"status": "ok", "fingerprint": self.store.fingerprint}

    def players(self) -> dict:
        try:
            index = self.store.read("players/index")
        except NotFound:
            raise ApiError(404, "untrained", "store has no trained player index")
        pitchers = []
        for pid in index["pitchers"]:
            entry = {"id": pid}
            try:
                doc = self.store.read(f"control/{pid}")
                entry["control"] = {p: d["source"] for p, d in doc.items()}
            except NotFound:
                pass
            pitchers.append(entry)
        return {"pitchers": pitchers,
                "batters": [{"id": bid} for bid in index["batters"]]}

    def _parse_solve_request(self, body: dict):
        if not isinstance(body, dict):
            raise ApiError(400, "validation", "request body must be an object")
        pitcher = body.get("pitcher_id")
        batter = body.get("batter_id")
        if not isinstance(pitcher, str) or not isinstance(batter, str):
            raise ApiError(400, "validation",
                           "pitcher_id and batter_id are required strings")
        overrides_doc = body.get("overrides", {})
        if not isinstance(overrides_doc, dict):
            raise ApiError(400, "validation", "overrides must be an object")
        try:
            overrides = pipeline.SolveOverrides.from_json(overrides_doc).validate()
        except pipeline.InvalidRequest as exc:
            raise ApiError(400, "validation", str(exc))
        return pitcher, batter, overrides

    def _compute(self, pitcher: str, batter: str,
                 overrides: pipeline.SolveOverrides) -> dict:
        try:
            doc, ms = pipeline.solve_matchup(self.store, self.config, pitcher,
                                             batter, overrides)
        except (pipeline.UnknownPlayer, pipeline.InvalidRequest) as exc:
            raise ApiError(400, "validation", str(exc))
        except NotFound as exc:
            raise ApiError(404, "missing", f"store artifact missing: {exc}")
        return {**doc, "solve_ms": ms}

    def solve(self, body: dict) -> dict:
        pitcher, batter, overrides = self._parse_solve_request(body)
        request_key = canonical_json({"pitcher_id": pitcher, "batter_id": batter,
                                      "overrides": overrides.to_json()})
        digest = hashlib.sha256(
            (request_key + self.store.fingerprint).encode()).hexdigest()
        cache_key = f"solutions/cache/{digest}"
        try:
            return self.store.read(cache_key)
        except NotFound:
            pass
        response = self._compute(pitcher, batter, overrides)
        self.store.write(cache_key, response)
        return response

    def whatif(self, body: dict) -> dict:
        pitcher, batter, overrides = self._parse_solve_request(body)
        return self._compute(pitcher, batter, overrides)

    def solution(self, pitcher: str, batter: str) -> dict:
        try:
            return self.store.read(f"solutions/{pitcher}_{batter}")
        except NotFound:
            raise ApiError(404, "missing",
                           f"no cached solution for {pitcher} vs {batter}")


class _Handler(BaseHTTPRequestHandler):
    state: _AppState  # set by make_server

    def log_message(self, *args):  # quiet by default
        pass

    def _send(self, status: int, doc: dict) -> None:
        payload = json.dumps(doc).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def _dispatch(self, method: str) -> None:
        try:
            path = self.path.split("?")[0].rstrip("/")
            if method == "GET" and path == "/api/health":
                self._send(200, self.state.health())
                return
            if method == "GET" and path == "/api/players":
                self._send(200, self.state.players())
                return
            if method == "GET" and path.startswith("/api/solution/"):
                parts = path.split("/")
                if len(parts) != 5:
                    raise ApiError(404, "missing", "expected /api/solution/{pitcher}/{batter}")
                self._send(200, self.state.solution(parts[3], parts[4]))
                return
            if method == "POST" and path in ("/api/solve", "/api/whatif"):
                length = int(self.headers.get("Content-Length") or 0)
                raw = self.rfile.read(length)
                try:
                    body = json.loads(raw.decode("utf-8")) if raw else {}
                except (UnicodeDecodeError, json.JSONDecodeError):
                    raise ApiError(400, "validation", "body is not valid JSON")
                handler = self.state.solve if path == "/api/solve" else self.state.whatif
                self._send(200, handler(body))
                return
            if method == "GET" and not path.startswith("/api/") \
                    and self.state.ui_root:
                self._send_static(path)
                return
            raise ApiError(404, "missing", f"no route {method} {path}")
        except ApiError as exc:
            self._send(exc.status, {"error": exc.code, "message": str(exc)})
        except Exception as exc:  # never leak a stack trace as a 500 crash
            self._send(500, {"error": "internal", "message": str(exc)})

    def _send_static(self, path: str) -> None:
        rel = path.lstrip("/") or "index.html"
        full = os.path.realpath(os.path.join(self.state.ui_root, rel))
        root = os.path.realpath(self.state.ui_root)
        if not full.startswith(root + os.sep) and full != root:
            raise ApiError(404, "missing", "path escapes the UI root")
        if not os.path.isfile(full):
            raise ApiError(404, "missing", f"no such file {rel}")
        content_type = mimetypes.guess_type(full)[0] or "application/octet-stream"
        with open(full, "rb") as handle:
            payload = handle.read()
        self.send_response(200)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")


def make_server(store_path: str, config: AppConfig, host: str, port: int,
                ui_root: str | None = None) -> ThreadingHTTPServer:
    state = _AppState(store_path, config, ui_root)
    handler = type("BoundHandler", (_Handler,), {"state": state})
    return ThreadingHTTPServer((host, port), handler)


def serve(store_path: str, config: AppConfig, host: str, port: int,
          ui_root: str | None = None) -> None:
    server = make_server(store_path, config, host, port, ui_root)
    print(json.dumps({"serving": f"http://{host}:{server.server_address[1]}/",
                      "store": store_path}))
    try:
        server.serve_forever()
    finally:
        server.server_close()
