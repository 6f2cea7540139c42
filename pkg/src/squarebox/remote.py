"""Remote classifier transport: JSON-over-HTTP client plus a stub server.

Protocol: POST {endpoint}/logits with body {"shape": [c, w, w],
"image": [flat reals]}; the server answers 200 with {"logits": [reals]}.
"""

from __future__ import annotations

import json
import threading
import urllib.error
import urllib.request
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from .errors import (
    RemoteDecodeError,
    RemoteLengthError,
    RemoteStatusError,
    RemoteTransportError,
)


def query_remote(endpoint: str, image, num_classes: int, timeout: float = 10.0) -> np.ndarray:
    """One logits query against a remote model; raises a distinct error per
    failure mode (transport, status, decode, length)."""
    arr = np.asarray(image, dtype=np.float64)
    body = json.dumps(
        {"shape": list(arr.shape), "image": arr.ravel().tolist()}
    ).encode("utf-8")
    req = urllib.request.Request(
        endpoint.rstrip("/") + "/logits",
        data=body,
        headers={"Content-Type": "application/json"},
        method="POST",
    )
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            status = resp.status
            payload = resp.read()
    except urllib.error.HTTPError as exc:
        raise RemoteStatusError(f"server answered status {exc.code}") from exc
    except (urllib.error.URLError, OSError) as exc:
        raise RemoteTransportError(f"request failed: {exc}") from exc
    if status != 200:
        raise RemoteStatusError(f"server answered status {status}")
    try:
        decoded = json.loads(payload)
        logits = np.asarray(decoded["logits"], dtype=np.float64)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise RemoteDecodeError(f"malformed response body: {exc}") from exc
    if logits.ndim != 1:
        raise RemoteDecodeError(f"logits must be a flat list, got shape {logits.shape}")
    if logits.size != num_classes:
        raise RemoteLengthError(
            f"server returned {logits.size} logits, expected {num_classes}"
        )
    return logits


class RemoteClassifier:
    """Query-counting classifier backed by a remote endpoint. One in-flight
    request per attack run."""

    def __init__(self, endpoint: str, num_classes: int, timeout: float = 10.0):
        self.endpoint = endpoint
        self.num_classes = int(num_classes)
        self.timeout = timeout
        self._count = 0
        self._lock = threading.Lock()

    def query(self, image) -> np.ndarray:
        logits = query_remote(self.endpoint, image, self.num_classes, self.timeout)
        with self._lock:
            self._count += 1
        return logits

    @property
    def query_count(self) -> int:
        with self._lock:
            return self._count


class _StubHandler(BaseHTTPRequestHandler):
    model = None
    fixed_logits = None

    def log_message(self, fmt, *args):  # keep test output quiet
        pass

    def do_POST(self):
        if self.path.rstrip("/") != "/logits" and self.path != "/logits":
            self.send_error(404)
            return
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length)
        try:
            payload = json.loads(raw)
            shape = tuple(int(v) for v in payload["shape"])
            image = np.asarray(payload["image"], dtype=np.float64).reshape(shape)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            self.send_error(400, f"bad request: {exc}")
            return
        if self.fixed_logits is not None:
            logits = list(self.fixed_logits)
        else:
            try:
                logits = self.model.forward(image).tolist()
            except Exception as exc:
                self.send_error(500, f"model failure: {exc}")
                return
        body = json.dumps({"logits": logits}).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def make_stub_server(host: str, port: int, model=None, fixed_logits=None) -> ThreadingHTTPServer:
    """HTTP server exposing /logits for a local model or a fixed response."""
    handler = type(
        "StubHandler", (_StubHandler,), {"model": model, "fixed_logits": fixed_logits}
    )
    return ThreadingHTTPServer((host, port), handler)


def serve_stub(host: str, port: int, model=None, fixed_logits=None) -> None:
    server = make_stub_server(host, port, model, fixed_logits)
    print(f"serving logits on http://{host}:{server.server_address[1]}/logits")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
