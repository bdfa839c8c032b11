"""Tiny threaded HTTP server for exercising remote wire contracts in tests."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer


class ScriptedServer:
    """Serves POST requests from a list of scripted (status, headers, body)
    responses; replays the last response once the script runs out."""

    def __init__(self, responses):
        self.responses = list(responses)
        self.requests: list[dict] = []
        self._cursor = 0
        server = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                raw = self.rfile.read(length)
                try:
                    payload = json.loads(raw)
                except ValueError:
                    payload = raw.decode("utf-8", "replace")
                server.requests.append({
                    "path": self.path,
                    "payload": payload,
                    "headers": dict(self.headers),
                })
                idx = min(server._cursor, len(server.responses) - 1)
                server._cursor += 1
                status, headers, body = server.responses[idx]
                data = body if isinstance(body, bytes) else json.dumps(body).encode()
                self.send_response(status)
                for k, v in headers.items():
                    self.send_header(k, v)
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self.httpd = HTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self.httpd.server_address
        return f"http://{host}:{port}/"

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.httpd.shutdown()
        self.httpd.server_close()
        return False
