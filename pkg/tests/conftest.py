"""Shared fixtures: synthetic hierarchy builders and local HTTP stubs."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from lmcc.segmentation import SemanticUnit


def units_from_indents(indents: list[int]) -> list[SemanticUnit]:
    """Fabricate a plausible unit list whose only meaningful field is indent."""
    units = []
    for i, indent in enumerate(indents):
        start = i * 10
        units.append(
            SemanticUnit(
                token_range=(i, i),
                byte_range=(start, start + 4),
                indent=indent,
                boundary_reason="syntactic",
            )
        )
    return units


def write_jsonl(path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        for row in rows:
            fp.write(json.dumps(row) + "\n")


def read_jsonl(path) -> list[dict]:
    with open(path, encoding="utf-8") as fp:
        return [json.loads(line) for line in fp if line.strip()]


class _StubHandler(BaseHTTPRequestHandler):
    def do_POST(self):  # noqa: N802 (http.server API)
        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length) or b"{}")
        self.server.requests.append((self.path, body))
        status, payload = self.server.respond(self.path, body)
        data = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    """Start JSON-POST stub servers; yields a factory returning (server, url)."""
    servers = []

    def start(respond):
        server = HTTPServer(("127.0.0.1", 0), _StubHandler)
        server.respond = respond
        server.requests = []
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        servers.append(server)
        return server, f"http://127.0.0.1:{server.server_port}"

    yield start
    for server in servers:
        server.shutdown()
        server.server_close()
