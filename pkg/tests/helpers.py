"""Shared test utilities: seeded corpora and a throwaway JSON stub service."""

import json
import threading
from contextlib import contextmanager
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np

from emojourney.retrieval_index import ClipEmbedding


def make_corpus(n, d=128, seed=0, prefix="clip"):
    """n random unit embeddings with zero-padded ids (stable sort order)."""
    rng = np.random.default_rng(seed)
    return [
        ClipEmbedding.from_vector(f"{prefix}{i:05d}", rng.normal(size=d))
        for i in range(n)
    ]


def make_queries(n, d=128, seed=100):
    rng = np.random.default_rng(seed)
    return [rng.normal(size=d) for _ in range(n)]


class _StubHandler(BaseHTTPRequestHandler):
    payload = {}
    status = 200

    def do_POST(self):
        length = int(self.headers.get("content-length", 0))
        self.rfile.read(length)
        body = json.dumps(type(self).payload).encode()
        self.send_response(type(self).status)
        self.send_header("content-type", "application/json")
        self.send_header("content-length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@contextmanager
def stub_service(payload, status=200):
    """Serve one canned JSON payload on an ephemeral localhost port."""
    handler = type("Handler", (_StubHandler,), {"payload": payload, "status": status})
    server = HTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_port}/"
    finally:
        server.shutdown()
        server.server_close()
