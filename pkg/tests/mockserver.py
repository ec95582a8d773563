"""A tiny threaded HTTP server standing in for a state bulletin site."""

import threading
from collections import Counter
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


class BulletinSite:
    def __init__(self):
        self.routes: dict[str, bytes] = {}
        self.failing: set[str] = set()
        self.hits: Counter = Counter()
        site = self

        class Handler(BaseHTTPRequestHandler):
            def do_GET(self):
                site.hits[self.path] += 1
                if self.path in site.failing or self.path not in site.routes:
                    self.send_response(500 if self.path in site.failing else 404)
                    self.end_headers()
                    return
                body = site.routes[self.path]
                self.send_response(200)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    @property
    def base(self) -> str:
        host, port = self.server.server_address[:2]
        return f"http://{host}:{port}"

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()

    def publish(self, state: str, days: list[str], fmt=lambda d: f"{d[8:10]}-{d[5:7]}-{d[0:4]}"):
        """Serve a listing page plus one small PDF-like file per date."""
        anchors = []
        for d in days:
            path = f"/bulletins/{state}/{d}.pdf"
            self.routes[path] = f"%PDF-1.4 bulletin {state} {d}\n".encode()
            anchors.append(f'<li><a href="{path}">Health Bulletin {fmt(d)}.pdf</a></li>')
        self.routes[f"/{state}/list.html"] = ("<html><body><ul>" + "".join(anchors) + "</ul></body></html>").encode()
        return f"{self.base}/{state}/list.html"
