"""Read-only JSON service over a built structure.

Endpoints::

    GET /meta                                  build metadata
    GET /clusters?gamma=G[&members=true]       maximal clusters at threshold G
    GET /gamma-map                             per-vertex largest threshold
    GET /curve?from=A&to=B&step=S              size curve over a grid

Every request runs its own query session against the shared immutable
structure, so concurrent requests are safe.  Errors come back as
``{"error": ...}`` with a 4xx status.  CORS is wide open: the explorer UI is
served as static files, possibly from another origin.
"""

from __future__ import annotations

import json
import math
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .errors import InputError
from .pipeline import ARIStructure

__all__ = ["make_server", "run_server", "threshold_grid"]


def threshold_grid(start: float, stop: float, step: float) -> list[float]:
    """Ascending grid from start to stop inclusive (within float slack)."""
    if step <= 0:
        raise InputError(f"step must be positive, got {step}")
    if stop < start:
        raise InputError(f"empty grid: from={start} > to={stop}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(n)]


def _cluster_payload(structure: ARIStructure, result, with_members: bool) -> dict:
    payload = {
        "rep_rank": result.rank + 1,
        "rep_vertex": int(structure.perm[result.rank]),
        "size": result.size,
        "d": result.d,
        "q": result.q,
        "label_rank": result.label + 1,
        "label_vertex": int(structure.perm[result.label]),
    }
    if structure.grid is not None and structure.voxel_of_vertex is not None:
        nx, ny, _ = structure.grid.dims
        voxel = int(structure.voxel_of_vertex[payload["label_vertex"]])
        payload["label_voxel"] = [voxel % nx, (voxel // nx) % ny, voxel // (nx * ny)]
    if with_members:
        payload["members"] = structure.member_vertices(result).tolist()
    return payload


class _Handler(BaseHTTPRequestHandler):
    server_version = "aricluster"

    def log_message(self, fmt, *args):  # quiet by default; tests spin up servers
        if getattr(self.server, "verbose", False):
            super().log_message(fmt, *args)

    def _send(self, status: int, payload) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _param(self, query: dict, name: str, cast, default=None):
        if name not in query:
            if default is not None:
                return default
            raise InputError(f"missing query parameter {name!r}")
        try:
            return cast(query[name][-1])
        except ValueError:
            raise InputError(f"cannot parse {name}={query[name][-1]!r}") from None

    def do_GET(self):  # noqa: N802 (http.server API)
        structure: ARIStructure = self.server.structure
        url = urlparse(self.path)
        query = parse_qs(url.query)
        try:
            if url.path == "/meta":
                self._send(200, structure.meta())
            elif url.path == "/clusters":
                gamma = self._param(query, "gamma", float)
                with_members = self._param(query, "members", str, default="false").lower() == "true"
                results = structure.query(gamma, session=structure.new_session())
                self._send(
                    200, [_cluster_payload(structure, r, with_members) for r in results]
                )
            elif url.path == "/gamma-map":
                values = structure.gamma_map_by_vertex()
                payload = {"m": structure.m, "values": values.tolist()}
                if structure.grid is not None and structure.voxel_of_vertex is not None:
                    payload["dims"] = list(structure.grid.dims)
                    payload["voxels"] = structure.voxel_of_vertex.tolist()
                self._send(200, payload)
            elif url.path == "/curve":
                grid = threshold_grid(
                    self._param(query, "from", float, default=0.0),
                    self._param(query, "to", float, default=1.0),
                    self._param(query, "step", float, default=0.01),
                )
                rows = structure.size_curve(grid, session=structure.new_session())
                for row in rows:
                    row["label"] = row["label"] + 1
                    row["rep"] = row["rep"] + 1
                    if row["parent_label"] is not None:
                        row["parent_label"] = row["parent_label"] + 1
                self._send(200, rows)
            elif self.server.ui_dir is not None:
                self._serve_static(url.path)
            else:
                self._send(404, {"error": f"unknown endpoint {url.path}"})
        except InputError as exc:
            self._send(400, {"error": str(exc)})
        except BrokenPipeError:
            pass

    def _serve_static(self, path: str) -> None:
        root = Path(self.server.ui_dir).resolve()
        rel = path.lstrip("/") or "index.html"
        target = (root / rel).resolve()
        if not str(target).startswith(str(root)) or not target.is_file():
            self._send(404, {"error": f"unknown endpoint {path}"})
            return
        types = {
            ".html": "text/html",
            ".js": "text/javascript",
            ".css": "text/css",
            ".json": "application/json",
            ".png": "image/png",
        }
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", types.get(target.suffix, "application/octet-stream"))
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)


def make_server(
    structure: ARIStructure, host: str = "127.0.0.1", port: int = 0,
    ui_dir: str | None = None, verbose: bool = False,
) -> ThreadingHTTPServer:
    """Create (but do not start) the HTTP server; port 0 picks a free port."""
    server = ThreadingHTTPServer((host, port), _Handler)
    server.structure = structure
    server.ui_dir = ui_dir
    server.verbose = verbose
    return server


def run_server(structure: ARIStructure, bind: str, ui_dir: str | None = None) -> None:
    """Serve until interrupted.  ``bind`` is ``host:port``."""
    host, _, port_text = bind.rpartition(":")
    host = host or "127.0.0.1"
    try:
        port = int(port_text)
    except ValueError:
        raise InputError(f"bind address must be host:port, got {bind!r}") from None
    server = make_server(structure, host, port, ui_dir=ui_dir, verbose=True)
    host_shown, port_shown = server.server_address[:2]
    print(f"serving on http://{host_shown}:{port_shown} (m={structure.m}); Ctrl-C stops")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
