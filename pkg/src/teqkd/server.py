"""Local JSON-over-HTTP compute endpoint for the interactive explorer.

Single endpoint: ``POST /v1/rates``.  The request carries the system
parameters and optionally a sweep specification:

    {
      "params": { ...SystemParams fields... },
      "sweep":  {"axis": "d", "from": 0, "to": 8, "points": 9, "log": false},
      "efficiency": 1.0
    }

The response is always a JSON array of report objects, one per grid point
(a single point when no sweep is given), each echoing its parameters.
Failed grid points carry an "error" field instead of rates.  GET serves
static files from an optional directory so the explorer can be hosted by
the same process.
"""

from __future__ import annotations

import json
import math
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .params import ParameterError, params_from_json
from .pipeline import assemble_rates, report_to_dict, sweep

__all__ = ["make_server", "serve_forever", "rates_endpoint"]

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".svg": "image/svg+xml",
}


def _sweep_values(spec: dict):
    axis = spec.get("axis")
    start = spec.get("from")
    stop = spec.get("to")
    points = int(spec.get("points", 0))
    log = bool(spec.get("log", False))
    if axis is None or start is None or stop is None or points < 1:
        raise ValueError("sweep spec needs axis, from, to and points >= 1")
    start, stop = float(start), float(stop)
    if points == 1:
        values = [start]
    elif log:
        if start <= 0 or stop <= 0:
            raise ValueError("log-spaced sweep needs positive endpoints")
        step = (math.log(stop) - math.log(start)) / (points - 1)
        values = [math.exp(math.log(start) + i * step) for i in range(points)]
    else:
        step = (stop - start) / (points - 1)
        values = [start + i * step for i in range(points)]
    if axis in ("n", "d"):
        values = [int(round(v)) for v in values]
        # de-dup after integer rounding but keep order
        values = list(dict.fromkeys(values))
    return axis, values


def rates_endpoint(body: bytes) -> tuple[int, dict | list]:
    """Pure request handler: returns (http_status, json_payload)."""
    try:
        payload = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        return 400, {"error": f"request is not valid JSON: {exc}"}
    if not isinstance(payload, dict) or "params" not in payload:
        return 400, {"error": "request must be an object with a 'params' field"}
    try:
        params = params_from_json(json.dumps(payload["params"]))
    except ParameterError as exc:
        return 400, {"error": "invalid parameters", "violations": exc.violations}
    efficiency = float(payload.get("efficiency", 1.0))
    try:
        if "sweep" in payload and payload["sweep"]:
            axis, values = _sweep_values(payload["sweep"])
            points = sweep(axis, values, params, efficiency)
            out = []
            for pt in points:
                if pt.report is None:
                    out.append({"axis": pt.axis, "axis_value": pt.value, "error": pt.error})
                else:
                    entry = report_to_dict(pt.report)
                    entry["axis"] = pt.axis
                    entry["axis_value"] = pt.value
                    out.append(entry)
            return 200, out
        report = assemble_rates(params, efficiency)
        return 200, [report_to_dict(report)]
    except (ValueError, ParameterError) as exc:
        return 400, {"error": str(exc)}


class _Handler(BaseHTTPRequestHandler):
    static_dir: Path | None = None

    def _send_json(self, status: int, payload) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def do_OPTIONS(self):  # noqa: N802 (http.server naming)
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "POST, GET, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def do_POST(self):  # noqa: N802
        if self.path != "/v1/rates":
            self._send_json(404, {"error": f"no such endpoint {self.path!r}"})
            return
        length = int(self.headers.get("Content-Length", 0))
        status, payload = rates_endpoint(self.rfile.read(length))
        self._send_json(status, payload)

    def do_GET(self):  # noqa: N802
        if self.static_dir is None:
            self._send_json(404, {"error": "no static directory configured"})
            return
        rel = self.path.lstrip("/") or "index.html"
        target = (self.static_dir / rel).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())) or not target.is_file():
            self._send_json(404, {"error": f"not found: {self.path}"})
            return
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", _CONTENT_TYPES.get(target.suffix, "application/octet-stream"))
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, fmt, *args):  # quiet by default; tests run servers inline
        pass


def make_server(host: str = "127.0.0.1", port: int = 8787, static_dir=None) -> ThreadingHTTPServer:
    handler = type("Handler", (_Handler,), {"static_dir": Path(static_dir) if static_dir else None})
    return ThreadingHTTPServer((host, port), handler)


def serve_forever(host: str = "127.0.0.1", port: int = 8787, static_dir=None) -> None:
    server = make_server(host, port, static_dir)
    where = f"http://{host}:{server.server_address[1]}"
    print(f"rates endpoint at {where}/v1/rates" + (f", static files from {static_dir}" if static_dir else ""))
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
