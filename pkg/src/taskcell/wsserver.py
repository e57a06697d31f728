"""Websocket transport for the bridge: one JSON object per text frame.

Each connection runs in its own handler thread; the broker serializes all
cross-connection work, so per-topic publish order is preserved as observed
by the broker.
"""

from __future__ import annotations

import threading
from typing import Optional

from websockets.sync.server import serve as _ws_serve

from .bridge import Broker
from .engine import SessionEngine
from .kb import CellConfiguration, KnowledgeBase
from .model import ProcessDefinition
from .serde import dumps


class WsConnection:
    def __init__(self, websocket):
        self.websocket = websocket
        self._lock = threading.Lock()

    def send(self, frame: dict) -> None:
        try:
            with self._lock:
                self.websocket.send(dumps(frame))
        except Exception:
            pass  # connection closing; broker drops it on disconnect


class BridgeServer:
    """Engine + broker behind a websocket endpoint."""

    def __init__(
        self,
        cell: CellConfiguration,
        process: Optional[ProcessDefinition] = None,
        kb: Optional[KnowledgeBase] = None,
        host: str = "127.0.0.1",
        port: int = 9090,
    ):
        self.broker = Broker()
        self.engine = SessionEngine(cell, kb=kb)
        self.engine.attach_bridge(self.broker)
        if process is not None:
            self.engine.start_session(process)
        self.host = host
        self.port = port
        self._server = None

    def _handler(self, websocket) -> None:
        conn = WsConnection(websocket)
        try:
            for message in websocket:
                self.broker.handle_frame(conn, message)
        finally:
            self.broker.disconnect(conn)

    def serve_forever(self) -> None:
        with _ws_serve(self._handler, self.host, self.port) as server:
            self._server = server
            server.serve_forever()

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread

    def shutdown(self) -> None:
        if self._server is not None:
            self._server.shutdown()
