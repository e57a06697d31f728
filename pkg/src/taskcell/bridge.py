"""JSON message bridge: topic publish/subscribe plus request/response
services between the engine and any number of clients.

Frames are JSON objects with an ``op`` field (subscribe, unsubscribe,
publish, call_service, service_response, status). The broker is transport
agnostic: the websocket server and the in-process loopback connection share
these exact semantics, so the whole suite runs without a network.

Delivery guarantees: per-topic FIFO per subscriber, no duplication, no
replay for late subscribers. Malformed frames produce a status error and
leave the connection open.
"""

from __future__ import annotations

import itertools
import threading
from typing import Any, Callable, Optional, Protocol

from .errors import TaskcellError

OPS = ("subscribe", "unsubscribe", "publish", "call_service", "service_response", "status")


class Connection(Protocol):
    def send(self, frame: dict) -> None: ...


class Broker:
    def __init__(self):
        self._lock = threading.RLock()
        self._subscribers: dict[str, list[Connection]] = {}
        self._services: dict[str, Callable[[dict], dict]] = {}
        self._listeners: dict[str, list[Callable[[str, dict], None]]] = {}
        self._sub_hooks: dict[str, list[Callable[[Connection], None]]] = {}

    # --- wiring (engine side) ------------------------------------------------

    def register_service(self, name: str, handler: Callable[[dict], dict]) -> None:
        with self._lock:
            self._services[name] = handler

    def add_topic_listener(
        self, topic: str, handler: Callable[[str, dict], None]
    ) -> None:
        """In-process tap invoked after fan-out for every publish on topic."""
        with self._lock:
            self._listeners.setdefault(topic, []).append(handler)

    def add_subscription_hook(
        self, topic: str, hook: Callable[[Connection], None]
    ) -> None:
        """Invoked when a connection subscribes to topic (e.g. to re-emit
        the current parameter request, compensating for no-replay)."""
        with self._lock:
            self._sub_hooks.setdefault(topic, []).append(hook)

    # --- core operations -------------------------------------------------------

    def subscribe(self, conn: Connection, topic: str) -> None:
        with self._lock:
            subs = self._subscribers.setdefault(topic, [])
            if conn not in subs:
                subs.append(conn)
            hooks = list(self._sub_hooks.get(topic, []))
        # hooks run outside the lock: they may call back into the engine,
        # whose own lock orders strictly inside the broker's
        for hook in hooks:
            hook(conn)

    def unsubscribe(self, conn: Connection, topic: str) -> None:
        with self._lock:
            subs = self._subscribers.get(topic, [])
            if conn in subs:
                subs.remove(conn)

    def disconnect(self, conn: Connection) -> None:
        with self._lock:
            for subs in self._subscribers.values():
                if conn in subs:
                    subs.remove(conn)

    def publish(self, sender: Optional[Connection], topic: str, msg: Any) -> None:
        if not isinstance(msg, dict):
            raise ValueError("publish payload must be a JSON object")
        frame = {"op": "publish", "topic": topic, "msg": msg}
        # fan-out under the lock: per-topic FIFO as observed by the broker
        with self._lock:
            for conn in list(self._subscribers.get(topic, [])):
                conn.send(frame)
            listeners = list(self._listeners.get(topic, []))
        for listener in listeners:
            try:
                listener(topic, msg)
            except TaskcellError as err:
                # engine-side rejection must not take the transport down
                if sender is not None:
                    sender.send(
                        {
                            "op": "status",
                            "level": "error",
                            "msg": err.code,
                            "topic": topic,
                        }
                    )

    def call_service(
        self, conn: Connection, service: str, call_id: str, args: dict
    ) -> None:
        with self._lock:
            handler = self._services.get(service)
        if handler is None:
            conn.send(
                {
                    "op": "status",
                    "level": "error",
                    "msg": "unknown_service",
                    "service": service,
                    "id": call_id,
                }
            )
            return
        # the handler runs outside the broker lock (it may publish)
        try:
            result = handler(args if isinstance(args, dict) else {})
            response = {
                "op": "service_response",
                "id": call_id,
                "service": service,
                "result": result,
            }
        except TaskcellError as err:
            response = {
                "op": "service_response",
                "id": call_id,
                "service": service,
                "error": {"code": err.code, "message": str(err)},
            }
        except Exception as err:  # handler bug: surface, don't kill conn
            response = {
                "op": "service_response",
                "id": call_id,
                "service": service,
                "error": {"code": "service_error", "message": str(err)},
            }
        conn.send(response)

    # --- frame dispatch -----------------------------------------------------------

    def handle_frame(self, conn: Connection, text: str) -> None:
        """Process one wire frame; errors become status frames, never
        connection failures."""
        import json

        try:
            frame = json.loads(text)
        except ValueError:
            conn.send({"op": "status", "level": "error", "msg": "parse_error"})
            return
        if not isinstance(frame, dict) or frame.get("op") not in OPS:
            conn.send({"op": "status", "level": "error", "msg": "unknown_op"})
            return
        op = frame["op"]
        try:
            if op == "subscribe":
                self.subscribe(conn, str(frame["topic"]))
            elif op == "unsubscribe":
                self.unsubscribe(conn, str(frame["topic"]))
            elif op == "publish":
                msg = frame.get("msg")
                if not isinstance(msg, dict):
                    conn.send(
                        {"op": "status", "level": "error", "msg": "payload_not_object"}
                    )
                    return
                self.publish(conn, str(frame["topic"]), msg)
            elif op == "call_service":
                self.call_service(
                    conn,
                    str(frame["service"]),
                    str(frame.get("id", "")),
                    frame.get("args") or {},
                )
            # service_response / status frames from clients are ignored
        except KeyError as missing:
            conn.send(
                {
                    "op": "status",
                    "level": "error",
                    "msg": f"missing_field:{missing.args[0]}",
                }
            )


class LoopbackConnection:
    """In-process client with the exact wire semantics of a socket client."""

    _ids = itertools.count(1)

    def __init__(self, broker: Broker, name: str = ""):
        self.broker = broker
        self.name = name or f"loopback{next(self._ids)}"
        self.inbox: list[dict] = []
        self._lock = threading.Lock()

    # transport side
    def send(self, frame: dict) -> None:
        with self._lock:
            self.inbox.append(frame)

    # client-side conveniences
    def subscribe(self, topic: str) -> None:
        self.broker.subscribe(self, topic)

    def unsubscribe(self, topic: str) -> None:
        self.broker.unsubscribe(self, topic)

    def publish(self, topic: str, msg: dict) -> None:
        self.broker.publish(self, topic, msg)

    def call(self, service: str, args: Optional[dict] = None, call_id: Optional[str] = None) -> dict:
        """Synchronous service call; returns the response frame."""
        cid = call_id if call_id is not None else f"{self.name}-{next(self._ids)}"
        before = len(self.inbox)
        self.broker.call_service(self, service, cid, args or {})
        for frame in self.inbox[before:]:
            if frame.get("id") == cid:
                return frame
        raise RuntimeError("no response frame delivered")  # pragma: no cover

    def messages_on(self, topic: str) -> list[dict]:
        with self._lock:
            return [
                f["msg"]
                for f in self.inbox
                if f.get("op") == "publish" and f.get("topic") == topic
            ]

    def clear(self) -> None:
        with self._lock:
            self.inbox.clear()
