import json
import threading

import pytest

from taskcell.bridge import Broker, LoopbackConnection
from taskcell.engine import SessionEngine
from taskcell.model import InputModality as IM


@pytest.fixture()
def broker():
    return Broker()


def _conn(broker, name=""):
    return LoopbackConnection(broker, name)


def test_subscribe_then_publish_delivers(broker):
    a, b = _conn(broker, "a"), _conn(broker, "b")
    b.subscribe("/t")
    a.publish("/t", {"n": 1})
    assert b.messages_on("/t") == [{"n": 1}]
    assert a.messages_on("/t") == []


def test_double_subscribe_single_delivery(broker):
    a, b = _conn(broker), _conn(broker)
    b.subscribe("/t")
    b.subscribe("/t")
    a.publish("/t", {"n": 1})
    assert len(b.messages_on("/t")) == 1


def test_no_replay_for_late_subscribers(broker):
    a, b = _conn(broker), _conn(broker)
    a.publish("/t", {"early": True})
    b.subscribe("/t")
    assert b.messages_on("/t") == []


def test_unsubscribe_stops_delivery(broker):
    a, b = _conn(broker), _conn(broker)
    b.subscribe("/t")
    a.publish("/t", {"n": 1})
    b.unsubscribe("/t")
    a.publish("/t", {"n": 2})
    assert b.messages_on("/t") == [{"n": 1}]


def test_publish_to_zero_subscribers_is_silent(broker):
    a = _conn(broker)
    a.publish("/nobody", {"n": 1})  # no error
    assert a.inbox == []


def test_per_topic_fifo_1000_messages(broker):
    a, b = _conn(broker), _conn(broker)
    b.subscribe("/t")
    for i in range(1000):
        a.publish("/t", {"i": i})
    got = [m["i"] for m in b.messages_on("/t")]
    assert got == list(range(1000))


def test_payload_round_trip_equality(broker):
    a, b = _conn(broker), _conn(broker)
    b.subscribe("/t")
    payload = {"nested": {"x": [1, 2.5, None, True]}, "s": "ünïcode"}
    broker.handle_frame(a, json.dumps({"op": "publish", "topic": "/t", "msg": payload}))
    assert b.messages_on("/t") == [payload]


def test_call_service_correlation(broker):
    broker.register_service("echo", lambda args: {"got": args})
    a = _conn(broker)
    response = a.call("echo", {"x": 1}, call_id="c1")
    assert response["op"] == "service_response"
    assert response["id"] == "c1"
    assert response["result"] == {"got": {"x": 1}}


def test_unknown_service_status(broker):
    a = _conn(broker)
    broker.call_service(a, "nope", "c9", {})
    status = a.inbox[-1]
    assert status["op"] == "status"
    assert status["msg"] == "unknown_service"
    assert status["id"] == "c9"


def test_service_handler_error_is_contained(broker):
    def boom(args):
        raise RuntimeError("kaput")

    broker.register_service("boom", boom)
    a = _conn(broker)
    response = a.call("boom", {})
    assert response["error"]["code"] == "service_error"
    # connection still usable
    broker.register_service("ok", lambda args: {"fine": True})
    assert a.call("ok", {})["result"] == {"fine": True}


def test_malformed_frame_keeps_connection_open(broker):
    a, b = _conn(broker), _conn(broker)
    b.subscribe("/t")
    broker.handle_frame(a, "this is not json")
    assert a.inbox[-1]["op"] == "status"
    assert a.inbox[-1]["msg"] == "parse_error"
    broker.handle_frame(a, json.dumps({"op": "bogus"}))
    assert a.inbox[-1]["msg"] == "unknown_op"
    broker.handle_frame(a, json.dumps({"op": "publish", "topic": "/t", "msg": [1, 2]}))
    assert a.inbox[-1]["msg"] == "payload_not_object"
    broker.handle_frame(a, json.dumps({"op": "publish", "msg": {}}))
    assert a.inbox[-1]["msg"].startswith("missing_field")
    # still fully functional afterwards
    broker.handle_frame(a, json.dumps({"op": "publish", "topic": "/t", "msg": {"ok": 1}}))
    assert b.messages_on("/t") == [{"ok": 1}]


def test_wire_frame_subscribe_publish(broker):
    a, b = _conn(broker), _conn(broker)
    broker.handle_frame(b, '{"op":"subscribe","topic":"/engine/state"}')
    broker.handle_frame(
        a, '{"op":"publish","topic":"/engine/state","msg":{"phase":"Editing"}}'
    )
    assert b.messages_on("/engine/state") == [{"phase": "Editing"}]


def test_call_service_via_frames(broker):
    broker.register_service("sum", lambda args: {"total": args["a"] + args["b"]})
    a = _conn(broker)
    broker.handle_frame(
        a, '{"op":"call_service","service":"sum","id":"c1","args":{"a":2,"b":3}}'
    )
    response = next(f for f in a.inbox if f.get("id") == "c1")
    assert response["result"] == {"total": 5}


def test_concurrent_publishers_preserve_per_topic_order(broker):
    """Messages from many threads interleave, but each subscriber sees one
    global per-topic order with nothing lost or duplicated."""
    sub = _conn(broker)
    sub.subscribe("/t")
    n_threads, per_thread = 8, 50

    def worker(tid):
        for i in range(per_thread):
            broker.publish(None, "/t", {"tid": tid, "i": i})

    threads = [threading.Thread(target=worker, args=(t,)) for t in range(n_threads)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    got = sub.messages_on("/t")
    assert len(got) == n_threads * per_thread
    for tid in range(n_threads):
        seq = [m["i"] for m in got if m["tid"] == tid]
        assert seq == list(range(per_thread))


def test_engine_consumes_input_topics(study_cell, study_script_blank):
    """Wizard injection via the bridge reaches the engine command queue."""
    broker = Broker()
    engine = SessionEngine(study_cell)
    engine.attach_bridge(broker)
    ui = _conn(broker, "ui")
    wizard = _conn(broker, "wizard")
    wizard.subscribe("/input/gesture")
    ui.subscribe("/engine/parameter_request")

    engine.start_session(study_script_blank)
    first = ui.messages_on("/engine/parameter_request")
    assert first and first[-1]["param"] == "objectToPick"

    response = ui.call(
        "engine.choose_modality",
        {"instance": "pick_bearing", "param": "objectToPick", "modality": "Gesture"},
    )
    assert response["result"]["ok"] is True
    # the wizard saw the activation cue
    cues = [m for m in wizard.messages_on("/input/gesture") if m.get("type") == "activate"]
    assert cues and cues[-1]["param"] == "objectToPick"

    wizard.publish(
        "/input/gesture",
        {"param": "objectToPick", "value": {"kind": "ObjectModelRef", "id": "bearing"}},
    )
    requests = ui.messages_on("/engine/parameter_request")
    assert requests[-1]["param"] == "locationToPlace"


def test_late_request_subscriber_gets_current_request(study_cell, study_script_blank):
    broker = Broker()
    engine = SessionEngine(study_cell)
    engine.attach_bridge(broker)
    engine.start_session(study_script_blank)
    late = _conn(broker, "late")
    late.subscribe("/engine/parameter_request")
    got = late.messages_on("/engine/parameter_request")
    assert got and got[-1]["param"] == "objectToPick"


def test_kb_service_with_instance_and_param(study_cell, study_script_blank):
    broker = Broker()
    engine = SessionEngine(study_cell)
    engine.attach_bridge(broker)
    engine.start_session(study_script_blank)
    client = _conn(broker)
    by_type = client.call("kb.modalities_for_parameter", {"dataType": "ObjectModelRef"})
    by_param = client.call(
        "kb.modalities_for_parameter",
        {"instance": "pick_bearing", "param": "objectToPick"},
    )
    assert by_type["result"]["modalities"] == ["Gesture", "Touch", "Pen", "Speech"]
    assert by_param["result"] == by_type["result"]
    models = client.call("engine.models", {})["result"]["models"]
    assert {m["id"] for m in models} == {"bearing", "axis", "rake"}


def test_confirm_topic_with_nothing_pending(study_cell, study_script_blank):
    broker = Broker()
    engine = SessionEngine(study_cell)
    engine.attach_bridge(broker)
    engine.start_session(study_script_blank)
    watcher = _conn(broker, "w")
    watcher.subscribe("/engine/state")
    sender = _conn(broker, "s")
    sender.publish("/engine/confirm", {})
    errors = [m for m in watcher.messages_on("/engine/state") if m.get("type") == "error"]
    assert errors and errors[-1]["code"] == "nothing_pending"
    # the sender's connection remains fully usable
    sender.subscribe("/engine/state")
    assert engine.session.phase.value == "Editing"


def test_channel_mismatch_reported_not_fatal(study_cell, study_script_blank):
    broker = Broker()
    engine = SessionEngine(study_cell)
    engine.attach_bridge(broker)
    watcher = _conn(broker, "w")
    watcher.subscribe("/engine/state")
    engine.start_session(study_script_blank)
    engine.choose_modality("pick_bearing", "objectToPick", IM.GESTURE)
    wizard = _conn(broker)
    wizard.publish(
        "/input/speech",
        {"param": "objectToPick", "value": {"kind": "ObjectModelRef", "id": "bearing"}},
    )
    errors = [m for m in watcher.messages_on("/engine/state") if m.get("type") == "error"]
    assert errors and errors[-1]["code"] == "channel_mismatch"
    # correct channel still works afterwards
    wizard.publish(
        "/input/gesture",
        {"param": "objectToPick", "value": {"kind": "ObjectModelRef", "id": "bearing"}},
    )
    assert engine.unset_count() == 10
