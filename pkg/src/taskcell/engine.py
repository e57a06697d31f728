"""Interactive programming sessions.

Walks a process's unset parameters in document order, offers ranked input
modalities for each, accepts values from the touch UI or wizard-injected
channels, then expands tasks against the live world model and executes the
plans on the simulated cell.

All session mutations are serialized through one re-entrant lock; bridge
connections may deliver commands concurrently but they apply one at a time.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

from . import serde
from .errors import (
    ChannelMismatch,
    EngineError,
    ModalityNotOffered,
    NoModalityAvailable,
    NothingPending,
    TaskcellError,
    TypeMismatch,
    WrongPhase,
)
from .kb import CellConfiguration, KnowledgeBase
from .model import (
    DataKind,
    DataType,
    InputModality,
    ObjectModel,
    ParameterSpec,
    ParameterValue,
    ProcessDefinition,
    TaskDefinition,
    TaskInstance,
    matches_type,
    validate_process,
)
from .sim import (
    CellState,
    TraceEvent,
    deliver_confirmation,
    initial_state,
    run_plan,
)
from .tasks import Tables, applicable_modalities, expand, packaged_models, task_index

INPUT_TOPICS: dict[InputModality, str] = {
    InputModality.TOUCH: "/input/touch",
    InputModality.GESTURE: "/input/gesture",
    InputModality.SPEECH: "/input/speech",
    InputModality.PEN: "/input/pen",
}

TOPIC_PARAMETER_REQUEST = "/engine/parameter_request"
TOPIC_STATE = "/engine/state"
TOPIC_TRACE = "/engine/trace"
TOPIC_CONFIRM = "/engine/confirm"

# Channels announced to the wizard when chosen; touch and keyboard/mouse
# submit directly from the UI without a cue.
WIZARD_CHANNELS = frozenset(
    {InputModality.GESTURE, InputModality.SPEECH, InputModality.PEN}
)


class Phase(Enum):
    EDITING = "Editing"
    AWAITING_VALUE = "AwaitingValue"
    EXECUTING = "Executing"
    DONE = "Done"
    FAILED = "Failed"


@dataclass(frozen=True)
class ParameterRequest:
    session_id: str
    instance_id: str
    param: str
    data_type: DataType
    modalities: tuple[InputModality, ...]
    prompt: str

    def __post_init__(self):
        if not self.modalities:
            raise ValueError("ranked modality list must be non-empty")

    def as_json(self) -> dict:
        doc = {
            "session": self.session_id,
            "instance": self.instance_id,
            "param": self.param,
            "dataType": self.data_type.kind.value,
            "modalities": [m.value for m in self.modalities],
            "prompt": self.prompt,
        }
        if self.data_type.unit is not None:
            doc["unit"] = self.data_type.unit
        if self.data_type.catalog is not None:
            doc["catalog"] = self.data_type.catalog
        return doc


@dataclass
class Session:
    session_id: str
    process: ProcessDefinition
    cell: CellConfiguration
    values: dict[str, dict[str, ParameterValue]]
    state: CellState
    phase: Phase = Phase.EDITING
    awaiting: Optional[tuple[str, str, InputModality]] = None
    failure_reason: Optional[str] = None
    record: list[tuple] = field(default_factory=list)
    plans: list[tuple[str, list]] = field(default_factory=list)
    # execution bookkeeping for resumable plans
    task_pos: int = 0
    current_plan: Optional[list] = None
    plan_pos: int = 0
    blocked: bool = False

    def instance_values(self, instance: TaskInstance) -> TaskInstance:
        merged = dict(instance.values)
        merged.update(self.values.get(instance.instance_id, {}))
        return TaskInstance(instance.instance_id, instance.task_id, merged)


class ReadyToExecute:
    """Marker returned by submit_value when no unset parameters remain."""

    def __repr__(self):  # pragma: no cover
        return "ReadyToExecute"


READY = ReadyToExecute()


class SessionEngine:
    """One active session per engine instance."""

    def __init__(
        self,
        cell: CellConfiguration,
        kb: Optional[KnowledgeBase] = None,
        models: Optional[Mapping[str, ObjectModel]] = None,
        tables: Optional[Tables] = None,
        catalog: Optional[Mapping[str, TaskDefinition]] = None,
    ):
        self.cell = cell
        self.kb = kb if kb is not None else KnowledgeBase.default()
        self.models = dict(models) if models is not None else packaged_models()
        self.tables = tables if tables is not None else Tables.packaged()
        self.catalog = dict(catalog) if catalog is not None else task_index()
        self.session: Optional[Session] = None
        self._lock = threading.RLock()
        self._broker = None
        self._session_counter = 0
        self._published_events = 0

    # --- session lifecycle -------------------------------------------------

    def start_session(self, process: ProcessDefinition) -> Optional[ParameterRequest]:
        """Open a session; returns the first ParameterRequest, or None when
        the process is already fully parameterized."""
        with self._lock:
            issues = [
                i
                for i in validate_process(process, self.catalog)
                if i.code != "missing_required_parameter"
            ]
            if issues:
                raise EngineError(
                    "process is structurally invalid: "
                    + "; ".join(f"{i.instance_id}:{i.code}" for i in issues)
                )
            self._session_counter += 1
            self.session = Session(
                session_id=f"s{self._session_counter}",
                process=process,
                cell=self.cell,
                values={},
                state=initial_state(self.cell, self.models),
            )
            self._published_events = 0
            self._publish_phase()
            return self._advance_request()

    def _require_session(self) -> Session:
        if self.session is None:
            raise WrongPhase("no active session")
        return self.session

    def _unset_params(self) -> list[tuple[TaskInstance, str, DataType]]:
        s = self._require_session()
        missing = []
        for instance in s.process.tasks:
            merged = s.instance_values(instance)
            taskdef = self.catalog[instance.task_id]
            for spec in taskdef.params:
                if spec.required and spec.name not in merged.values:
                    missing.append((instance, spec.name, spec.data_type))
        return missing

    def unset_count(self) -> int:
        return len(self._unset_params())

    @property
    def ready_to_execute(self) -> bool:
        s = self.session
        return (
            s is not None and s.phase is Phase.EDITING and not self._unset_params()
        )

    def current_request(self) -> Optional[ParameterRequest]:
        with self._lock:
            s = self.session
            if s is None or s.phase not in (Phase.EDITING, Phase.AWAITING_VALUE):
                return None
            return self._request_for_next_unset(publish=False)

    def _request_for_next_unset(self, publish: bool) -> Optional[ParameterRequest]:
        s = self._require_session()
        missing = self._unset_params()
        if not missing:
            return None
        instance, name, _ = missing[0]
        spec = self.catalog[instance.task_id].param(name)
        ranked = self.kb.modalities_for_parameter(spec, self.cell)
        if not ranked:
            raise NoModalityAvailable(
                f"{instance.instance_id}.{name}: no input modality available in "
                f"cell {self.cell.cell_id}"
            )
        request = ParameterRequest(
            session_id=s.session_id,
            instance_id=instance.instance_id,
            param=name,
            data_type=spec.data_type,
            modalities=ranked,
            prompt=f"Set {name} for {instance.task_id} ({instance.instance_id})",
        )
        if publish:
            self._publish(TOPIC_PARAMETER_REQUEST, request.as_json())
        return request

    def _advance_request(self) -> Optional[ParameterRequest]:
        return self._request_for_next_unset(publish=True)

    # --- parameter acquisition ----------------------------------------------

    def choose_modality(
        self, instance_id: str, param: str, modality: InputModality
    ) -> ParameterRequest:
        """Pick the input channel for the currently requested parameter."""
        with self._lock:
            s = self._require_session()
            if s.phase not in (Phase.EDITING, Phase.AWAITING_VALUE):
                raise WrongPhase(f"cannot choose modality in phase {s.phase.value}")
            request = self.current_request()
            if (
                request is None
                or request.instance_id != instance_id
                or request.param != param
            ):
                raise ModalityNotOffered(
                    f"{instance_id}.{param} is not the requested parameter"
                )
            if modality not in request.modalities:
                raise ModalityNotOffered(
                    f"{modality.value} not offered for {instance_id}.{param}"
                )
            s.phase = Phase.AWAITING_VALUE
            s.awaiting = (instance_id, param, modality)
            s.record.append(("choose", instance_id, param, modality.value))
            self._publish_phase()
            if modality in WIZARD_CHANNELS:
                self._publish(
                    INPUT_TOPICS[modality],
                    {
                        "type": "activate",
                        "instance": instance_id,
                        "param": param,
                        "modality": modality.value,
                        "dataType": request.data_type.kind.value,
                    },
                )
            return request

    def submit_value(
        self,
        channel: InputModality,
        value: ParameterValue,
        param: Optional[str] = None,
    ):
        """Store a value arriving on ``channel``; returns the next
        ParameterRequest or READY when none remain."""
        with self._lock:
            s = self._require_session()
            if s.phase is not Phase.AWAITING_VALUE or s.awaiting is None:
                raise WrongPhase("no parameter is awaiting a value")
            instance_id, name, chosen = s.awaiting
            if channel is not chosen:
                raise ChannelMismatch(
                    f"value arrived on {channel.value}, chosen was {chosen.value}"
                )
            if param is not None and param != name:
                raise ChannelMismatch(
                    f"value targets {param!r}, awaited parameter is {name!r}"
                )
            instance = next(
                t for t in s.process.tasks if t.instance_id == instance_id
            )
            spec = self.catalog[instance.task_id].param(name)
            if not matches_type(value, spec.data_type):
                raise TypeMismatch(
                    f"{instance_id}.{name}: expected {spec.data_type}"
                )
            s.values.setdefault(instance_id, {})[name] = value
            s.phase = Phase.EDITING
            s.awaiting = None
            s.record.append(
                ("submit", channel.value, name, serde.dumps(serde.value_to_json(value)))
            )
            self._publish_phase()
            nxt = self._advance_request()
            return nxt if nxt is not None else READY

    # --- execution ------------------------------------------------------------

    def execute(self) -> tuple[TraceEvent, ...]:
        """Expand and run every task; returns the trace so far. Phase moves
        to Done, Failed, or stays Executing when blocked on a human step."""
        with self._lock:
            s = self._require_session()
            if s.phase is not Phase.EDITING:
                raise WrongPhase(f"cannot execute in phase {s.phase.value}")
            if self._unset_params():
                raise WrongPhase("unset required parameters remain")
            s.phase = Phase.EXECUTING
            s.task_pos = 0
            s.current_plan = None
            s.plan_pos = 0
            s.record.append(("execute",))
            self._publish_phase()
            return self._run()

    def confirm_human_step(self) -> tuple[TraceEvent, ...]:
        """Deliver one human confirmation and resume execution."""
        with self._lock:
            s = self._require_session()
            if s.phase is not Phase.EXECUTING or not s.blocked:
                raise NothingPending("no await_confirmation is pending")
            s.state = deliver_confirmation(s.state)
            s.blocked = False
            s.record.append(("confirm",))
            return self._run()

    def _run(self) -> tuple[TraceEvent, ...]:
        s = self._require_session()
        tasks = s.process.tasks
        while s.task_pos < len(tasks):
            if s.current_plan is None:
                instance = s.instance_values(tasks[s.task_pos])
                world = self.cell.with_object_poses(s.state.object_poses())
                try:
                    plan = expand(instance, self.kb, world, self.models, self.tables)
                except TaskcellError as err:
                    return self._fail(err.code, str(err))
                if (
                    plan
                    and plan[0].skill_id == "attach_tool"
                    and s.state.attached_tool is plan[0].args[0]
                ):
                    plan = plan[1:]  # tool already mounted
                s.current_plan = plan
                s.plan_pos = 0
                s.plans.append((instance.instance_id, plan))
            result = run_plan(s.state, s.current_plan, start=s.plan_pos)
            s.state = result.state
            self._publish_new_events()
            if result.status == "blocked":
                s.plan_pos = result.index
                s.blocked = True
                self._publish_phase()
                return s.state.trace
            if result.status == "error":
                return self._fail(result.error.code, str(result.error))
            s.current_plan = None
            s.task_pos += 1
        s.phase = Phase.DONE
        self._publish_phase()
        return s.state.trace

    def _fail(self, code: str, message: str) -> tuple[TraceEvent, ...]:
        s = self._require_session()
        s.phase = Phase.FAILED
        s.failure_reason = code
        self._publish(TOPIC_STATE, {"type": "error", "code": code, "message": message})
        self._publish_phase()
        return s.state.trace

    # --- bridge integration ------------------------------------------------------

    def attach_bridge(self, broker) -> None:
        self._broker = broker
        for topic in INPUT_TOPICS.values():
            broker.add_topic_listener(topic, self._on_input)
        broker.add_topic_listener(TOPIC_CONFIRM, self._on_confirm)
        broker.add_subscription_hook(TOPIC_PARAMETER_REQUEST, self._on_request_subscribe)
        broker.register_service("engine.choose_modality", self._svc_choose)
        broker.register_service("engine.submit_parameter", self._svc_submit)
        broker.register_service("engine.execute", self._svc_execute)
        broker.register_service("engine.confirm", self._svc_confirm)
        broker.register_service("engine.status", self._svc_status)
        broker.register_service("engine.describe_process", self._svc_describe)
        broker.register_service("engine.models", self._svc_models)
        broker.register_service(
            "kb.modalities_for_parameter", self._svc_kb_modalities
        )

    def _publish(self, topic: str, msg: dict) -> None:
        if self._broker is not None:
            self._broker.publish(None, topic, msg)

    def _publish_phase(self) -> None:
        s = self.session
        if s is None:
            return
        doc = {
            "type": "phase",
            "session": s.session_id,
            "phase": s.phase.value,
            "unset": self.unset_count() if s.phase in (Phase.EDITING, Phase.AWAITING_VALUE) else 0,
            "ready": self.ready_to_execute,
            "blocked": s.blocked,
        }
        if s.failure_reason:
            doc["reason"] = s.failure_reason
        self._publish(TOPIC_STATE, doc)

    def _publish_new_events(self) -> None:
        s = self.session
        if s is None or self._broker is None:
            return
        for event in s.state.trace[self._published_events :]:
            self._publish(TOPIC_TRACE, event.as_dict())
        self._published_events = len(s.state.trace)

    def _on_request_subscribe(self, conn) -> None:
        # late subscribers miss earlier publishes; re-emit the open request
        request = self.current_request()
        if request is not None:
            conn.send(
                {
                    "op": "publish",
                    "topic": TOPIC_PARAMETER_REQUEST,
                    "msg": request.as_json(),
                }
            )

    def _on_input(self, topic: str, msg: dict) -> None:
        if "value" not in msg:
            return  # activation cue or other chatter, not a submission
        channel = next(
            mod for mod, t in INPUT_TOPICS.items() if t == topic
        )
        try:
            value = serde.value_from_json(msg["value"])
            self.submit_value(channel, value, msg.get("param"))
        except (EngineError, ValueError, KeyError) as err:
            code = getattr(err, "code", "bad_value")
            self._publish(
                TOPIC_STATE,
                {"type": "error", "code": code, "message": str(err), "channel": topic},
            )

    def _on_confirm(self, topic: str, msg: dict) -> None:
        try:
            self.confirm_human_step()
        except EngineError as err:
            self._publish(
                TOPIC_STATE, {"type": "error", "code": err.code, "message": str(err)}
            )

    # --- bridge services ----------------------------------------------------------

    def _svc_choose(self, args: dict) -> dict:
        modality = InputModality(args["modality"])
        request = self.choose_modality(args["instance"], args["param"], modality)
        return {"ok": True, "awaiting": request.param, "modality": modality.value}

    def _svc_submit(self, args: dict) -> dict:
        channel = InputModality(args["channel"])
        value = serde.value_from_json(args["value"])
        nxt = self.submit_value(channel, value, args.get("param"))
        if isinstance(nxt, ReadyToExecute):
            return {"ready": True}
        return {"ready": False, "next": nxt.as_json()}

    def _svc_execute(self, args: dict) -> dict:
        trace = self.execute()
        s = self._require_session()
        return {
            "phase": s.phase.value,
            "blocked": s.blocked,
            "events": [e.as_dict() for e in trace],
            "reason": s.failure_reason,
        }

    def _svc_confirm(self, args: dict) -> dict:
        trace = self.confirm_human_step()
        s = self._require_session()
        return {"phase": s.phase.value, "blocked": s.blocked, "events": len(trace)}

    def _svc_status(self, args: dict) -> dict:
        with self._lock:
            return self._status_snapshot()

    def _status_snapshot(self) -> dict:
        s = self.session
        if s is None:
            return {"session": None}
        request = self.current_request()
        return {
            "session": s.session_id,
            "phase": s.phase.value,
            "unset": self.unset_count() if s.phase in (Phase.EDITING, Phase.AWAITING_VALUE) else 0,
            "ready": self.ready_to_execute,
            "blocked": s.blocked,
            "request": request.as_json() if request else None,
            "awaiting": (
                {
                    "instance": s.awaiting[0],
                    "param": s.awaiting[1],
                    "modality": s.awaiting[2].value,
                }
                if s.awaiting
                else None
            ),
        }

    def _svc_describe(self, args: dict) -> dict:
        with self._lock:
            return self._describe_process()

    def _describe_process(self) -> dict:
        s = self._require_session()
        instances = []
        for instance in s.process.tasks:
            merged = s.instance_values(instance)
            taskdef = self.catalog[instance.task_id]
            params = []
            for spec in taskdef.params:
                set_value = merged.values.get(spec.name)
                params.append(
                    {
                        "name": spec.name,
                        "dataType": spec.data_type.kind.value,
                        "unit": spec.data_type.unit,
                        "catalog": spec.data_type.catalog,
                        "required": spec.required,
                        "set": set_value is not None,
                        "value": serde.value_to_json(set_value) if set_value else None,
                    }
                )
            instances.append(
                {
                    "instance": instance.instance_id,
                    "task": instance.task_id,
                    "domain": taskdef.domain.value,
                    "requiredSkills": sorted(taskdef.required_skills),
                    "params": params,
                }
            )
        return {"process": s.process.process_id, "tasks": instances}

    def _svc_models(self, args: dict) -> dict:
        return {
            "models": [serde.object_model_to_json(m) for m in self.models.values()]
        }

    def _svc_kb_modalities(self, args: dict) -> dict:
        if "instance" in args and "param" in args:
            s = self._require_session()
            instance = next(
                t for t in s.process.tasks if t.instance_id == args["instance"]
            )
            spec = self.catalog[instance.task_id].param(args["param"])
        else:
            kind = DataKind(args["dataType"])
            spec = ParameterSpec(
                "query",
                DataType(kind, unit="mm" if kind is DataKind.NUMBER else None),
                applicable_modalities(kind),
            )
        ranked = self.kb.modalities_for_parameter(spec, self.cell)
        return {"modalities": [m.value for m in ranked]}


def apply_command(engine: SessionEngine, command: tuple) -> None:
    """Apply one recorded session command (used for replay)."""
    kind = command[0]
    if kind == "choose":
        engine.choose_modality(command[1], command[2], InputModality(command[3]))
    elif kind == "submit":
        value = serde.value_from_json(serde.loads_strict(command[3]))
        engine.submit_value(InputModality(command[1]), value, command[2])
    elif kind == "execute":
        engine.execute()
    elif kind == "confirm":
        engine.confirm_human_step()
    else:  # pragma: no cover
        raise ValueError(f"unknown command {kind!r}")
