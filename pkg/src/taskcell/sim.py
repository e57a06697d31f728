"""Deterministic simulated robot cell.

Executes skill invocations against an immutable world state, enforcing tool
and reachability preconditions, and emits a replayable trace: identical
(initial state, plan) pairs produce byte-identical serialized traces.

Simplifications, by design: perfect perception (detect_object returns the
true pose), reachability is a Euclidean ball around the robot base, grasped
objects ride on the TCP and are released exactly at it, tool changes are
instantaneous, no physics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Mapping, Optional

from .errors import (
    DualArmUnavailable,
    InvalidSkillArgument,
    MalformedSnapshot,
    NoGripper,
    NothingToGrasp,
    ObjectVanished,
    OutOfReach,
    SkillError,
    ToolChangeWhileHolding,
    ToolNotAttached,
    WeldParamsUnset,
)
from .geometry import Pose6D, Vec3, vnorm, vsub
from .kb import CellConfiguration, cell_from_json, cell_to_json
from .model import ArgKind, Component, ObjectModel, PoseArray
from .serde import dumps, pose_from_json, pose_to_json
from .tasks import SkillInvocation

GRASP_TOLERANCE_M = 0.005
SEAM_SAMPLE_SPACING_M = 0.005


@dataclass(frozen=True)
class SimObject:
    model_id: str
    pose: Pose6D
    on_table: bool
    grasp_point: Vec3 = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    skill: str
    args: dict
    outcome: str
    deltas: dict

    def as_dict(self) -> dict:
        # field order fixed so serialized traces are byte-stable
        return {
            "seq": self.seq,
            "skill": self.skill,
            "args": self.args,
            "outcome": self.outcome,
            "deltas": self.deltas,
        }


@dataclass(frozen=True)
class WeldEvent:
    kind: str  # "point" | "seam"
    poses: tuple[Pose6D, ...]


@dataclass(frozen=True)
class CellState:
    cell: CellConfiguration
    tcp: Pose6D
    attached_tool: Optional[Component]
    held_object: Optional[str]
    objects: Mapping[str, SimObject]
    welding_current_a: float = 0.0
    welding_speed_m_s: float = 0.0
    weld_log: tuple[WeldEvent, ...] = ()
    confirmations: int = 0
    trace: tuple[TraceEvent, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "objects", dict(self.objects))
        if self.welding_current_a < 0 or self.welding_speed_m_s < 0:
            raise ValueError("welding current/speed must be non-negative")
        held = [oid for oid, o in self.objects.items() if not o.on_table]
        if self.held_object is None:
            if held:
                raise ValueError("objects off the table but nothing held")
        elif held != [self.held_object]:
            raise ValueError("held object must be exactly the off-table one")

    def object_poses(self) -> dict[str, Pose6D]:
        return {oid: o.pose for oid, o in self.objects.items()}


def initial_state(
    cell: CellConfiguration, models: Mapping[str, ObjectModel]
) -> CellState:
    objects = {}
    for placed in cell.initial_objects:
        model = models.get(placed.model_id)
        grasp_point = model.grasp.point if model and model.grasp else (0.0, 0.0, 0.0)
        objects[placed.object_id] = SimObject(
            placed.model_id, placed.pose, True, grasp_point
        )
    return CellState(
        cell=cell,
        tcp=cell.base_pose,
        attached_tool=cell.attached_tool,
        held_object=None,
        objects=objects,
    )


# --- argument serialization ----------------------------------------------------

def _arg_to_json(kind: ArgKind, arg):
    if kind is ArgKind.POSE:
        return pose_to_json(arg)
    if kind is ArgKind.POSE_ARRAY:
        return [pose_to_json(p) for p in arg.poses]
    if kind is ArgKind.COMPONENT:
        return arg.value
    return arg


def invocation_args_json(inv: SkillInvocation) -> dict:
    sig = inv.signature
    return {
        formal.name: _arg_to_json(formal.kind, arg)
        for formal, arg in zip(sig.params, inv.args)
    }


# --- skill execution -------------------------------------------------------------

class AwaitingConfirmation(Exception):
    """Control signal: the plan is blocked on a human confirmation."""


def _require_tool(state: CellState, tool: Component) -> None:
    if state.attached_tool is not tool:
        if tool is Component.GRIPPER:
            raise NoGripper(f"gripper not attached (tool: {_tool_name(state)})")
        raise ToolNotAttached(
            f"{tool.value} not attached (tool: {_tool_name(state)})"
        )


def _tool_name(state: CellState) -> str:
    return state.attached_tool.value if state.attached_tool else "none"


def _check_reach(state: CellState, pose: Pose6D) -> None:
    dist = vnorm(vsub(pose.position, state.cell.base_pose.position))
    if dist > state.cell.reach_radius:
        raise OutOfReach(
            f"target {dist:.3f} m from base exceeds reach {state.cell.reach_radius} m"
        )


def _moved_objects(state: CellState, tcp: Pose6D) -> dict[str, SimObject]:
    """Held object rides on the TCP."""
    if state.held_object is None:
        return dict(state.objects)
    objects = dict(state.objects)
    held = objects[state.held_object]
    objects[state.held_object] = replace(held, pose=tcp)
    return objects


def _exec_move_to(state: CellState, inv: SkillInvocation):
    pose: Pose6D = inv.args[0]
    _check_reach(state, pose)
    new = replace(state, tcp=pose, objects=_moved_objects(state, pose))
    return new, {"tcp": pose_to_json(pose)}


def _exec_dual_arm_move_to(state: CellState, inv: SkillInvocation):
    if state.cell.component_count(Component.ROBOT_ARM) < 2:
        raise DualArmUnavailable("cell declares fewer than two robot arms")
    pose_a: Pose6D = inv.args[0]
    pose_b: Pose6D = inv.args[1]
    _check_reach(state, pose_a)
    _check_reach(state, pose_b)
    new = replace(state, tcp=pose_a, objects=_moved_objects(state, pose_a))
    return new, {"tcp": pose_to_json(pose_a), "tcp_b": pose_to_json(pose_b)}


def _exec_detect_object(state: CellState, inv: SkillInvocation):
    needed = {Component.DEPTH_SENSOR, Component.VISION_SW}
    if not needed <= state.cell.component_set:
        raise ToolNotAttached("object detection needs DepthSensor and VisionSw")
    model_id = inv.args[0]
    for oid, obj in state.objects.items():
        if obj.model_id == model_id:
            return state, {
                "detected": {"object": oid, "pose": pose_to_json(obj.pose)}
            }
    raise ObjectVanished(f"no object of model {model_id!r} present")


def _exec_open_gripper(state: CellState, inv: SkillInvocation):
    _require_tool(state, Component.GRIPPER)
    if state.held_object is None:
        return state, {"released": None}
    objects = dict(state.objects)
    held = objects[state.held_object]
    objects[state.held_object] = replace(held, pose=state.tcp, on_table=True)
    new = replace(state, held_object=None, objects=objects)
    return new, {"released": state.held_object, "at": pose_to_json(state.tcp)}


def _exec_close_gripper(state: CellState, inv: SkillInvocation):
    _require_tool(state, Component.GRIPPER)
    if state.held_object is not None:
        raise NothingToGrasp(f"already holding {state.held_object}")
    force = float(inv.args[0])
    if force <= 0:
        raise InvalidSkillArgument("gripper force must be positive")
    for oid, obj in state.objects.items():
        if not obj.on_table:
            continue
        grasp_world = obj.pose.transform(obj.grasp_point)
        if vnorm(vsub(grasp_world, state.tcp.position)) <= GRASP_TOLERANCE_M:
            objects = dict(state.objects)
            objects[oid] = replace(obj, pose=state.tcp, on_table=False)
            new = replace(state, held_object=oid, objects=objects)
            return new, {"held": oid, "force": force}
    raise NothingToGrasp(
        f"no grasp point within {GRASP_TOLERANCE_M * 1000:.0f} mm of tcp"
    )


def _exec_set_welding_current(state: CellState, inv: SkillInvocation):
    _require_tool(state, Component.WELDING_GUN)
    current = float(inv.args[0])
    if current < 0:
        raise InvalidSkillArgument("welding current must be non-negative")
    return replace(state, welding_current_a=current), {"welding_current_a": current}


def _exec_set_welding_speed(state: CellState, inv: SkillInvocation):
    _require_tool(state, Component.WELDING_GUN)
    speed = float(inv.args[0])
    if speed < 0:
        raise InvalidSkillArgument("welding speed must be non-negative")
    return replace(state, welding_speed_m_s=speed), {"welding_speed_m_s": speed}


def _weld_guard(state: CellState) -> None:
    _require_tool(state, Component.WELDING_GUN)
    if state.welding_current_a <= 0 or state.welding_speed_m_s <= 0:
        raise WeldParamsUnset("welding current and speed must be set before welding")


def _exec_weld_point(state: CellState, inv: SkillInvocation):
    _weld_guard(state)
    pose: Pose6D = inv.args[0]
    event = WeldEvent("point", (pose,))
    new = replace(state, weld_log=state.weld_log + (event,))
    return new, {"weld": {"kind": "point", "pose": pose_to_json(pose)}}


def sample_seam(poses: tuple[Pose6D, ...], spacing: float = SEAM_SAMPLE_SPACING_M) -> tuple[Pose6D, ...]:
    """Linear interpolation with consecutive samples at most ``spacing``
    apart; segment endpoints are exact."""
    samples: list[Pose6D] = [poses[0]]
    for start, end in zip(poses, poses[1:]):
        seg = vsub(end.position, start.position)
        length = vnorm(seg)
        steps = max(1, math.ceil(length / spacing - 1e-12))
        for i in range(1, steps):
            t = i / steps
            samples.append(
                Pose6D(
                    (
                        start.position[0] + seg[0] * t,
                        start.position[1] + seg[1] * t,
                        start.position[2] + seg[2] * t,
                    ),
                    start.orientation,
                )
            )
        samples.append(end)
    return tuple(samples)


def _exec_weld_seam(state: CellState, inv: SkillInvocation):
    _weld_guard(state)
    poses: PoseArray = inv.args[0]
    samples = sample_seam(poses.poses)
    event = WeldEvent("seam", samples)
    new = replace(state, weld_log=state.weld_log + (event,))
    return new, {"weld": {"kind": "seam", "samples": len(samples)}}


def _tool_pass_exec(tool: Component, name: str):
    def run(state: CellState, inv: SkillInvocation):
        _require_tool(state, tool)
        args = invocation_args_json(inv)
        return state, {"tool_event": {"kind": name, **args}}

    return run


def _exec_set_tool_power(state: CellState, inv: SkillInvocation):
    tool: Component = inv.args[0]
    _require_tool(state, tool)
    on: bool = inv.args[1]
    return state, {"tool_event": {"kind": "power", "tool": tool.value, "on": on}}


def _exec_attach_tool(state: CellState, inv: SkillInvocation):
    if state.held_object is not None:
        raise ToolChangeWhileHolding(
            f"cannot change tool while holding {state.held_object}"
        )
    tool: Component = inv.args[0]
    new = replace(state, attached_tool=tool)
    return new, {"tool": tool.value}


def _exec_await_confirmation(state: CellState, inv: SkillInvocation):
    if state.confirmations <= 0:
        raise AwaitingConfirmation()
    new = replace(state, confirmations=state.confirmations - 1)
    return new, {"confirmed": True}


_EXECUTORS = {
    "move_to": _exec_move_to,
    "dual_arm_move_to": _exec_dual_arm_move_to,
    "detect_object": _exec_detect_object,
    "open_gripper": _exec_open_gripper,
    "close_gripper": _exec_close_gripper,
    "set_welding_current": _exec_set_welding_current,
    "set_welding_speed": _exec_set_welding_speed,
    "weld_point": _exec_weld_point,
    "weld_seam": _exec_weld_seam,
    "saw_along_trajectory": _tool_pass_exec(Component.SAW_BLADE, "saw"),
    "set_tool_power": _exec_set_tool_power,
    "drill_screw": _tool_pass_exec(Component.DRILL_TOOL, "drill"),
    "apply_glue": _tool_pass_exec(Component.GLUE_TOOL, "glue"),
    "attach_tool": _exec_attach_tool,
    "await_confirmation": _exec_await_confirmation,
}


def execute_skill(state: CellState, inv: SkillInvocation) -> CellState:
    """Run one skill; returns the successor state with one appended trace
    event. Raises SkillError (state unchanged) on guard violations and
    AwaitingConfirmation when blocked on a human step."""
    executor = _EXECUTORS[inv.skill_id]
    new_state, deltas = executor(state, inv)
    event = TraceEvent(
        seq=len(state.trace),
        skill=inv.skill_id,
        args=invocation_args_json(inv),
        outcome="ok",
        deltas=deltas,
    )
    return replace(new_state, trace=state.trace + (event,))


def failure_event(state: CellState, inv: SkillInvocation, error: SkillError) -> CellState:
    event = TraceEvent(
        seq=len(state.trace),
        skill=inv.skill_id,
        args=invocation_args_json(inv),
        outcome=error.code,
        deltas={},
    )
    return replace(state, trace=state.trace + (event,))


@dataclass(frozen=True)
class PlanResult:
    state: CellState
    status: str  # "done" | "blocked" | "error"
    index: int  # skills completed; for error/blocked, the failing index
    error: Optional[SkillError] = None

    @property
    def done(self) -> bool:
        return self.status == "done"


def run_plan(
    state: CellState, plan: list[SkillInvocation], start: int = 0
) -> PlanResult:
    """Execute sequentially, stopping at the first error (recorded as a
    failure event) or at an unconfirmed human step (no event; resumable)."""
    for i in range(start, len(plan)):
        inv = plan[i]
        try:
            state = execute_skill(state, inv)
        except AwaitingConfirmation:
            return PlanResult(state, "blocked", i)
        except SkillError as err:
            return PlanResult(failure_event(state, inv, err), "error", i, err)
    return PlanResult(state, "done", len(plan))


def deliver_confirmation(state: CellState) -> CellState:
    return replace(state, confirmations=state.confirmations + 1)


# --- trace and snapshot serialization --------------------------------------------

def trace_to_jsonl(trace: tuple[TraceEvent, ...]) -> str:
    return "".join(dumps(e.as_dict()) + "\n" for e in trace)


def snapshot(state: CellState) -> bytes:
    doc = {
        "cell": cell_to_json(state.cell),
        "tcp": pose_to_json(state.tcp),
        "attached_tool": state.attached_tool.value if state.attached_tool else None,
        "held_object": state.held_object,
        "objects": {
            oid: {
                "model": o.model_id,
                "pose": pose_to_json(o.pose),
                "on_table": o.on_table,
                "grasp_point": list(o.grasp_point),
            }
            for oid, o in state.objects.items()
        },
        "welding_current_a": state.welding_current_a,
        "welding_speed_m_s": state.welding_speed_m_s,
        "weld_log": [
            {"kind": w.kind, "poses": [pose_to_json(p) for p in w.poses]}
            for w in state.weld_log
        ],
        "confirmations": state.confirmations,
        "trace": [e.as_dict() for e in state.trace],
    }
    return dumps(doc).encode("utf-8")


def restore(blob: bytes) -> CellState:
    try:
        doc = json.loads(blob.decode("utf-8"))
        cell = cell_from_json(doc["cell"])
        objects = {
            oid: SimObject(
                model_id=o["model"],
                pose=pose_from_json(o["pose"]),
                on_table=bool(o["on_table"]),
                grasp_point=tuple(float(c) for c in o["grasp_point"]),
            )
            for oid, o in doc["objects"].items()
        }
        weld_log = tuple(
            WeldEvent(w["kind"], tuple(pose_from_json(p) for p in w["poses"]))
            for w in doc["weld_log"]
        )
        trace = tuple(
            TraceEvent(e["seq"], e["skill"], e["args"], e["outcome"], e["deltas"])
            for e in doc["trace"]
        )
        attached = doc["attached_tool"]
        return CellState(
            cell=cell,
            tcp=pose_from_json(doc["tcp"]),
            attached_tool=None if attached is None else Component(attached),
            held_object=doc["held_object"],
            objects=objects,
            welding_current_a=float(doc["welding_current_a"]),
            welding_speed_m_s=float(doc["welding_speed_m_s"]),
            weld_log=weld_log,
            confirmations=int(doc["confirmations"]),
            trace=trace,
        )
    except (KeyError, ValueError, TypeError, AttributeError, UnicodeDecodeError) as exc:
        raise MalformedSnapshot(f"cannot restore snapshot: {exc}") from exc
