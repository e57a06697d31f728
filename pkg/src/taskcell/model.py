"""Shared domain vocabulary: modalities, components, data types, object
models, skill signatures, task definitions and process structure."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Union

from .geometry import UNIT_TOLERANCE, Location3D, Pose6D, Vec3, vec3, vfinite, vnorm


class InputModality(Enum):
    TOUCH = "Touch"
    GESTURE = "Gesture"
    SPEECH = "Speech"
    PEN = "Pen"
    KEYBOARD_MOUSE = "KeyboardMouse"


# Fixed order used whenever modalities need a deterministic tie-break.
MODALITY_ORDER: tuple[InputModality, ...] = tuple(InputModality)


class Component(Enum):
    TOUCHSCREEN = "Touchscreen"
    DEPTH_SENSOR = "DepthSensor"
    MICROPHONE = "Microphone"
    INFRARED_CAMERA_PAIR = "InfraredCameraPair"
    TRACKED_PEN = "TrackedPen"
    PROJECTOR = "Projector"
    KEYBOARD = "Keyboard"
    MOUSE = "Mouse"
    ROBOT_ARM = "RobotArm"
    GRIPPER = "Gripper"
    WELDING_GUN = "WeldingGun"
    SAW_BLADE = "SawBlade"
    GRIND_TOOL = "GrindTool"
    DEBURR_TOOL = "DeburrTool"
    MILL_TOOL = "MillTool"
    DRILL_TOOL = "DrillTool"
    GLUE_TOOL = "GlueTool"
    GESTURE_RECOGNIZER_SW = "GestureRecognizerSw"
    SPEECH_RECOGNIZER_SW = "SpeechRecognizerSw"
    PEN_TRACKER_SW = "PenTrackerSw"
    VISION_SW = "VisionSw"
    WIZARD_CONSOLE = "WizardConsole"


class Domain(Enum):
    ASSEMBLY = "Assembly"
    WELDING = "Welding"
    WOODWORKING = "Woodworking"
    METAL_PROCESSING = "MetalProcessing"


class DataKind(Enum):
    OBJECT_MODEL_REF = "ObjectModelRef"
    LOCATION_3D = "Location3D"
    POSE_6D = "Pose6D"
    POSE_ARRAY = "PoseArray"
    VERTEX_REF = "VertexRef"
    EDGE_REF = "EdgeRef"
    NUMBER = "Number"
    LIST_SELECTION = "ListSelection"
    CONSTRAINT_SET = "ConstraintSet"
    MATERIAL_REF = "MaterialRef"


NUMBER_UNITS = ("mm", "ml", "N", "A")


@dataclass(frozen=True)
class DataType:
    """A parameter's data type: a kind, plus unit / catalog qualifiers."""

    kind: DataKind
    unit: Optional[str] = None
    catalog: Optional[str] = None

    def __post_init__(self):
        if self.kind is DataKind.NUMBER:
            if self.unit not in NUMBER_UNITS:
                raise ValueError(f"Number type needs a unit from {NUMBER_UNITS}")
        elif self.unit is not None:
            raise ValueError("only Number types carry a unit")
        if self.catalog is not None and self.kind is not DataKind.LIST_SELECTION:
            raise ValueError("only ListSelection types carry a catalog id")

    def __str__(self) -> str:
        if self.kind is DataKind.NUMBER:
            return f"Number({self.unit})"
        if self.kind is DataKind.LIST_SELECTION and self.catalog:
            return f"ListSelection({self.catalog})"
        return self.kind.value


OBJECT_MODEL_REF = DataType(DataKind.OBJECT_MODEL_REF)
LOCATION_3D = DataType(DataKind.LOCATION_3D)
POSE_6D = DataType(DataKind.POSE_6D)
POSE_ARRAY = DataType(DataKind.POSE_ARRAY)
VERTEX_REF = DataType(DataKind.VERTEX_REF)
EDGE_REF = DataType(DataKind.EDGE_REF)
CONSTRAINT_SET = DataType(DataKind.CONSTRAINT_SET)
MATERIAL_REF = DataType(DataKind.MATERIAL_REF)


def number(unit: str) -> DataType:
    return DataType(DataKind.NUMBER, unit=unit)


def list_selection(catalog: str) -> DataType:
    return DataType(DataKind.LIST_SELECTION, catalog=catalog)


# --- parameter values -------------------------------------------------------

@dataclass(frozen=True)
class ObjectModelRef:
    id: str


@dataclass(frozen=True)
class VertexRef:
    """Named vertex on an object model.

    ``model_id`` is optional: tasks that carry an object-model parameter
    resolve the vertex against that object; tasks without one (e.g. edge
    deburring) must name the model explicitly.
    """

    id: str
    model_id: Optional[str] = None


@dataclass(frozen=True)
class EdgeRef:
    id: str
    model_id: Optional[str] = None


@dataclass(frozen=True)
class NumberValue:
    value: float
    unit: str

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError("number value must be finite")
        if self.unit not in NUMBER_UNITS:
            raise ValueError(f"unit must be one of {NUMBER_UNITS}")


@dataclass(frozen=True)
class ListChoice:
    choice: str


@dataclass(frozen=True)
class MaterialRef:
    """Material selection; thickness rides along so welding parameters can
    be inferred without a separate thickness input."""

    material: str
    thickness_mm: Optional[float] = None


@dataclass(frozen=True)
class PoseArray:
    """Trajectory or seam: at least two poses."""

    poses: tuple[Pose6D, ...]

    def __post_init__(self):
        object.__setattr__(self, "poses", tuple(self.poses))
        if len(self.poses) < 2:
            raise ValueError("a trajectory or seam needs at least 2 poses")


# Assembly constraints. The solver in taskcell.tasks supports exactly one
# Concentric plus at most one of Distance / AgainstCollar.

@dataclass(frozen=True)
class Concentric:
    feature_a: str
    feature_b: str
    type: str = field(default="Concentric", init=False)


@dataclass(frozen=True)
class Coplanar:
    feature_a: str
    feature_b: str
    type: str = field(default="Coplanar", init=False)


@dataclass(frozen=True)
class Distance:
    feature_a: str
    feature_b: str
    millimeters: float
    type: str = field(default="Distance", init=False)


@dataclass(frozen=True)
class AgainstCollar:
    """Push along the shared axis until feature A sits flush on feature B."""

    feature_a: str
    feature_b: str
    type: str = field(default="AgainstCollar", init=False)


Constraint = Union[Concentric, Coplanar, Distance, AgainstCollar]


@dataclass(frozen=True)
class ConstraintSet:
    constraints: tuple[Constraint, ...]

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))


ParameterValue = Union[
    ObjectModelRef,
    Location3D,
    Pose6D,
    PoseArray,
    VertexRef,
    EdgeRef,
    NumberValue,
    ListChoice,
    ConstraintSet,
    MaterialRef,
]

_VALUE_KINDS: tuple[tuple[type, DataKind], ...] = (
    (ObjectModelRef, DataKind.OBJECT_MODEL_REF),
    (Location3D, DataKind.LOCATION_3D),
    (Pose6D, DataKind.POSE_6D),
    (PoseArray, DataKind.POSE_ARRAY),
    (VertexRef, DataKind.VERTEX_REF),
    (EdgeRef, DataKind.EDGE_REF),
    (NumberValue, DataKind.NUMBER),
    (ListChoice, DataKind.LIST_SELECTION),
    (ConstraintSet, DataKind.CONSTRAINT_SET),
    (MaterialRef, DataKind.MATERIAL_REF),
)


def value_kind(value: ParameterValue) -> DataKind:
    for cls, kind in _VALUE_KINDS:
        if isinstance(value, cls):
            return kind
    raise TypeError(f"not a parameter value: {value!r}")


def matches_type(value: ParameterValue, dtype: DataType) -> bool:
    """Kind must match; for numbers the unit must match too."""
    try:
        kind = value_kind(value)
    except TypeError:
        return False
    if kind is not dtype.kind:
        return False
    if kind is DataKind.NUMBER and value.unit != dtype.unit:
        return False
    return True


# --- object models ----------------------------------------------------------

@dataclass(frozen=True)
class CylinderFeature:
    """Cylinder-axis feature used by the assembly constraint solver."""

    point: Vec3
    direction: Vec3
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "point", vec3(*self.point))
        object.__setattr__(self, "direction", vec3(*self.direction))


@dataclass(frozen=True)
class GraspSpec:
    point: Vec3
    approach: Vec3

    def __post_init__(self):
        object.__setattr__(self, "point", vec3(*self.point))
        object.__setattr__(self, "approach", vec3(*self.approach))


@dataclass(frozen=True)
class ObjectModel:
    id: str
    vertices: Mapping[str, Vec3] = field(default_factory=dict)
    edges: Mapping[str, tuple[str, str]] = field(default_factory=dict)
    features: Mapping[str, CylinderFeature] = field(default_factory=dict)
    grasp: Optional[GraspSpec] = None
    height: float = 0.0

    def __post_init__(self):
        object.__setattr__(
            self, "vertices", {k: vec3(*v) for k, v in self.vertices.items()}
        )
        object.__setattr__(
            self, "edges", {k: (str(a), str(b)) for k, (a, b) in self.edges.items()}
        )
        for vid, v in self.vertices.items():
            if not vfinite(v):
                raise ValueError(f"{self.id}: vertex {vid} not finite")
        for eid, (a, b) in self.edges.items():
            if a not in self.vertices or b not in self.vertices:
                raise ValueError(f"{self.id}: edge {eid} names a missing vertex")
        normalized = {}
        for fid, feat in self.features.items():
            n = vnorm(feat.direction)
            if n == 0.0:
                raise ValueError(f"{self.id}: feature {fid} has zero direction")
            if abs(n - 1.0) > UNIT_TOLERANCE:
                feat = CylinderFeature(
                    feat.point, tuple(c / n for c in feat.direction), feat.radius
                )
            normalized[fid] = feat
        object.__setattr__(self, "features", normalized)


# --- skill catalog ----------------------------------------------------------

class ArgKind(Enum):
    POSE = "pose"
    POSE_ARRAY = "poses"
    MODEL_REF = "model"
    NUMBER = "number"
    COMPONENT = "component"
    FLAG = "flag"


@dataclass(frozen=True)
class FormalParam:
    name: str
    kind: ArgKind
    unit: Optional[str] = None


@dataclass(frozen=True)
class SkillSignature:
    skill_id: str
    params: tuple[FormalParam, ...] = ()
    required_tool: Optional[Component] = None
    required_components: frozenset[Component] = frozenset()
    # set_tool_power's required tool is whatever its first argument names
    tool_from_arg: bool = False

    def __post_init__(self):
        names = [p.name for p in self.params]
        if len(names) != len(set(names)):
            raise ValueError(f"{self.skill_id}: duplicate parameter names")


def _num(name: str, unit: str) -> FormalParam:
    return FormalParam(name, ArgKind.NUMBER, unit)


_SKILLS: tuple[SkillSignature, ...] = (
    SkillSignature(
        "move_to",
        (FormalParam("pose", ArgKind.POSE), _num("speed", "m/s"), _num("accel", "m/s^2")),
    ),
    SkillSignature(
        "dual_arm_move_to",
        (
            FormalParam("pose_a", ArgKind.POSE),
            FormalParam("pose_b", ArgKind.POSE),
            _num("speed", "m/s"),
            _num("accel", "m/s^2"),
        ),
    ),
    SkillSignature(
        "detect_object",
        (FormalParam("model", ArgKind.MODEL_REF),),
        required_components=frozenset({Component.DEPTH_SENSOR, Component.VISION_SW}),
    ),
    SkillSignature("open_gripper", (), required_tool=Component.GRIPPER),
    SkillSignature(
        "close_gripper", (_num("force", "N"),), required_tool=Component.GRIPPER
    ),
    SkillSignature(
        "set_welding_current", (_num("current", "A"),), required_tool=Component.WELDING_GUN
    ),
    SkillSignature(
        "set_welding_speed", (_num("speed", "m/s"),), required_tool=Component.WELDING_GUN
    ),
    SkillSignature(
        "weld_point", (FormalParam("pose", ArgKind.POSE),), required_tool=Component.WELDING_GUN
    ),
    SkillSignature(
        "weld_seam",
        (FormalParam("poses", ArgKind.POSE_ARRAY),),
        required_tool=Component.WELDING_GUN,
    ),
    SkillSignature(
        "saw_along_trajectory",
        (FormalParam("poses", ArgKind.POSE_ARRAY),),
        required_tool=Component.SAW_BLADE,
    ),
    SkillSignature(
        "set_tool_power",
        (FormalParam("tool", ArgKind.COMPONENT), FormalParam("on", ArgKind.FLAG)),
        tool_from_arg=True,
    ),
    SkillSignature(
        "drill_screw",
        (_num("depth", "mm"), _num("force", "N")),
        required_tool=Component.DRILL_TOOL,
    ),
    SkillSignature(
        "apply_glue",
        (_num("amount", "ml"), FormalParam("poses", ArgKind.POSE_ARRAY)),
        required_tool=Component.GLUE_TOOL,
    ),
    SkillSignature("attach_tool", (FormalParam("tool", ArgKind.COMPONENT),)),
    SkillSignature("await_confirmation", ()),
)

_SKILL_INDEX = {s.skill_id: s for s in _SKILLS}


def skill_catalog() -> tuple[SkillSignature, ...]:
    """The closed skill catalog (hardware abstraction layer plus plumbing)."""
    return _SKILLS


def skill(skill_id: str) -> Optional[SkillSignature]:
    return _SKILL_INDEX.get(skill_id)


# Skills inserted by the expansion machinery itself, allowed in any plan.
PLUMBING_SKILLS = frozenset({"attach_tool", "await_confirmation"})


# --- task and process structure ---------------------------------------------

@dataclass(frozen=True)
class ParameterSpec:
    name: str
    data_type: DataType
    modalities: frozenset[InputModality]
    required: bool = True

    def __post_init__(self):
        object.__setattr__(self, "modalities", frozenset(self.modalities))
        if not self.modalities:
            raise ValueError(f"parameter {self.name}: applicable modalities empty")


@dataclass(frozen=True)
class SkillMapping:
    """One alternative expansion of a task, feasible when the cell has all
    required components."""

    name: str
    skill_ids: tuple[str, ...]
    required_components: frozenset[Component]

    def __post_init__(self):
        object.__setattr__(self, "skill_ids", tuple(self.skill_ids))
        object.__setattr__(
            self, "required_components", frozenset(self.required_components)
        )
        for sid in self.skill_ids:
            if skill(sid) is None:
                raise ValueError(f"mapping {self.name}: unknown skill {sid}")


@dataclass(frozen=True)
class TaskDefinition:
    task_id: str
    domain: Domain
    params: tuple[ParameterSpec, ...]
    required_skills: frozenset[str]
    mappings: tuple[SkillMapping, ...]

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "required_skills", frozenset(self.required_skills))
        object.__setattr__(self, "mappings", tuple(self.mappings))
        if not self.mappings:
            raise ValueError(f"{self.task_id}: at least one skill mapping required")
        names = [p.name for p in self.params]
        if len(names) != len(set(names)):
            raise ValueError(f"{self.task_id}: duplicate parameter names")

    def param(self, name: str) -> Optional[ParameterSpec]:
        for p in self.params:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True)
class TaskInstance:
    instance_id: str
    task_id: str
    values: Mapping[str, ParameterValue] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "values", dict(self.values))

    def with_value(self, name: str, value: ParameterValue) -> "TaskInstance":
        merged = dict(self.values)
        merged[name] = value
        return TaskInstance(self.instance_id, self.task_id, merged)


@dataclass(frozen=True)
class ProcessDefinition:
    process_id: str
    tasks: tuple[TaskInstance, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        ids = [t.instance_id for t in self.tasks]
        if len(ids) != len(set(ids)):
            raise ValueError(f"{self.process_id}: duplicate task instance ids")


@dataclass(frozen=True)
class Issue:
    """A single validation finding; issues are data, not failures."""

    code: str
    instance_id: str
    param: Optional[str] = None
    message: str = ""

    def as_dict(self) -> dict:
        d = {"code": self.code, "instance": self.instance_id}
        if self.param is not None:
            d["param"] = self.param
        if self.message:
            d["message"] = self.message
        return d


def validate_process(
    proc: ProcessDefinition, catalog: Mapping[str, TaskDefinition]
) -> list[Issue]:
    """Report unknown task ids, missing required parameters, unknown
    parameter names and type mismatches. Empty report means the process is
    executable once all parameters are acquired."""
    issues: list[Issue] = []
    for inst in proc.tasks:
        task = catalog.get(inst.task_id)
        if task is None:
            issues.append(
                Issue("unknown_task", inst.instance_id, message=inst.task_id)
            )
            continue
        for spec in task.params:
            value = inst.values.get(spec.name)
            if value is None:
                if spec.required:
                    issues.append(
                        Issue(
                            "missing_required_parameter",
                            inst.instance_id,
                            spec.name,
                            f"missing required parameter {spec.name}",
                        )
                    )
            elif not matches_type(value, spec.data_type):
                issues.append(
                    Issue(
                        "type_mismatch",
                        inst.instance_id,
                        spec.name,
                        f"expected {spec.data_type}",
                    )
                )
        for name in inst.values:
            if task.param(name) is None:
                issues.append(Issue("unknown_parameter", inst.instance_id, name))
    return issues
