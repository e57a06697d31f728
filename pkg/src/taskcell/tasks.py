"""Task catalog and expansion: the object-level work units, their typed
parameters with applicable input modalities, and the machinery that turns a
parameterized task instance into a skill invocation sequence.

Expansion orderings are fixed conventions (the catalog declares required
skill *sets*, not sequences): pick = detect/approach/grasp/close/lift,
place = above/down/open/retreat, welding prepends the two material-derived
set-skills, tool tasks wrap their motions in power on/off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Mapping, Optional, Sequence

from . import model as m
from .errors import (
    DegenerateFeature,
    ObjectVanished,
    UnknownEdge,
    UnknownFeature,
    UnknownMaterial,
    UnknownVertex,
    UnsolvableConstraints,
)
from .geometry import (
    Pose6D,
    Quaternion,
    Vec3,
    vadd,
    vdot,
    vnorm,
    vscale,
    vsub,
    vunit,
)
from .kb import CellConfiguration, KnowledgeBase, PlacedObject
from .model import (
    AgainstCollar,
    Component,
    Concentric,
    ConstraintSet,
    Coplanar,
    DataKind,
    Distance,
    Domain,
    EdgeRef,
    InputModality,
    MaterialRef,
    NumberValue,
    ObjectModel,
    ParameterSpec,
    PoseArray,
    SkillMapping,
    TaskDefinition,
    TaskInstance,
    VertexRef,
)
from .serde import loads_strict

_ALL5 = frozenset(InputModality)
# Numeric, material and list parameters take only these three channels.
_FORM3 = frozenset(
    {InputModality.TOUCH, InputModality.SPEECH, InputModality.KEYBOARD_MOUSE}
)

_C = Component


def _spec(name: str, dtype: m.DataType, mods: frozenset[InputModality]) -> ParameterSpec:
    return ParameterSpec(name, dtype, mods)


_TASKS: tuple[TaskDefinition, ...] = (
    TaskDefinition(
        "PickObject",
        Domain.ASSEMBLY,
        (_spec("objectToPick", m.OBJECT_MODEL_REF, _ALL5),),
        frozenset({"move_to", "detect_object", "close_gripper"}),
        (
            SkillMapping(
                "vision",
                ("detect_object", "move_to", "close_gripper"),
                {_C.ROBOT_ARM, _C.GRIPPER, _C.DEPTH_SENSOR, _C.VISION_SW},
            ),
            SkillMapping(
                "taught_pose",
                ("move_to", "close_gripper"),
                {_C.ROBOT_ARM, _C.GRIPPER},
            ),
        ),
    ),
    TaskDefinition(
        "PlaceObject",
        Domain.ASSEMBLY,
        (_spec("locationToPlace", m.LOCATION_3D, _ALL5),),
        frozenset({"move_to", "open_gripper", "detect_object"}),
        (
            SkillMapping(
                "direct", ("move_to", "open_gripper"), {_C.ROBOT_ARM, _C.GRIPPER}
            ),
        ),
    ),
    TaskDefinition(
        "PickHold",
        Domain.ASSEMBLY,
        (
            _spec("objectToPick", m.OBJECT_MODEL_REF, _ALL5),
            _spec("holdPose", m.POSE_6D, _ALL5),
        ),
        # close_gripper added beyond the published skill list: holding an
        # object requires grasping it first.
        frozenset({"move_to", "open_gripper", "detect_object", "close_gripper"}),
        (
            SkillMapping(
                "vision",
                (
                    "detect_object",
                    "move_to",
                    "close_gripper",
                    "await_confirmation",
                    "open_gripper",
                ),
                {_C.ROBOT_ARM, _C.GRIPPER, _C.DEPTH_SENSOR, _C.VISION_SW},
            ),
            SkillMapping(
                "taught_pose",
                ("move_to", "close_gripper", "await_confirmation", "open_gripper"),
                {_C.ROBOT_ARM, _C.GRIPPER},
            ),
        ),
    ),
    TaskDefinition(
        "AssembleObjects",
        Domain.ASSEMBLY,
        (
            _spec("objectToAssemble", m.OBJECT_MODEL_REF, _ALL5),
            _spec("assembly", m.OBJECT_MODEL_REF, _ALL5),
            _spec(
                "assemblyConstraints",
                m.CONSTRAINT_SET,
                frozenset(
                    {InputModality.SPEECH, InputModality.TOUCH, InputModality.KEYBOARD_MOUSE}
                ),
            ),
        ),
        frozenset(
            {"move_to", "open_gripper", "close_gripper", "detect_object", "dual_arm_move_to"}
        ),
        (
            SkillMapping(
                "vision",
                ("detect_object", "move_to", "close_gripper", "open_gripper"),
                {_C.ROBOT_ARM, _C.GRIPPER, _C.DEPTH_SENSOR, _C.VISION_SW},
            ),
            SkillMapping(
                "taught_pose",
                ("move_to", "close_gripper", "open_gripper"),
                {_C.ROBOT_ARM, _C.GRIPPER},
            ),
        ),
    ),
    TaskDefinition(
        "DefineMaterial",
        Domain.WELDING,
        (
            _spec("material", m.MATERIAL_REF, _FORM3),
            _spec("thickness", m.number("mm"), _FORM3),
        ),
        frozenset({"set_welding_current", "set_welding_speed"}),
        (
            SkillMapping(
                "table",
                ("set_welding_current", "set_welding_speed"),
                {_C.WELDING_GUN},
            ),
        ),
    ),
    TaskDefinition(
        "PointWelding",
        Domain.WELDING,
        (
            _spec("objectToWeld", m.OBJECT_MODEL_REF, _ALL5),
            _spec("position", m.VERTEX_REF, _ALL5),
            _spec("material", m.MATERIAL_REF, _FORM3),
        ),
        # the two set-skills join the published pair so the material
        # parameter can take effect without a separate DefineMaterial step
        frozenset({"move_to", "weld_point", "set_welding_current", "set_welding_speed"}),
        (
            SkillMapping(
                "default",
                ("set_welding_current", "set_welding_speed", "move_to", "weld_point"),
                {_C.ROBOT_ARM, _C.WELDING_GUN},
            ),
        ),
    ),
    TaskDefinition(
        "SeamWelding",
        Domain.WELDING,
        (
            _spec("objectToWeld", m.OBJECT_MODEL_REF, _ALL5),
            _spec("edge", m.EDGE_REF, _ALL5),
            _spec("material", m.MATERIAL_REF, _FORM3),
        ),
        frozenset({"move_to", "weld_seam", "set_welding_current", "set_welding_speed"}),
        (
            SkillMapping(
                "default",
                ("set_welding_current", "set_welding_speed", "move_to", "weld_seam"),
                {_C.ROBOT_ARM, _C.WELDING_GUN},
            ),
        ),
    ),
    TaskDefinition(
        "Sawing",
        Domain.WOODWORKING,
        (
            _spec("objectToSaw", m.OBJECT_MODEL_REF, _ALL5),
            _spec("startPosition", m.POSE_6D, _ALL5),
            _spec("trajectory", m.POSE_ARRAY, _ALL5),
        ),
        frozenset({"saw_along_trajectory"}),
        (
            SkillMapping(
                "default", ("saw_along_trajectory",), {_C.ROBOT_ARM, _C.SAW_BLADE}
            ),
        ),
    ),
    TaskDefinition(
        "Grinding",
        Domain.WOODWORKING,
        (
            _spec("trajectory", m.POSE_ARRAY, _ALL5),
            _spec("grindingDepth", m.number("mm"), _FORM3),
            _spec("coarseness", m.list_selection("grinding_papers"), _FORM3),
        ),
        frozenset({"move_to", "set_tool_power"}),
        (
            SkillMapping(
                "default", ("set_tool_power", "move_to"), {_C.ROBOT_ARM, _C.GRIND_TOOL}
            ),
        ),
    ),
    TaskDefinition(
        "Deburring",
        Domain.WOODWORKING,
        (
            _spec("deburringType", m.list_selection("deburring_profiles"), _FORM3),
            _spec("radius", m.number("mm"), _FORM3),
            _spec("edge", m.EDGE_REF, _ALL5),
        ),
        frozenset({"move_to", "set_tool_power"}),
        (
            SkillMapping(
                "default", ("set_tool_power", "move_to"), {_C.ROBOT_ARM, _C.DEBURR_TOOL}
            ),
        ),
    ),
    TaskDefinition(
        "Milling",
        Domain.METAL_PROCESSING,
        (
            _spec("objectToMill", m.OBJECT_MODEL_REF, _ALL5),
            _spec("millingDepth", m.number("mm"), _FORM3),
            _spec("trajectory", m.POSE_ARRAY, _ALL5),
        ),
        frozenset({"move_to", "set_tool_power"}),
        (
            SkillMapping(
                "default", ("set_tool_power", "move_to"), {_C.ROBOT_ARM, _C.MILL_TOOL}
            ),
        ),
    ),
    TaskDefinition(
        "Screw",
        Domain.METAL_PROCESSING,
        (
            _spec("screwType", m.list_selection("screws"), _FORM3),
            _spec("objectsToScrew", m.OBJECT_MODEL_REF, _ALL5),
            _spec("hole", m.VERTEX_REF, _ALL5),
        ),
        frozenset({"move_to", "drill_screw"}),
        (
            SkillMapping(
                "default", ("move_to", "drill_screw"), {_C.ROBOT_ARM, _C.DRILL_TOOL}
            ),
        ),
    ),
    TaskDefinition(
        "AdhesiveBonding",
        Domain.METAL_PROCESSING,
        (
            _spec("glueType", m.list_selection("glues"), _FORM3),
            _spec("trajectory", m.POSE_ARRAY, _ALL5),
            _spec("amountOfGlue", m.number("ml"), _FORM3),
        ),
        frozenset({"move_to", "apply_glue"}),
        (
            SkillMapping(
                "default", ("move_to", "apply_glue"), {_C.ROBOT_ARM, _C.GLUE_TOOL}
            ),
        ),
    ),
)

_TASK_INDEX = {t.task_id: t for t in _TASKS}


def task_catalog() -> tuple[TaskDefinition, ...]:
    """The 13 programmable tasks across the four production domains."""
    return _TASKS


def task_index() -> dict[str, TaskDefinition]:
    return dict(_TASK_INDEX)


def task(task_id: str) -> Optional[TaskDefinition]:
    return _TASK_INDEX.get(task_id)


def applicable_modalities(kind: DataKind) -> frozenset[InputModality]:
    """Union of applicable modalities over all catalog parameters of a kind.

    The catalog is uniform per data type, so this is the canonical
    applicability used by knowledge-base queries that start from a bare
    data type instead of a concrete parameter.
    """
    mods: set[InputModality] = set()
    for t in _TASKS:
        for p in t.params:
            if p.data_type.kind is kind:
                mods |= p.modalities
    return frozenset(mods) if mods else _ALL5


# --- material table and defaults ---------------------------------------------

@dataclass(frozen=True)
class WeldSetting:
    current_a: float
    speed_m_s: float

    def __post_init__(self):
        if self.current_a <= 0 or self.speed_m_s <= 0:
            raise ValueError("welding current and speed must be positive")


@dataclass(frozen=True)
class MaterialTable:
    entries: Mapping[tuple[str, float], WeldSetting]

    def __post_init__(self):
        object.__setattr__(self, "entries", dict(self.entries))

    def lookup(self, material: str, thickness_mm: float) -> WeldSetting:
        key = (material, float(thickness_mm))
        if key not in self.entries:
            raise UnknownMaterial(f"no welding entry for {material} @ {thickness_mm} mm")
        return self.entries[key]


@dataclass(frozen=True)
class Defaults:
    approach_offset_m: float = 0.10
    gripper_force_n: float = 20.0
    weld_orientation: Quaternion = field(default_factory=lambda: Quaternion(0.0, 1.0, 0.0, 0.0))
    move_speed_m_s: float = 0.25
    move_accel_m_s2: float = 1.0
    drill_depth_mm: float = 12.0
    drill_force_n: float = 15.0


def load_materials(text: str) -> MaterialTable:
    entries = {}
    for row in loads_strict(text):
        entries[(str(row["material"]), float(row["thickness_mm"]))] = WeldSetting(
            float(row["current_a"]), float(row["speed_m_s"])
        )
    return MaterialTable(entries)


def load_defaults(text: str) -> Defaults:
    doc = loads_strict(text)
    return Defaults(
        approach_offset_m=float(doc["approach_offset_m"]),
        gripper_force_n=float(doc["gripper_force_n"]),
        weld_orientation=Quaternion(*(float(c) for c in doc["weld_orientation"])),
        move_speed_m_s=float(doc.get("move_speed_m_s", 0.25)),
        move_accel_m_s2=float(doc.get("move_accel_m_s2", 1.0)),
        drill_depth_mm=float(doc.get("drill_depth_mm", 12.0)),
        drill_force_n=float(doc.get("drill_force_n", 15.0)),
    )


@dataclass(frozen=True)
class Tables:
    materials: MaterialTable
    defaults: Defaults

    @staticmethod
    @lru_cache(maxsize=1)
    def packaged() -> "Tables":
        data = resources.files("taskcell.data")
        return Tables(
            materials=load_materials(data.joinpath("materials.json").read_text("utf-8")),
            defaults=load_defaults(data.joinpath("defaults.json").read_text("utf-8")),
        )


def packaged_models() -> dict[str, ObjectModel]:
    from .serde import load_models

    return load_models(
        resources.files("taskcell.data").joinpath("models.json").read_text("utf-8")
    )


# --- assembly pose solver ------------------------------------------------------

def solve_assembly_pose(
    a: ObjectModel, b: ObjectModel, constraints: ConstraintSet
) -> Pose6D:
    """Pose of model ``a`` relative to model ``b`` satisfying the constraints.

    Supported fragment: exactly one Concentric plus at most one axial
    constraint (Distance or AgainstCollar). The rotation is the minimal one
    aligning the two cylinder axes; the axial offset is 0 for a bare
    Concentric, the given distance for Distance, and flush contact for
    AgainstCollar.
    """
    concentric = [c for c in constraints.constraints if isinstance(c, Concentric)]
    axial = [
        c for c in constraints.constraints if isinstance(c, (Distance, AgainstCollar))
    ]
    coplanar = [c for c in constraints.constraints if isinstance(c, Coplanar)]
    if len(concentric) != 1 or len(axial) > 1 or coplanar:
        raise UnsolvableConstraints(
            "supported fragment is one Concentric plus at most one of "
            "Distance/AgainstCollar"
        )
    if len(constraints.constraints) != len(concentric) + len(axial):
        raise UnsolvableConstraints("unsupported constraint kind present")

    fa = _feature(a, concentric[0].feature_a)
    fb = _feature(b, concentric[0].feature_b)
    da = _axis_direction(a.id, concentric[0].feature_a, fa.direction)
    db = _axis_direction(b.id, concentric[0].feature_b, fb.direction)

    rotation = Quaternion.rotation_between(da, db)

    offset = 0.0
    if axial:
        c = axial[0]
        fa2 = _feature(a, c.feature_a)
        fb2 = _feature(b, c.feature_b)
        target = c.millimeters / 1000.0 if isinstance(c, Distance) else 0.0
        rotated_diff = rotation.rotate(vsub(fa2.point, fa.point))
        offset = target - vdot(rotated_diff, db) - vdot(vsub(fb.point, fb2.point), db)

    position = vsub(vadd(fb.point, vscale(db, offset)), rotation.rotate(fa.point))
    return Pose6D(position, rotation)


def _feature(model: ObjectModel, feature_id: str) -> m.CylinderFeature:
    feat = model.features.get(feature_id)
    if feat is None:
        raise UnknownFeature(f"{model.id} has no feature {feature_id!r}")
    return feat


def _axis_direction(model_id: str, feature_id: str, direction: Vec3) -> Vec3:
    if vnorm(direction) < 1e-12:
        raise DegenerateFeature(f"{model_id}.{feature_id}: zero axis direction")
    return vunit(direction)


# --- skill parameter inference ---------------------------------------------------

@dataclass(frozen=True)
class InferredValue:
    value: float
    source: str


_WELDING_TASKS = frozenset({"DefineMaterial", "PointWelding", "SeamWelding"})
_GRASPING_TASKS = frozenset({"PickObject", "PickHold", "AssembleObjects"})
_MOVING_TASKS = frozenset(_TASK_INDEX) - {"DefineMaterial"}


def infer_skill_parameters(
    task_id: str,
    values: Mapping[str, m.ParameterValue],
    tables: Tables,
) -> dict[str, InferredValue]:
    """Skill-level arguments derived from task-level parameters.

    Welding current/speed come from the material table, approach offsets and
    forces from the defaults table. Each value names its source so the
    inference is auditable.
    """
    inferred: dict[str, InferredValue] = {}
    d = tables.defaults
    if task_id in _WELDING_TASKS:
        material = values.get("material")
        if not isinstance(material, MaterialRef):
            raise UnknownMaterial(f"{task_id}: material parameter unset")
        thickness = material.thickness_mm
        thick_param = values.get("thickness")
        if isinstance(thick_param, NumberValue):
            thickness = thick_param.value
        if thickness is None:
            raise UnknownMaterial(
                f"material {material.material!r} carries no thickness"
            )
        setting = tables.materials.lookup(material.material, thickness)
        source = f"materials[{material.material}@{thickness:g}mm]"
        inferred["welding_current_a"] = InferredValue(setting.current_a, source)
        inferred["welding_speed_m_s"] = InferredValue(setting.speed_m_s, source)
    if task_id in _GRASPING_TASKS:
        inferred["gripper_force_n"] = InferredValue(
            d.gripper_force_n, "defaults.gripper_force_n"
        )
    if task_id in _MOVING_TASKS:
        inferred["approach_offset_m"] = InferredValue(
            d.approach_offset_m, "defaults.approach_offset_m"
        )
        inferred["move_speed_m_s"] = InferredValue(
            d.move_speed_m_s, "defaults.move_speed_m_s"
        )
        inferred["move_accel_m_s2"] = InferredValue(
            d.move_accel_m_s2, "defaults.move_accel_m_s2"
        )
    if task_id == "Screw":
        inferred["drill_depth_mm"] = InferredValue(
            d.drill_depth_mm, "defaults.drill_depth_mm"
        )
        inferred["drill_force_n"] = InferredValue(
            d.drill_force_n, "defaults.drill_force_n"
        )
    return inferred


# --- expansion --------------------------------------------------------------------

@dataclass(frozen=True)
class SkillInvocation:
    """A skill with bound arguments, attributable to a task instance."""

    skill_id: str
    args: tuple = ()
    instance_id: str = ""
    provenance: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        sig = m.skill(self.skill_id)
        if sig is None:
            raise ValueError(f"unknown skill {self.skill_id!r}")
        if len(self.args) != len(sig.params):
            raise ValueError(
                f"{self.skill_id}: expected {len(sig.params)} args, got {len(self.args)}"
            )
        for formal, arg in zip(sig.params, self.args):
            _check_arg(self.skill_id, formal, arg)

    @property
    def signature(self) -> m.SkillSignature:
        return m.skill(self.skill_id)  # type: ignore[return-value]


def _check_arg(skill_id: str, formal: m.FormalParam, arg) -> None:
    ok = {
        m.ArgKind.POSE: lambda: isinstance(arg, Pose6D),
        m.ArgKind.POSE_ARRAY: lambda: isinstance(arg, PoseArray),
        m.ArgKind.MODEL_REF: lambda: isinstance(arg, str),
        m.ArgKind.NUMBER: lambda: isinstance(arg, (int, float))
        and not isinstance(arg, bool)
        and math.isfinite(arg),
        m.ArgKind.COMPONENT: lambda: isinstance(arg, Component),
        m.ArgKind.FLAG: lambda: isinstance(arg, bool),
    }[formal.kind]()
    if not ok:
        raise ValueError(f"{skill_id}: argument {formal.name} has wrong kind")


class _Expander:
    def __init__(
        self,
        instance: TaskInstance,
        mapping: SkillMapping,
        cell: CellConfiguration,
        models: Mapping[str, ObjectModel],
        tables: Tables,
    ):
        self.instance = instance
        self.mapping = mapping
        self.cell = cell
        self.models = models
        self.tables = tables
        self.inferred = infer_skill_parameters(
            instance.task_id, instance.values, tables
        )

    # -- world lookups

    def placed(self, model_id: str) -> PlacedObject:
        for obj in self.cell.initial_objects:
            if obj.model_id == model_id:
                return obj
        raise ObjectVanished(f"no object of model {model_id!r} in cell")

    def model(self, model_id: str) -> ObjectModel:
        om = self.models.get(model_id)
        if om is None:
            raise ObjectVanished(f"unknown object model {model_id!r}")
        return om

    def vertex_world(self, ref: VertexRef, default_model: Optional[str]) -> Vec3:
        model_id = ref.model_id or default_model
        if model_id is None:
            raise UnknownVertex(f"vertex {ref.id!r} names no object model")
        om = self.model(model_id)
        if ref.id not in om.vertices:
            raise UnknownVertex(f"{model_id} has no vertex {ref.id!r}")
        return self.placed(model_id).pose.transform(om.vertices[ref.id])

    def edge_world(self, ref: EdgeRef, default_model: Optional[str]) -> tuple[Vec3, Vec3]:
        model_id = ref.model_id or default_model
        if model_id is None:
            raise UnknownEdge(f"edge {ref.id!r} names no object model")
        om = self.model(model_id)
        if ref.id not in om.edges:
            raise UnknownEdge(f"{model_id} has no edge {ref.id!r}")
        va, vb = om.edges[ref.id]
        pose = self.placed(model_id).pose
        return pose.transform(om.vertices[va]), pose.transform(om.vertices[vb])

    # -- argument helpers

    def value(self, name: str):
        return self.instance.values[name]

    @property
    def offset(self) -> float:
        return self.inferred["approach_offset_m"].value

    def move(self, pose: Pose6D) -> SkillInvocation:
        return SkillInvocation(
            "move_to",
            (
                pose,
                self.inferred["move_speed_m_s"].value,
                self.inferred["move_accel_m_s2"].value,
            ),
            self.instance.instance_id,
            (
                ("speed", self.inferred["move_speed_m_s"].source),
                ("accel", self.inferred["move_accel_m_s2"].source),
            ),
        )

    def invoke(self, skill_id: str, args: tuple = (), provenance=()) -> SkillInvocation:
        return SkillInvocation(skill_id, args, self.instance.instance_id, tuple(provenance))

    def above(self, point: Vec3, orientation: Quaternion = None) -> Pose6D:  # type: ignore[assignment]
        return Pose6D(
            vadd(point, (0.0, 0.0, self.offset)),
            orientation if orientation is not None else Quaternion(1, 0, 0, 0),
        )

    def pick_sequence(self, model_id: str) -> list[SkillInvocation]:
        obj = self.placed(model_id)
        om = self.model(model_id)
        if om.grasp is None:
            raise ObjectVanished(f"model {model_id!r} declares no grasp")
        grasp_w = obj.pose.transform(om.grasp.point)
        approach_dir = vunit(obj.pose.orientation.rotate(om.grasp.approach))
        approach = Pose6D(vsub(grasp_w, vscale(approach_dir, self.offset)))
        grasp_pose = Pose6D(grasp_w)
        seq = []
        if "detect_object" in self.mapping.skill_ids:
            seq.append(self.invoke("detect_object", (model_id,)))
        force = self.inferred["gripper_force_n"]
        seq += [
            self.move(approach),
            self.move(grasp_pose),
            self.invoke("close_gripper", (force.value,), (("force", force.source),)),
            self.move(approach),
        ]
        return seq

    def welding_setup(self) -> list[SkillInvocation]:
        current = self.inferred["welding_current_a"]
        speed = self.inferred["welding_speed_m_s"]
        return [
            self.invoke(
                "set_welding_current", (current.value,), (("current", current.source),)
            ),
            self.invoke(
                "set_welding_speed", (speed.value,), (("speed", speed.source),)
            ),
        ]

    def weld_orientation(self) -> Quaternion:
        return self.tables.defaults.weld_orientation

    # -- per-task builders

    def build(self) -> list[SkillInvocation]:
        builder = getattr(self, "_build_" + _snake(self.instance.task_id))
        return builder()

    def _build_pick_object(self):
        return self.pick_sequence(self.value("objectToPick").id)

    def _build_place_object(self):
        loc = self.value("locationToPlace").as_vec()
        above = self.above(loc)
        return [
            self.move(above),
            self.move(Pose6D(loc)),
            self.invoke("open_gripper"),
            self.move(above),
        ]

    def _build_pick_hold(self):
        # hold until the human signals completion, then hand the part over
        seq = self.pick_sequence(self.value("objectToPick").id)
        seq.append(self.move(self.value("holdPose")))
        seq.append(self.invoke("await_confirmation"))
        seq.append(self.invoke("open_gripper"))
        return seq

    def _build_assemble_objects(self):
        a_id = self.value("objectToAssemble").id
        b_id = self.value("assembly").id
        rel = solve_assembly_pose(
            self.model(a_id), self.model(b_id), self.value("assemblyConstraints")
        )
        target = self.placed(b_id).pose.compose(rel)
        seq = []
        if "detect_object" in self.mapping.skill_ids:
            seq += [
                self.invoke("detect_object", (a_id,)),
                self.invoke("detect_object", (b_id,)),
            ]
        # reuse the pick sequence minus its own detect step
        pick = [
            inv
            for inv in self.pick_sequence(a_id)
            if inv.skill_id != "detect_object"
        ]
        retreat = Pose6D(
            vadd(target.position, (0.0, 0.0, self.offset)), target.orientation
        )
        return seq + pick + [
            self.move(target),
            self.invoke("open_gripper"),
            self.move(retreat),
        ]

    def _build_define_material(self):
        return self.welding_setup()

    def _build_point_welding(self):
        point = self.vertex_world(
            self.value("position"), self.value("objectToWeld").id
        )
        down = self.weld_orientation()
        return self.welding_setup() + [
            self.move(self.above(point, down)),
            self.invoke("weld_point", (Pose6D(point, down),)),
        ]

    def _build_seam_welding(self):
        p0, p1 = self.edge_world(self.value("edge"), self.value("objectToWeld").id)
        down = self.weld_orientation()
        seam = PoseArray((Pose6D(p0, down), Pose6D(p1, down)))
        return self.welding_setup() + [
            self.move(self.above(p0, down)),
            self.invoke("weld_seam", (seam,)),
        ]

    def _build_sawing(self):
        start: Pose6D = self.value("startPosition")
        trajectory: PoseArray = self.value("trajectory")
        poses = trajectory.poses
        if vnorm(vsub(start.position, poses[0].position)) > 1e-12:
            poses = (start,) + poses
        return [self.invoke("saw_along_trajectory", (PoseArray(poses),))]

    def _tool_pass(self, tool: Component, poses: Sequence[Pose6D]):
        return (
            [self.invoke("set_tool_power", (tool, True))]
            + [self.move(p) for p in poses]
            + [self.invoke("set_tool_power", (tool, False))]
        )

    def _build_grinding(self):
        return self._tool_pass(_C.GRIND_TOOL, self.value("trajectory").poses)

    def _build_deburring(self):
        p0, p1 = self.edge_world(self.value("edge"), None)
        return self._tool_pass(_C.DEBURR_TOOL, (Pose6D(p0), Pose6D(p1)))

    def _build_milling(self):
        return self._tool_pass(_C.MILL_TOOL, self.value("trajectory").poses)

    def _build_screw(self):
        hole = self.vertex_world(self.value("hole"), self.value("objectsToScrew").id)
        depth = self.inferred["drill_depth_mm"]
        force = self.inferred["drill_force_n"]
        return [
            self.move(self.above(hole)),
            self.move(Pose6D(hole)),
            self.invoke(
                "drill_screw",
                (depth.value, force.value),
                (("depth", depth.source), ("force", force.source)),
            ),
        ]

    def _build_adhesive_bonding(self):
        trajectory: PoseArray = self.value("trajectory")
        amount: NumberValue = self.value("amountOfGlue")
        return [
            self.move(self.above(trajectory.poses[0].position)),
            self.invoke("apply_glue", (amount.value, trajectory)),
        ]


def _snake(task_id: str) -> str:
    out = []
    for i, ch in enumerate(task_id):
        if ch.isupper() and i > 0:
            out.append("_")
        out.append(ch.lower())
    return "".join(out)


def _required_tool(inv: SkillInvocation) -> Optional[Component]:
    sig = inv.signature
    if sig.tool_from_arg:
        return inv.args[0]
    return sig.required_tool


def _insert_tool_changes(
    seq: list[SkillInvocation], instance_id: str
) -> list[SkillInvocation]:
    """Prepend attach_tool for the first tool-requiring skill and insert a
    change before any later skill needing a different tool. The engine
    suppresses the leading attach when the tool is already mounted."""
    out: list[SkillInvocation] = []
    current: Optional[Component] = None
    first = True
    for inv in seq:
        tool = _required_tool(inv)
        if tool is not None and tool is not current:
            attach = SkillInvocation("attach_tool", (tool,), instance_id)
            if first:
                out.insert(0, attach)
            else:
                out.append(attach)
            current = tool
            first = False
        out.append(inv)
    return out


def expand(
    instance: TaskInstance,
    kb: KnowledgeBase,
    cell: CellConfiguration,
    models: Mapping[str, ObjectModel],
    tables: Optional[Tables] = None,
) -> list[SkillInvocation]:
    """Expand a fully parameterized task instance into a skill sequence.

    Deterministic for identical inputs. The chosen skill mapping is the
    first feasible one for the cell; NoFeasibleMapping propagates when none
    is.
    """
    t = task(instance.task_id)
    if t is None:
        raise ValueError(f"unknown task {instance.task_id!r}")
    mapping = kb.select_mapping(t, cell)
    expander = _Expander(
        instance, mapping, cell, models, tables if tables is not None else Tables.packaged()
    )
    return _insert_tool_changes(expander.build(), instance.instance_id)
