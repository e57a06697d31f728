"""Knowledge base: which input modalities a cell supports, how modalities
rank per parameter data type, and which task skill-mapping is feasible.

The rule set realizes a small ontology as executable data: a modality is
available iff any of its alternative component sets is fully present in the
cell. A WizardConsole substitutes recognizer *software* (never hardware
sensors), so a cell with sensors mounted but recognition unplugged still
offers gesture, speech and pen input through a hidden operator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping, Optional, Sequence

from .errors import MalformedTable, NoFeasibleMapping
from .geometry import Pose6D
from .model import (
    MODALITY_ORDER,
    Component,
    DataKind,
    InputModality,
    ParameterSpec,
    SkillMapping,
    TaskDefinition,
)
from .serde import loads_strict, pose_from_json, pose_to_json


@dataclass(frozen=True)
class PlacedObject:
    object_id: str
    model_id: str
    pose: Pose6D


@dataclass(frozen=True)
class CellConfiguration:
    """Declared components and initial world contents of a robot cell.

    ``components`` is an ordered tuple and may repeat an entry: a cell with
    two robot arms lists RobotArm twice. Rule checks use the set view.
    """

    cell_id: str
    components: tuple[Component, ...]
    base_pose: Pose6D
    reach_radius: float
    initial_objects: tuple[PlacedObject, ...] = ()
    attached_tool: Optional[Component] = None

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "initial_objects", tuple(self.initial_objects))
        if self.reach_radius <= 0:
            raise ValueError("reach radius must be positive")
        ids = [o.object_id for o in self.initial_objects]
        if len(ids) != len(set(ids)):
            raise ValueError("object ids must be unique")

    @property
    def component_set(self) -> frozenset[Component]:
        return frozenset(self.components)

    def component_count(self, component: Component) -> int:
        return sum(1 for c in self.components if c is component)

    def with_object_poses(self, poses: Mapping[str, Pose6D]) -> "CellConfiguration":
        """Copy with updated object poses (the live world model)."""
        objects = tuple(
            PlacedObject(o.object_id, o.model_id, poses.get(o.object_id, o.pose))
            for o in self.initial_objects
        )
        return CellConfiguration(
            self.cell_id,
            self.components,
            self.base_pose,
            self.reach_radius,
            objects,
            self.attached_tool,
        )


@dataclass(frozen=True)
class ModalityRule:
    modality: InputModality
    alternatives: tuple[frozenset[Component], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "alternatives", tuple(frozenset(a) for a in self.alternatives)
        )
        if not self.alternatives or any(not a for a in self.alternatives):
            raise ValueError(f"{self.modality.value}: empty rule alternative")


def default_rules() -> tuple[ModalityRule, ...]:
    C = Component
    return (
        ModalityRule(InputModality.TOUCH, ({C.TOUCHSCREEN},)),
        ModalityRule(
            InputModality.GESTURE,
            (
                {C.DEPTH_SENSOR, C.GESTURE_RECOGNIZER_SW},
                {C.DEPTH_SENSOR, C.WIZARD_CONSOLE},
            ),
        ),
        ModalityRule(
            InputModality.SPEECH,
            (
                {C.MICROPHONE, C.SPEECH_RECOGNIZER_SW},
                {C.MICROPHONE, C.WIZARD_CONSOLE},
            ),
        ),
        ModalityRule(
            InputModality.PEN,
            (
                {C.INFRARED_CAMERA_PAIR, C.TRACKED_PEN, C.PEN_TRACKER_SW},
                {C.INFRARED_CAMERA_PAIR, C.TRACKED_PEN, C.WIZARD_CONSOLE},
            ),
        ),
        ModalityRule(InputModality.KEYBOARD_MOUSE, ({C.KEYBOARD, C.MOUSE},)),
    )


def rule_components(rules: Sequence[ModalityRule]) -> tuple[Component, ...]:
    """All components referenced by any rule, in first-appearance order."""
    seen: list[Component] = []
    for rule in rules:
        for alt in rule.alternatives:
            for c in sorted(alt, key=lambda c: c.value):
                if c not in seen:
                    seen.append(c)
    return tuple(seen)


@dataclass(frozen=True)
class PreferenceTable:
    """Per-data-type modality ranking, best first."""

    rows: Mapping[DataKind, tuple[InputModality, ...]]

    def __post_init__(self):
        object.__setattr__(self, "rows", dict(self.rows))
        for kind, mods in self.rows.items():
            if len(mods) != len(set(mods)):
                raise MalformedTable(f"{kind.value}: duplicate modality in ranking")

    def ranking(self, kind: DataKind) -> tuple[InputModality, ...]:
        return self.rows.get(kind, ())


def load_preferences(text: str) -> PreferenceTable:
    """Parse a preference table document; raises MalformedTable."""
    try:
        doc = loads_strict(text)
    except ValueError as exc:
        raise MalformedTable(f"unparseable table: {exc}") from exc
    if not isinstance(doc, dict) or not doc:
        raise MalformedTable("preference table must be a non-empty JSON object")
    rows: dict[DataKind, tuple[InputModality, ...]] = {}
    for key, mods in doc.items():
        try:
            kind = DataKind(key)
        except ValueError as exc:
            raise MalformedTable(f"unknown data type {key!r}") from exc
        try:
            row = tuple(InputModality(name) for name in mods)
        except ValueError as exc:
            raise MalformedTable(f"{key}: unknown modality") from exc
        if len(row) != len(set(row)):
            raise MalformedTable(f"{key}: duplicate modality in ranking")
        rows[kind] = row
    return PreferenceTable(rows)


def load_rules(text: str) -> tuple[ModalityRule, ...]:
    try:
        doc = loads_strict(text)
    except ValueError as exc:
        raise MalformedTable(f"unparseable rules: {exc}") from exc
    rules = []
    for name, alts in doc.items():
        try:
            modality = InputModality(name)
            alternatives = tuple(
                frozenset(Component(c) for c in alt) for alt in alts
            )
        except ValueError as exc:
            raise MalformedTable(str(exc)) from exc
        rules.append(ModalityRule(modality, alternatives))
    return tuple(rules)


def _data_text(name: str) -> str:
    return resources.files("taskcell.data").joinpath(name).read_text("utf-8")


@dataclass(frozen=True)
class KnowledgeBase:
    rules: tuple[ModalityRule, ...] = field(default_factory=default_rules)
    preferences: PreferenceTable = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.preferences is None:
            object.__setattr__(
                self, "preferences", load_preferences(_data_text("preferences.json"))
            )

    @staticmethod
    def default() -> "KnowledgeBase":
        return KnowledgeBase(
            rules=load_rules(_data_text("rules.json")),
            preferences=load_preferences(_data_text("preferences.json")),
        )

    def available_modalities(self, cell: CellConfiguration) -> frozenset[InputModality]:
        return available_modalities(cell, self.rules)

    def modalities_for_parameter(
        self, spec: ParameterSpec, cell: CellConfiguration
    ) -> tuple[InputModality, ...]:
        return rank_modalities(
            spec.modalities, self.available_modalities(cell), self.preferences, spec.data_type.kind
        )

    def preferred_modality(
        self, spec: ParameterSpec, cell: CellConfiguration
    ) -> Optional[InputModality]:
        ranked = self.modalities_for_parameter(spec, cell)
        return ranked[0] if ranked else None

    def select_mapping(
        self, task: TaskDefinition, cell: CellConfiguration
    ) -> SkillMapping:
        """First declared mapping whose component needs the cell satisfies."""
        have = cell.component_set
        for mapping in task.mappings:
            if mapping.required_components <= have:
                return mapping
        raise NoFeasibleMapping(
            f"{task.task_id}: no skill mapping executable in cell {cell.cell_id}"
        )


def available_modalities(
    cell: CellConfiguration, rules: Sequence[ModalityRule] | None = None
) -> frozenset[InputModality]:
    """Modalities whose rule has at least one alternative fully present."""
    have = cell.component_set
    found = set()
    for rule in rules if rules is not None else default_rules():
        if any(alt <= have for alt in rule.alternatives):
            found.add(rule.modality)
    return frozenset(found)


def rank_modalities(
    applicable: Iterable[InputModality],
    available: frozenset[InputModality],
    preferences: PreferenceTable,
    kind: DataKind,
) -> tuple[InputModality, ...]:
    """(applicable ∩ available) ordered by the preference row for ``kind``;
    modalities absent from the row keep the fixed enumeration order, last."""
    usable = set(applicable) & available
    row = preferences.ranking(kind)
    ranked = [mod for mod in row if mod in usable]
    ranked.extend(mod for mod in MODALITY_ORDER if mod in usable and mod not in row)
    return tuple(ranked)


# --- cell configuration JSON ---------------------------------------------------

def cell_to_json(cell: CellConfiguration) -> dict:
    doc: dict = {
        "cell_id": cell.cell_id,
        "components": [c.value for c in cell.components],
        "base_pose": pose_to_json(cell.base_pose),
        "reach_radius": cell.reach_radius,
        "objects": [
            {"id": o.object_id, "model": o.model_id, "pose": pose_to_json(o.pose)}
            for o in cell.initial_objects
        ],
    }
    if cell.attached_tool is not None:
        doc["attached_tool"] = cell.attached_tool.value
    return doc


def cell_from_json(doc: dict) -> CellConfiguration:
    attached = doc.get("attached_tool")
    return CellConfiguration(
        cell_id=str(doc["cell_id"]),
        components=tuple(Component(c) for c in doc.get("components", [])),
        base_pose=pose_from_json(doc["base_pose"]),
        reach_radius=float(doc["reach_radius"]),
        initial_objects=tuple(
            PlacedObject(str(o["id"]), str(o["model"]), pose_from_json(o["pose"]))
            for o in doc.get("objects", [])
        ),
        attached_tool=None if attached is None else Component(attached),
    )


def load_cell(text: str) -> CellConfiguration:
    return cell_from_json(loads_strict(text))


def packaged_cell(name: str) -> CellConfiguration:
    return load_cell(_data_text(f"cells/{name}.json"))
