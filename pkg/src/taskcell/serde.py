"""JSON serialization for processes, object models, parameter values and
cell configurations.

All documents are plain JSON with floats as JSON numbers. ``dumps`` emits a
canonical byte form (fixed key order, no extra whitespace) so that traces
and --json output stay byte-identical across runs.
"""

from __future__ import annotations

import json
from typing import Any

from . import model as m
from .geometry import Location3D, Pose6D, Quaternion


def dumps(doc: Any) -> str:
    return json.dumps(doc, separators=(",", ":"), ensure_ascii=False)


def _reject_duplicate_keys(pairs):
    seen = {}
    for key, value in pairs:
        if key in seen:
            raise ValueError(f"duplicate key {key!r} in JSON object")
        seen[key] = value
    return seen


def loads_strict(text: str) -> Any:
    """Parse JSON, rejecting duplicate object keys (ids must be unique)."""
    return json.loads(text, object_pairs_hook=_reject_duplicate_keys)


# --- geometry ----------------------------------------------------------------

def pose_to_json(p: Pose6D) -> dict:
    return {
        "position": [p.position[0], p.position[1], p.position[2]],
        "orientation": [
            p.orientation.w,
            p.orientation.x,
            p.orientation.y,
            p.orientation.z,
        ],
    }


def pose_from_json(doc: dict) -> Pose6D:
    pos = doc["position"]
    ori = doc.get("orientation", [1.0, 0.0, 0.0, 0.0])
    return Pose6D(tuple(float(c) for c in pos), Quaternion(*(float(c) for c in ori)))


# --- parameter values ---------------------------------------------------------

def value_to_json(v: m.ParameterValue) -> dict:
    if isinstance(v, m.ObjectModelRef):
        return {"kind": "ObjectModelRef", "id": v.id}
    if isinstance(v, Location3D):
        return {"kind": "Location3D", "x": v.x, "y": v.y, "z": v.z}
    if isinstance(v, Pose6D):
        return {"kind": "Pose6D", **pose_to_json(v)}
    if isinstance(v, m.PoseArray):
        return {"kind": "PoseArray", "poses": [pose_to_json(p) for p in v.poses]}
    if isinstance(v, m.VertexRef):
        doc = {"kind": "VertexRef", "id": v.id}
        if v.model_id is not None:
            doc["model"] = v.model_id
        return doc
    if isinstance(v, m.EdgeRef):
        doc = {"kind": "EdgeRef", "id": v.id}
        if v.model_id is not None:
            doc["model"] = v.model_id
        return doc
    if isinstance(v, m.NumberValue):
        return {"kind": "Number", "value": v.value, "unit": v.unit}
    if isinstance(v, m.ListChoice):
        return {"kind": "ListSelection", "choice": v.choice}
    if isinstance(v, m.ConstraintSet):
        return {
            "kind": "ConstraintSet",
            "constraints": [_constraint_to_json(c) for c in v.constraints],
        }
    if isinstance(v, m.MaterialRef):
        doc = {"kind": "MaterialRef", "material": v.material}
        if v.thickness_mm is not None:
            doc["thickness_mm"] = v.thickness_mm
        return doc
    raise TypeError(f"not a parameter value: {v!r}")


def _constraint_to_json(c: m.Constraint) -> dict:
    doc = {"type": c.type, "featureA": c.feature_a, "featureB": c.feature_b}
    if isinstance(c, m.Distance):
        doc["millimeters"] = c.millimeters
    return doc


def _constraint_from_json(doc: dict) -> m.Constraint:
    kind = doc.get("type")
    a, b = doc["featureA"], doc["featureB"]
    if kind == "Concentric":
        return m.Concentric(a, b)
    if kind == "Coplanar":
        return m.Coplanar(a, b)
    if kind == "Distance":
        return m.Distance(a, b, float(doc["millimeters"]))
    if kind == "AgainstCollar":
        return m.AgainstCollar(a, b)
    raise ValueError(f"unknown constraint type {kind!r}")


def value_from_json(doc: dict) -> m.ParameterValue:
    kind = doc.get("kind")
    if kind == "ObjectModelRef":
        return m.ObjectModelRef(str(doc["id"]))
    if kind == "Location3D":
        return Location3D(float(doc["x"]), float(doc["y"]), float(doc.get("z", 0.0)))
    if kind == "Pose6D":
        return pose_from_json(doc)
    if kind == "PoseArray":
        return m.PoseArray(tuple(pose_from_json(p) for p in doc["poses"]))
    if kind == "VertexRef":
        return m.VertexRef(str(doc["id"]), doc.get("model"))
    if kind == "EdgeRef":
        return m.EdgeRef(str(doc["id"]), doc.get("model"))
    if kind == "Number":
        return m.NumberValue(float(doc["value"]), str(doc["unit"]))
    if kind == "ListSelection":
        return m.ListChoice(str(doc["choice"]))
    if kind == "ConstraintSet":
        return m.ConstraintSet(
            tuple(_constraint_from_json(c) for c in doc["constraints"])
        )
    if kind == "MaterialRef":
        thickness = doc.get("thickness_mm")
        return m.MaterialRef(
            str(doc["material"]), None if thickness is None else float(thickness)
        )
    raise ValueError(f"unknown value kind {kind!r}")


# --- processes ----------------------------------------------------------------

def process_to_json(proc: m.ProcessDefinition) -> dict:
    return {
        "process_id": proc.process_id,
        "tasks": [
            {
                "instance_id": t.instance_id,
                "task": t.task_id,
                "values": {k: value_to_json(v) for k, v in t.values.items()},
            }
            for t in proc.tasks
        ],
    }


def process_from_json(doc: dict) -> m.ProcessDefinition:
    tasks = []
    for t in doc.get("tasks", []):
        values = {
            name: value_from_json(v) for name, v in (t.get("values") or {}).items()
        }
        tasks.append(m.TaskInstance(str(t["instance_id"]), str(t["task"]), values))
    return m.ProcessDefinition(str(doc["process_id"]), tuple(tasks))


# --- object models -------------------------------------------------------------

def object_model_to_json(om: m.ObjectModel) -> dict:
    doc: dict = {
        "id": om.id,
        "vertices": {k: list(v) for k, v in om.vertices.items()},
        "edges": {k: list(pair) for k, pair in om.edges.items()},
        "features": {
            k: {
                "point": list(f.point),
                "direction": list(f.direction),
                "radius": f.radius,
            }
            for k, f in om.features.items()
        },
        "height": om.height,
    }
    if om.grasp is not None:
        doc["grasp"] = {"point": list(om.grasp.point), "approach": list(om.grasp.approach)}
    return doc


def object_model_from_json(doc: dict) -> m.ObjectModel:
    grasp = None
    if doc.get("grasp"):
        grasp = m.GraspSpec(
            tuple(float(c) for c in doc["grasp"]["point"]),
            tuple(float(c) for c in doc["grasp"]["approach"]),
        )
    return m.ObjectModel(
        id=str(doc["id"]),
        vertices={k: tuple(float(c) for c in v) for k, v in (doc.get("vertices") or {}).items()},
        edges={k: (str(e[0]), str(e[1])) for k, e in (doc.get("edges") or {}).items()},
        features={
            k: m.CylinderFeature(
                tuple(float(c) for c in f["point"]),
                tuple(float(c) for c in f["direction"]),
                float(f["radius"]),
            )
            for k, f in (doc.get("features") or {}).items()
        },
        grasp=grasp,
        height=float(doc.get("height", 0.0)),
    )


def load_models(text: str) -> dict[str, m.ObjectModel]:
    doc = loads_strict(text)
    models = {}
    for entry in doc:
        om = object_model_from_json(entry)
        if om.id in models:
            raise ValueError(f"duplicate object model id {om.id}")
        models[om.id] = om
    return models
