"""Golden-data check of the task catalog.

The table below is an independent transcription of the task definitions:
parameter names, data types and applicable input modalities per parameter,
plus each task's domain. The catalog must match it exactly.
"""

from taskcell.model import DataKind, InputModality as IM
from taskcell.tasks import task_catalog, task_index

ALL5 = {IM.TOUCH, IM.GESTURE, IM.SPEECH, IM.PEN, IM.KEYBOARD_MOUSE}
FORM3 = {IM.TOUCH, IM.SPEECH, IM.KEYBOARD_MOUSE}

# task -> (domain, [(param, kind, unit, modalities)])
GOLDEN = {
    "PickObject": (
        "Assembly",
        [("objectToPick", DataKind.OBJECT_MODEL_REF, None, ALL5)],
    ),
    "PlaceObject": (
        "Assembly",
        [("locationToPlace", DataKind.LOCATION_3D, None, ALL5)],
    ),
    "PickHold": (
        "Assembly",
        [
            ("objectToPick", DataKind.OBJECT_MODEL_REF, None, ALL5),
            ("holdPose", DataKind.POSE_6D, None, ALL5),
        ],
    ),
    "AssembleObjects": (
        "Assembly",
        [
            ("objectToAssemble", DataKind.OBJECT_MODEL_REF, None, ALL5),
            ("assembly", DataKind.OBJECT_MODEL_REF, None, ALL5),
            (
                "assemblyConstraints",
                DataKind.CONSTRAINT_SET,
                None,
                {IM.SPEECH, IM.TOUCH, IM.KEYBOARD_MOUSE},
            ),
        ],
    ),
    "DefineMaterial": (
        "Welding",
        [
            ("material", DataKind.MATERIAL_REF, None, FORM3),
            ("thickness", DataKind.NUMBER, "mm", FORM3),
        ],
    ),
    "PointWelding": (
        "Welding",
        [
            ("objectToWeld", DataKind.OBJECT_MODEL_REF, None, ALL5),
            ("position", DataKind.VERTEX_REF, None, ALL5),
            ("material", DataKind.MATERIAL_REF, None, FORM3),
        ],
    ),
    "SeamWelding": (
        "Welding",
        [
            ("objectToWeld", DataKind.OBJECT_MODEL_REF, None, ALL5),
            ("edge", DataKind.EDGE_REF, None, ALL5),
            ("material", DataKind.MATERIAL_REF, None, FORM3),
        ],
    ),
    "Sawing": (
        "Woodworking",
        [
            ("objectToSaw", DataKind.OBJECT_MODEL_REF, None, ALL5),
            ("startPosition", DataKind.POSE_6D, None, ALL5),
            ("trajectory", DataKind.POSE_ARRAY, None, ALL5),
        ],
    ),
    "Grinding": (
        "Woodworking",
        [
            ("trajectory", DataKind.POSE_ARRAY, None, ALL5),
            ("grindingDepth", DataKind.NUMBER, "mm", FORM3),
            ("coarseness", DataKind.LIST_SELECTION, None, FORM3),
        ],
    ),
    "Deburring": (
        "Woodworking",
        [
            ("deburringType", DataKind.LIST_SELECTION, None, FORM3),
            ("radius", DataKind.NUMBER, "mm", FORM3),
            ("edge", DataKind.EDGE_REF, None, ALL5),
        ],
    ),
    "Milling": (
        "MetalProcessing",
        [
            ("objectToMill", DataKind.OBJECT_MODEL_REF, None, ALL5),
            ("millingDepth", DataKind.NUMBER, "mm", FORM3),
            ("trajectory", DataKind.POSE_ARRAY, None, ALL5),
        ],
    ),
    "Screw": (
        "MetalProcessing",
        [
            ("screwType", DataKind.LIST_SELECTION, None, FORM3),
            ("objectsToScrew", DataKind.OBJECT_MODEL_REF, None, ALL5),
            ("hole", DataKind.VERTEX_REF, None, ALL5),
        ],
    ),
    "AdhesiveBonding": (
        "MetalProcessing",
        [
            ("glueType", DataKind.LIST_SELECTION, None, FORM3),
            ("trajectory", DataKind.POSE_ARRAY, None, ALL5),
            ("amountOfGlue", DataKind.NUMBER, "ml", FORM3),
        ],
    ),
}

# published per-task skill requirements (normalized to catalog skill ids);
# the catalog may add supporting skills its expansion needs, never drop one
PUBLISHED_SKILLS = {
    "PickObject": {"move_to", "detect_object", "close_gripper"},
    "PlaceObject": {"move_to", "open_gripper", "detect_object"},
    "PickHold": {"move_to", "open_gripper", "detect_object"},
    "AssembleObjects": {
        "move_to",
        "open_gripper",
        "close_gripper",
        "detect_object",
        "dual_arm_move_to",
    },
    "DefineMaterial": {"set_welding_current", "set_welding_speed"},
    "PointWelding": {"move_to", "weld_point"},
    "SeamWelding": {"move_to", "weld_seam"},
    "Sawing": {"saw_along_trajectory"},
    "Grinding": {"move_to", "set_tool_power"},
    "Deburring": {"move_to", "set_tool_power"},
    "Milling": {"move_to", "set_tool_power"},
    "Screw": {"move_to", "drill_screw"},
    "AdhesiveBonding": {"move_to", "apply_glue"},
}


def test_catalog_has_exactly_the_thirteen_tasks():
    assert sorted(t.task_id for t in task_catalog()) == sorted(GOLDEN)


def test_parameter_specs_match_golden_table():
    index = task_index()
    for task_id, (domain, params) in GOLDEN.items():
        task = index[task_id]
        assert task.domain.value == domain, task_id
        actual = [
            (p.name, p.data_type.kind, p.data_type.unit, set(p.modalities))
            for p in task.params
        ]
        expected = [(n, k, u, set(mods)) for n, k, u, mods in params]
        assert actual == expected, task_id


def test_every_parameter_is_required():
    for task in task_catalog():
        assert all(p.required for p in task.params), task.task_id


def test_declared_skills_cover_published_requirements():
    index = task_index()
    for task_id, published in PUBLISHED_SKILLS.items():
        assert published <= index[task_id].required_skills, task_id


def test_point_welding_declares_move_and_weld():
    task = task_index()["PointWelding"]
    assert {"move_to", "weld_point"} <= task.required_skills


def test_every_task_has_a_mapping():
    for task in task_catalog():
        assert task.mappings
        for mapping in task.mappings:
            assert mapping.required_components
