import pytest

from taskcell.errors import NoFeasibleMapping, UnknownEdge, UnknownMaterial, UnknownVertex
from taskcell.geometry import Location3D, Pose6D
from taskcell.kb import CellConfiguration
from taskcell.model import (
    Component as C,
    Concentric,
    ConstraintSet,
    EdgeRef,
    ListChoice,
    MaterialRef,
    NumberValue,
    ObjectModelRef,
    PLUMBING_SKILLS,
    PoseArray,
    TaskInstance,
    VertexRef,
)
from taskcell.tasks import expand, infer_skill_parameters, task_index


def _inst(task_id, **values):
    return TaskInstance(f"i_{task_id.lower()}", task_id, values)


def _skills(plan):
    return [inv.skill_id for inv in plan]


def test_pick_with_vision(vision_cell, knowledge, models, tables):
    plan = expand(
        _inst("PickObject", objectToPick=ObjectModelRef("bearing")),
        knowledge,
        vision_cell,
        models,
        tables,
    )
    assert _skills(plan) == [
        "attach_tool",
        "detect_object",
        "move_to",
        "move_to",
        "close_gripper",
        "move_to",
    ]
    force = plan[4].args[0]
    assert force == 20.0
    assert dict(plan[4].provenance)["force"] == "defaults.gripper_force_n"
    # approach is one offset above the grasp point along the model approach
    approach, grasp = plan[2].args[0], plan[3].args[0]
    assert approach.position[2] == pytest.approx(grasp.position[2] + 0.10)


def test_pick_without_vision_uses_taught_pose(study_cell, knowledge, models, tables):
    plan = expand(
        _inst("PickObject", objectToPick=ObjectModelRef("bearing")),
        knowledge,
        study_cell,
        models,
        tables,
    )
    assert set(_skills(plan)) <= {"move_to", "close_gripper", "attach_tool"}
    grasp = plan[2].args[0]
    # taught grasp pose comes from the configured world model
    assert grasp.position == pytest.approx((0.30, 0.20, 0.012))


def test_define_material_echoes_table(knowledge, vision_cell, models, tables):
    plan = expand(
        _inst(
            "DefineMaterial",
            material=MaterialRef("steel"),
            thickness=NumberValue(2.0, "mm"),
        ),
        knowledge,
        vision_cell,
        models,
        tables,
    )
    assert _skills(plan) == ["attach_tool", "set_welding_current", "set_welding_speed"]
    assert plan[1].args[0] == 110.0
    assert plan[2].args[0] == 0.006
    assert dict(plan[1].provenance)["current"] == "materials[steel@2mm]"


def test_infer_unknown_material(tables):
    with pytest.raises(UnknownMaterial):
        infer_skill_parameters(
            "PointWelding",
            {
                "material": MaterialRef("unobtainium", 2.0),
                "objectToWeld": ObjectModelRef("rake"),
                "position": VertexRef("v1"),
            },
            tables,
        )


def test_infer_material_without_thickness(tables):
    with pytest.raises(UnknownMaterial):
        infer_skill_parameters(
            "SeamWelding", {"material": MaterialRef("steel")}, tables
        )


def test_infer_pick_defaults(tables):
    inferred = infer_skill_parameters(
        "PickObject", {"objectToPick": ObjectModelRef("bearing")}, tables
    )
    assert inferred["approach_offset_m"].value == 0.10
    assert inferred["gripper_force_n"].value == 20.0
    assert inferred["gripper_force_n"].source == "defaults.gripper_force_n"


def test_point_welding_sets_params_then_welds(study_cell, knowledge, models, tables):
    plan = expand(
        _inst(
            "PointWelding",
            objectToWeld=ObjectModelRef("rake"),
            position=VertexRef("v3"),
            material=MaterialRef("steel", 2.0),
        ),
        knowledge,
        study_cell,
        models,
        tables,
    )
    assert _skills(plan) == [
        "attach_tool",
        "set_welding_current",
        "set_welding_speed",
        "move_to",
        "weld_point",
    ]
    weld_pose: Pose6D = plan[4].args[0]
    # rake at (0,-0.25,0); v3 at model (0,0,0.02)
    assert weld_pose.position == pytest.approx((0.0, -0.25, 0.02))
    # straight down orientation
    assert weld_pose.orientation.rotate((0, 0, 1)) == pytest.approx((0, 0, -1))


def test_seam_welding_converts_edge_to_two_poses(study_cell, knowledge, models, tables):
    plan = expand(
        _inst(
            "SeamWelding",
            objectToWeld=ObjectModelRef("rake"),
            edge=EdgeRef("e3"),
            material=MaterialRef("steel", 2.0),
        ),
        knowledge,
        study_cell,
        models,
        tables,
    )
    seam: PoseArray = plan[-1].args[0]
    assert len(seam.poses) == 2
    assert seam.poses[0].position == pytest.approx((0.0, -0.25, 0.02))
    assert seam.poses[1].position == pytest.approx((0.0, -0.19, 0.02))


def test_unknown_vertex_and_edge(study_cell, knowledge, models, tables):
    with pytest.raises(UnknownVertex):
        expand(
            _inst(
                "PointWelding",
                objectToWeld=ObjectModelRef("rake"),
                position=VertexRef("v99"),
                material=MaterialRef("steel", 2.0),
            ),
            knowledge,
            study_cell,
            models,
            tables,
        )
    with pytest.raises(UnknownEdge):
        expand(
            _inst(
                "Deburring",
                deburringType=ListChoice("rounded"),
                radius=NumberValue(2.0, "mm"),
                edge=EdgeRef("e1"),  # no model named: nothing to resolve against
            ),
            knowledge,
            _tool_cell(C.DEBURR_TOOL),
            models,
            tables,
        )


def _tool_cell(tool):
    return CellConfiguration(
        "tool_cell",
        (C.ROBOT_ARM, C.GRIPPER, C.WELDING_GUN, tool),
        Pose6D((0, -0.75, 0)),
        1.6,
        (),
    )


def test_no_feasible_mapping(knowledge, models, tables):
    cell = CellConfiguration(
        "gripper_only", (C.ROBOT_ARM, C.GRIPPER), Pose6D((0, 0, 0)), 1.5
    )
    with pytest.raises(NoFeasibleMapping):
        expand(
            _inst(
                "SeamWelding",
                objectToWeld=ObjectModelRef("rake"),
                edge=EdgeRef("e1"),
                material=MaterialRef("steel", 2.0),
            ),
            knowledge,
            cell,
            models,
            tables,
        )


def test_deburring_with_explicit_model(knowledge, models, tables, study_cell):
    cell = CellConfiguration(
        "deburr",
        study_cell.components + (C.DEBURR_TOOL,),
        study_cell.base_pose,
        study_cell.reach_radius,
        study_cell.initial_objects,
    )
    plan = expand(
        _inst(
            "Deburring",
            deburringType=ListChoice("rounded"),
            radius=NumberValue(2.0, "mm"),
            edge=EdgeRef("e2", model_id="rake"),
        ),
        knowledge,
        cell,
        models,
        tables,
    )
    assert _skills(plan) == [
        "attach_tool",
        "set_tool_power",
        "move_to",
        "move_to",
        "set_tool_power",
    ]
    assert plan[1].args == (C.DEBURR_TOOL, True)
    assert plan[4].args == (C.DEBURR_TOOL, False)


def test_assemble_moves_to_solved_pose(study_cell, knowledge, models, tables):
    plan = expand(
        _inst(
            "AssembleObjects",
            objectToAssemble=ObjectModelRef("bearing"),
            assembly=ObjectModelRef("axis"),
            assemblyConstraints=ConstraintSet((Concentric("bore", "shaft"),)),
        ),
        knowledge,
        study_cell,
        models,
        tables,
    )
    # taught mapping in the study cell: no detect steps
    assert _skills(plan) == [
        "attach_tool",
        "move_to",
        "move_to",
        "close_gripper",
        "move_to",
        "move_to",
        "open_gripper",
        "move_to",
    ]
    target: Pose6D = plan[5].args[0]
    # axis at (-0.30, 0.20, 0); shaft feature point at z 0.06
    assert target.position == pytest.approx((-0.30, 0.20, 0.06))


_FULL_VALUES = {
    "PickObject": {"objectToPick": ObjectModelRef("bearing")},
    "PlaceObject": {"locationToPlace": Location3D(0.0, 0.0, 0.0)},
    "PickHold": {
        "objectToPick": ObjectModelRef("bearing"),
        "holdPose": Pose6D((0.0, 0.1, 0.3)),
    },
    "AssembleObjects": {
        "objectToAssemble": ObjectModelRef("bearing"),
        "assembly": ObjectModelRef("axis"),
        "assemblyConstraints": ConstraintSet((Concentric("bore", "shaft"),)),
    },
    "DefineMaterial": {
        "material": MaterialRef("steel"),
        "thickness": NumberValue(2.0, "mm"),
    },
    "PointWelding": {
        "objectToWeld": ObjectModelRef("rake"),
        "position": VertexRef("v3"),
        "material": MaterialRef("steel", 2.0),
    },
    "SeamWelding": {
        "objectToWeld": ObjectModelRef("rake"),
        "edge": EdgeRef("e3"),
        "material": MaterialRef("steel", 2.0),
    },
    "Sawing": {
        "objectToSaw": ObjectModelRef("rake"),
        "startPosition": Pose6D((0.0, -0.25, 0.02)),
        "trajectory": PoseArray((Pose6D((0.0, -0.2, 0.02)), Pose6D((0.1, -0.2, 0.02)))),
    },
    "Grinding": {
        "trajectory": PoseArray((Pose6D((0.0, 0.0, 0.02)), Pose6D((0.1, 0.0, 0.02)))),
        "grindingDepth": NumberValue(0.5, "mm"),
        "coarseness": ListChoice("P120"),
    },
    "Deburring": {
        "deburringType": ListChoice("rounded"),
        "radius": NumberValue(2.0, "mm"),
        "edge": EdgeRef("e1", model_id="rake"),
    },
    "Milling": {
        "objectToMill": ObjectModelRef("rake"),
        "millingDepth": NumberValue(1.0, "mm"),
        "trajectory": PoseArray((Pose6D((0.0, 0.0, 0.02)), Pose6D((0.05, 0.0, 0.02)))),
    },
    "Screw": {
        "screwType": ListChoice("M5x12"),
        "objectsToScrew": ObjectModelRef("rake"),
        "hole": VertexRef("v1"),
    },
    "AdhesiveBonding": {
        "glueType": ListChoice("epoxy"),
        "trajectory": PoseArray((Pose6D((0.0, 0.0, 0.02)), Pose6D((0.05, 0.0, 0.02)))),
        "amountOfGlue": NumberValue(5.0, "ml"),
    },
}


def test_every_expansion_is_sound(vision_cell, knowledge, models, tables):
    """Skill-set soundness: expansions draw only from declared skills plus
    plumbing, for every task in the catalog."""
    for task_id, values in _FULL_VALUES.items():
        plan = expand(
            TaskInstance(f"x_{task_id}", task_id, values),
            knowledge,
            vision_cell,
            models,
            tables,
        )
        declared = task_index()[task_id].required_skills | PLUMBING_SKILLS
        used = set(_skills(plan))
        assert used <= declared, (task_id, used - declared)


def test_expansion_is_deterministic(study_cell, knowledge, models, tables):
    inst = _inst(
        "PointWelding",
        objectToWeld=ObjectModelRef("rake"),
        position=VertexRef("v3"),
        material=MaterialRef("steel", 2.0),
    )
    a = expand(inst, knowledge, study_cell, models, tables)
    b = expand(inst, knowledge, study_cell, models, tables)
    assert a == b


def test_sawing_prepends_start_position(vision_cell, knowledge, models, tables):
    plan = expand(
        TaskInstance("saw1", "Sawing", _FULL_VALUES["Sawing"]),
        knowledge,
        vision_cell,
        models,
        tables,
    )
    assert _skills(plan) == ["attach_tool", "saw_along_trajectory"]
    poses = plan[1].args[0].poses
    assert len(poses) == 3
    assert poses[0].position == pytest.approx((0.0, -0.25, 0.02))


def test_invocation_argument_kinds_checked():
    from taskcell.tasks import SkillInvocation

    with pytest.raises(ValueError):
        SkillInvocation("close_gripper", ("not a number",))
    with pytest.raises(ValueError):
        SkillInvocation("move_to", (Pose6D((0, 0, 0)),))  # missing speed/accel
    with pytest.raises(ValueError):
        SkillInvocation("bogus_skill", ())
