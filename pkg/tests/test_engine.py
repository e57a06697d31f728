import pytest

from taskcell.engine import (
    READY,
    ParameterRequest,
    Phase,
    ReadyToExecute,
    SessionEngine,
    apply_command,
)
from taskcell.errors import (
    ChannelMismatch,
    EngineError,
    ModalityNotOffered,
    NoModalityAvailable,
    NothingPending,
    TypeMismatch,
    WrongPhase,
)
from taskcell.geometry import Location3D, Pose6D
from taskcell.kb import CellConfiguration
from taskcell.model import (
    Component as C,
    Concentric,
    ConstraintSet,
    EdgeRef,
    InputModality as IM,
    MaterialRef,
    NumberValue,
    ObjectModelRef,
    ProcessDefinition,
    TaskInstance,
    VertexRef,
)
from taskcell.sim import trace_to_jsonl


def _engine(cell, knowledge, models, tables):
    return SessionEngine(cell, kb=knowledge, models=models, tables=tables)


@pytest.fixture()
def engine(study_cell, knowledge, models, tables):
    return _engine(study_cell, knowledge, models, tables)


# Scripted study session: choose a modality per parameter, submit the value.
STUDY_COMMANDS = [
    ("choose", "pick_bearing", "objectToPick", "Gesture"),
    ("submit", "Gesture", "objectToPick", '{"kind":"ObjectModelRef","id":"bearing"}'),
    ("choose", "place_bearing", "locationToPlace", "Touch"),
    ("submit", "Touch", "locationToPlace", '{"kind":"Location3D","x":0.0,"y":0.0,"z":0.0}'),
    ("choose", "assemble_bearing_axis", "objectToAssemble", "Pen"),
    ("submit", "Pen", "objectToAssemble", '{"kind":"ObjectModelRef","id":"bearing"}'),
    ("choose", "assemble_bearing_axis", "assembly", "Gesture"),
    ("submit", "Gesture", "assembly", '{"kind":"ObjectModelRef","id":"axis"}'),
    ("choose", "assemble_bearing_axis", "assemblyConstraints", "Speech"),
    (
        "submit",
        "Speech",
        "assemblyConstraints",
        '{"kind":"ConstraintSet","constraints":[{"type":"Concentric","featureA":"bore","featureB":"shaft"}]}',
    ),
    ("choose", "weld_point_rake", "objectToWeld", "Gesture"),
    ("submit", "Gesture", "objectToWeld", '{"kind":"ObjectModelRef","id":"rake"}'),
    ("choose", "weld_point_rake", "position", "Pen"),
    ("submit", "Pen", "position", '{"kind":"VertexRef","id":"v3"}'),
    ("choose", "weld_point_rake", "material", "Speech"),
    (
        "submit",
        "Speech",
        "material",
        '{"kind":"MaterialRef","material":"steel","thickness_mm":2.0}',
    ),
    ("choose", "weld_seam_rake", "objectToWeld", "Touch"),
    ("submit", "Touch", "objectToWeld", '{"kind":"ObjectModelRef","id":"rake"}'),
    ("choose", "weld_seam_rake", "edge", "Pen"),
    ("submit", "Pen", "edge", '{"kind":"EdgeRef","id":"e3"}'),
    ("choose", "weld_seam_rake", "material", "Touch"),
    (
        "submit",
        "Touch",
        "material",
        '{"kind":"MaterialRef","material":"steel","thickness_mm":2.0}',
    ),
    ("execute",),
]


def test_start_session_requests_first_parameter(engine, study_script_blank):
    request = engine.start_session(study_script_blank)
    assert request.instance_id == "pick_bearing"
    assert request.param == "objectToPick"
    assert request.modalities == (IM.GESTURE, IM.TOUCH, IM.PEN, IM.SPEECH)
    assert engine.session.phase is Phase.EDITING


def test_start_session_fully_parameterized(engine, study_script):
    assert engine.start_session(study_script) is None
    assert engine.ready_to_execute


def test_start_session_rejects_structural_issues(engine):
    proc = ProcessDefinition("bad", (TaskInstance("x", "NoSuchTask"),))
    with pytest.raises(EngineError):
        engine.start_session(proc)


def test_no_modality_available(knowledge, models, tables):
    bare = CellConfiguration(
        "bare", (C.ROBOT_ARM, C.GRIPPER), Pose6D((0, -0.5, 0)), 1.5
    )
    engine = _engine(bare, knowledge, models, tables)
    proc = ProcessDefinition("p", (TaskInstance("t", "PickObject"),))
    with pytest.raises(NoModalityAvailable):
        engine.start_session(proc)


def test_choose_then_submit_flow(engine, study_script_blank):
    engine.start_session(study_script_blank)
    request = engine.choose_modality("pick_bearing", "objectToPick", IM.GESTURE)
    assert engine.session.phase is Phase.AWAITING_VALUE
    assert request.param == "objectToPick"
    nxt = engine.submit_value(IM.GESTURE, ObjectModelRef("bearing"))
    assert isinstance(nxt, ParameterRequest)
    assert nxt.instance_id == "place_bearing"
    assert engine.session.phase is Phase.EDITING


def test_choose_rejects_unoffered_modality(engine, study_script_blank):
    engine.start_session(study_script_blank)
    with pytest.raises(ModalityNotOffered):
        engine.choose_modality("pick_bearing", "objectToPick", IM.KEYBOARD_MOUSE)
    with pytest.raises(ModalityNotOffered):
        engine.choose_modality("place_bearing", "locationToPlace", IM.TOUCH)


def test_rechoosing_modality_is_allowed(engine, study_script_blank):
    engine.start_session(study_script_blank)
    engine.choose_modality("pick_bearing", "objectToPick", IM.SPEECH)
    engine.choose_modality("pick_bearing", "objectToPick", IM.TOUCH)
    with pytest.raises(ChannelMismatch):
        engine.submit_value(IM.SPEECH, ObjectModelRef("bearing"))
    nxt = engine.submit_value(IM.TOUCH, ObjectModelRef("bearing"))
    assert isinstance(nxt, ParameterRequest)


def test_submit_wrong_channel_not_fatal(engine, study_script_blank):
    engine.start_session(study_script_blank)
    engine.choose_modality("pick_bearing", "objectToPick", IM.GESTURE)
    with pytest.raises(ChannelMismatch):
        engine.submit_value(IM.SPEECH, ObjectModelRef("bearing"))
    # session still awaiting the chosen channel
    assert engine.session.phase is Phase.AWAITING_VALUE
    engine.submit_value(IM.GESTURE, ObjectModelRef("bearing"))


def test_submit_type_mismatch(engine, study_script_blank):
    engine.start_session(study_script_blank)
    engine.choose_modality("pick_bearing", "objectToPick", IM.SPEECH)
    with pytest.raises(TypeMismatch):
        engine.submit_value(IM.SPEECH, NumberValue(4.0, "mm"))


def test_progress_strictly_decreases(engine, study_script_blank):
    engine.start_session(study_script_blank)
    counts = [engine.unset_count()]
    for command in STUDY_COMMANDS[:-1]:
        apply_command(engine, command)
        if command[0] == "submit":
            counts.append(engine.unset_count())
    assert counts == sorted(counts, reverse=True)
    assert counts[0] == 11 and counts[-1] == 0


def test_ranked_lists_match_kb(engine, study_script_blank, knowledge, study_cell):
    """Cross-module fidelity: every request's modality list equals the
    knowledge-base ranking for that parameter spec."""
    from taskcell.tasks import task_index

    engine.start_session(study_script_blank)
    catalog = task_index()
    for command in STUDY_COMMANDS[:-1]:
        request = engine.current_request()
        spec = catalog[
            next(
                t.task_id
                for t in engine.session.process.tasks
                if t.instance_id == request.instance_id
            )
        ].param(request.param)
        expected = knowledge.modalities_for_parameter(spec, study_cell)
        assert request.modalities == expected
        apply_command(engine, command)


def test_full_scripted_session_executes(engine, study_script_blank):
    engine.start_session(study_script_blank)
    for command in STUDY_COMMANDS:
        apply_command(engine, command)
    assert engine.session.phase is Phase.DONE
    skills = [e.skill for e in engine.session.state.trace]
    assert skills.count("close_gripper") >= 1
    assert skills.count("open_gripper") >= 1
    assert skills.count("weld_point") >= 1
    assert skills.count("weld_seam") >= 1


def test_session_replay_byte_identical(study_cell, knowledge, models, tables, study_script_blank):
    traces = []
    for _ in range(2):
        engine = _engine(study_cell, knowledge, models, tables)
        engine.start_session(study_script_blank)
        for command in STUDY_COMMANDS:
            apply_command(engine, command)
        traces.append(trace_to_jsonl(engine.session.state.trace).encode())
    assert traces[0] == traces[1]


def test_execute_requires_all_parameters(engine, study_script_blank):
    engine.start_session(study_script_blank)
    with pytest.raises(WrongPhase):
        engine.execute()


def test_execute_empty_process(engine):
    engine.start_session(ProcessDefinition("empty"))
    trace = engine.execute()
    assert engine.session.phase is Phase.DONE
    assert trace == ()


def test_execute_infeasible_task_fails(knowledge, models, tables, study_cell, study_script):
    # welding task in a gripper-only cell: no mapping is feasible
    cell = CellConfiguration(
        "gripper_only",
        (C.ROBOT_ARM, C.GRIPPER, C.TOUCHSCREEN),
        Pose6D((0, -0.75, 0)),
        1.6,
        study_cell.initial_objects,
    )
    proc = ProcessDefinition(
        "weld_only",
        (
            TaskInstance(
                "w1",
                "PointWelding",
                {
                    "objectToWeld": ObjectModelRef("rake"),
                    "position": VertexRef("v3"),
                    "material": MaterialRef("steel", 2.0),
                },
            ),
        ),
    )
    engine = _engine(cell, knowledge, models, tables)
    engine.start_session(proc)
    engine.execute()
    assert engine.session.phase is Phase.FAILED
    assert engine.session.failure_reason == "no_feasible_mapping"


def test_execute_missing_object_fails(knowledge, models, tables, study_script):
    cell = CellConfiguration(
        "empty_table",
        (C.ROBOT_ARM, C.GRIPPER, C.TOUCHSCREEN, C.WELDING_GUN),
        Pose6D((0, -0.75, 0)),
        1.6,
        (),
    )
    engine = _engine(cell, knowledge, models, tables)
    engine.start_session(study_script)
    engine.execute()
    assert engine.session.phase is Phase.FAILED
    assert engine.session.failure_reason == "object_vanished"


def test_pick_hold_blocks_until_confirmed(study_cell, knowledge, models, tables):
    proc = ProcessDefinition(
        "hold",
        (
            TaskInstance(
                "h1",
                "PickHold",
                {
                    "objectToPick": ObjectModelRef("bearing"),
                    "holdPose": Pose6D((0.0, 0.0, 0.3)),
                },
            ),
        ),
    )
    engine = _engine(study_cell, knowledge, models, tables)
    engine.start_session(proc)
    engine.execute()
    assert engine.session.phase is Phase.EXECUTING
    assert engine.session.blocked
    engine.confirm_human_step()
    assert engine.session.phase is Phase.DONE


def test_two_holds_need_two_confirmations(study_cell, knowledge, models, tables):
    proc = ProcessDefinition(
        "hold2",
        (
            TaskInstance(
                "h1",
                "PickHold",
                {
                    "objectToPick": ObjectModelRef("bearing"),
                    "holdPose": Pose6D((0.0, 0.0, 0.3)),
                },
            ),
            TaskInstance(
                "h2",
                "PickHold",
                {
                    "objectToPick": ObjectModelRef("rake"),
                    "holdPose": Pose6D((0.1, 0.0, 0.3)),
                },
            ),
        ),
    )
    engine = _engine(study_cell, knowledge, models, tables)
    engine.start_session(proc)
    engine.execute()
    assert engine.session.blocked
    engine.confirm_human_step()
    assert engine.session.blocked  # second hold now pending
    engine.confirm_human_step()
    assert engine.session.phase is Phase.DONE
    holds = [e for e in engine.session.state.trace if e.skill == "await_confirmation"]
    assert len(holds) == 2


def test_confirm_with_nothing_pending(engine, study_script):
    engine.start_session(study_script)
    with pytest.raises(NothingPending):
        engine.confirm_human_step()


def test_phase_operation_matrix(engine, study_script_blank, study_script):
    """No operation succeeds outside its declared phase."""
    # no session at all
    with pytest.raises(WrongPhase):
        engine.choose_modality("x", "y", IM.TOUCH)
    with pytest.raises(WrongPhase):
        engine.submit_value(IM.TOUCH, ObjectModelRef("bearing"))
    with pytest.raises(WrongPhase):
        engine.execute()
    with pytest.raises(WrongPhase):
        engine.confirm_human_step()

    # EDITING with a pending request: submit before choose is invalid
    engine.start_session(study_script_blank)
    with pytest.raises(WrongPhase):
        engine.submit_value(IM.TOUCH, ObjectModelRef("bearing"))
    with pytest.raises(NothingPending):
        engine.confirm_human_step()
    with pytest.raises(WrongPhase):
        engine.execute()

    # DONE: nothing mutates anymore
    engine.start_session(study_script)
    engine.execute()
    assert engine.session.phase is Phase.DONE
    with pytest.raises(WrongPhase):
        engine.execute()
    with pytest.raises(WrongPhase):
        engine.choose_modality("pick_bearing", "objectToPick", IM.TOUCH)
    with pytest.raises(NothingPending):
        engine.confirm_human_step()


def test_ready_marker_is_singleton(engine, study_script_blank):
    engine.start_session(study_script_blank)
    last = None
    for command in STUDY_COMMANDS[:-1]:
        request_or_ready = apply_command(engine, command)
    # after the final submit the engine reports readiness
    assert engine.ready_to_execute
    assert isinstance(READY, ReadyToExecute)
