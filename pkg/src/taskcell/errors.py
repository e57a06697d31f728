"""Exception hierarchy shared by all taskcell subsystems.

Every error carries a stable snake_case ``code`` so that bridge clients and
trace files can match on it without parsing messages.
"""

from __future__ import annotations


class TaskcellError(Exception):
    """Base class for all taskcell errors."""

    code = "error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


# --- task library ---------------------------------------------------------

class NoFeasibleMapping(TaskcellError):
    """No skill mapping of the task is executable with the cell's components."""

    code = "no_feasible_mapping"


class UnsolvableConstraints(TaskcellError):
    """Constraint set falls outside the supported solver fragment."""

    code = "unsolvable_constraints"


class DegenerateFeature(TaskcellError):
    """A constraint feature has a zero-length axis direction."""

    code = "degenerate_feature"


class UnknownFeature(TaskcellError):
    code = "unknown_feature"


class UnknownVertex(TaskcellError):
    code = "unknown_vertex"


class UnknownEdge(TaskcellError):
    code = "unknown_edge"


class UnknownMaterial(TaskcellError):
    """(material, thickness) pair absent from the material table."""

    code = "unknown_material"


# --- knowledge base -------------------------------------------------------

class MalformedTable(TaskcellError):
    """Preference or rule table fails validation on load."""

    code = "malformed_table"


# --- simulated cell -------------------------------------------------------

class SkillError(TaskcellError):
    """A skill invocation was rejected; the cell state is unchanged."""

    code = "skill_error"


class ToolNotAttached(SkillError):
    code = "tool_not_attached"


class NoGripper(SkillError):
    code = "no_gripper"


class NothingToGrasp(SkillError):
    code = "nothing_to_grasp"


class OutOfReach(SkillError):
    code = "out_of_reach"


class WeldParamsUnset(SkillError):
    code = "weld_params_unset"


class ObjectVanished(SkillError):
    code = "object_vanished"


class ToolChangeWhileHolding(SkillError):
    code = "tool_change_while_holding"


class DualArmUnavailable(SkillError):
    code = "dual_arm_unavailable"


class InvalidSkillArgument(SkillError):
    code = "invalid_skill_argument"


class MalformedSnapshot(TaskcellError):
    code = "malformed_snapshot"


# --- session engine -------------------------------------------------------

class EngineError(TaskcellError):
    code = "engine_error"


class NoModalityAvailable(EngineError):
    """A required parameter has no usable input modality in this cell."""

    code = "no_modality_available"


class ModalityNotOffered(EngineError):
    code = "modality_not_offered"


class WrongPhase(EngineError):
    code = "wrong_phase"


class TypeMismatch(EngineError):
    code = "type_mismatch"


class ChannelMismatch(EngineError):
    """Value arrived on a channel other than the chosen modality; dropped."""

    code = "channel_mismatch"


class NothingPending(EngineError):
    code = "nothing_pending"


# --- analytics ------------------------------------------------------------

class MalformedCsv(TaskcellError):
    code = "malformed_csv"


class InvalidRank(TaskcellError):
    """A participant's ranks for one question are not a permutation of 1..k."""

    code = "invalid_rank"

    def __init__(self, message: str = "", rows: tuple[int, ...] = ()):
        super().__init__(message)
        self.rows = rows


class EmptySegment(TaskcellError):
    code = "empty_segment"
