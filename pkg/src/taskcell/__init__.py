"""taskcell: a task-based robot programming workbench.

Robot work is represented as processes, tasks and skills; a knowledge base
infers available and preferred input modalities from the cell's components;
a simulated cell executes skill plans deterministically; and a JSON message
bridge lets a touch UI or a hidden wizard operator supply task parameters
interactively.
"""

from .engine import ParameterRequest, Phase, SessionEngine
from .errors import TaskcellError
from .geometry import Location3D, Pose6D, Quaternion
from .kb import CellConfiguration, KnowledgeBase, available_modalities
from .model import (
    Component,
    DataKind,
    DataType,
    InputModality,
    ObjectModel,
    ProcessDefinition,
    TaskInstance,
    skill_catalog,
    validate_process,
)
from .sim import CellState, execute_skill, initial_state, run_plan
from .tasks import (
    SkillInvocation,
    expand,
    infer_skill_parameters,
    solve_assembly_pose,
    task_catalog,
)

__version__ = "0.1.0"

__all__ = [
    "CellConfiguration",
    "CellState",
    "Component",
    "DataKind",
    "DataType",
    "InputModality",
    "KnowledgeBase",
    "Location3D",
    "ObjectModel",
    "ParameterRequest",
    "Phase",
    "Pose6D",
    "ProcessDefinition",
    "Quaternion",
    "SessionEngine",
    "SkillInvocation",
    "TaskInstance",
    "TaskcellError",
    "available_modalities",
    "execute_skill",
    "expand",
    "infer_skill_parameters",
    "initial_state",
    "run_plan",
    "skill_catalog",
    "solve_assembly_pose",
    "task_catalog",
    "validate_process",
]
