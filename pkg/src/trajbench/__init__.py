"""Zero-shot LLM trajectory-generation harness: a deterministic kinematic
tabletop simulator, interchangeable chat backends, a task-agnostic prompt
builder with ablation flags, an output parser with a bounded correction loop,
a sandboxed program gateway, and a 30-task benchmark with geometric success
checkers."""

__version__ = "0.1.0"

from .geometry import BBox3D, CameraModel, GripperCommand, Pose, Trajectory
from .prompts import PromptConfig
from .simulator import SceneObject, Simulator, TaskScene

__all__ = [
    "BBox3D",
    "CameraModel",
    "GripperCommand",
    "Pose",
    "PromptConfig",
    "SceneObject",
    "Simulator",
    "TaskScene",
    "Trajectory",
    "__version__",
]
