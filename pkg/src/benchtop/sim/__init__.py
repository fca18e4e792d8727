"""Deterministic toy bimanual world: kinematics, scenes, rendering, tasks."""

from .kinematics import forward_kinematics, inverse_kinematics, jacobian
from .render import IMAGE_SIZE, Observation, render
from .scene import Scene, SceneObject, step
from .tasks import TASKS, expert_policy, get_task

__all__ = [
    "IMAGE_SIZE",
    "Observation",
    "Scene",
    "SceneObject",
    "TASKS",
    "expert_policy",
    "forward_kinematics",
    "get_task",
    "inverse_kinematics",
    "jacobian",
    "render",
    "step",
]
