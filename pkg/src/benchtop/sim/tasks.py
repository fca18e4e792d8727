"""Task families, scripted experts, and success predicates.

Three toy tasks mirror the arm-selection / synchronized-bimanual /
sequential-cooperation taxonomy:

    reach-select    one arm (picked by target side) reaches a disk, the
                    other holds home
    dual-lift       both arms grasp a bar's ends in the same window and the
                    dual grasp carries it to lift height
    handover-stack  the right arm picks a block only it can reach, releases
                    it at the center, the left arm takes it and places it on
                    a goal pad only it can reach

Experts are deterministic waypoint controllers driven purely by the current
scene, so demonstrations are byte-reproducible from (task, seed). Success
predicates are pure functions of the final scene and are re-checkable
offline from a stored final state.
"""

import numpy as np

from .kinematics import inverse_kinematics
from .scene import (
    ARM_LINKS,
    HOME_LEFT,
    HOME_RIGHT,
    Scene,
    SceneObject,
    forward_kinematics,
)

EE_SPEED = 0.02  # meters per tick along straight-line waypoints
HANDOVER_POINT = np.array([0.5, 0.5])
PAD_CENTER = np.array([0.22, 0.62])

TASK_NAMES = ("reach-select", "dual-lift", "handover-stack")

_HOME_ANGLES = {"left": HOME_LEFT, "right": HOME_RIGHT}
_HOME_EE = {
    side: forward_kinematics(_HOME_ANGLES[side], ARM_LINKS, base)[0][-1]
    for side, base in (("left", np.array([0.17, 0.5])), ("right", np.array([0.83, 0.5])))
}


def _arm_toward(scene, side, target_xy, grip, speed=EE_SPEED):
    """Joint targets stepping the end effector toward ``target_xy``."""
    ee = scene.ee_xy(side)
    delta = np.asarray(target_xy) - ee
    dist = np.linalg.norm(delta)
    if dist > speed:
        waypoint = ee + delta * (speed / dist)
    else:
        waypoint = np.asarray(target_xy, dtype=np.float64)
    angles, _ = inverse_kinematics(
        waypoint, scene.arms[side].angles, ARM_LINKS, scene.arm_base(side), max_iters=50
    )
    return np.concatenate([angles, [grip]])


def _arm_hold(scene, side, grip):
    return np.concatenate([scene.arms[side].angles, [grip]])


def _arm_home(scene, side, grip=1.0):
    return np.concatenate([_HOME_ANGLES[side], [grip]])


def _assemble(left7, right7):
    return np.concatenate([left7, right7])


def target_side(scene):
    return "left" if scene.find("target").xy[0] < 0.5 else "right"


# --- reach-select -----------------------------------------------------------


def _reach_scene(rng):
    side = "left" if rng.random() < 0.5 else "right"
    def side_xy(s):
        lo, hi = (0.25, 0.42) if s == "left" else (0.58, 0.75)
        return np.array([rng.uniform(lo, hi), rng.uniform(0.3, 0.7)])
    other = "right" if side == "left" else "left"
    return Scene(
        objects=[
            SceneObject("target", "disk", side_xy(side)),
            SceneObject("distract", "block", side_xy(other)),
        ]
    )


def _reach_expert(scene):
    side = target_side(scene)
    goal = scene.find("target").xy
    acting = _arm_toward(scene, side, goal, grip=1.0)
    resting = _arm_home(scene, "right" if side == "left" else "left")
    if side == "left":
        return _assemble(acting, resting)
    return _assemble(resting, acting)


def _reach_success(scene):
    side = target_side(scene)
    return bool(np.linalg.norm(scene.ee_xy(side) - scene.find("target").xy) <= 0.04)


# --- dual-lift --------------------------------------------------------------

GRASP_OFFSET = 0.075  # along the bar axis from its center


def _dual_scene(rng):
    center = np.array([rng.uniform(0.45, 0.55), rng.uniform(0.35, 0.65)])
    angle = rng.uniform(-0.3, 0.3)
    return Scene(objects=[SceneObject("bar", "bar", center, angle=angle)])


def _bar_grasp_points(bar):
    axis = np.array([np.cos(bar.angle), np.sin(bar.angle)])
    a = bar.xy - GRASP_OFFSET * axis
    b = bar.xy + GRASP_OFFSET * axis
    return (a, b) if a[0] <= b[0] else (b, a)  # left arm takes the left end


def _dual_expert(scene):
    bar = scene.find("bar")
    if len(scene.attached_sides("bar")) == 2:
        return _assemble(_arm_hold(scene, "left", 0.0), _arm_hold(scene, "right", 0.0))
    left_pt, right_pt = _bar_grasp_points(bar)
    d_left = np.linalg.norm(scene.ee_xy("left") - left_pt)
    d_right = np.linalg.norm(scene.ee_xy("right") - right_pt)
    if d_left <= 0.01 and d_right <= 0.01:
        grip = 0.0  # both in place: close together
    else:
        grip = 1.0
    return _assemble(
        _arm_toward(scene, "left", left_pt, grip),
        _arm_toward(scene, "right", right_pt, grip),
    )


def _dual_success(scene):
    return bool(scene.find("bar").z > 0.2)


# --- handover-stack ---------------------------------------------------------


def _handover_scene(rng):
    block_xy = np.array([rng.uniform(0.64, 0.76), rng.uniform(0.35, 0.65)])
    return Scene(
        objects=[
            SceneObject("goal", "pad", PAD_CENTER, graspable=False),
            SceneObject("block", "block", block_xy),
        ]
    )


def _handover_expert(scene):
    block = scene.find("block")
    holders = scene.attached_sides("block")
    near_center = np.linalg.norm(block.xy - HANDOVER_POINT) <= 0.05
    near_pad = np.linalg.norm(block.xy - PAD_CENTER) <= 0.05

    if holders == ["right"]:
        # carry to the handover point, release there
        if np.linalg.norm(scene.ee_xy("right") - HANDOVER_POINT) <= 0.005:
            right = _arm_hold(scene, "right", 1.0)
        else:
            right = _arm_toward(scene, "right", HANDOVER_POINT, 0.0)
        return _assemble(_arm_home(scene, "left"), right)
    if holders == ["left"]:
        if np.linalg.norm(scene.ee_xy("left") - PAD_CENTER) <= 0.005:
            left = _arm_hold(scene, "left", 1.0)
        else:
            left = _arm_toward(scene, "left", PAD_CENTER, 0.0)
        return _assemble(left, _arm_home(scene, "right"))
    # block is free
    if near_pad:
        return _assemble(_arm_home(scene, "left"), _arm_home(scene, "right"))
    if near_center and scene.arms["right"].grip > 0.5:
        # second leg: left picks up while right retreats
        grip = 0.0 if block.signed_distance(scene.ee_xy("left")) <= 0.0 else 1.0
        return _assemble(
            _arm_toward(scene, "left", block.xy, grip),
            _arm_home(scene, "right"),
        )
    # first leg: right approaches and closes on the block
    grip = 0.0 if block.signed_distance(scene.ee_xy("right")) <= 0.0 else 1.0
    return _assemble(_arm_home(scene, "left"), _arm_toward(scene, "right", block.xy, grip))


def _handover_success(scene):
    block = scene.find("block")
    placed = np.linalg.norm(block.xy - PAD_CENTER) <= 0.02
    return bool(placed and not scene.attached_sides("block"))


# --- registry ---------------------------------------------------------------


class TaskSpec:
    def __init__(self, name, episode_len, sample_scene, expert, success):
        self.name = name
        self.episode_len = episode_len
        self.sample_scene = sample_scene
        self.expert = expert
        self.success = success


TASKS = {
    "reach-select": TaskSpec("reach-select", 60, _reach_scene, _reach_expert, _reach_success),
    "dual-lift": TaskSpec("dual-lift", 80, _dual_scene, _dual_expert, _dual_success),
    "handover-stack": TaskSpec(
        "handover-stack", 150, _handover_scene, _handover_expert, _handover_success
    ),
}


def get_task(name):
    if name not in TASKS:
        raise KeyError(f"unknown task '{name}'; choose from {sorted(TASKS)}")
    return TASKS[name]


def expert_policy(task, scene, proprio=None):
    """Scripted expert action for the current scene (proprio is implied)."""
    return get_task(task if isinstance(task, str) else task.name).expert(scene)
