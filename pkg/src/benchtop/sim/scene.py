"""Toy bimanual tabletop world.

Two planar 6-joint arms with grippers operate over a 1 m x 1 m workspace
viewed top-down. Objects are rigid disks, bars, and blocks living on height
layers; grasping is snap-attachment within a small radius (no contact
dynamics). ``step`` is a pure function: it returns a fresh scene and never
mutates its input.

Height model: every object carries the height of its visible top surface.
Free objects rest on the table (or on the goal pad), a single grasp carries
an object at CARRY_Z, and a two-handed grasp (bars only) carries it at
DUAL_CARRY_Z. Heights move toward their target at Z_SPEED per tick, so lifts
are visible as gradual rises in the depth channel and pointmap.
"""

import logging

import numpy as np

from .kinematics import N_JOINTS, forward_kinematics

log = logging.getLogger(__name__)

WORKSPACE = 1.0  # meters, square
ARM_LINKS = np.full(N_JOINTS, 0.075)
BASE_LEFT = np.array([0.17, 0.5])
BASE_RIGHT = np.array([0.83, 0.5])
HOME_LEFT = np.array([-1.8, 0.7, 0.7, 0.7, 0.7, 0.7])
HOME_RIGHT = np.array([1.8 - np.pi, -0.7, -0.7, -0.7, -0.7, -0.7])

JOINT_DELTA_MAX = 0.15  # rad per tick
GRIP_DELTA_MAX = 0.2  # opening units per tick
GRIP_CLOSED = 0.5  # opening at or below this counts as closed
ATTACH_RADIUS = 0.02  # meters to object boundary

CARRY_Z = 0.15
DUAL_CARRY_Z = 0.25
Z_SPEED = 0.02
ARM_Z = {"left": 0.10, "right": 0.11}
GRIPPER_TIP_R = 0.018
LINK_RADIUS = 0.012

REST_Z = {"disk": 0.02, "block": 0.03, "bar": 0.04, "pad": 0.01}
MAX_GRASPS = {"disk": 1, "block": 1, "bar": 2, "pad": 0}

SIDES = ("left", "right")


class SceneObject:
    __slots__ = ("oid", "kind", "xy", "angle", "size", "z", "graspable")

    def __init__(self, oid, kind, xy, angle=0.0, size=None, z=None, graspable=True):
        self.oid = oid
        self.kind = kind
        self.xy = np.asarray(xy, dtype=np.float64).copy()
        self.angle = float(angle)
        self.size = tuple(size) if size is not None else _default_size(kind)
        self.z = float(z) if z is not None else REST_Z[kind]
        self.graspable = graspable and MAX_GRASPS[kind] > 0

    def copy(self):
        o = SceneObject.__new__(SceneObject)
        o.oid = self.oid
        o.kind = self.kind
        o.xy = self.xy.copy()
        o.angle = self.angle
        o.size = self.size
        o.z = self.z
        o.graspable = self.graspable
        return o

    def signed_distance(self, point):
        """Distance from ``point`` to the object boundary (negative inside)."""
        p = np.asarray(point, dtype=np.float64)
        if self.kind in ("disk", "pad"):
            return float(np.linalg.norm(p - self.xy)) - self.size[0]
        # rotated rectangle (block, bar)
        d = p - self.xy
        c, s = np.cos(-self.angle), np.sin(-self.angle)
        local = np.array([c * d[0] - s * d[1], s * d[0] + c * d[1]])
        q = np.abs(local) - np.array(self.size)
        outside = np.linalg.norm(np.maximum(q, 0.0))
        inside = min(max(q[0], q[1]), 0.0)
        return float(outside + inside)


def _default_size(kind):
    return {
        "disk": (0.035,),
        "block": (0.028, 0.028),
        "bar": (0.09, 0.015),
        "pad": (0.05,),
    }[kind]


class ArmState:
    __slots__ = ("angles", "grip")

    def __init__(self, angles, grip=1.0):
        self.angles = np.asarray(angles, dtype=np.float64).copy()
        self.grip = float(grip)

    def copy(self):
        return ArmState(self.angles, self.grip)


class Scene:
    """World state: two arms, objects, and grasp attachments."""

    def __init__(self, objects=(), left=None, right=None):
        self.arms = {
            "left": left.copy() if left else ArmState(HOME_LEFT),
            "right": right.copy() if right else ArmState(HOME_RIGHT),
        }
        self.objects = [o.copy() for o in objects]
        # obj id -> {side: (offset in gripper frame, angle offset)}
        self.grasps = {}

    def copy(self):
        s = Scene.__new__(Scene)
        s.arms = {side: self.arms[side].copy() for side in SIDES}
        s.objects = [o.copy() for o in self.objects]
        s.grasps = {oid: dict(g) for oid, g in self.grasps.items()}
        return s

    def find(self, oid):
        for obj in self.objects:
            if obj.oid == oid:
                return obj
        raise KeyError(oid)

    def arm_base(self, side):
        return BASE_LEFT if side == "left" else BASE_RIGHT

    def arm_points(self, side):
        return forward_kinematics(self.arms[side].angles, ARM_LINKS, self.arm_base(side))

    def ee_pose(self, side):
        return self.arm_points(side)[1]

    def ee_xy(self, side):
        return self.arm_points(side)[0][-1]

    def attached_sides(self, oid):
        return sorted(self.grasps.get(oid, {}))

    def proprio(self):
        """14-d proprioception: left joints+grip then right joints+grip."""
        left, right = self.arms["left"], self.arms["right"]
        return np.concatenate(
            [left.angles, [left.grip], right.angles, [right.grip]]
        )


def home_scene(objects=()):
    return Scene(objects=objects)


def clamp_action(scene, action):
    """Per-tick clamps: joint deltas +/-0.15 rad, grip +/-0.2, plus bounds."""
    action = np.asarray(action, dtype=np.float64)
    if action.shape != (14,):
        raise ValueError(f"action must have 14 components, got {action.shape}")
    out = np.empty(14)
    for i, side in enumerate(SIDES):
        arm = scene.arms[side]
        base_idx = i * 7
        target_j = action[base_idx : base_idx + N_JOINTS]
        delta = np.clip(target_j - arm.angles, -JOINT_DELTA_MAX, JOINT_DELTA_MAX)
        if not np.allclose(delta, target_j - arm.angles):
            log.debug("clamped %s joint deltas", side)
        out[base_idx : base_idx + N_JOINTS] = np.clip(
            arm.angles + delta, -np.pi, np.pi
        )
        g_delta = np.clip(action[base_idx + 6] - arm.grip, -GRIP_DELTA_MAX, GRIP_DELTA_MAX)
        out[base_idx + 6] = np.clip(arm.grip + g_delta, 0.0, 1.0)
    return out


def _gripper_frame(scene, side):
    pose = scene.ee_pose(side)
    return pose[:2], pose[2]


def _rot(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def step(scene, action):
    """Advance one tick. Pure: returns the successor scene."""
    new = scene.copy()
    applied = clamp_action(scene, action)
    for i, side in enumerate(SIDES):
        arm = new.arms[side]
        arm.angles = applied[i * 7 : i * 7 + N_JOINTS]
        arm.grip = applied[i * 7 + 6]

    frames = {side: _gripper_frame(new, side) for side in SIDES}

    # release on open
    for oid in list(new.grasps):
        for side in list(new.grasps[oid]):
            if new.arms[side].grip > GRIP_CLOSED:
                del new.grasps[oid][side]
        if not new.grasps[oid]:
            del new.grasps[oid]

    # attach on close: nearest graspable object with spare grasp slots
    for side in SIDES:
        if new.arms[side].grip > GRIP_CLOSED:
            continue
        if any(side in g for g in new.grasps.values()):
            continue  # this gripper already holds something
        ee, theta = frames[side]
        best = None
        for obj in new.objects:
            if not obj.graspable:
                continue
            if len(new.grasps.get(obj.oid, {})) >= MAX_GRASPS[obj.kind]:
                continue
            d = obj.signed_distance(ee)
            if d <= ATTACH_RADIUS and (best is None or d < best[0]):
                best = (d, obj)
        if best is not None:
            obj = best[1]
            offset = _rot(-theta) @ (obj.xy - ee)
            new.grasps.setdefault(obj.oid, {})[side] = (offset, obj.angle - theta)

    # attached objects track their grippers exactly
    for oid, grasp in new.grasps.items():
        obj = new.find(oid)
        poses = []
        for side, (offset, dangle) in grasp.items():
            ee, theta = frames[side]
            poses.append((ee + _rot(theta) @ offset, theta + dangle))
        if len(poses) == 1:
            obj.xy, obj.angle = poses[0][0].copy(), poses[0][1]
        else:
            obj.xy = (poses[0][0] + poses[1][0]) / 2.0
            obj.angle = float(
                np.arctan2(
                    np.sin(poses[0][1]) + np.sin(poses[1][1]),
                    np.cos(poses[0][1]) + np.cos(poses[1][1]),
                )
            )
        np.clip(obj.xy, 0.0, WORKSPACE, out=obj.xy)

    # height dynamics toward the attachment-determined target
    pads = [o for o in new.objects if o.kind == "pad"]
    for obj in new.objects:
        if obj.kind == "pad":
            continue
        n_grasps = len(new.grasps.get(obj.oid, {}))
        if n_grasps >= 2:
            z_target = DUAL_CARRY_Z
        elif n_grasps == 1:
            z_target = CARRY_Z
        else:
            z_target = REST_Z[obj.kind]
            for pad in pads:
                if np.linalg.norm(obj.xy - pad.xy) <= pad.size[0]:
                    z_target += pad.z
        obj.z += float(np.clip(z_target - obj.z, -Z_SPEED, Z_SPEED))
    return new
