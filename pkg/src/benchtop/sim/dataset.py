"""Demonstration datasets: generation, binary episode files, manifests.

Episode file layout (all little-endian):

    magic b"BTEP" | version u16 | L u32 | H u16 | W u16 | C u16   (16 bytes)
    images     float32 (L, H, W, 3)
    pointmaps  float32 (L, H, W, 4)
    proprio    float32 (L, 14)
    actions    float32 (L, 14)

The manifest records task, seed, count, dims, and per-episode size/sha256
plus the final scene state, so success predicates can be re-checked offline
without re-simulation. Identical (task, seed, count) always regenerates
byte-identical files.
"""

import json
import struct
from pathlib import Path

import numpy as np

from ..artifacts import atomic_write_bytes, file_entry, load_manifest, verify_entry
from ..errors import ChecksumError, GenerationError
from .render import IMAGE_SIZE, render
from .scene import ArmState, Scene, SceneObject, step
from .tasks import get_task

EPISODE_MAGIC = b"BTEP"
EPISODE_VERSION = 1
SCHEMA_VERSION = 1
MAX_ATTEMPT_FACTOR = 10


class Trajectory:
    """Aligned (observation, proprioception, action) triples of one episode."""

    def __init__(self, task, images, pointmaps, proprio, actions, success, final_state):
        self.task = task
        self.images = images  # (L, H, W, 3) float32
        self.pointmaps = pointmaps  # (L, H, W, 4) float32
        self.proprio = proprio  # (L, 14) float32
        self.actions = actions  # (L, 14) float32
        self.success = bool(success)
        self.final_state = final_state

    @property
    def length(self):
        return self.images.shape[0]


def scene_state(scene):
    """JSON-serializable snapshot sufficient to re-check success offline."""
    return {
        "proprio": [float(v) for v in scene.proprio()],
        "objects": [
            {
                "oid": o.oid,
                "kind": o.kind,
                "xy": [float(o.xy[0]), float(o.xy[1])],
                "angle": float(o.angle),
                "z": float(o.z),
                "size": [float(s) for s in o.size],
                "graspable": bool(o.graspable),
            }
            for o in scene.objects
        ],
        "grasps": {oid: sorted(g) for oid, g in scene.grasps.items()},
    }


def scene_from_state(state):
    objects = [
        SceneObject(
            o["oid"], o["kind"], o["xy"], o["angle"], o["size"], o["z"], o["graspable"]
        )
        for o in state["objects"]
    ]
    p = np.asarray(state["proprio"])
    scene = Scene(
        objects=objects,
        left=ArmState(p[0:6], p[6]),
        right=ArmState(p[7:13], p[13]),
    )
    for oid, sides in state["grasps"].items():
        scene.grasps[oid] = {side: (np.zeros(2), 0.0) for side in sides}
    return scene


def run_episode(task, scene, policy=None):
    """Roll one episode; ``policy`` defaults to the task's scripted expert."""
    task = get_task(task) if isinstance(task, str) else task
    act = policy if policy is not None else (lambda s, p, t: task.expert(s))
    images, pointmaps, proprios, actions = [], [], [], []
    for tick in range(task.episode_len):
        obs = render(scene)
        p = scene.proprio()
        a = act(scene, p, tick)
        images.append(obs.image.astype(np.float32))
        pointmaps.append(obs.pointmap.astype(np.float32))
        proprios.append(p.astype(np.float32))
        actions.append(np.asarray(a, dtype=np.float32))
        scene = step(scene, a)
    return Trajectory(
        task.name,
        np.stack(images),
        np.stack(pointmaps),
        np.stack(proprios),
        np.stack(actions),
        task.success(scene),
        scene_state(scene),
    )


def generate_demos(task_name, count, seed):
    """Seeded expert rollouts; only successes kept, regenerated until count."""
    if count < 1:
        raise GenerationError("demo count must be >= 1")
    task = get_task(task_name)
    demos = []
    attempt = 0
    while len(demos) < count:
        if attempt >= MAX_ATTEMPT_FACTOR * count:
            raise GenerationError(
                f"{attempt} attempts produced only {len(demos)}/{count} successes "
                f"for task '{task_name}'; expert or task misconfigured"
            )
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(attempt,)))
        traj = run_episode(task, task.sample_scene(rng))
        attempt += 1
        if traj.success:
            demos.append(traj)
    return demos


def episode_bytes(traj):
    header = EPISODE_MAGIC + struct.pack(
        "<HIHHH", EPISODE_VERSION, traj.length, IMAGE_SIZE, IMAGE_SIZE, 3
    )
    parts = [header]
    for arr in (traj.images, traj.pointmaps, traj.proprio, traj.actions):
        parts.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    return b"".join(parts)


def write_dataset(demos, out_dir, task, seed, chunk_len):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    episodes = []
    for i, traj in enumerate(demos):
        name = f"episode_{i:04d}.bin"
        atomic_write_bytes(out_dir / name, episode_bytes(traj))
        entry = file_entry(out_dir / name)
        entry.update(
            {
                "length": traj.length,
                "success": traj.success,
                "final_state": traj.final_state,
            }
        )
        episodes.append(entry)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "task": task,
        "seed": seed,
        "count": len(demos),
        "H": IMAGE_SIZE,
        "W": IMAGE_SIZE,
        "N": chunk_len,
        "episodes": episodes,
    }
    atomic_write_bytes(
        out_dir / "manifest.json",
        json.dumps(manifest, indent=2, sort_keys=True).encode(),
    )
    return manifest


class EpisodeView:
    """Memory-mapped read access to one stored episode."""

    def __init__(self, path, entry):
        self.path = Path(path)
        self.success = entry["success"]
        self.final_state = entry["final_state"]
        with open(self.path, "rb") as f:
            head = f.read(16)
        if head[:4] != EPISODE_MAGIC:
            raise ChecksumError(f"'{path}' is not an episode file")
        version, length, h, w, c = struct.unpack("<HIHHH", head[4:16])
        if version != EPISODE_VERSION:
            raise ChecksumError(f"unsupported episode version {version}")
        self.length, self.h, self.w = length, h, w
        offset = 16
        self.images = np.memmap(
            self.path, dtype="<f4", mode="r", offset=offset, shape=(length, h, w, 3)
        )
        offset += self.images.nbytes
        self.pointmaps = np.memmap(
            self.path, dtype="<f4", mode="r", offset=offset, shape=(length, h, w, 4)
        )
        offset += self.pointmaps.nbytes
        self.proprio = np.memmap(
            self.path, dtype="<f4", mode="r", offset=offset, shape=(length, 14)
        )
        offset += self.proprio.nbytes
        self.actions = np.memmap(
            self.path, dtype="<f4", mode="r", offset=offset, shape=(length, 14)
        )


class DatasetReader:
    """Verified view over a generated dataset directory."""

    def __init__(self, directory, verify=True):
        self.directory = Path(directory)
        self.manifest = load_manifest(self.directory, producer="gen-demos")
        if verify:
            for entry in self.manifest["episodes"]:
                verify_entry(self.directory, entry)
        self.episodes = [
            EpisodeView(self.directory / e["file"], e) for e in self.manifest["episodes"]
        ]
        self.task = self.manifest["task"]

    def __len__(self):
        return len(self.episodes)
