"""Synthetic fixed-topology humanoid bodies.

Every body is a union of capped tubes built from elliptical rings: one
torso/neck/head tube, two arms and two legs. Ring counts and resolutions
never change, so all generated meshes share one triangle list. Geometry is
built for a unit-height body and then scaled, which makes the generator
exactly scale-equivariant.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .mesh import Mesh, save_obj

RING_RES = 48
LIMB_RES = 16

HIP_LEVEL, WAIST_LEVEL, CHEST_LEVEL = 0.52, 0.62, 0.72
SHOULDER_LEVEL = 0.80

# depth/width ratios of the torso cross-sections
HIP_ASPECT, WAIST_ASPECT, CHEST_ASPECT = 0.78, 0.72, 0.70

TORSO_LEVELS = (0.46, 0.49, HIP_LEVEL, 0.57, WAIST_LEVEL, 0.67, CHEST_LEVEL,
                0.76, SHOULDER_LEVEL, 0.83, 0.855)
HEAD_CENTER, HEAD_HALF_HEIGHT = 0.935, 0.065
HEAD_HALF_WIDTH, HEAD_HALF_DEPTH = 0.052, 0.060
NECK_RADIUS = 0.034
HEAD_RINGS = 7
LIMB_RINGS = 10

DEFAULT_RANGES = {
    "height": (1.50, 1.95),
    "chest_girth": (0.80, 1.20),
    "waist_girth": (0.62, 1.10),
    "hip_girth": (0.84, 1.22),
    "limb_thickness": (0.12, 0.20),
    "shoulder_width": (0.36, 0.48),
}


@dataclass(frozen=True)
class BodyParams:
    """Body measurements in meters. ``limb_thickness`` is the thigh diameter."""

    height: float = 1.75
    chest_girth: float = 0.96
    waist_girth: float = 0.82
    hip_girth: float = 1.00
    limb_thickness: float = 0.16
    shoulder_width: float = 0.42
    seed: int = 0

    def validate(self) -> None:
        for f in fields(self):
            if f.name == "seed":
                continue
            v = getattr(self, f.name)
            if not np.isfinite(v) or v <= 0:
                raise InvalidInputError(f"{f.name} must be positive, got {v}")
        for name in ("chest_girth", "waist_girth", "hip_girth"):
            g = getattr(self, name)
            if not 0.3 * self.height <= g <= 1.5 * self.height:
                raise InvalidInputError(f"{name}={g} outside [0.3, 1.5] x height")
        if self.limb_thickness >= 0.25 * self.height:
            raise InvalidInputError("limb_thickness implausibly large for height")
        if self.shoulder_width >= 0.5 * self.height:
            raise InvalidInputError("shoulder_width implausibly large for height")


@dataclass
class Population:
    meshes: list
    params: list
    seed: int | None = None
    ranges: dict | None = None

    def __post_init__(self):
        if len(self.meshes) != len(self.params):
            raise InvalidInputError("one params entry per mesh required")

    def __len__(self):
        return len(self.meshes)


def _polygon_perimeter(a: float, b: float, res: int = RING_RES) -> float:
    th = 2 * np.pi * np.arange(res) / res
    pts = np.stack([a * np.cos(th), b * np.sin(th)], axis=1)
    return float(np.linalg.norm(pts - np.roll(pts, -1, axis=0), axis=1).sum())


def _half_axes_for_girth(girth: float, aspect: float) -> tuple[float, float]:
    # ring polygon perimeter is linear in size, so solve exactly
    a = girth / _polygon_perimeter(1.0, aspect)
    return a, aspect * a


def _ring(center, a, b, res, u=(1.0, 0.0, 0.0), w=(0.0, 0.0, 1.0)):
    th = 2 * np.pi * np.arange(res) / res
    u, w = np.asarray(u), np.asarray(w)
    return (np.asarray(center)[None, :]
            + (a * np.cos(th))[:, None] * u[None, :]
            + (b * np.sin(th))[:, None] * w[None, :])


def _tube_faces(n_rings: int, res: int, offset: int, bottom_cap: int | None, top_cap: int | None):
    faces = []
    for r in range(n_rings - 1):
        for j in range(res):
            a = offset + r * res + j
            b = offset + r * res + (j + 1) % res
            c = a + res
            d = b + res
            faces.append((a, b, d))
            faces.append((a, d, c))
    if bottom_cap is not None:
        for j in range(res):
            faces.append((bottom_cap, offset + (j + 1) % res, offset + j))
    if top_cap is not None:
        last = offset + (n_rings - 1) * res
        for j in range(res):
            faces.append((top_cap, last + j, last + (j + 1) % res))
    return faces


def _torso(p: dict) -> list:
    """Ring centers/half-axes for torso+neck+head, unit-height units."""
    hip = _half_axes_for_girth(p["hip_girth"], HIP_ASPECT)
    waist = _half_axes_for_girth(p["waist_girth"], WAIST_ASPECT)
    chest = _half_axes_for_girth(p["chest_girth"], CHEST_ASPECT)
    sh_a = p["shoulder_width"] / 2
    mix = lambda s, t, x: (s[0] + x * (t[0] - s[0]), s[1] + x * (t[1] - s[1]))
    profile = {
        0.46: (hip[0] * 0.90, hip[1] * 0.88),
        0.49: (hip[0] * 0.97, hip[1] * 0.96),
        HIP_LEVEL: hip,
        0.57: mix(hip, waist, 0.5),
        WAIST_LEVEL: waist,
        0.67: mix(waist, chest, 0.5),
        CHEST_LEVEL: chest,
        0.76: ((chest[0] + sh_a) / 2, chest[1] * 0.94),
        SHOULDER_LEVEL: (sh_a, chest[1] * 0.78),
        0.83: (NECK_RADIUS * 1.9, NECK_RADIUS * 1.4),
        0.855: (NECK_RADIUS, NECK_RADIUS),
    }
    rings = [((0.0, y, 0.0), *profile[y]) for y in TORSO_LEVELS]
    # head: ellipsoid rings from just above the chin to near the crown
    for t in np.linspace(-0.85, 0.85, HEAD_RINGS):
        y = HEAD_CENTER + HEAD_HALF_HEIGHT * t
        s = np.sqrt(1 - t * t)
        rings.append(((0.0, y, 0.0), HEAD_HALF_WIDTH * s, HEAD_HALF_DEPTH * s))
    return rings


def _limb_rings(start, end, r0, r1, n=LIMB_RINGS):
    start, end = np.asarray(start, float), np.asarray(end, float)
    axis = end - start
    axis /= np.linalg.norm(axis)
    w = np.array([0.0, 0.0, 1.0])
    u = np.cross(w, axis)  # perpendicular to the limb inside the frontal plane
    u /= np.linalg.norm(u)
    out = []
    for t in np.linspace(0.0, 1.0, n):
        c = start + t * (end - start)
        r = r0 + t * (r1 - r0)
        out.append((c, r, r, u, w))
    return out


@lru_cache(maxsize=1)
def template_faces() -> np.ndarray:
    faces = []
    n_torso = len(TORSO_LEVELS) + HEAD_RINGS
    torso_verts = n_torso * RING_RES
    # torso block: rings, then bottom cap center, then crown apex
    faces += _tube_faces(n_torso, RING_RES, 0, torso_verts, torso_verts + 1)
    offset = torso_verts + 2
    limb_verts = LIMB_RINGS * LIMB_RES
    for _ in range(4):
        faces += _tube_faces(LIMB_RINGS, LIMB_RES, offset, offset + limb_verts, offset + limb_verts + 1)
        offset += limb_verts + 2
    return np.array(faces, dtype=np.int64)


def _unit_vertices(p: dict) -> np.ndarray:
    verts = []
    rings = _torso(p)
    for c, a, b in rings:
        verts.append(_ring(c, a, b, RING_RES))
    verts.append(np.array([[0.0, 0.45, 0.0]]))
    verts.append(np.array([[0.0, 1.0, 0.0]]))

    hip_a = _half_axes_for_girth(p["hip_girth"], HIP_ASPECT)[0]
    thigh = p["limb_thickness"] / 2
    arm = 0.55 * thigh
    sh_a = p["shoulder_width"] / 2
    leg_x = max(0.5 * hip_a, thigh + 0.006)
    limbs = []
    for side in (1.0, -1.0):
        limbs.append(_limb_rings((side * leg_x, 0.50, 0.0), (side * leg_x, 0.0, 0.0),
                                 thigh, 0.42 * thigh))
    for side in (1.0, -1.0):
        limbs.append(_limb_rings((side * (sh_a - 0.6 * arm), SHOULDER_LEVEL - 0.012, 0.0),
                                 (side * (sh_a + 0.05), 0.41, 0.0),
                                 arm, 0.65 * arm))
    for rings in limbs:
        for c, a, b, u, w in rings:
            verts.append(_ring(c, a, b, LIMB_RES, u, w))
        first, last = rings[0][0], rings[-1][0]
        # caps: tip vertex on the axis; foot caps sit exactly on the floor
        verts.append(np.asarray(first)[None, :])
        verts.append(np.asarray(last)[None, :])
    return np.concatenate(verts, axis=0)


def generate_body(params: BodyParams) -> Mesh:
    """Deterministic humanoid mesh whose height and torso girths match ``params``."""
    params.validate()
    h = params.height
    rel = {f.name: getattr(params, f.name) / h for f in fields(params) if f.name not in ("seed", "height")}
    verts = _unit_vertices(rel)
    # leg axes end exactly at y = 0, crown apex at y = 1
    return Mesh(verts * h, template_faces())


def _check_ranges(ranges: dict) -> dict:
    out = dict(DEFAULT_RANGES)
    for key, value in (ranges or {}).items():
        if key not in DEFAULT_RANGES:
            raise InvalidInputError(f"unknown parameter range {key!r}")
        out[key] = value
    for key, (lo, hi) in out.items():
        if not (np.isfinite(lo) and np.isfinite(hi)) or hi < lo or lo <= 0:
            raise InvalidInputError(f"empty or invalid range for {key}: ({lo}, {hi})")
    return out


def sample_params(n: int, ranges: dict | None = None, seed: int = 0) -> list[BodyParams]:
    if n < 2:
        raise InvalidInputError("population needs n >= 2")
    ranges = _check_ranges(ranges)
    rng = np.random.default_rng(seed)
    keys = list(DEFAULT_RANGES)
    draws = {k: rng.uniform(*ranges[k], size=n) for k in keys}
    body_seeds = rng.integers(0, 2**31 - 1, size=n)
    out = []
    for i in range(n):
        vals = {k: float(draws[k][i]) for k in keys}
        h = vals["height"]
        for g in ("chest_girth", "waist_girth", "hip_girth"):
            vals[g] = float(np.clip(vals[g], 0.3 * h, 1.5 * h))
        out.append(BodyParams(**vals, seed=int(body_seeds[i])))
    return out


def sample_population(n: int, ranges: dict | None = None, seed: int = 0) -> Population:
    params = sample_params(n, ranges, seed)
    return Population([generate_body(p) for p in params], params, seed=seed,
                      ranges=_check_ranges(ranges))


def ring_vertex_indices(level: float) -> np.ndarray:
    """Vertex indices of the torso ring at a given relative height level."""
    r = TORSO_LEVELS.index(level)
    return np.arange(r * RING_RES, (r + 1) * RING_RES)


def save_population(pop: Population, out_dir) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for i, mesh in enumerate(pop.meshes):
        name = f"body_{i:05d}.obj"
        save_obj(mesh, out_dir / name)
        files.append(name)
    manifest = {
        "seed": pop.seed,
        "ranges": {k: list(v) for k, v in (pop.ranges or {}).items()},
        "files": files,
        "params": [asdict(p) for p in pop.params],
    }
    path = out_dir / "population.json"
    path.write_text(json.dumps(manifest, indent=2))
    return path


def load_population(manifest_path) -> Population:
    from .mesh import load_obj

    manifest_path = Path(manifest_path)
    data = json.loads(manifest_path.read_text())
    meshes = [load_obj(manifest_path.parent / f) for f in data["files"]]
    params = [BodyParams(**p) for p in data["params"]]
    ranges = {k: tuple(v) for k, v in data.get("ranges", {}).items()}
    return Population(meshes, params, seed=data.get("seed"), ranges=ranges)


GIRTH_LEVELS = {"chest": CHEST_LEVEL, "waist": WAIST_LEVEL, "hip": HIP_LEVEL}


def feature_curves(template: Mesh | None = None) -> dict:
    """Chest/waist/hip curves: the torso rings at the fixed girth levels."""
    from .metrics import curve_from_vertices

    if template is None:
        template = generate_body(BodyParams())
    return {name: curve_from_vertices(name, template, ring_vertex_indices(level))
            for name, level in GIRTH_LEVELS.items()}
