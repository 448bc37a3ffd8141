"""Fixed-topology triangle meshes and Wavefront OBJ I/O."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class Mesh:
    """Triangle mesh; ``vertices`` is (N, 3) float64, ``triangles`` is (T, 3) int."""

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        t = np.asarray(self.triangles, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise InvalidInputError(f"vertices must be (N, 3), got {v.shape}")
        if t.ndim != 2 or t.shape[1] != 3:
            raise InvalidInputError(f"triangles must be (T, 3), got {t.shape}")
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise InvalidInputError("triangle index out of range")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def flat(self) -> np.ndarray:
        """Vertices as a 3N vector (x0, y0, z0, x1, ...)."""
        return self.vertices.reshape(-1)

    def with_vertices(self, vertices) -> "Mesh":
        return Mesh(np.asarray(vertices, dtype=np.float64).reshape(-1, 3), self.triangles)

    def same_connectivity(self, other: "Mesh") -> bool:
        return (self.n_vertices == other.n_vertices
                and np.array_equal(self.triangles, other.triangles))

    def extent(self, axis: int = 1) -> float:
        col = self.vertices[:, axis]
        return float(col.max() - col.min())


def check_same_connectivity(meshes, template: Mesh | None = None) -> Mesh:
    meshes = list(meshes)
    if not meshes:
        raise InvalidInputError("no meshes given")
    ref = template if template is not None else meshes[0]
    for i, m in enumerate(meshes):
        if not ref.same_connectivity(m):
            raise InvalidInputError(f"mesh {i} has different connectivity")
    return ref


def save_obj(mesh: Mesh, path) -> None:
    lines = [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in mesh.vertices]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.triangles]
    Path(path).write_text("\n".join(lines) + "\n")


def load_obj(path) -> Mesh:
    verts, faces = [], []
    for line in Path(path).read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(p) for p in parts[1:4]])
        elif parts[0] == "f":
            idx = [int(p.split("/")[0]) for p in parts[1:]]
            idx = [i - 1 if i > 0 else len(verts) + i for i in idx]
            # fan-triangulate polygons
            for j in range(1, len(idx) - 1):
                faces.append([idx[0], idx[j], idx[j + 1]])
    return Mesh(np.array(verts, dtype=np.float64).reshape(-1, 3),
                np.array(faces, dtype=np.int64).reshape(-1, 3))
