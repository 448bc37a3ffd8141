"""PCA statistical body model: B = mean + components @ coeffs.

Bodies are height-normalized before fitting so the space captures shape
rather than stature. The vertical axis defaults to Y.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._container import Reader, Writer, sha256_arrays
from .errors import InvalidInputError, ZeroVarianceError
from .mesh import Mesh, check_same_connectivity

HEIGHT_AXIS = 1
SPACE_MAGIC = "S2SSPACE"
SPACE_VERSION = 1


def normalize_height(mesh: Mesh, axis: int = HEIGHT_AXIS) -> tuple[Mesh, float]:
    """Scale ``mesh`` isotropically so its extent along ``axis`` is 1.

    Returns the scaled mesh and the original height.
    """
    if mesh.n_vertices < 3:
        raise InvalidInputError("mesh needs at least 3 vertices")
    height = mesh.extent(axis)
    if not np.isfinite(height) or height <= 0.0:
        raise InvalidInputError("mesh has zero vertical extent")
    if height == 1.0:
        return mesh, 1.0
    return mesh.with_vertices(mesh.vertices / height), height


@dataclass(frozen=True)
class ShapeSpace:
    mean: np.ndarray          # (3N,)
    components: np.ndarray    # (3N, k), orthonormal columns
    variances: np.ndarray     # (k,), descending
    variance_captured: float
    triangles: np.ndarray     # template connectivity
    variance_target: float = 0.97
    total_variance: float = float("nan")
    discarded_variance: float = 0.0
    provenance: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.components.shape[1]

    @property
    def n_vertices(self) -> int:
        return self.mean.size // 3

    @property
    def template(self) -> Mesh:
        return Mesh(self.mean.reshape(-1, 3), self.triangles)

    def orthonormality_error(self) -> float:
        gram = self.components.T @ self.components
        return float(np.abs(gram - np.eye(self.k)).max())


def fit_pca(dataset, variance_target: float = 0.97) -> ShapeSpace:
    """Fit the PCA shape space and keep the smallest rank reaching ``variance_target``.

    The eigenproblem is solved on the H x H Gram matrix of the centred data
    when there are fewer meshes than coordinates.
    """
    meshes = list(dataset)
    if len(meshes) < 2:
        raise InvalidInputError("fit_pca needs at least two meshes")
    if not 0.0 < variance_target <= 1.0:
        raise InvalidInputError("variance_target must lie in (0, 1]")
    ref = check_same_connectivity(meshes)

    X = np.stack([m.flat() for m in meshes])
    H, D = X.shape
    mean = X.mean(axis=0)
    Xc = X - mean
    total = float(np.einsum("ij,ij->", Xc, Xc))
    if total <= 0.0 or not np.isfinite(total):
        raise ZeroVarianceError("all meshes are identical; nothing to model")

    if H < D:
        gram = Xc @ Xc.T
        evals, evecs = np.linalg.eigh(gram)
        order = np.argsort(evals)[::-1]
        evals = np.clip(evals[order], 0.0, None)
        evecs = evecs[:, order]
    else:
        evals, V = np.linalg.eigh(Xc.T @ Xc)
        order = np.argsort(evals)[::-1]
        evals = np.clip(evals[order], 0.0, None)
        V = V[:, order]

    # numerical rank: directions below this carry only roundoff
    rank = int(np.sum(evals > evals[0] * max(H, D) * np.finfo(float).eps))
    rank = max(rank, 1)
    cum = np.cumsum(evals[:rank]) / total
    reached = np.nonzero(cum >= variance_target - 1e-12)[0]
    k = int(reached[0]) + 1 if reached.size else rank

    if H < D:
        comps = Xc.T @ (evecs[:, :k] / np.sqrt(evals[:k]))
    else:
        comps = V[:, :k].copy()
    comps = _orthonormalize(comps)
    # fix the sign so the largest-magnitude entry of each column is positive
    pivots = np.argmax(np.abs(comps), axis=0)
    signs = np.sign(comps[pivots, np.arange(k)])
    comps *= np.where(signs == 0, 1.0, signs)

    captured = float(min(1.0, evals[:k].sum() / total))
    return ShapeSpace(
        mean=mean,
        components=comps,
        variances=evals[:k] / (H - 1),
        variance_captured=captured,
        triangles=ref.triangles.copy(),
        variance_target=float(variance_target),
        total_variance=total / (H - 1),
        discarded_variance=max(0.0, total - float(evals[:k].sum())) / (H - 1),
        provenance={"dataset_sha256": sha256_arrays(X, ref.triangles),
                    "n_meshes": H},
    )


def _orthonormalize(A: np.ndarray) -> np.ndarray:
    # symmetric (Loewdin) step: nearest orthonormal basis to A, keeps column order
    u, _, vt = np.linalg.svd(A, full_matrices=False)
    return u @ vt


def _check_mesh(space: ShapeSpace, mesh: Mesh) -> None:
    if mesh.n_vertices != space.n_vertices or not np.array_equal(mesh.triangles, space.triangles):
        raise InvalidInputError("mesh connectivity does not match the shape space template")


def encode(space: ShapeSpace, mesh: Mesh) -> np.ndarray:
    """Project a height-normalized mesh onto the shape space."""
    _check_mesh(space, mesh)
    return space.components.T @ (mesh.flat() - space.mean)


def encode_many(space: ShapeSpace, meshes) -> np.ndarray:
    meshes = list(meshes)
    for m in meshes:
        _check_mesh(space, m)
    X = np.stack([m.flat() for m in meshes])
    return (X - space.mean) @ space.components


def decode(space: ShapeSpace, coeffs) -> Mesh:
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape != (space.k,):
        raise InvalidInputError(f"expected {space.k} coefficients, got shape {coeffs.shape}")
    return Mesh((space.mean + space.components @ coeffs).reshape(-1, 3), space.triangles)


def decode_vertices(space: ShapeSpace, coeffs) -> np.ndarray:
    """Batch decode: (B, k) -> (B, N, 3) vertex arrays."""
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=np.float64))
    if coeffs.shape[1] != space.k:
        raise InvalidInputError(f"expected {space.k} coefficients per row")
    return (space.mean + coeffs @ space.components.T).reshape(len(coeffs), -1, 3)


def save_space(space: ShapeSpace, path) -> None:
    """Write the binary container and its JSON provenance sidecar."""
    path = Path(path)
    D, k = space.components.shape
    w = Writer(SPACE_MAGIC, SPACE_VERSION)
    w.u32(D // 3, k)
    w.array(space.mean, "f8")
    w.array(space.variances, "f8")
    w.array(space.components, "f8")
    # template connectivity trails the documented PCA payload
    w.u32(len(space.triangles))
    w.array(space.triangles, "u4")
    w.save(path)
    sidecar = {
        "format": SPACE_MAGIC,
        "version": SPACE_VERSION,
        "n_vertices": D // 3,
        "k": k,
        "variance_target": space.variance_target,
        "variance_captured": space.variance_captured,
        "total_variance": space.total_variance,
        "discarded_variance": space.discarded_variance,
        **space.provenance,
    }
    sidecar_path(path).write_text(json.dumps(sidecar, indent=2, sort_keys=True))


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def load_space(path) -> ShapeSpace:
    path = Path(path)
    r = Reader.open(path, SPACE_MAGIC)
    n, k = r.u32(), r.u32()
    mean = r.array((3 * n,), "f8")
    variances = r.array((k,), "f8")
    comps = r.array((3 * n, k), "f8")
    T = r.u32()
    tris = r.array((T, 3), "u4").astype(np.int64)
    meta = {}
    sc = sidecar_path(path)
    if sc.exists():
        meta = json.loads(sc.read_text())
    captured = meta.get("variance_captured", float("nan"))
    return ShapeSpace(
        mean=mean, components=comps, variances=variances,
        variance_captured=captured, triangles=tris,
        variance_target=meta.get("variance_target", float("nan")),
        total_variance=meta.get("total_variance", float("nan")),
        discarded_variance=meta.get("discarded_variance", float("nan")),
        provenance={key: meta[key] for key in ("dataset_sha256", "n_meshes") if key in meta},
    )
