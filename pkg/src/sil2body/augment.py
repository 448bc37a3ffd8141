"""Refinement-based augmentation of shape-coefficient datasets.

New samples are inserted on segments between neighbouring samples whose
distance exceeds a multiple of the smallest neighbouring radius, so every
synthetic body is a convex combination of two existing ones.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from ._container import Reader, Writer
from .errors import InvalidInputError

log = logging.getLogger(__name__)

COEF_MAGIC = "S2SCOEF"
COEF_VERSION = 1
DUPLICATE_TOL = 1e-12


@dataclass(frozen=True)
class Provenance:
    """``parent_a``/``parent_b`` are dataset indices; -1 marks an original sample."""

    parent_a: int = -1
    parent_b: int = -1
    t: float = 0.0

    @property
    def is_original(self) -> bool:
        return self.parent_a < 0

    def to_json(self):
        if self.is_original:
            return "original"
        return {"inserted": [self.parent_a, self.parent_b], "t": self.t}

    @classmethod
    def from_json(cls, obj) -> "Provenance":
        if obj == "original":
            return cls()
        a, b = obj["inserted"]
        return cls(int(a), int(b), float(obj["t"]))


@dataclass
class CoeffDataset:
    samples: np.ndarray                 # (n, k)
    provenance: list = field(default_factory=list)

    def __post_init__(self):
        self.samples = np.atleast_2d(np.asarray(self.samples, dtype=np.float64))
        if not self.provenance:
            self.provenance = [Provenance() for _ in range(len(self.samples))]
        if len(self.provenance) != len(self.samples):
            raise InvalidInputError("one provenance tag per sample required")
        for i, p in enumerate(self.provenance):
            if not p.is_original and not (0 <= p.parent_a < len(self.samples) and 0 <= p.parent_b < len(self.samples)):
                raise InvalidInputError(f"sample {i} references a missing parent")

    def __len__(self):
        return len(self.samples)

    @property
    def k(self) -> int:
        return self.samples.shape[1]


def _knn(points: np.ndarray, K: int) -> tuple[np.ndarray, np.ndarray]:
    """K nearest other samples per point: (distances ascending, indices)."""
    n = len(points)
    if K < 1:
        raise InvalidInputError("K must be >= 1")
    if n <= K:
        raise InvalidInputError(f"dataset of {n} samples is too small for K={K}")
    tree = cKDTree(points)
    _, idx = tree.query(points, k=K + 1)
    # drop self; with duplicate points self may not come first
    rows = []
    for i in range(n):
        row = [j for j in idx[i] if j != i][:K]
        rows.append(row)
    idx = np.array(rows, dtype=np.int64)
    d = np.linalg.norm(points[idx] - points[:, None, :], axis=-1)
    order = np.argsort(d, axis=1, kind="stable")
    return np.take_along_axis(d, order, 1), np.take_along_axis(idx, order, 1)


def neighboring_radii(points, K: int = 11) -> np.ndarray:
    """Mean distance from every sample to its K nearest other samples."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    d, _ = _knn(points, K)
    return d.sum(axis=1) / K


def neighboring_radius(sample_index: int, dataset, K: int = 11) -> float:
    points = dataset.samples if isinstance(dataset, CoeffDataset) else np.atleast_2d(np.asarray(dataset, float))
    if not 0 <= sample_index < len(points):
        raise InvalidInputError("sample index out of range")
    return float(neighboring_radii(points, K)[sample_index])


def refine_once(dataset: CoeffDataset, threshold_factor: float = 1.8,
                inserts_per_pair: int = 1, K: int = 11,
                r_min: float | None = None) -> tuple[CoeffDataset, int]:
    """One refinement pass; returns the grown dataset and the number inserted.

    ``r_min`` defaults to the minimum neighbouring radius of ``dataset``.
    """
    pts = dataset.samples
    d, idx = _knn(pts, K)
    if r_min is None:
        r_min = float((d.sum(axis=1) / K).min())
    limit = threshold_factor * r_min

    n = len(pts)
    pairs = set()
    for s in range(n):
        for q, dist in zip(idx[s], d[s]):
            if dist > limit:
                pairs.add((min(s, int(q)), max(s, int(q))))
    ts = [j / (inserts_per_pair + 1) for j in range(1, inserts_per_pair + 1)]

    cand, prov = [], []
    for a, b in sorted(pairs):
        for t in ts:
            cand.append((1.0 - t) * pts[a] + t * pts[b])
            prov.append(Provenance(a, b, t))
    if not cand:
        return dataset, 0
    cand = np.asarray(cand)
    keep = cKDTree(pts).query(cand, k=1)[0] > DUPLICATE_TOL
    # among candidates the first in canonical order wins
    for i, j in sorted(cKDTree(cand).query_pairs(DUPLICATE_TOL)):
        if keep[i]:
            keep[j] = False
    new_pts = cand[keep]
    new_prov = [p for p, k in zip(prov, keep) if k]
    if not len(new_pts):
        return dataset, 0
    grown = CoeffDataset(np.vstack([pts, new_pts]), dataset.provenance + new_prov)
    log.info("refine: r_min=%.4g, %d pairs, %d inserted", r_min, len(pairs), len(new_pts))
    return grown, len(new_pts)


def refine(dataset: CoeffDataset, threshold_factor: float = 1.8, inserts_per_pair: int = 1,
           iterations: int = 2, K: int = 11, history: list | None = None,
           rmin_policy: str = "initial") -> CoeffDataset:
    """Iterated refinement; ``history`` (if given) receives per-iteration insert counts.

    With ``rmin_policy="initial"`` the threshold radius is measured once on the
    input samples; ``"per_iteration"`` re-measures it at the start of every
    pass, which keeps shrinking the threshold as the set densifies.
    """
    if len(dataset) == 0:
        raise InvalidInputError("empty dataset")
    if threshold_factor <= 0:
        raise InvalidInputError("threshold_factor must be positive")
    if inserts_per_pair < 1:
        raise InvalidInputError("inserts_per_pair must be >= 1")
    if rmin_policy not in ("initial", "per_iteration"):
        raise InvalidInputError(f"unknown rmin_policy {rmin_policy!r}")
    r_min = None
    if rmin_policy == "initial" and iterations > 0:
        r_min = float(neighboring_radii(dataset.samples, K).min())
    for _ in range(iterations):
        dataset, added = refine_once(dataset, threshold_factor, inserts_per_pair, K, r_min)
        if history is not None:
            history.append(added)
    return dataset


def save_jsonl(dataset: CoeffDataset, path) -> None:
    with open(path, "w") as fh:
        for vec, prov in zip(dataset.samples, dataset.provenance):
            fh.write(json.dumps({"coeffs": [float(v) for v in vec], "provenance": prov.to_json()}) + "\n")


def load_jsonl(path) -> CoeffDataset:
    vecs, prov = [], []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            rec = json.loads(line)
            vecs.append(rec["coeffs"])
            prov.append(Provenance.from_json(rec.get("provenance", "original")))
    return CoeffDataset(np.array(vecs, dtype=np.float64), prov)


def save_coeffs(dataset: CoeffDataset, path) -> None:
    """Binary container: count, k, float64 samples, then (int32 a, int32 b, float64 t) per sample."""
    w = Writer(COEF_MAGIC, COEF_VERSION)
    n, k = dataset.samples.shape
    w.u32(n, k)
    w.array(dataset.samples, "f8")
    w.array([[p.parent_a, p.parent_b] for p in dataset.provenance], "i4")
    w.array([p.t for p in dataset.provenance], "f8")
    w.save(path)


def load_coeffs(path) -> CoeffDataset:
    path = Path(path)
    if path.suffix == ".jsonl":
        return load_jsonl(path)
    r = Reader.open(path, COEF_MAGIC)
    n, k = r.u32(), r.u32()
    samples = r.array((n, k), "f8")
    parents = r.array((n, 2), "i4")
    ts = r.array((n,), "f8")
    prov = [Provenance(int(a), int(b), float(t)) for (a, b), t in zip(parents, ts)]
    return CoeffDataset(samples, prov)


def write_coeffs(dataset: CoeffDataset, path) -> None:
    if Path(path).suffix == ".jsonl":
        save_jsonl(dataset, path)
    else:
        save_coeffs(dataset, path)
