"""Geometric and anthropometric accuracy metrics."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .mesh import Mesh

HIST_BINS = 40
CURVE_NAMES = ("chest", "waist", "hip")


@dataclass(frozen=True)
class FeatureCurve:
    """Closed loop on a template: each anchor is (triangle index, barycentric weights)."""

    name: str
    triangles: np.ndarray     # (P,)
    barycentric: np.ndarray   # (P, 3)

    def __post_init__(self):
        tri = np.asarray(self.triangles, dtype=np.int64).reshape(-1)
        bc = np.asarray(self.barycentric, dtype=np.float64).reshape(-1, 3)
        if len(tri) != len(bc) or len(tri) < 3:
            raise InvalidInputError("a feature curve needs >= 3 anchors")
        if (bc < 0).any() or np.abs(bc.sum(axis=1) - 1.0).max() > 1e-9:
            raise InvalidInputError("barycentric weights must be non-negative and sum to 1")
        object.__setattr__(self, "triangles", tri)
        object.__setattr__(self, "barycentric", bc)

    def points(self, mesh: Mesh) -> np.ndarray:
        if self.triangles.max() >= len(mesh.triangles) or self.triangles.min() < 0:
            raise InvalidInputError(f"curve {self.name!r} references a missing triangle")
        corners = mesh.vertices[mesh.triangles[self.triangles]]   # (P, 3, 3)
        return np.einsum("pk,pkd->pd", self.barycentric, corners)


def curve_from_vertices(name: str, mesh: Mesh, vertex_loop) -> FeatureCurve:
    """Express a loop of template vertices as barycentric anchors."""
    tris, bcs = [], []
    for v in vertex_loop:
        t, slot = np.argwhere(mesh.triangles == v)[0]
        w = np.zeros(3)
        w[slot] = 1.0
        tris.append(t)
        bcs.append(w)
    return FeatureCurve(name, np.array(tris), np.array(bcs))


def girth(mesh: Mesh, curve: FeatureCurve) -> float:
    """Length of the closed polyline through the curve's mapped anchors."""
    pts = curve.points(mesh)
    return float(np.linalg.norm(pts - np.roll(pts, -1, axis=0), axis=1).sum())


def _vertex_dists(truth: Mesh, pred: Mesh) -> np.ndarray:
    if not truth.same_connectivity(pred):
        raise InvalidInputError("meshes differ in connectivity")
    return np.linalg.norm(truth.vertices - pred.vertices, axis=1)


def e_max(truth: Mesh, pred: Mesh) -> float:
    return float(_vertex_dists(truth, pred).max())


def e_aver(truth: Mesh, pred: Mesh) -> float:
    return float(_vertex_dists(truth, pred).mean())


def vertex_errors(truth_vertices: np.ndarray, pred_vertices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batch E_max / E_aver for stacked (H, N, 3) vertex arrays."""
    if truth_vertices.shape != pred_vertices.shape:
        raise InvalidInputError("vertex arrays differ in shape")
    d = np.linalg.norm(truth_vertices - pred_vertices, axis=-1)
    return d.max(axis=-1), d.mean(axis=-1)


def histogram(values, bins: int = HIST_BINS):
    values = np.asarray(values, dtype=np.float64)
    top = float(values.max()) if values.size else 0.0
    counts, edges = np.histogram(values, bins=bins, range=(0.0, top if top > 0 else 1.0))
    return counts, edges


def empirical_cdf(values):
    """Sorted values and the fraction of samples <= each value."""
    x = np.sort(np.asarray(values, dtype=np.float64))
    return x, np.arange(1, x.size + 1) / x.size


@dataclass
class ErrorSummary:
    e_max: np.ndarray
    e_aver: np.ndarray
    mean_e_max: float
    mean_e_aver: float
    H: int
    girth_errors: dict = field(default_factory=dict)   # name -> (mu, sigma)

    def to_dict(self, unit_scale: float = 1.0) -> dict:
        return {
            "H": self.H,
            "mean_e_max": self.mean_e_max * unit_scale,
            "mean_e_aver": self.mean_e_aver * unit_scale,
            "girth_abs_error": {k: {"mu": m * unit_scale, "sigma": s * unit_scale}
                                for k, (m, s) in self.girth_errors.items()},
        }


def summarize(e_max_values, e_aver_values, girth_abs_errors: dict | None = None) -> ErrorSummary:
    emax = np.asarray(e_max_values, dtype=np.float64).reshape(-1)
    eav = np.asarray(e_aver_values, dtype=np.float64).reshape(-1)
    if emax.size == 0 or emax.size != eav.size:
        raise InvalidInputError("need matching, non-empty per-sample error lists")
    girths = {}
    for name, errs in (girth_abs_errors or {}).items():
        errs = np.abs(np.asarray(errs, dtype=np.float64))
        girths[name] = (float(errs.mean()), float(errs.std()))
    return ErrorSummary(emax, eav, float(emax.mean()), float(eav.mean()), int(emax.size), girths)


def write_report(summary: ErrorSummary, out_dir, unit_scale: float = 100.0, unit: str = "cm") -> dict:
    """Write metrics JSON, per-sample CSV, and histogram/CDF CSV point lists.

    ``unit_scale`` converts mesh units into the reported unit.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    doc = summary.to_dict(unit_scale)
    doc["unit"] = unit
    paths["json"] = out_dir / "metrics.json"
    paths["json"].write_text(json.dumps(doc, indent=2))

    paths["samples"] = out_dir / "per_sample.csv"
    with open(paths["samples"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", f"e_max_{unit}", f"e_aver_{unit}"])
        for i, (a, b) in enumerate(zip(summary.e_max, summary.e_aver)):
            w.writerow([i, f"{a * unit_scale:.6g}", f"{b * unit_scale:.6g}"])

    for name, values in (("e_max", summary.e_max), ("e_aver", summary.e_aver)):
        counts, edges = histogram(values * unit_scale)
        p = out_dir / f"hist_{name}.csv"
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_lo", "bin_hi", "count"])
            for lo, hi, c in zip(edges[:-1], edges[1:], counts):
                w.writerow([f"{lo:.6g}", f"{hi:.6g}", int(c)])
        paths[f"hist_{name}"] = p
        x, F = empirical_cdf(values * unit_scale)
        p = out_dir / f"cdf_{name}.csv"
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"error_{unit}", "fraction"])
            for a, b in zip(x, F):
                w.writerow([f"{a:.6g}", f"{b:.6g}"])
        paths[f"cdf_{name}"] = p
    return paths
