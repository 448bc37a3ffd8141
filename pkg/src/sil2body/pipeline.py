"""Glue between the shape space, the renderer and the trainer."""
from __future__ import annotations

import numpy as np

from .shape_space import ShapeSpace, decode, encode_many, fit_pca, normalize_height
from .silhouette import DEFAULT_M, JITTER_STD, sample_views
from .trainer import TrainingSet

RENDER_HEIGHT = 1.75


def sample_seed(base_seed: int, index: int) -> int:
    """Per-sample jitter seed; independent of how samples are batched."""
    return int(np.random.SeedSequence([base_seed, index]).generate_state(1)[0])


def render_dataset(space: ShapeSpace, coeffs, M: int = DEFAULT_M, seed: int = 0,
                   height_m: float = RENDER_HEIGHT, jitter_std: float = JITTER_STD):
    """Decode every coefficient vector and sample its front/side contours."""
    fronts, sides = [], []
    for i, phi in enumerate(np.atleast_2d(coeffs)):
        f, s = sample_views(decode(space, phi), M, sample_seed(seed, i), height_m, jitter_std)
        fronts.append(f)
        sides.append(s)
    return fronts, sides


def build_training_set(space: ShapeSpace, coeffs, M: int = DEFAULT_M, seed: int = 0,
                       height_m: float = RENDER_HEIGHT, jitter_std: float = JITTER_STD) -> TrainingSet:
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=np.float64))
    fronts, sides = render_dataset(space, coeffs, M, seed, height_m, jitter_std)
    return TrainingSet.from_contours(fronts, sides, coeffs)


def space_from_population(meshes, variance_target: float = 0.97) -> tuple[ShapeSpace, np.ndarray]:
    """Height-normalise, fit the PCA space and encode every body."""
    unit = [normalize_height(m)[0] for m in meshes]
    space = fit_pca(unit, variance_target)
    return space, encode_many(space, unit)
