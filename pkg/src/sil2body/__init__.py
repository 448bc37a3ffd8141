"""Silhouette-based 3D human body reconstruction.

Front and side silhouettes are reduced to ordered contour samples, and a
three-pipeline 1D CNN regresses the body's coefficients in a PCA shape space.
"""
from .errors import (FormatError, InvalidInputError, NoContourError, NumericalError, RenderError,
                     Sil2BodyError, StateError, ZeroVarianceError)
from .mesh import Mesh, load_obj, save_obj

__version__ = "0.1.0"

__all__ = [
    "FormatError", "InvalidInputError", "Mesh", "NoContourError", "NumericalError", "RenderError",
    "Sil2BodyError", "StateError", "ZeroVarianceError", "__version__", "load_obj", "save_obj",
]
