import numpy as np
import pytest

from sil2body.body_factory import sample_population
from sil2body.mesh import Mesh


def grid_triangles(n_vertices):
    # a strip of triangles over consecutive vertices; connectivity only matters for identity checks
    return np.array([(i, i + 1, i + 2) for i in range(n_vertices - 2)])


def low_rank_meshes(n_meshes=20, n_vertices=40, rank=3, seed=0, noise=0.0):
    """Meshes built as mean + orthonormal directions with known spreads."""
    rng = np.random.default_rng(seed)
    D = 3 * n_vertices
    mean = rng.normal(size=D)
    basis, _ = np.linalg.qr(rng.normal(size=(D, rank)))
    scales = np.array([3.0, 2.0, 1.0, 0.5, 0.25][:rank])
    coeffs = rng.normal(size=(n_meshes, rank)) * scales
    X = mean + coeffs @ basis.T + noise * rng.normal(size=(n_meshes, D))
    tris = grid_triangles(n_vertices)
    return [Mesh(x.reshape(-1, 3), tris) for x in X], basis


@pytest.fixture(scope="session")
def small_population():
    return sample_population(24, seed=3)


_ACCEPTANCE: dict = {}


@pytest.fixture
def acceptance():
    """``acceptance(n, passed, detail)`` records one criterion's verdict for the summary."""
    def record(number: int, passed: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
