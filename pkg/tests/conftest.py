"""Shared fixtures: meshes, protocols, and sensitivity matrices.

The expensive objects are session-scoped; nothing here mutates them.
The sensitivity cache is pointed at a throwaway directory so test
runs never touch the user's real cache.
"""

from __future__ import annotations

import numpy as np
import pytest

from tomo.forward import GaugedSolver, adjacent_protocol
from tomo.mesh import build_disc_mesh
from tomo.sensitivity import compute_sensitivity


@pytest.fixture(scope="session", autouse=True)
def _isolated_cache(tmp_path_factory):
    import os
    os.environ["TOMO_CACHE_DIR"] = str(tmp_path_factory.mktemp("tomo-cache"))
    yield


@pytest.fixture(scope="session")
def default_mesh():
    return build_disc_mesh(16, 32)


@pytest.fixture(scope="session")
def small_mesh():
    return build_disc_mesh(8, 8)


@pytest.fixture(scope="session")
def small_protocol():
    return adjacent_protocol(8)


@pytest.fixture(scope="session")
def default_protocol():
    return adjacent_protocol(32)


@pytest.fixture(scope="session")
def small_matrix(small_mesh, small_protocol):
    return compute_sensitivity(small_mesh, 1.0, small_protocol)


@pytest.fixture(scope="session")
def default_matrix(default_mesh, default_protocol):
    return compute_sensitivity(default_mesh, 1.0, default_protocol)


@pytest.fixture(scope="session")
def small_reference(small_mesh, small_protocol):
    solver = GaugedSolver(small_mesh, np.ones(small_mesh.n_triangles))
    return solver.frame(small_protocol)
