"""Forward solver checks against hand-assembled stiffness systems."""

from __future__ import annotations

import numpy as np
import pytest

from tomo.errors import ConfigurationError, DomainError, ShapeError
from tomo.forward import (DrivePattern, GaugedSolver, VoltageFrame,
                          adjacent_protocol, assemble_system,
                          electrode_load, electrode_weight_vectors,
                          element_coefficients, load_frame,
                          opposite_protocol, save_frame, simulate_frame)
from tomo.mesh import DiscMesh


def _patch_mesh(nodes, triangles):
    """Wrap raw arrays in a DiscMesh, boundary walked around the hull."""
    nodes = np.asarray(nodes, dtype=np.float64)
    n = nodes.shape[0]
    edges = np.array([(i, (i + 1) % n) for i in range(n)], dtype=np.int32)
    arcs = [np.array([i], dtype=np.int64) for i in range(n)]
    return DiscMesh(
        nodes=nodes,
        triangles=np.asarray(triangles, dtype=np.int32),
        boundary_edges=edges,
        electrode_arcs=arcs,
        n_electrodes=n,
        ring_node_counts=np.array([], dtype=np.int64),
    )


# Unit right triangle (0,0), (1,0), (0,1): shape gradients are
# (-1,-1), (1,0), (0,1), area 1/2, so the local stiffness is known
# in closed form.
UNIT_TRIANGLE_STIFFNESS = np.array([
    [1.0, -0.5, -0.5],
    [-0.5, 0.5, 0.0],
    [-0.5, 0.0, 0.5],
])

# Unit square split along the (0,0)-(1,1) diagonal.
SQUARE_NODES = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
SQUARE_TRIANGLES = [(0, 1, 2), (0, 2, 3)]
SQUARE_STIFFNESS = np.array([
    [1.0, -0.5, 0.0, -0.5],
    [-0.5, 1.0, -0.5, 0.0],
    [0.0, -0.5, 1.0, -0.5],
    [-0.5, 0.0, -0.5, 1.0],
])


def test_element_coefficients_unit_triangle():
    mesh = _patch_mesh([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], [(0, 1, 2)])
    b, c, areas = element_coefficients(mesh)
    assert np.allclose(b[0], [-1.0, 1.0, 0.0])
    assert np.allclose(c[0], [-1.0, 0.0, 1.0])
    assert np.allclose(areas, [0.5])


def test_assemble_unit_triangle():
    mesh = _patch_mesh([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], [(0, 1, 2)])
    k = assemble_system(mesh, np.ones(1)).toarray()
    assert np.allclose(k, UNIT_TRIANGLE_STIFFNESS, atol=1e-15)


def test_assemble_square_patch():
    mesh = _patch_mesh(SQUARE_NODES, SQUARE_TRIANGLES)
    k = assemble_system(mesh, np.ones(2)).toarray()
    assert np.allclose(k, SQUARE_STIFFNESS, atol=1e-15)
    assert np.allclose(k.sum(axis=1), 0.0, atol=1e-15)


def test_assemble_scales_with_sigma():
    mesh = _patch_mesh(SQUARE_NODES, SQUARE_TRIANGLES)
    k = assemble_system(mesh, np.full(2, 3.0)).toarray()
    assert np.allclose(k, 3.0 * SQUARE_STIFFNESS, atol=1e-14)


def test_assemble_rejections():
    mesh = _patch_mesh(SQUARE_NODES, SQUARE_TRIANGLES)
    with pytest.raises(ShapeError):
        assemble_system(mesh, np.ones(3))
    with pytest.raises(DomainError):
        assemble_system(mesh, np.array([1.0, 0.0]))
    with pytest.raises(DomainError):
        assemble_system(mesh, np.array([1.0, np.nan]))


def test_gauged_solve_square_patch():
    # K phi = (1, 0, -1, 0) has the zero-mean solution (1, 0, -1, 0):
    # verify by row 0 of the hand stiffness.
    mesh = _patch_mesh(SQUARE_NODES, SQUARE_TRIANGLES)
    solver = GaugedSolver(mesh, np.ones(2))
    phi = solver.solve(np.array([1.0, 0.0, -1.0, 0.0]))
    assert np.allclose(phi, [1.0, 0.0, -1.0, 0.0], atol=1e-12)


def test_square_patch_drive_measurement():
    mesh = _patch_mesh(SQUARE_NODES, SQUARE_TRIANGLES)
    solver = GaugedSolver(mesh, np.ones(2))
    phi = solver.solve_drive(DrivePattern(0, 2))
    assert np.allclose(phi, [0.5, 0.5, -0.5, -0.5], atol=1e-12)
    means = solver.weights @ phi
    assert abs((means[0] - means[2]) - 1.0) < 1e-12


def test_solution_mean_is_zero(small_mesh):
    solver = GaugedSolver(small_mesh, np.ones(small_mesh.n_triangles))
    phi = solver.solve_drive(DrivePattern(0, 3))
    assert abs(phi.mean()) < 1e-12


def test_electrode_load_balances(small_mesh):
    load = electrode_load(small_mesh, DrivePattern(2, 5, amplitude=3.0))
    assert abs(load.sum()) < 1e-12
    assert load.max() > 0 and load.min() < 0


def test_electrode_load_rejections(small_mesh):
    with pytest.raises(ConfigurationError):
        electrode_load(small_mesh, DrivePattern(0, 99))
    with pytest.raises(ConfigurationError):
        electrode_load(small_mesh, DrivePattern(3, 3))
    with pytest.raises(ConfigurationError):
        electrode_load(small_mesh, DrivePattern(0, 1, amplitude=0.0))


def test_weight_rows_average_to_one(small_mesh):
    weights = electrode_weight_vectors(small_mesh)
    assert np.allclose(weights.sum(axis=1), 1.0, atol=1e-12)


@pytest.mark.parametrize("factory,n,expected", [
    (adjacent_protocol, 8, 40),
    (adjacent_protocol, 32, 928),
    (opposite_protocol, 8, 32),
    (opposite_protocol, 32, 896),
])
def test_protocol_measurement_counts(factory, n, expected):
    protocol = factory(n)
    assert protocol.n_measurements == expected
    assert len(protocol.drives) == n


def test_protocol_excludes_driven_electrodes():
    protocol = adjacent_protocol(8)
    for drive, pairs in zip(protocol.drives, protocol.measurements):
        for a, b in pairs:
            assert {a, b}.isdisjoint({drive.source, drive.sink})


def test_flat_index_covers_frame():
    protocol = opposite_protocol(8)
    seen = set()
    for flat, drive, (a, b) in protocol.entries():
        assert protocol.flat_index(drive.source, drive.sink, a, b) == flat
        seen.add(flat)
    assert seen == set(range(protocol.n_measurements))
    assert protocol.flat_index(0, 4, 0, 1) is None  # driven pair, excluded


def test_protocol_rejections():
    with pytest.raises(ConfigurationError):
        adjacent_protocol(3)
    with pytest.raises(ConfigurationError):
        opposite_protocol(7)
    with pytest.raises(ConfigurationError):
        adjacent_protocol(8, amplitude=-1.0)


def test_frame_rejects_electrode_mismatch(small_mesh):
    solver = GaugedSolver(small_mesh, np.ones(small_mesh.n_triangles))
    with pytest.raises(ConfigurationError):
        solver.frame(adjacent_protocol(16))


def test_frame_linear_in_amplitude(small_mesh):
    sigma = np.ones(small_mesh.n_triangles)
    base = simulate_frame(small_mesh, sigma, adjacent_protocol(8)).values
    doubled = simulate_frame(small_mesh, sigma, adjacent_protocol(8, amplitude=2.0)).values
    assert np.allclose(doubled, 2.0 * base, rtol=1e-12, atol=0)


def test_frame_inverse_in_conductivity(small_mesh, small_protocol):
    base = simulate_frame(
        small_mesh, np.ones(small_mesh.n_triangles), small_protocol
    ).values
    halved = simulate_frame(
        small_mesh, np.full(small_mesh.n_triangles, 2.0), small_protocol
    ).values
    assert np.allclose(halved, 0.5 * base, rtol=1e-12, atol=0)


def test_reciprocity_spot_check(small_mesh, small_reference, small_protocol):
    # Swapping drive and measurement pair leaves the reading unchanged,
    # because loads and readouts use the same arc functionals.
    i = small_protocol.flat_index(0, 1, 3, 4)
    j = small_protocol.flat_index(3, 4, 0, 1)
    assert i is not None and j is not None
    v = small_reference.values
    assert abs(v[i] - v[j]) <= 1e-12 * max(abs(v[i]), 1e-30)


def test_frame_roundtrip(tmp_path, small_reference):
    path = tmp_path / "ref.tfrm"
    save_frame(small_reference, path)
    back = load_frame(path)
    assert np.array_equal(back.values, small_reference.values)


def test_load_frame_rejects_garbage(tmp_path):
    path = tmp_path / "bad.tfrm"
    path.write_bytes(b"XXXX\x01\x00\x00\x00\x00\x00\x00\x00")
    with pytest.raises(DomainError):
        load_frame(path)
    short = tmp_path / "short.tfrm"
    save_frame(VoltageFrame(values=np.arange(5.0)), short)
    short.write_bytes(short.read_bytes()[:-8])
    with pytest.raises(DomainError):
        load_frame(short)
