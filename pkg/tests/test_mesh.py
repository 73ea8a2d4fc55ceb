"""Disc mesh construction: counts, symmetry, electrodes, file format."""

from __future__ import annotations

import math

import numpy as np
import pytest

from tomo.errors import ConfigurationError, DomainError
from tomo.mesh import (DiscMesh, build_disc_mesh, electrode_arc_lengths,
                       electrode_center_angles, element_centroids, load_mesh,
                       rotation_node_permutation, save_mesh, triangle_areas)


@pytest.mark.parametrize("n_rings,n_electrodes", [
    (16, 32), (16, 8), (16, 4), (8, 8), (4, 4), (2, 4),
])
def test_element_and_node_counts(n_rings, n_electrodes):
    mesh = build_disc_mesh(n_rings, n_electrodes)
    assert mesh.n_triangles == 4 * n_rings ** 2
    assert mesh.n_nodes == 1 + sum(mesh.ring_node_counts)
    assert mesh.boundary_edges.shape[0] == mesh.ring_node_counts[-1]
    assert len(mesh.electrode_arcs) == n_electrodes


def test_default_mesh_shape(default_mesh):
    assert default_mesh.n_triangles == 1024
    assert default_mesh.n_nodes == 545
    assert list(default_mesh.ring_node_counts) == [32] * 15 + [64]


def test_two_ring_four_electrode_profile():
    # The smallest config: an inner fan of 4 plus an annulus of 12.
    mesh = build_disc_mesh(2, 4)
    assert list(mesh.ring_node_counts) == [4, 8]
    assert mesh.n_triangles == 16
    fan = mesh.triangles[:4]
    assert np.all(np.any(fan == 0, axis=1))  # innermost fan touches the center


def test_four_electrode_rings_match_linear_profile():
    mesh = build_disc_mesh(16, 4)
    assert list(mesh.ring_node_counts) == [4 * (i + 1) for i in range(16)]
    radii = np.hypot(mesh.nodes[:, 0], mesh.nodes[:, 1])
    ring_radii = sorted(set(np.round(radii, 12)))[1:]
    assert np.allclose(ring_radii, [(i + 1) / 16 for i in range(16)], atol=1e-12)


def test_orientation_and_total_area(default_mesh):
    areas = triangle_areas(default_mesh)
    assert np.all(areas > 0)
    # The triangulation tiles the inscribed boundary polygon exactly.
    n = default_mesh.ring_node_counts[-1]
    polygon_area = n / 2.0 * math.sin(2.0 * math.pi / n)
    assert abs(areas.sum() - polygon_area) < 1e-12


def test_boundary_edges_ordered_and_on_circle(default_mesh):
    edges = default_mesh.boundary_edges
    pts = default_mesh.nodes[edges[:, 0]]
    assert np.allclose(np.hypot(pts[:, 0], pts[:, 1]), 1.0, atol=1e-12)
    angles = np.arctan2(pts[:, 1], pts[:, 0]) % (2.0 * math.pi)
    assert np.all(np.diff(angles) > 0)


def test_electrode_arcs_uniform(default_mesh):
    widths = [len(arc) for arc in default_mesh.electrode_arcs]
    assert len(set(widths)) == 1
    centers = electrode_center_angles(default_mesh)
    gaps = np.diff(centers)
    assert np.allclose(gaps, 2.0 * math.pi / 32, atol=1e-12)
    lengths = electrode_arc_lengths(default_mesh)
    assert np.allclose(lengths, lengths[0], atol=1e-12)


def test_electrode_coverage_controls_width():
    narrow = build_disc_mesh(8, 8, electrode_coverage=0.25)
    wide = build_disc_mesh(8, 8, electrode_coverage=0.75)
    assert len(narrow.electrode_arcs[0]) < len(wide.electrode_arcs[0])


def test_rotation_permutation_is_exact_rotation(default_mesh):
    perm = rotation_node_permutation(default_mesh, 1)
    theta = 2.0 * math.pi / 32
    rot = np.array([[math.cos(theta), -math.sin(theta)],
                    [math.sin(theta), math.cos(theta)]])
    rotated = default_mesh.nodes @ rot.T
    assert np.allclose(default_mesh.nodes[perm], rotated, atol=1e-12)


def test_rotation_permutation_composes_to_identity(small_mesh):
    perm = rotation_node_permutation(small_mesh, 1)
    composed = np.arange(small_mesh.n_nodes)
    for _ in range(8):
        composed = perm[composed]
    assert np.array_equal(composed, np.arange(small_mesh.n_nodes))


def test_rotation_permutation_rejects_incompatible_step():
    # A 4-electrode mesh has rings of 4 nodes; a rotation by one
    # electrode pitch maps nodes onto nodes, but a mesh built without
    # ring metadata cannot be permuted at all.
    mesh = build_disc_mesh(2, 4)
    stripped = DiscMesh(
        nodes=mesh.nodes.copy(),
        triangles=mesh.triangles.copy(),
        boundary_edges=mesh.boundary_edges.copy(),
        electrode_arcs=[arc.copy() for arc in mesh.electrode_arcs],
        n_electrodes=mesh.n_electrodes,
        ring_node_counts=np.array([], dtype=np.int64),
    )
    with pytest.raises(DomainError):
        rotation_node_permutation(stripped, 1)


def test_centroids_inside_disc(default_mesh):
    c = element_centroids(default_mesh)
    assert np.all(np.hypot(c[:, 0], c[:, 1]) < 1.0)


@pytest.mark.parametrize("kwargs", [
    {"n_rings": 1}, {"n_rings": 0}, {"n_electrodes": 1},
    {"electrode_coverage": 0.0}, {"electrode_coverage": 1.5},
])
def test_build_rejects_bad_arguments(kwargs):
    full = {"n_rings": 8, "n_electrodes": 8}
    full.update(kwargs)
    with pytest.raises(ConfigurationError):
        build_disc_mesh(**full)


def test_save_load_roundtrip(tmp_path, small_mesh):
    path = tmp_path / "disc.tmsh"
    save_mesh(small_mesh, path)
    back = load_mesh(path)
    assert np.array_equal(back.nodes, small_mesh.nodes)
    assert np.array_equal(back.triangles, small_mesh.triangles)
    assert back.n_electrodes == small_mesh.n_electrodes
    assert len(back.electrode_arcs) == len(small_mesh.electrode_arcs)
    for a, b in zip(back.electrode_arcs, small_mesh.electrode_arcs):
        assert np.array_equal(a, b)
    assert np.array_equal(back.boundary_edges, small_mesh.boundary_edges)
    assert np.array_equal(back.ring_node_counts, small_mesh.ring_node_counts)


def test_load_rejects_foreign_file(tmp_path):
    path = tmp_path / "junk.tmsh"
    path.write_bytes(b"PNG\x00garbagegarbage")
    with pytest.raises(DomainError):
        load_mesh(path)
