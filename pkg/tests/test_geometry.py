"""Tests for the structured unit-square mesh and electrode layout."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eitmcmc.geometry import (
    ElectrodeLayout,
    Mesh,
    build_unit_square_mesh,
    classify_boundary_edges,
    electrode_layout,
    read_mesh,
    write_mesh,
)


class TestMeshConstruction:
    def test_counts_level_6(self):
        # (2^l + 1)^2 nodes and 2 * 4^l triangles for l = 6
        mesh = build_unit_square_mesh(6)
        assert mesh.nodes.shape == (4225, 2)
        assert mesh.triangles.shape == (8192, 3)

    @given(level=st.integers(min_value=1, max_value=5))
    @settings(max_examples=10, deadline=None)
    def test_counts_formula(self, level):
        mesh = build_unit_square_mesh(level)
        n = 2**level
        assert len(mesh.nodes) == (n + 1) ** 2
        assert len(mesh.triangles) == 2 * n**2
        assert len(mesh.edge_nodes) == 4 * n

    def test_node_spacing_level_3(self):
        mesh = build_unit_square_mesh(3)
        # every coordinate is a multiple of 2^-3
        scaled = mesh.nodes * 8
        np.testing.assert_allclose(scaled, np.round(scaled), atol=1e-14)
        assert mesh.nodes.min() == 0.0 and mesh.nodes.max() == 1.0

    def test_triangles_positive_area_and_cover(self):
        mesh = build_unit_square_mesh(3)
        p = mesh.nodes[mesh.triangles]
        # signed area of each triangle (counterclockwise orientation)
        area = 0.5 * (
            (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
            - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
        )
        assert np.all(area > 0)
        np.testing.assert_allclose(area.sum(), 1.0, rtol=1e-12)

    def test_nested_lattices(self):
        coarse = build_unit_square_mesh(3)
        fine = build_unit_square_mesh(4)
        fine_set = {(round(x, 12), round(y, 12)) for x, y in fine.nodes}
        for x, y in coarse.nodes:
            assert (round(x, 12), round(y, 12)) in fine_set

    def test_boundary_edge_sides(self):
        mesh = build_unit_square_mesh(2)
        # 4 edges per side at level 2, sides numbered 0..3 counterclockwise
        for side in range(4):
            assert np.sum(mesh.edge_side == side) == 4
        # every boundary edge has length 2^-2
        pts = mesh.nodes[mesh.edge_nodes]
        lengths = np.linalg.norm(pts[:, 1] - pts[:, 0], axis=1)
        np.testing.assert_allclose(lengths, 0.25, rtol=1e-14)

    def test_bad_level_rejected(self):
        with pytest.raises(ValueError):
            build_unit_square_mesh(-1)


class TestElectrodeLayout:
    def test_k16_bottom_intervals(self):
        layout = electrode_layout(16)
        bottom = layout.intervals[layout.intervals[:, 0] == 0]
        expected = np.array(
            [
                [0, 1 / 16, 3 / 16],
                [0, 5 / 16, 7 / 16],
                [0, 9 / 16, 11 / 16],
                [0, 13 / 16, 15 / 16],
            ]
        )
        np.testing.assert_allclose(bottom, expected, atol=1e-15)

    def test_k64_counts_and_length(self):
        layout = electrode_layout(64)
        assert layout.K == 64
        for side in range(4):
            rows = layout.intervals[layout.intervals[:, 0] == side]
            assert len(rows) == 16
            np.testing.assert_allclose(rows[:, 2] - rows[:, 1], 1 / 32, atol=1e-15)

    def test_total_coverage_half_perimeter(self):
        for K in (4, 8, 16, 64):
            layout = electrode_layout(K)
            total = np.sum(layout.intervals[:, 2] - layout.intervals[:, 1])
            np.testing.assert_allclose(total, 2.0, rtol=1e-14)

    def test_rotation_symmetry(self):
        layout = electrode_layout(8)
        per_side = 2
        base = layout.intervals[:per_side, 1:]
        for side in range(1, 4):
            rows = layout.intervals[side * per_side : (side + 1) * per_side, 1:]
            np.testing.assert_allclose(rows, base, atol=1e-15)

    def test_counterclockwise_numbering(self):
        layout = electrode_layout(16)
        assert list(layout.intervals[:, 0]) == [0] * 4 + [1] * 4 + [2] * 4 + [3] * 4

    def test_k_not_multiple_of_four_rejected(self):
        for K in (0, 2, 6, 15):
            with pytest.raises(ValueError):
                electrode_layout(K)


class TestClassification:
    def test_k16_level4_bottom_tags(self):
        mesh = build_unit_square_mesh(4)
        layout = electrode_layout(16)
        mesh = classify_boundary_edges(mesh, layout)
        # electrode 0 covers [1/16, 3/16] on the bottom: exactly the two edges
        # [1/16, 2/16] and [2/16, 3/16]
        tagged = np.flatnonzero(mesh.edge_electrode == 0)
        assert len(tagged) == 2
        pts = mesh.nodes[mesh.edge_nodes[tagged]]
        xs = np.sort(pts[:, :, 0].ravel())
        np.testing.assert_allclose(xs, [1 / 16, 2 / 16, 2 / 16, 3 / 16], atol=1e-14)
        assert np.all(pts[:, :, 1] == 0.0)

    def test_tagged_length_per_electrode(self):
        mesh = build_unit_square_mesh(5)
        layout = electrode_layout(16)
        mesh = classify_boundary_edges(mesh, layout)
        pts = mesh.nodes[mesh.edge_nodes]
        lengths = np.linalg.norm(pts[:, 1] - pts[:, 0], axis=1)
        for k in range(16):
            total = lengths[mesh.edge_electrode == k].sum()
            np.testing.assert_allclose(total, 2 / 16, rtol=1e-13)

    def test_untagged_edges_half_perimeter(self):
        mesh = build_unit_square_mesh(4)
        layout = electrode_layout(16)
        mesh = classify_boundary_edges(mesh, layout)
        pts = mesh.nodes[mesh.edge_nodes]
        lengths = np.linalg.norm(pts[:, 1] - pts[:, 0], axis=1)
        np.testing.assert_allclose(lengths[mesh.edge_electrode == -1].sum(), 2.0, rtol=1e-13)

    def test_misaligned_mesh_rejected(self):
        # level 3 spacing 1/8 does not hit the K=16 endpoints at odd/16
        mesh = build_unit_square_mesh(3)
        layout = electrode_layout(16)
        with pytest.raises(ValueError):
            classify_boundary_edges(mesh, layout)

    def test_k64_needs_level_6(self):
        layout = electrode_layout(64)
        with pytest.raises(ValueError):
            classify_boundary_edges(build_unit_square_mesh(5), layout)
        mesh = classify_boundary_edges(build_unit_square_mesh(6), layout)
        assert set(np.unique(mesh.edge_electrode)) == set(range(-1, 64))


class TestMeshFile:
    def test_round_trip(self, tmp_path):
        mesh = build_unit_square_mesh(3)
        mesh = classify_boundary_edges(mesh, electrode_layout(8))
        path = tmp_path / "mesh.txt"
        write_mesh(mesh, path)
        back = read_mesh(path)
        assert back.level == mesh.level
        np.testing.assert_array_equal(back.nodes, mesh.nodes)
        np.testing.assert_array_equal(back.triangles, mesh.triangles)
        np.testing.assert_array_equal(back.edge_nodes, mesh.edge_nodes)
        np.testing.assert_array_equal(back.edge_side, mesh.edge_side)
        np.testing.assert_array_equal(back.edge_electrode, mesh.edge_electrode)

    def test_round_trip_unclassified(self, tmp_path):
        mesh = build_unit_square_mesh(2)
        path = tmp_path / "mesh.txt"
        write_mesh(mesh, path)
        back = read_mesh(path)
        assert back.edge_electrode is None
        np.testing.assert_array_equal(back.nodes, mesh.nodes)
