import numpy as np
import pytest

from DEC2D.build_meshes import (EGG_CURVES, CircleInclusion, gen_disk, gen_egg,
    gen_square, refine, refine_dirichlet)
from DEC2D.errors import ScenarioError
from DEC2D.mesh import build_trimesh, mesh_area, validate_dirichlet


def sorted_rows(points):
    points = np.round(points, 12)
    return points[np.lexsort(points.T[::-1])]


class TestGenSquare:
    @pytest.mark.parametrize('n', [1, 2, 5])
    def test_counts(self, n):
        mesh = gen_square(n, side=3.0)
        assert mesh.n_nodes == (n + 1) ** 2
        assert mesh.n_triangles == 2 * n ** 2
        assert mesh.boundary_nodes.size == 4 * n
        assert mesh_area(mesh) == pytest.approx(9.0)
        assert mesh.reoriented == 0

    def test_origin(self):
        mesh = gen_square(2, side=8.0, origin=(-4.0, 1.0))
        np.testing.assert_allclose(mesh.points.min(axis=0), [-4.0, 1.0])
        np.testing.assert_allclose(mesh.points.max(axis=0), [4.0, 9.0])

    def test_inclusion_by_centroid(self):
        inclusion = CircleInclusion((4.0, 4.0), 2.0, inner_material=1)
        mesh = gen_square(16, side=8.0, inclusion=inclusion, outer_material=2)
        centroids = mesh.points[mesh.triangles].mean(axis=1)
        inside = np.hypot(*(centroids - 4.0).T) < 2.0
        np.testing.assert_array_equal(mesh.materials, np.where(inside, 1, 2))
        assert 0 < np.count_nonzero(inside) < mesh.n_triangles

    @pytest.mark.parametrize('n, side', [(0, 1.0), (2, 0.0)])
    def test_invalid(self, n, side):
        with pytest.raises(ScenarioError):
            gen_square(n, side=side)


class TestGenDisk:
    @pytest.mark.parametrize('rings', [1, 2, 8])
    def test_counts(self, rings):
        mesh = gen_disk(rings)
        assert mesh.n_nodes == 1 + 3 * rings * (rings + 1)
        assert mesh.n_triangles == 6 * rings ** 2
        assert mesh.boundary_nodes.size == 6 * rings
        assert mesh.reoriented == 0

    def test_boundary_on_circle(self):
        mesh = gen_disk(4, radius=2.0, center=(1.0, -1.0), material=3)
        radii = np.hypot(*(mesh.points[mesh.boundary_nodes] - (1.0, -1.0)).T)
        np.testing.assert_allclose(radii, 2.0)
        np.testing.assert_array_equal(mesh.materials, 3)
        assert mesh.boundary_circle == (1.0, -1.0, 2.0)
        np.testing.assert_allclose(mesh.points[0], [1.0, -1.0])

    def test_area_is_inscribed_polygon(self):
        rings = 5
        sides = 6 * rings
        expected = 0.5 * sides * np.sin(2.0 * np.pi / sides)
        assert mesh_area(gen_disk(rings)) == pytest.approx(expected, rel=1e-12)

    def test_invalid(self):
        with pytest.raises(ScenarioError):
            gen_disk(0)


class TestGenEgg:
    def test_counts_and_materials(self):
        mesh = gen_egg(1)
        assert mesh.n_nodes == 61
        assert mesh.n_triangles == 6 * 16
        np.testing.assert_array_equal(np.unique(mesh.materials), [1, 2, 3, 4])

    def test_boundary_on_outer_curve(self):
        mesh = gen_egg(2)
        left, right, semi_y = EGG_CURVES[-1]
        x, y = mesh.points[mesh.boundary_nodes].T
        semi_x = np.where(x >= 0, right, left)
        np.testing.assert_allclose((x / semi_x) ** 2 + (y / semi_y) ** 2, 1.0)

    def test_core_is_innermost(self):
        mesh = gen_egg(2)
        centroids = mesh.points[mesh.triangles].mean(axis=1)
        core = np.hypot(*centroids[mesh.materials == 1].T)
        outer = np.hypot(*centroids[mesh.materials == 4].T)
        assert core.max() < outer.min()

    def test_invalid(self):
        with pytest.raises(ScenarioError):
            gen_egg(0)


class TestRefine:
    def test_single_triangle(self):
        mesh = refine(build_trimesh([[0, 0], [1, 0], [0, 1]], [[0, 1, 2]], [5]))
        assert (mesh.n_nodes, mesh.n_triangles) == (6, 4)
        np.testing.assert_array_equal(mesh.materials, 5)
        assert mesh_area(mesh) == pytest.approx(0.5)
        assert mesh.reoriented == 0

    def test_square_matches_finer_grid(self, unit_square):
        mesh = refine(unit_square)
        np.testing.assert_array_equal(sorted_rows(mesh.points),
            sorted_rows(gen_square(2).points))
        assert mesh.n_triangles == 8

    def test_materials_are_inherited(self):
        inclusion = CircleInclusion((0.5, 0.5), 0.3)
        coarse = gen_square(4, inclusion=inclusion)
        fine = refine(coarse)
        np.testing.assert_array_equal(fine.materials,
            np.repeat(coarse.materials, 4))

    def test_disk_boundary_is_projected(self):
        coarse = gen_disk(2)
        fine = refine(coarse)
        assert fine.n_nodes == coarse.n_nodes + 42
        radii = np.hypot(*fine.points[fine.boundary_nodes].T)
        np.testing.assert_allclose(radii, 1.0)
        assert mesh_area(coarse) < mesh_area(fine) < np.pi

    def test_dirichlet_midpoints(self, unit_square):
        dirichlet = {0: 0.0, 1: 2.0, 2: 4.0, 3: 6.0}
        fine = refine(unit_square)
        refined = refine_dirichlet(unit_square, dirichlet)
        assert refined == {0: 0.0, 1: 2.0, 2: 4.0, 3: 6.0, 4: 1.0, 5: 2.0,
            7: 4.0, 8: 5.0}
        assert validate_dirichlet(fine, refined) == refined
        np.testing.assert_allclose(fine.points[[4, 5, 7, 8]],
            [[0.5, 0.0], [0.0, 0.5], [1.0, 0.5], [0.5, 1.0]])

    def test_dirichlet_needs_both_endpoints(self, unit_square):
        assert refine_dirichlet(unit_square, {0: 1.0, 1: 3.0}) == {0: 1.0,
            1: 3.0, 4: 2.0}
