import numpy as np
import pytest
from hypothesis import given

from DEC2D.errors import GeometryError, MeshValidationError
from DEC2D.geometry import (AnisotropyTensor, circumcenter, material_tensor,
    rotate90, triangle_geometry)

from strategies import ccw_triangles, is_obtuse, random_triangles


def interior_angles(points):
    """Angle at v1, v2, v3 of each (..., 3, 2) triangle."""
    angles = []
    for i in range(3):
        a = points[..., (i + 1) % 3, :] - points[..., i, :]
        b = points[..., (i + 2) % 3, :] - points[..., i, :]
        cos = np.sum(a * b, axis=-1) / (np.linalg.norm(a, axis=-1) *
            np.linalg.norm(b, axis=-1))
        angles.append(np.arccos(np.clip(cos, -1.0, 1.0)))
    return np.stack(angles, axis=-1)


def assert_scaled(actual, expected, scale, tol=1e-10):
    """|actual - expected| <= tol * max(1, scale), entrywise."""
    error = np.abs(np.asarray(actual) - np.asarray(expected))
    assert np.all(error <= tol * np.maximum(1.0, scale))


class TestCircumcenter:
    def test_right_triangle(self, right_triangle):
        np.testing.assert_allclose(circumcenter(*right_triangle), [0.5, 0.5])

    def test_equilateral(self):
        c = circumcenter([0, 0], [2, 0], [1, np.sqrt(3.0)])
        np.testing.assert_allclose(c, [1.0, 1.0 / np.sqrt(3.0)])

    def test_collinear(self):
        with pytest.raises(GeometryError):
            circumcenter([0, 0], [1, 0], [2, 0])

    @given(ccw_triangles())
    def test_equidistant(self, points):
        c = circumcenter(*points)
        distances = np.linalg.norm(points - c, axis=1)
        np.testing.assert_allclose(distances, distances[0], rtol=1e-9)


class TestTriangleGeometry:
    def test_right_triangle(self, right_triangle):
        geom = triangle_geometry(*right_triangle)
        assert geom.A == pytest.approx(0.5)
        np.testing.assert_allclose(geom.L, [1.0, np.sqrt(2.0), 1.0])
        np.testing.assert_allclose(geom.l / geom.L, [0.5, 0.0, 0.5], atol=1e-15)
        np.testing.assert_allclose(geom.A_dual, [0.25, 0.125, 0.125])
        assert geom.R == pytest.approx(np.sqrt(0.5))

    def test_obtuse_triangle_has_negative_dual_areas(self, obtuse_triangle):
        geom = triangle_geometry(*obtuse_triangle)
        np.testing.assert_allclose(geom.c, [0.5, -1.2])
        assert geom.R == pytest.approx(1.3)
        np.testing.assert_allclose(geom.L * geom.l, [-1.2, 0.65, 0.65])
        np.testing.assert_allclose(geom.A_dual, [-0.1375, -0.1375, 0.325])
        assert np.sum(geom.A_dual) == pytest.approx(0.05)
        assert geom.l[0] < 0 and geom.alpha[0] < 0

    def test_equilateral(self, equilateral_triangle):
        geom = triangle_geometry(*equilateral_triangle)
        np.testing.assert_allclose(geom.A_dual, geom.A / 3.0, rtol=1e-12)
        np.testing.assert_allclose(geom.alpha, np.pi / 6.0, rtol=1e-12)

    def test_edge_vectors_close(self, obtuse_triangle):
        geom = triangle_geometry(*obtuse_triangle)
        np.testing.assert_allclose(np.sum(geom.w, axis=0), 0.0, atol=1e-15)

    def test_clockwise_rejected(self, right_triangle):
        with pytest.raises(GeometryError):
            triangle_geometry(*right_triangle[[0, 2, 1]])

    def test_degenerate_rejected(self):
        with pytest.raises(GeometryError):
            triangle_geometry([0, 0], [1, 0], [2, 0])

    def test_batched_matches_single(self, right_triangle, obtuse_triangle):
        stacked = np.stack([right_triangle, obtuse_triangle])
        batch = triangle_geometry(stacked[:, 0], stacked[:, 1], stacked[:, 2])
        for i, points in enumerate((right_triangle, obtuse_triangle)):
            single = triangle_geometry(*points)
            np.testing.assert_allclose(batch.A_dual[i], single.A_dual)
            np.testing.assert_allclose(batch.l[i], single.l)


def test_dual_partition_and_trig_identities(rng):
    points = random_triangles(rng, 1000)
    assert np.count_nonzero(is_obtuse(points)) >= 100
    geom = triangle_geometry(points[:, 0], points[:, 1], points[:, 2])

    np.testing.assert_allclose(np.sum(geom.A_dual, axis=1), geom.A, rtol=1e-10)
    alpha = geom.alpha
    R = geom.R[:, None]
    assert_scaled(geom.l, R * np.sin(alpha), R)
    assert_scaled(geom.L, 2.0 * R * np.cos(alpha), R)
    np.testing.assert_allclose(2.0 * geom.l / geom.L, np.tan(alpha), rtol=1e-10,
        atol=1e-10)
    np.testing.assert_allclose(np.sum(alpha, axis=1), np.pi / 2.0, atol=1e-10)
    assert_scaled(geom.A_dual, R ** 2 / 4.0 * (np.sin(2 * alpha) +
        np.sin(2 * np.roll(alpha, 1, axis=1))), R ** 2)

    # Half-angles complement the angle opposite each edge
    opposite = np.roll(interior_angles(points), 1, axis=1)
    np.testing.assert_allclose(alpha, np.pi / 2.0 - opposite, atol=1e-8)


@given(ccw_triangles())
def test_dual_areas_partition_triangle(points):
    geom = triangle_geometry(*points)
    assert np.sum(geom.A_dual) == pytest.approx(geom.A, rel=1e-9)


class TestMaterialTensor:
    def test_rotated(self):
        K = material_tensor(1.5, 1.0, 30.0)
        assert float(K.k11) == pytest.approx(1.375)
        assert float(K.k12) == pytest.approx(0.21650635, abs=1e-8)
        assert float(K.k22) == pytest.approx(1.125)

    def test_zero_angle(self):
        np.testing.assert_allclose(material_tensor(1.5, 1.0, 0.0).matrix,
            [[1.5, 0.0], [0.0, 1.0]], atol=1e-15)

    @pytest.mark.parametrize('angle', [0.0, 17.0, 90.0, 233.0])
    def test_isotropic_is_rotation_invariant(self, angle):
        np.testing.assert_allclose(material_tensor(3.0, 3.0, angle).matrix,
            3.0 * np.eye(2), atol=1e-14)

    def test_invariants(self):
        K = material_tensor(50.0, 12.0, 45.0).matrix
        np.testing.assert_array_equal(K, K.T)
        assert np.trace(K) == pytest.approx(62.0, rel=1e-12)
        assert np.linalg.det(K) == pytest.approx(600.0, rel=1e-12)

    def test_principal_axis(self):
        K = material_tensor(5.0, 2.0, 30.0).matrix
        axis = np.array([np.cos(np.pi / 6), np.sin(np.pi / 6)])
        np.testing.assert_allclose(K @ axis, 5.0 * axis)

    def test_nonpositive_rejected(self):
        with pytest.raises(MeshValidationError):
            material_tensor(0.0, 1.0, 0.0)

    def test_from_matrix(self):
        K = AnisotropyTensor.from_matrix([[2.0, 1.0], [1.0, 3.0]])
        assert (K.k11, K.k12, K.k22) == (2.0, 1.0, 3.0)


class TestRotate90:
    def test_axes(self):
        np.testing.assert_array_equal(rotate90([1.0, 0.0]), [0.0, 1.0])
        np.testing.assert_array_equal(rotate90([0.0, -1.0]), [1.0, 0.0])

    def test_orthogonal(self):
        v = np.array([3.0, 4.0])
        np.testing.assert_array_equal(rotate90(v), [-4.0, 3.0])
        assert np.dot(v, rotate90(v)) == 0.0
        np.testing.assert_array_equal(rotate90(rotate90(v)), -v)
