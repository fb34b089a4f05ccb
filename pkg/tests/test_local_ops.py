import time

import numpy as np
import pytest
from hypothesis import given

from DEC2D.errors import GeometryError
from DEC2D.geometry import cross, material_tensor, triangle_geometry
from DEC2D.local_ops import (D0, Method, anisotropic_flux, d0, flux,
    gradient_operator, hodge0, hodge1, k_dec, local_system_dec,
    local_system_feml)

from strategies import (ccw_triangles, is_obtuse, random_tensors,
    random_triangles, spd_tensors)


K_SAMPLE = np.array([[2.0, 1.0], [1.0, 3.0]])


def stacked(points):
    return points[..., 0, :], points[..., 1, :], points[..., 2, :]


class TestD0:
    @pytest.mark.parametrize('f, expected', [
        ((1, 1, 1), (0, 0, 0)),
        ((0, 1, 0), (1, -1, 0)),
        ((1, 2, 4), (1, 2, -3))
    ])
    def test_differences(self, f, expected):
        np.testing.assert_array_equal(d0() @ np.asarray(f, dtype=float), expected)

    def test_constant_is_readonly(self):
        with pytest.raises(ValueError):
            D0[0, 0] = 5.0
        matrix = d0()
        matrix[0, 0] = 5.0
        assert D0[0, 0] == -1.0


class TestHodge:
    def test_right_triangle(self, right_triangle):
        geom = triangle_geometry(*right_triangle)
        np.testing.assert_allclose(np.diag(hodge1(geom)), [0.5, 0.0, 0.5],
            atol=1e-15)
        np.testing.assert_allclose(hodge0(geom),
            np.diag([0.25, 0.125, 0.125]))

    def test_equilateral(self, equilateral_triangle):
        geom = triangle_geometry(*equilateral_triangle)
        np.testing.assert_allclose(np.diag(hodge1(geom)),
            np.tan(np.pi / 6) / 2.0, rtol=1e-12)
        np.testing.assert_allclose(np.diag(hodge0(geom)), geom.A / 3.0,
            rtol=1e-12)

    def test_obtuse_signs(self, obtuse_triangle):
        geom = triangle_geometry(*obtuse_triangle)
        m1 = np.diag(hodge1(geom))
        assert np.count_nonzero(m1 < 0) == 1
        assert np.trace(hodge0(geom)) == pytest.approx(geom.A, rel=1e-12)


class TestKDec:
    def test_sample_tensor_on_right_triangle(self, right_triangle):
        coeffs, matrix = k_dec(triangle_geometry(*right_triangle), K_SAMPLE)
        np.testing.assert_allclose(coeffs.lam, [-2.0, -2.0, -4.0])
        np.testing.assert_allclose(coeffs.mu, [-3.0, -1.0, -3.0])
        np.testing.assert_allclose(matrix, [[0, -2, -3], [-1, 0, -2],
            [-4, -3, 0]])

    def test_isotropic(self, obtuse_triangle):
        _, matrix = k_dec(triangle_geometry(*obtuse_triangle), 12.0 * np.eye(2))
        np.testing.assert_allclose(matrix, -12.0 * (np.ones((3, 3)) -
            np.eye(3)), rtol=1e-12)

    def test_isotropic_degeneration(self, rng):
        start = time.perf_counter()
        points = random_triangles(rng, 100)
        geom = triangle_geometry(*stacked(points))
        for k in (0.5, 1.0, 12.0):
            _, matrix = k_dec(geom, k * np.eye(2))
            assert np.max(np.abs(matrix @ D0 - k * D0)) <= 1e-12 * k
        assert time.perf_counter() - start < 1.0

    def test_reconstruction(self, rng):
        points = random_triangles(rng, 1000, min_area=0.02)
        kx, ky, angle = random_tensors(rng, 1000, 0.5, 5.0)
        K = material_tensor(kx, ky, angle).matrix
        geom = triangle_geometry(*stacked(points))
        coeffs, _ = k_dec(geom, K)
        w = geom.w
        Kw = np.einsum('eij,ekj->eki', K, w)
        rebuilt = coeffs.lam[..., None] * np.roll(w, -1, axis=1) + \
            coeffs.mu[..., None] * np.roll(w, -2, axis=1)
        np.testing.assert_allclose(rebuilt, Kw, atol=1e-10)

        lam, mu = coeffs.lam, coeffs.mu
        np.testing.assert_allclose(lam[:, 2], lam[:, 1] + mu[:, 0] - mu[:, 1],
            atol=1e-10)
        np.testing.assert_allclose(mu[:, 2], -lam[:, 0] + lam[:, 1] + mu[:, 0],
            atol=1e-10)

        # -lam_1 A is the signed area spanned by K(w1) and -w3
        np.testing.assert_allclose(-lam[:, 0] * geom.A,
            0.5 * cross(Kw[:, 0], -w[:, 2]), atol=1e-10)

    def test_matches_two_by_two_solve(self, obtuse_triangle):
        geom = triangle_geometry(*obtuse_triangle)
        coeffs, _ = k_dec(geom, K_SAMPLE)
        w = geom.w
        for i in range(3):
            basis = np.column_stack([w[(i + 1) % 3], w[(i + 2) % 3]])
            lam, mu = np.linalg.solve(basis, K_SAMPLE @ w[i])
            assert coeffs.lam[i] == pytest.approx(lam)
            assert coeffs.mu[i] == pytest.approx(mu)


class TestFlux:
    def test_sample(self, right_triangle):
        np.testing.assert_allclose(flux(*right_triangle, [1.0, 3.0, 2.0]),
            [2.0, 1.0])
        np.testing.assert_allclose(anisotropic_flux(*right_triangle, K_SAMPLE,
            [1.0, 3.0, 2.0]), [5.0, 5.0])

    def test_linear_field(self, obtuse_triangle):
        x = obtuse_triangle[:, 0]
        np.testing.assert_allclose(flux(*obtuse_triangle, x), [1.0, 0.0],
            atol=1e-12)
        np.testing.assert_allclose(anisotropic_flux(*obtuse_triangle,
            2.0 * np.eye(2), x), [2.0, 0.0], atol=1e-12)
        np.testing.assert_array_equal(flux(*obtuse_triangle, np.zeros(3)), 0.0)

    def test_quadratic_profile_near_boundary(self):
        points = np.array([[-1.0, 0.0], [-0.99, -0.01], [-0.99, 0.01]])
        u = 10.0 + 0.2 * (1.0 - points[:, 0] ** 2 - points[:, 1] ** 2)
        K = material_tensor(1.5, 1.0, 30.0).matrix
        centroid = points.mean(axis=0)
        expected = K @ (-0.4 * centroid)
        np.testing.assert_allclose(anisotropic_flux(*points, K, u), expected,
            rtol=2e-2)

    @given(ccw_triangles())
    def test_edge_equations(self, points):
        f = np.array([0.3, -1.7, 2.2])
        W = flux(*points, f)
        w = np.roll(points, -1, axis=0) - points
        scale = max(1.0, np.max(np.abs(w)) * np.max(np.abs(W)))
        np.testing.assert_allclose(w @ W, d0() @ f, atol=1e-9 * scale)

    def test_anisotropic_edge_equations(self, obtuse_triangle):
        f = np.array([0.3, -1.7, 2.2])
        geom = triangle_geometry(*obtuse_triangle)
        coeffs, _ = k_dec(geom, K_SAMPLE)
        delta = d0() @ f
        Wp = anisotropic_flux(*obtuse_triangle, K_SAMPLE, f)
        expected = coeffs.lam * np.roll(delta, -1) + coeffs.mu * np.roll(delta, -2)
        np.testing.assert_allclose(geom.w @ Wp, expected, atol=1e-10)

    def test_degenerate(self):
        with pytest.raises(GeometryError):
            flux([0, 0], [1, 1], [2, 2], [1, 2, 3])


class TestGradientOperator:
    def test_closed_form(self, obtuse_triangle):
        (x1, y1), (x2, y2), (x3, y3) = obtuse_triangle
        B, area = gradient_operator(*obtuse_triangle)
        expected = np.array([[y2 - y3, y3 - y1, y1 - y2],
            [x3 - x2, x1 - x3, x2 - x1]]) / (2.0 * area)
        np.testing.assert_allclose(B, expected)
        assert area == pytest.approx(0.05)


class TestLocalSystems:
    def test_right_triangle(self, right_triangle):
        expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]]
        dec = local_system_dec(triangle_geometry(*right_triangle), np.eye(2),
            np.zeros(3))
        feml = local_system_feml(*right_triangle, np.eye(2), np.zeros(3))
        np.testing.assert_allclose(dec.stiffness, expected, atol=1e-15)
        np.testing.assert_allclose(feml.stiffness, expected, atol=1e-15)
        np.testing.assert_array_equal(dec.load, 0.0)
        assert dec.method is Method.DEC and feml.method is Method.FEML

    def test_equilateral_loads(self, equilateral_triangle):
        geom = triangle_geometry(*equilateral_triangle)
        dec = local_system_dec(geom, np.eye(2), [3.0, 3.0, 3.0])
        np.testing.assert_allclose(dec.load, geom.A, rtol=1e-12)

    def test_obtuse_load_negative(self, obtuse_triangle):
        dec = local_system_dec(triangle_geometry(*obtuse_triangle), np.eye(2),
            np.ones(3))
        assert dec.load[0] < 0

    def test_feml_load_sums_to_area(self, obtuse_triangle):
        feml = local_system_feml(*obtuse_triangle, K_SAMPLE, np.ones(3))
        assert np.sum(feml.load) == pytest.approx(0.05)

    def test_feml_rejects_clockwise(self, right_triangle):
        with pytest.raises(GeometryError):
            local_system_feml(*right_triangle[[0, 2, 1]], np.eye(2), np.zeros(3))

    def test_source_discrepancy(self, obtuse_triangle, equilateral_triangle):
        q = np.ones(3)
        dec = local_system_dec(triangle_geometry(*obtuse_triangle), np.eye(2), q)
        feml = local_system_feml(*obtuse_triangle, np.eye(2), q)
        assert np.max(np.abs(dec.load - feml.load) / np.abs(feml.load)) > 0.01

        dec = local_system_dec(triangle_geometry(*equilateral_triangle),
            np.eye(2), q)
        feml = local_system_feml(*equilateral_triangle, np.eye(2), q)
        np.testing.assert_allclose(dec.load, feml.load, atol=1e-12)

    def test_dec_equals_feml(self, rng):
        start = time.perf_counter()
        points = random_triangles(rng, 1000)
        assert np.count_nonzero(is_obtuse(points)) >= 100
        K = material_tensor(*random_tensors(rng, 1000)).matrix
        q = np.zeros((1000, 3))
        dec = local_system_dec(triangle_geometry(*stacked(points)), K, q)
        feml = local_system_feml(*stacked(points), K, q)
        scale = np.max(np.abs(feml.stiffness), axis=(1, 2), keepdims=True)
        assert np.all(np.abs(dec.stiffness - feml.stiffness) <= 1e-9 * scale)
        assert time.perf_counter() - start < 1.0

        for stiffness in (dec.stiffness, feml.stiffness):
            assert np.all(np.abs(stiffness.sum(axis=2)) <= 1e-10 * scale[..., 0])
            assert np.all(np.abs(stiffness - np.swapaxes(stiffness, 1, 2)) <=
                1e-9 * scale)

    @given(ccw_triangles(), spd_tensors())
    def test_dec_equals_feml_property(self, points, tensor):
        K = material_tensor(*tensor).matrix
        dec = local_system_dec(triangle_geometry(*points), K, np.zeros(3))
        feml = local_system_feml(*points, K, np.zeros(3))
        scale = np.max(np.abs(feml.stiffness))
        np.testing.assert_allclose(dec.stiffness, feml.stiffness,
            atol=1e-9 * scale)
