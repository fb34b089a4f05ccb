"""
Circumcentric dual geometry of triangles.

Every function broadcasts over leading axes: pass single vertices of shape
(2,) or stacked vertices of shape (E, 2) and get per-triangle results back.
Local vertex order is (v1, v2, v3) and local edge order is
([v1 v2], [v2 v3], [v3 v1]) throughout, with edge vectors
w1 = v2 - v1, w2 = v3 - v2, w3 = v1 - v3.
"""
from dataclasses import dataclass
import numpy as np

from .errors import GeometryError, MeshValidationError


# Triangles with area <= DEGENERACY * (longest edge)^2 are rejected
DEGENERACY = 1e-14


@dataclass(frozen=True, eq=False)
class TriangleGeometry:
    c: np.ndarray       # circumcentre, (..., 2)
    A: np.ndarray       # area, (...)
    R: np.ndarray       # circumradius, (...)
    L: np.ndarray       # primal edge lengths, (..., 3)
    l: np.ndarray       # signed dual edge lengths, (..., 3)
    A_dual: np.ndarray  # signed dual cell areas per vertex, (..., 3)
    alpha: np.ndarray   # signed half-angles, (..., 3)
    w: np.ndarray       # edge vectors, (..., 3, 2)


@dataclass(frozen=True, eq=False)
class AnisotropyTensor:
    k11: np.ndarray
    k12: np.ndarray
    k22: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        """The tensor as (..., 2, 2) array."""
        return np.stack([np.stack([self.k11, self.k12], axis=-1),
            np.stack([self.k12, self.k22], axis=-1)], axis=-2)

    @classmethod
    def from_matrix(cls, matrix):
        matrix = np.asarray(matrix, dtype=float)
        return cls(matrix[..., 0, 0], 0.5 * (matrix[..., 0, 1] +
            matrix[..., 1, 0]), matrix[..., 1, 1])


def cross(a, b):
    """z component of the cross product of 2-vectors, broadcast."""
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def rotate90(v):
    """
    Counter-clockwise rotation by 90 degrees, J(x, y) = (-y, x).

    @param v: [`array-like`] (..., 2) vectors
    @return: [`np.ndarray`] The rotated vectors
    """
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def edge_vectors(v1, v2, v3) -> np.ndarray:
    v1, v2, v3 = (np.asarray(v, dtype=float) for v in (v1, v2, v3))
    return np.stack([v2 - v1, v3 - v2, v1 - v3], axis=-2)


def check_nondegenerate(twice_area, w):
    longest = np.max(np.sum(w ** 2, axis=-1), axis=-1)
    degenerate = np.abs(twice_area) <= 2.0 * DEGENERACY * longest
    if np.any(degenerate):
        count = int(np.count_nonzero(degenerate))
        raise GeometryError(f'{count} degenerate (collinear) triangle(s)')


def circumcenter(v1, v2, v3) -> np.ndarray:
    """
    Circumcentre of the triangle [v1, v2, v3] (either orientation).

    @return: [`np.ndarray`] (..., 2) points equidistant from the vertices
    """
    v1 = np.asarray(v1, dtype=float)
    w = edge_vectors(v1, v2, v3)
    b = w[..., 0, :]
    c = -w[..., 2, :]
    d = 2.0 * cross(b, c)
    check_nondegenerate(d / 2.0, w)
    b2 = np.sum(b ** 2, axis=-1)
    c2 = np.sum(c ** 2, axis=-1)
    ux = (c[..., 1] * b2 - b[..., 1] * c2) / d
    uy = (b[..., 0] * c2 - c[..., 0] * b2) / d
    return v1 + np.stack([ux, uy], axis=-1)


def triangle_geometry(v1, v2, v3) -> TriangleGeometry:
    """
    Circumcentric quantities of counter-clockwise triangles.

    The dual lengths and areas are signed and come from determinants, so
    they stay valid wherever the circumcentre lies: L_i l_i is twice the
    signed area of [v_i, v_(i+1), c] and A_i = (L_i l_i + L_(i-1) l_(i-1)) / 4.
    On obtuse triangles the dual edge of the longest edge and the dual areas
    of its endpoints can be negative.

    @return: [`TriangleGeometry`] Per-triangle quantities
    """
    v = np.stack([np.asarray(p, dtype=float) for p in (v1, v2, v3)], axis=-2)
    w = edge_vectors(v1, v2, v3)
    twice_area = cross(w[..., 0, :], w[..., 1, :])
    check_nondegenerate(twice_area, w)
    if np.any(twice_area < 0):
        raise GeometryError('triangle_geometry needs counter-clockwise '
            'triangles')
    c = circumcenter(v1, v2, v3)
    L = np.linalg.norm(w, axis=-1)
    Ll = cross(w, c[..., None, :] - v)
    l = Ll / L
    A_dual = 0.25 * (Ll + np.roll(Ll, 1, axis=-1))
    R = np.linalg.norm(c - v[..., 0, :], axis=-1)
    alpha = np.arctan(2.0 * l / L)
    return TriangleGeometry(c=c, A=0.5 * twice_area, R=R, L=L, l=l,
        A_dual=A_dual, alpha=alpha, w=w)


def material_tensor(kx, ky, angle_deg) -> AnisotropyTensor:
    """
    K = R(theta) diag(kx, ky) R(theta)^T, theta counter-clockwise from +x.

    @param kx: [`float`] Principal value along the material axis, > 0
    @param ky: [`float`] Principal value across it, > 0
    @param angle_deg: [`float`] Material angle in degrees
    @return: [`AnisotropyTensor`] Symmetric positive definite tensor
    """
    kx, ky, angle_deg = (np.asarray(value, dtype=float)
        for value in (kx, ky, angle_deg))
    if np.any(kx <= 0) or np.any(ky <= 0):
        raise MeshValidationError(f'Diffusion constants must be positive, got '
            f'kx={kx}, ky={ky}')
    theta = np.deg2rad(angle_deg)
    cos, sin = np.cos(theta), np.sin(theta)
    return AnisotropyTensor(
        k11=kx * cos ** 2 + ky * sin ** 2,
        k12=(kx - ky) * sin * cos,
        k22=kx * sin ** 2 + ky * cos ** 2
    )
