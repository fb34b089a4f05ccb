"""
Element-local operators: the discrete derivative D0, the Hodge stars M0
and M1, the anisotropy matrix K^DEC, element fluxes, and the DEC and FEML
local stiffness matrices and load vectors.

Like `geometry`, every operation broadcasts over leading axes, so the
assembly code calls them once on the stacked elements of a whole mesh.
"""
from dataclasses import dataclass
from enum import Enum
import numpy as np

from .errors import GeometryError
from .geometry import (AnisotropyTensor, TriangleGeometry, cross,
    edge_vectors, rotate90, check_nondegenerate)


class Method(str, Enum):
    DEC = 'dec'
    FEML = 'feml'


@dataclass(frozen=True, eq=False)
class AnisoCoeffs:
    lam: np.ndarray  # (..., 3)
    mu: np.ndarray   # (..., 3)


@dataclass(frozen=True, eq=False)
class LocalSystem:
    stiffness: np.ndarray  # (..., 3, 3), vertex indexed
    load: np.ndarray       # (..., 3)
    method: Method


# Rows are the edges ([v1 v2], [v2 v3], [v3 v1]), columns the vertices
D0 = np.array([
    [-1.0, 1.0, 0.0],
    [0.0, -1.0, 1.0],
    [1.0, 0.0, -1.0]
])
D0.setflags(write=False)


def d0() -> np.ndarray:
    """Discrete derivative on 0-forms: d0() @ f = (f2-f1, f3-f2, f1-f3)."""
    return D0.copy()


def _diag(values):
    out = np.zeros(values.shape + (3,))
    idx = np.arange(3)
    out[..., idx, idx] = values
    return out


def _tensor_matrix(K):
    if isinstance(K, AnisotropyTensor):
        return K.matrix
    return np.asarray(K, dtype=float)


def hodge1(geom: TriangleGeometry) -> np.ndarray:
    """M1 = diag(l_i / L_i), signed."""
    return _diag(geom.l / geom.L)


def hodge0(geom: TriangleGeometry) -> np.ndarray:
    """M0 = diag(A_1, A_2, A_3), signed dual cell areas."""
    return _diag(geom.A_dual)


def k_dec(geom: TriangleGeometry, K):
    """
    Local discretisation of the anisotropy tensor acting on 1-forms.

    K w_i = lam_i w_(i+1) + mu_i w_(i+2), with the closed forms
    lam_i = -J(w_(i+2)) . K(w_i) / 2A and mu_i = J(w_(i+1)) . K(w_i) / 2A.

    @param geom: [`TriangleGeometry`] The element geometry
    @param K: [`AnisotropyTensor` or (..., 2, 2) array] Symmetric tensor
    @return: [`tuple`] (AnisoCoeffs, (..., 3, 3) matrix
        [[0, lam1, mu1], [mu2, 0, lam2], [lam3, mu3, 0]])
    """
    w = geom.w
    Kw = w @ _tensor_matrix(K)  # K symmetric, so rows are K(w_i)
    twice_area = 2.0 * geom.A[..., None]
    lam = -np.sum(rotate90(np.roll(w, -2, axis=-2)) * Kw, axis=-1) / twice_area
    mu = np.sum(rotate90(np.roll(w, -1, axis=-2)) * Kw, axis=-1) / twice_area
    matrix = np.zeros(lam.shape + (3,))
    matrix[..., 0, 1], matrix[..., 0, 2] = lam[..., 0], mu[..., 0]
    matrix[..., 1, 0], matrix[..., 1, 2] = mu[..., 1], lam[..., 1]
    matrix[..., 2, 0], matrix[..., 2, 1] = lam[..., 2], mu[..., 2]
    return AnisoCoeffs(lam=lam, mu=mu), matrix


def gradient_operator(v1, v2, v3):
    """
    B = (1/2A) [[y2-y3, y3-y1, y1-y2], [x3-x2, x1-x3, x2-x1]], the constant
    gradient of the linear shape functions, with the area A.

    @return: [`tuple`] ((..., 2, 3) B, (...) A)
    """
    w = edge_vectors(v1, v2, v3)
    twice_area = cross(w[..., 0, :], w[..., 1, :])
    check_nondegenerate(twice_area, w)
    # Column j is J applied to the edge opposite vertex j
    opposite = np.roll(w, -1, axis=-2)
    B = np.stack([-opposite[..., 1], opposite[..., 0]], axis=-2)
    return B / twice_area[..., None, None], 0.5 * twice_area


def flux(v1, v2, v3, f) -> np.ndarray:
    """
    Element-constant discrete gradient W of nodal values f, the solution of
    W . (v2 - v1) = f2 - f1, W . (v3 - v1) = f3 - f1.

    @return: [`np.ndarray`] (..., 2) flux vectors
    """
    B, _ = gradient_operator(v1, v2, v3)
    return np.einsum('...ij,...j->...i', B, np.asarray(f, dtype=float))


def anisotropic_flux(v1, v2, v3, K, f) -> np.ndarray:
    """W' = K W, the image of the isotropic flux under the tensor."""
    return np.einsum('...ij,...j->...i', _tensor_matrix(K), flux(v1, v2, v3, f))


def local_system_dec(geom: TriangleGeometry, K, q_nodal) -> LocalSystem:
    """
    DEC element system D0^T M1 K^DEC D0 [f] = M0 [q].

    @param geom: [`TriangleGeometry`] The element geometry
    @param K: [`AnisotropyTensor` or (..., 2, 2) array] Element tensor
    @param q_nodal: [`array-like`] (..., 3) source density at the vertices
    @return: [`LocalSystem`] Stiffness and circumcentric load
    """
    _, kdec = k_dec(geom, K)
    stiffness = D0.T @ hodge1(geom) @ kdec @ D0
    load = geom.A_dual * np.asarray(q_nodal, dtype=float)
    return LocalSystem(stiffness=stiffness, load=load, method=Method.DEC)


def local_system_feml(v1, v2, v3, K, q_nodal) -> LocalSystem:
    """
    Linear finite element system K_e = B^T K B A with the barycentric load
    (A/3) q.
    """
    B, area = gradient_operator(v1, v2, v3)
    if np.any(area < 0):
        raise GeometryError('local_system_feml needs counter-clockwise '
            'triangles')
    stiffness = np.swapaxes(B, -1, -2) @ _tensor_matrix(K) @ B * \
        area[..., None, None]
    load = (area / 3.0)[..., None] * np.asarray(q_nodal, dtype=float)
    return LocalSystem(stiffness=stiffness, load=load, method=Method.FEML)
