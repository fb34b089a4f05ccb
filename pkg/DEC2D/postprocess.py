from dataclasses import dataclass
from typing import Callable, Union
import weakref
import numpy as np
import pandas as pd
import rtree

from loguru import logger

from .assemble_system import element_coefficients, element_vertices
from .geometry import cross
from .local_ops import anisotropic_flux
from .mesh import TriMesh, signed_areas


# Barycentric slack when locating sample points
LOCATE_TOLERANCE = 1e-12

# TriMesh -> {key: rtree index}
_SPATIAL_INDEX = weakref.WeakKeyDictionary()


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Nodal values on a mesh, linear on each triangle."""
    mesh: TriMesh
    values: np.ndarray
    name: str = 'temperature'

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.mesh.n_nodes,):
            raise ValueError(f'{self.name} has {values.size} values for '
                f'{self.mesh.n_nodes} nodes')
        object.__setattr__(self, 'values', values)


@dataclass(frozen=True, eq=False)
class FluxField:
    """One constant 2-vector per triangle."""
    mesh: TriMesh
    vectors: np.ndarray
    name: str = 'flux'

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=float)
        if vectors.shape != (self.mesh.n_triangles, 2):
            raise ValueError(f'{self.name} has shape {vectors.shape} for '
                f'{self.mesh.n_triangles} elements')
        object.__setattr__(self, 'vectors', vectors)

    @property
    def magnitude(self) -> np.ndarray:
        return np.linalg.norm(self.vectors, axis=1)


def _nodal_values(mesh: TriMesh, u) -> np.ndarray:
    if isinstance(u, ScalarField):
        return u.values
    return ScalarField(mesh, u).values


def element_fluxes(mesh: TriMesh, materials, u) -> FluxField:
    """
    Anisotropic flux W' = K grad(u) of a nodal field, constant per element
    and computed with each element's own tensor.

    @param mesh: [`TriMesh`] The mesh u lives on
    @param materials: [`dict` or `list`] MaterialSpec per material id
    @param u: [`ScalarField` or `np.ndarray`] Nodal values
    @return: [`FluxField`] One vector per element
    """
    values = _nodal_values(mesh, u)
    K, _ = element_coefficients(mesh, materials)
    v1, v2, v3 = element_vertices(mesh)
    vectors = anisotropic_flux(v1, v2, v3, K, values[mesh.triangles])
    return FluxField(mesh, vectors)


def nodal_flux_magnitude(flux: FluxField) -> ScalarField:
    """
    Recover nodal fluxes as the area weighted mean of the incident element
    vectors and return their magnitudes. Nodes with no incident element get 0.
    """
    mesh = flux.mesh
    weights = signed_areas(mesh.points, mesh.triangles)
    nodes = mesh.triangles.ravel()
    total = np.bincount(nodes, weights=np.repeat(weights, 3),
        minlength=mesh.n_nodes)
    weighted = flux.vectors * weights[:, None]
    summed = np.column_stack([
        np.bincount(nodes, weights=np.repeat(weighted[:, i], 3),
            minlength=mesh.n_nodes) for i in range(2)])
    nodal = np.divide(summed, total[:, None], out=np.zeros_like(summed),
        where=total[:, None] > 0)
    return ScalarField(mesh, np.linalg.norm(nodal, axis=1),
        name='flux_magnitude')


def _cached_index(mesh: TriMesh, key, build) -> rtree.index.Index:
    indexes = _SPATIAL_INDEX.setdefault(mesh, {})
    if key not in indexes:
        indexes[key] = build()
    return indexes[key]


def element_index(mesh: TriMesh, tol: float=LOCATE_TOLERANCE) \
        -> rtree.index.Index:
    """
    R-tree over the triangle bounding boxes, each widened by tol times its
    largest extent. Built once per mesh and tolerance.

    @param mesh: [`TriMesh`] The mesh
    @param tol: [`float`] Relative box slack
    @return: [`rtree.index.Index`] Ids are triangle indices
    """
    def build():
        corners = mesh.points[mesh.triangles]
        lower = corners.min(axis=1)
        upper = corners.max(axis=1)
        slack = tol * np.max(upper - lower, axis=1, keepdims=True)
        # Interleaved boxes: (xmin, ymin, xmax, ymax)
        boxes = np.hstack([lower - slack, upper + slack])
        return rtree.index.Index((int(i), tuple(box), None)
            for i, box in enumerate(boxes.tolist()))
    return _cached_index(mesh, ('elements', tol), build)


def node_index(mesh: TriMesh) -> rtree.index.Index:
    """R-tree over the nodes as point boxes, built once per mesh."""
    def build():
        return rtree.index.Index((int(i), (x, y, x, y), None)
            for i, (x, y) in enumerate(mesh.points.tolist()))
    return _cached_index(mesh, 'nodes', build)


def locate_points(mesh: TriMesh, points, tol: float=LOCATE_TOLERANCE):
    """
    Find a containing triangle for each point by a barycentric test on the
    candidates of an R-tree over the triangle bounding boxes. A point on a
    shared edge or node goes to the lowest-index triangle containing it.

    @param mesh: [`TriMesh`] The mesh
    @param points: [`array-like`] (P, 2) query points
    @param tol: [`float`] Points with every barycentric coordinate >= -tol
        count as inside
    @return: [`tuple`] ((P,) triangle indices, -1 when not found, and
        (P, 3) barycentric coordinates, NaN when not found)
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    index = element_index(mesh, tol)
    twice_area = 2.0 * signed_areas(mesh.points, mesh.triangles)

    found = np.full(points.shape[0], -1, dtype=np.int64)
    weights = np.full((points.shape[0], 3), np.nan)
    for row, (x, y) in enumerate(points):
        candidates = np.sort(np.fromiter(index.intersection((x, y, x, y)),
            dtype=np.int64))
        if candidates.size == 0:
            continue
        v = mesh.points[mesh.triangles[candidates]] - (x, y)
        b1 = cross(v[:, 1], v[:, 2]) / twice_area[candidates]
        b2 = cross(v[:, 2], v[:, 0]) / twice_area[candidates]
        b = np.column_stack([b1, b2, 1.0 - b1 - b2])
        inside = np.flatnonzero(np.all(b >= -tol, axis=1))
        if inside.size:
            found[row] = candidates[inside[0]]
            weights[row] = b[inside[0]]
    return found, weights


def _evaluate(field, points) -> np.ndarray:
    found, weights = locate_points(field.mesh, points)
    hit = found >= 0
    out = np.full(found.shape[0], np.nan)
    if isinstance(field, FluxField):
        out[hit] = field.magnitude[found[hit]]
    else:
        nodes = field.mesh.triangles[found[hit]]
        out[hit] = np.sum(weights[hit] * field.values[nodes], axis=1)
    return out


def nodal_values_at(field: Union[ScalarField, FluxField], points) -> np.ndarray:
    """
    Evaluate a field at arbitrary points: linear interpolation for scalar
    fields, the element magnitude for flux fields, NaN outside the mesh.

    @param field: [`ScalarField` or `FluxField`] The field
    @param points: [`array-like`] A point (2,) or points (P, 2)
    @return: [`np.ndarray`] (P,) values
    """
    return _evaluate(field, points)


def nearest_node(mesh: TriMesh, point) -> int:
    """Index of the node closest to point (lowest index on ties)."""
    x, y = (float(c) for c in point)
    # rtree returns every node tied for nearest
    hits = np.sort(np.fromiter(node_index(mesh).nearest((x, y, x, y), 1),
        dtype=np.int64))
    distance = np.sum((mesh.points[hits] - (x, y)) ** 2, axis=1)
    return int(hits[np.argmin(distance)])


def sample_line(
    field: Union[ScalarField, FluxField],
    p0,
    p1,
    samples: int
) -> pd.DataFrame:
    """
    Sample a field at equally spaced points of the segment p0 -> p1.

    Scalar fields are interpolated linearly inside the containing triangle;
    flux fields report the magnitude of the containing element's vector.

    @param field: [`ScalarField` or `FluxField`] The field to sample
    @param p0: [`tuple`] Segment start (t = 0)
    @param p1: [`tuple`] Segment end (t = 1)
    @param samples: [`int`] Number of points, at least 1
    @return: [`pd.DataFrame`] Columns t, x, y, value; value is NaN where
        the point lies outside every triangle
    """
    if samples < 1:
        raise ValueError(f'sample_line needs at least one sample, got {samples}')
    t = np.linspace(0.0, 1.0, samples) if samples > 1 else np.zeros(1)
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    points = p0 + t[:, None] * (p1 - p0)
    values = _evaluate(field, points)
    missing = int(np.count_nonzero(np.isnan(values)))
    if missing:
        logger.info(f'{missing} of {samples} samples lie outside the mesh')
    return pd.DataFrame({'t': t, 'x': points[:, 0], 'y': points[:, 1],
        'value': values})


def error_norms(u, exact: Callable) -> tuple:
    """
    Nodal error norms against an exact solution.

    Linf is the largest nodal |u - exact|; L2 uses the nodal quadrature
    sqrt(sum_e A_e * mean of the squared errors at the element's nodes).

    @param u: [`ScalarField`] The discrete solution
    @param exact: [`callable`] exact(x, y) vectorised over node coordinates
    @return: [`tuple`] (Linf, L2)
    """
    mesh = u.mesh
    reference = np.broadcast_to(np.asarray(
        exact(mesh.points[:, 0], mesh.points[:, 1]), dtype=float),
        (mesh.n_nodes,))
    error = u.values - reference
    areas = signed_areas(mesh.points, mesh.triangles)
    l2 = np.sqrt(np.sum(areas * np.mean(error[mesh.triangles] ** 2, axis=1)))
    return float(np.max(np.abs(error))), float(l2)


def max_principle_violations(u: ScalarField, g: float, tol: float=1e-9):
    """
    Nodes where a solution with nonnegative sources and constant boundary
    value g drops below g. Obtuse meshes may legitimately produce some;
    this is a diagnostic only.

    @param u: [`ScalarField`] The discrete solution
    @param g: [`float`] The constant Dirichlet value
    @param tol: [`float`] Relative slack
    @return: [`np.ndarray`] Offending node indices
    """
    slack = tol * max(1.0, abs(g))
    nodes = np.flatnonzero(u.values < g - slack)
    if nodes.size:
        logger.warning(f'Discrete maximum principle violated at {nodes.size} '
            f'nodes (min {u.values.min():.6g} < {g:.6g})')
    return nodes
