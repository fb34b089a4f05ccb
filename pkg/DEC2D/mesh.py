from dataclasses import dataclass, field
from typing import Dict, NamedTuple, Optional, Tuple
import numpy as np

from loguru import logger

from .errors import MeshValidationError


# Node index -> prescribed value
DirichletSet = Dict[int, float]


class Triangle(NamedTuple):
    nodes: Tuple[int, int, int]
    material: int


@dataclass(frozen=True)
class MaterialSpec:
    """
    Per-region material: principal diffusion constants, the angle of the
    kx axis (degrees, counter-clockwise from +x) and the source density.
    """
    id: int
    kx: float
    ky: float
    angle_deg: float = 0.0
    q: float = 0.0

    def __post_init__(self):
        values = (self.kx, self.ky, self.angle_deg, self.q)
        if not np.all(np.isfinite(values)):
            raise MeshValidationError(
                f'Material {self.id} has non-finite constants {values}')
        if self.kx <= 0 or self.ky <= 0:
            raise MeshValidationError(f'Material {self.id} needs kx > 0 and '
                f'ky > 0, got kx={self.kx}, ky={self.ky}')


@dataclass(frozen=True, eq=False)
class TriMesh:
    """
    An immutable, positively oriented, manifold triangle mesh.

    Build it with `build_trimesh`, which validates the input and fixes the
    winding; the constructor itself does no checking.
    """
    points: np.ndarray
    triangles: np.ndarray
    materials: np.ndarray
    boundary_nodes: np.ndarray
    boundary_circle: Optional[Tuple[float, float, float]] = None
    reoriented: int = field(default=0, compare=False)

    @property
    def n_nodes(self) -> int:
        return self.points.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    def triangle(self, index: int) -> Triangle:
        return Triangle(tuple(int(i) for i in self.triangles[index]),
            int(self.materials[index]))


class MeshDocument(NamedTuple):
    mesh: TriMesh
    materials: Dict[int, MaterialSpec]
    dirichlet: DirichletSet


def signed_areas(points: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Signed area of every triangle (positive when counter-clockwise)."""
    p = points[triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def mesh_edges(triangles: np.ndarray, return_counts: bool=False):
    """
    Unique undirected edges of a triangulation, each as a sorted node pair,
    in lexicographic order.

    @param triangles: [`np.ndarray`] (T, 3) node indices
    @param return_counts: [`bool`] Also return how many triangles share
        each edge
    @return: [`np.ndarray`] (E, 2) edges, optionally with (E,) counts
    """
    triangles = np.asarray(triangles)
    edges = np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]],
        triangles[:, [2, 0]]])
    edges = np.sort(edges, axis=1)
    return np.unique(edges, axis=0, return_counts=return_counts)


def _readonly(array):
    array.setflags(write=False)
    return array


def build_trimesh(
    points,
    triangles,
    materials=None,
    boundary_circle: Optional[Tuple[float, float, float]]=None
) -> TriMesh:
    """
    Validate raw mesh arrays and freeze them into a TriMesh.

    Clockwise triangles are flipped to counter-clockwise and counted in
    `TriMesh.reoriented`; the boundary node set is recomputed from edge
    incidence.

    @param points: [`array-like`] (N, 2) node coordinates
    @param triangles: [`array-like`] (T, 3) node indices
    @param materials: [`array-like`] (T,) material ids, defaults to all 0
    @param boundary_circle: [`tuple`] Optional (cx, cy, radius) of the
        circle the boundary approximates, used by `refine`
    @return: [`TriMesh`] The validated mesh
    """
    points = np.array(points, dtype=float).reshape(-1, 2)
    triangles = np.array(triangles, dtype=np.int64).reshape(-1, 3)
    if materials is None:
        materials = np.zeros(triangles.shape[0], dtype=np.int64)
    materials = np.array(materials, dtype=np.int64).reshape(-1)

    if triangles.shape[0] == 0:
        raise MeshValidationError('The mesh has no triangles!')
    if materials.shape[0] != triangles.shape[0]:
        raise MeshValidationError(f'Got {materials.shape[0]} material ids '
            f'for {triangles.shape[0]} triangles')
    if not np.all(np.isfinite(points)):
        bad = np.flatnonzero(~np.all(np.isfinite(points), axis=1))
        raise MeshValidationError(f'Nodes {bad.tolist()} have non-finite '
            'coordinates')
    out_of_range = (triangles < 0) | (triangles >= points.shape[0])
    if np.any(out_of_range):
        element = int(np.flatnonzero(np.any(out_of_range, axis=1))[0])
        raise MeshValidationError(f'Element {element} references node '
            f'{triangles[element].tolist()} outside 0..{points.shape[0] - 1}')
    repeated = (triangles[:, 0] == triangles[:, 1]) | \
        (triangles[:, 1] == triangles[:, 2]) | (triangles[:, 2] == triangles[:, 0])
    if np.any(repeated):
        element = int(np.flatnonzero(repeated)[0])
        raise MeshValidationError(f'Element {element} repeats a node: '
            f'{triangles[element].tolist()}')

    # Degeneracy threshold is relative to the longest edge squared
    area = signed_areas(points, triangles)
    p = points[triangles]
    longest = np.max(np.stack([
        np.sum((p[:, 1] - p[:, 0]) ** 2, axis=1),
        np.sum((p[:, 2] - p[:, 1]) ** 2, axis=1),
        np.sum((p[:, 0] - p[:, 2]) ** 2, axis=1)]), axis=0)
    degenerate = np.abs(area) <= 1e-14 * longest
    if np.any(degenerate):
        element = int(np.flatnonzero(degenerate)[0])
        raise MeshValidationError(f'Element {element} is degenerate '
            f'(area {area[element]:.3e})')

    clockwise = area < 0
    reoriented = int(np.count_nonzero(clockwise))
    if reoriented:
        triangles[clockwise] = triangles[clockwise][:, [0, 2, 1]]
        logger.warning(f'Reoriented {reoriented} clockwise triangles')

    edges, counts = mesh_edges(triangles, return_counts=True)
    if np.any(counts > 2):
        edge = edges[np.argmax(counts > 2)].tolist()
        raise MeshValidationError(f'Edge {edge} is shared by '
            f'{int(counts.max())} triangles; the mesh is not manifold')
    boundary_nodes = np.unique(edges[counts == 1])

    return TriMesh(
        points=_readonly(points),
        triangles=_readonly(triangles),
        materials=_readonly(materials),
        boundary_nodes=_readonly(boundary_nodes),
        boundary_circle=None if boundary_circle is None
            else tuple(float(v) for v in boundary_circle),
        reoriented=reoriented
    )


def mesh_area(mesh: TriMesh) -> float:
    return float(np.sum(signed_areas(mesh.points, mesh.triangles)))


def boundary_dirichlet(mesh: TriMesh, value: float) -> DirichletSet:
    """Prescribe the same value on every boundary node."""
    return {int(node): float(value) for node in mesh.boundary_nodes}


def validate_dirichlet(mesh: TriMesh, dirichlet: DirichletSet) -> DirichletSet:
    """
    Check that every prescribed node exists and lies on the boundary.

    @return: [`dict`] The same set with int keys and float values, sorted by
        node index
    """
    nodes = np.asarray(sorted(int(node) for node in dirichlet), dtype=np.int64)
    off_boundary = nodes[~np.isin(nodes, mesh.boundary_nodes)]
    if off_boundary.size:
        raise MeshValidationError(f'Dirichlet nodes {off_boundary.tolist()[:10]} '
            'are not boundary nodes of the mesh')
    values = {int(node): float(dirichlet[node]) for node in sorted(dirichlet)}
    if not np.all(np.isfinite(list(values.values()))):
        raise MeshValidationError('Dirichlet values must be finite')
    return values


def validate_materials(mesh: TriMesh, materials) -> Dict[int, MaterialSpec]:
    """
    Normalise a material list or dict to {id: MaterialSpec} and check every
    element's material id is present.
    """
    if not isinstance(materials, dict):
        materials = {spec.id: spec for spec in materials}
    missing = np.setdiff1d(np.unique(mesh.materials),
        np.asarray(list(materials.keys()), dtype=np.int64))
    if missing.size:
        raise MeshValidationError(f'Material ids {missing.tolist()} are used '
            'by elements but not defined')
    return {key: materials[key] for key in sorted(materials)}
