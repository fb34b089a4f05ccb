from typing import NamedTuple, Tuple
import numpy as np

from loguru import logger

from .errors import ScenarioError
from .mesh import TriMesh, build_trimesh, mesh_edges


class CircleInclusion(NamedTuple):
    center: Tuple[float, float]
    radius: float
    inner_material: int = 1


# Half-ellipse semi-axes (left x, right x, y) of the nested egg curves,
# from the core outward
EGG_CURVES = np.array([
    [1.0, 1.0, 1.0],
    [3.0, 6.0, 2.0],
    [4.0, 7.0, 3.0],
    [5.0, 8.0, 4.0]
])


def gen_square(
    n: int,
    side: float=1.0,
    inclusion: CircleInclusion=None,
    outer_material: int=0,
    origin: Tuple[float, float]=(0.0, 0.0)
) -> TriMesh:
    """
    Structured triangulation of a square: an n x n grid of cells, each split
    along its (lower-left, upper-right) diagonal.

    @param n: [`int`] Cells per side, at least 1
    @param side: [`float`] Side length, positive
    @param inclusion: [`CircleInclusion`] Optional circle; triangles whose
        centroid lies strictly inside it get `inclusion.inner_material`
    @param outer_material: [`int`] Material id of all other triangles
    @param origin: [`tuple`] Lower-left corner
    @return: [`TriMesh`] (n+1)^2 nodes and 2 n^2 triangles
    """
    if n < 1 or side <= 0:
        raise ScenarioError(f'gen_square needs n >= 1 and side > 0, got n={n}, '
            f'side={side}')
    ticks = np.linspace(0.0, side, n + 1)
    x, y = np.meshgrid(ticks + origin[0], ticks + origin[1])
    points = np.column_stack([x.ravel(), y.ravel()])

    # Node (i, j) is column i, row j
    i, j = np.meshgrid(np.arange(n), np.arange(n))
    n00 = (j * (n + 1) + i).ravel()
    n10 = n00 + 1
    n01 = n00 + n + 1
    n11 = n01 + 1
    triangles = np.concatenate([
        np.column_stack([n00, n10, n11]),
        np.column_stack([n00, n11, n01])
    ])
    # Keep the two halves of a cell next to each other
    triangles = triangles.reshape(2, -1, 3).transpose(1, 0, 2).reshape(-1, 3)

    materials = np.full(triangles.shape[0], outer_material, dtype=np.int64)
    if inclusion is not None:
        centroids = points[triangles].mean(axis=1)
        inside = np.hypot(centroids[:, 0] - inclusion.center[0],
            centroids[:, 1] - inclusion.center[1]) < inclusion.radius
        materials[inside] = inclusion.inner_material
    return build_trimesh(points, triangles, materials)


def _ring_disk_topology(rings: int):
    """
    Unit-disk fan-and-ring layout: node 0 at the centre, ring k holding 6k
    equally spaced nodes at radius k/rings. Returns the polar parameters
    (rho, theta) of each node and the triangles.
    """
    rho = [np.zeros(1)]
    theta = [np.zeros(1)]
    triangles = []
    for k in range(1, rings + 1):
        rho.append(np.full(6 * k, k / rings))
        theta.append(2.0 * np.pi * np.arange(6 * k) / (6 * k))
        outer_start = 1 + 3 * k * (k - 1)
        inner_start = 1 + 3 * (k - 1) * (k - 2)
        for sector in range(6):
            outer = outer_start + (sector * k + np.arange(k + 1)) % (6 * k)
            if k == 1:
                inner = np.zeros(1, dtype=np.int64)
            else:
                inner = inner_start + \
                    (sector * (k - 1) + np.arange(k)) % (6 * (k - 1))
            for m in range(k):
                triangles.append((inner[m], outer[m], outer[m + 1]))
            for m in range(k - 1):
                triangles.append((inner[m], outer[m + 1], inner[m + 1]))
    return np.concatenate(rho), np.concatenate(theta), \
        np.asarray(triangles, dtype=np.int64)


def gen_disk(
    rings: int,
    radius: float=1.0,
    center: Tuple[float, float]=(0.0, 0.0),
    material: int=0
) -> TriMesh:
    """
    Fan-and-ring triangulation of a disk.

    @param rings: [`int`] Number of node rings, at least 1; ring k holds 6k
        nodes at radius k * radius / rings
    @param radius: [`float`] Disk radius
    @param center: [`tuple`] Disk centre
    @param material: [`int`] Material id of every triangle
    @return: [`TriMesh`] 1 + 3 rings (rings + 1) nodes, 6 rings^2 triangles,
        with `boundary_circle` set so `refine` projects the boundary
    """
    if rings < 1 or radius <= 0:
        raise ScenarioError(f'gen_disk needs rings >= 1 and radius > 0, got '
            f'rings={rings}, radius={radius}')
    rho, theta, triangles = _ring_disk_topology(rings)
    points = np.column_stack([
        center[0] + radius * rho * np.cos(theta),
        center[1] + radius * rho * np.sin(theta)
    ])
    materials = np.full(triangles.shape[0], material, dtype=np.int64)
    return build_trimesh(points, triangles, materials,
        boundary_circle=(center[0], center[1], radius))


def _egg_curve(theta, curve):
    left, right, semi_y = EGG_CURVES[curve]
    cos, sin = np.cos(theta), np.sin(theta)
    return np.column_stack([np.where(cos >= 0, right, left) * cos, semi_y * sin])


def gen_egg(rings_per_band: int) -> TriMesh:
    """
    Layered egg-shaped domain: four nested closed curves centred at the
    origin, each two half-ellipses joined on the y axis (see `EGG_CURVES`).
    The ring-disk layout is stretched radially so that every band between
    consecutive curves holds `rings_per_band` rings. Material ids run 1 (the
    core) to 4 (the outer band).

    @param rings_per_band: [`int`] Rings in each of the four bands
    @return: [`TriMesh`] The egg mesh (no boundary circle)
    """
    if rings_per_band < 1:
        raise ScenarioError(f'gen_egg needs rings_per_band >= 1, got '
            f'{rings_per_band}')
    bands = EGG_CURVES.shape[0]
    rho, theta, triangles = _ring_disk_topology(bands * rings_per_band)
    # Band index and position inside the band for each node
    scaled = rho * bands
    band = np.clip(np.ceil(scaled - 1e-12).astype(np.int64) - 1, 0, bands - 1)
    t = scaled - band
    points = np.empty((rho.size, 2))
    core = band == 0
    points[core] = t[core, None] * _egg_curve(theta[core], 0)
    for b in range(1, bands):
        in_band = band == b
        inner = _egg_curve(theta[in_band], b - 1)
        outer = _egg_curve(theta[in_band], b)
        points[in_band] = inner + t[in_band, None] * (outer - inner)
    centroid_rho = rho[triangles].mean(axis=1) * bands
    materials = 1 + np.clip(np.floor(centroid_rho).astype(np.int64), 0,
        bands - 1)
    return build_trimesh(points, triangles, materials)


def refine(mesh: TriMesh) -> TriMesh:
    """
    Uniform 4-to-1 refinement at edge midpoints. Children inherit their
    parent's material. When the mesh carries a `boundary_circle`, the new
    boundary midpoints are projected onto that circle.

    @param mesh: [`TriMesh`] A valid mesh
    @return: [`TriMesh`] N + #edges nodes and 4T triangles
    """
    edges, counts = mesh_edges(mesh.triangles, return_counts=True)
    n = mesh.n_nodes
    midpoints = 0.5 * (mesh.points[edges[:, 0]] + mesh.points[edges[:, 1]])
    if mesh.boundary_circle is not None:
        cx, cy, radius = mesh.boundary_circle
        on_boundary = counts == 1
        offset = midpoints[on_boundary] - (cx, cy)
        midpoints[on_boundary] = (cx, cy) + radius * offset / \
            np.linalg.norm(offset, axis=1, keepdims=True)

    # Edges come back from np.unique sorted, so their keys are sorted too
    keys = edges[:, 0] * n + edges[:, 1]
    def midpoint_index(a, b):
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        return n + np.searchsorted(keys, lo * n + hi)
    v1, v2, v3 = mesh.triangles.T
    m12 = midpoint_index(v1, v2)
    m23 = midpoint_index(v2, v3)
    m31 = midpoint_index(v3, v1)
    children = np.stack([
        np.column_stack([v1, m12, m31]),
        np.column_stack([m12, v2, m23]),
        np.column_stack([m31, m23, v3]),
        np.column_stack([m12, m23, m31])
    ], axis=1).reshape(-1, 3)
    materials = np.repeat(mesh.materials, 4)
    logger.info(f'Refined {mesh.n_triangles} triangles into {children.shape[0]}')
    return build_trimesh(np.concatenate([mesh.points, midpoints]), children,
        materials, boundary_circle=mesh.boundary_circle)


def refine_dirichlet(mesh: TriMesh, dirichlet: dict) -> dict:
    """
    Carry a Dirichlet set of `mesh` over to `refine(mesh)`: coarse nodes keep
    their values and a boundary midpoint gets the mean of its endpoints when
    both are prescribed.

    @param mesh: [`TriMesh`] The coarse mesh
    @param dirichlet: [`dict`] {node: value} on the coarse mesh
    @return: [`dict`] {node: value} on the refined mesh
    """
    edges, counts = mesh_edges(mesh.triangles, return_counts=True)
    refined = {int(node): float(value) for node, value in dirichlet.items()}
    for index in np.flatnonzero(counts == 1):
        a, b = (int(node) for node in edges[index])
        if a in dirichlet and b in dirichlet:
            refined[mesh.n_nodes + int(index)] = 0.5 * (dirichlet[a] +
                dirichlet[b])
    return dict(sorted(refined.items()))
