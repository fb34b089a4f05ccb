import hashlib
from dataclasses import dataclass, replace
import numpy as np
import scipy.sparse as sp

from loguru import logger

from .errors import SingularSystemError
from .geometry import material_tensor, triangle_geometry
from .local_ops import Method, local_system_dec, local_system_feml
from .mesh import DirichletSet, TriMesh, validate_dirichlet, validate_materials
from .utilities import array_digest, parallelize


# Elements handed to each worker when DEC2D_THREADS > 1
ELEMENT_CHUNK = 20000


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """
    A global system: symmetric CSR matrix (full pattern stored), right-hand
    side and the Dirichlet set. `constrained` tells whether
    `apply_dirichlet` has already been run on it.
    """
    matrix: sp.csr_matrix
    rhs: np.ndarray
    fixed: DirichletSet
    constrained: bool = False

    @property
    def n(self) -> int:
        return self.rhs.shape[0]


def element_vertices(mesh: TriMesh):
    """Stacked vertex coordinates (v1, v2, v3), each (T, 2)."""
    p = mesh.points[mesh.triangles]
    return p[:, 0], p[:, 1], p[:, 2]


def element_coefficients(mesh: TriMesh, materials):
    """
    Per-element tensor matrices and nodal source values. Each element's
    three nodes get that element's material q; nothing is averaged across
    elements.

    @return: [`tuple`] ((T, 2, 2) K, (T, 3) q_nodal)
    """
    materials = validate_materials(mesh, materials)
    ids = np.asarray(list(materials.keys()), dtype=np.int64)
    specs = list(materials.values())
    tensors = material_tensor([s.kx for s in specs], [s.ky for s in specs],
        [s.angle_deg for s in specs]).matrix
    q = np.asarray([s.q for s in specs], dtype=float)
    lookup = np.searchsorted(ids, mesh.materials)
    return tensors[lookup], np.repeat(q[lookup, None], 3, axis=1)


def local_systems(vertices, K, q_nodal, method: Method):
    """
    Element systems for a stacked batch of triangles.

    @param vertices: [`np.ndarray`] (T, 3, 2) element vertices
    @param K: [`np.ndarray`] (T, 2, 2) element tensors
    @param q_nodal: [`np.ndarray`] (T, 3) nodal source values
    @param method: [`Method`] DEC or FEML
    @return: [`tuple`] ((T, 3, 3) stiffness, (T, 3) load)
    """
    v1, v2, v3 = vertices[:, 0], vertices[:, 1], vertices[:, 2]
    if Method(method) is Method.DEC:
        local = local_system_dec(triangle_geometry(v1, v2, v3), K, q_nodal)
    else:
        local = local_system_feml(v1, v2, v3, K, q_nodal)
    return local.stiffness, local.load


def _local_chunk(chunk, method):
    vertices, K, q_nodal = chunk
    return local_systems(vertices, K, q_nodal, method)


class _ElementBatch:
    """Sliceable view over the per-element arrays, so `parallelize` can
    chunk them together."""
    def __init__(self, vertices, K, q_nodal):
        self.arrays = (vertices, K, q_nodal)

    def __len__(self):
        return self.arrays[0].shape[0]

    def __getitem__(self, index):
        return tuple(array[index] for array in self.arrays)


@logger.catch(reraise=True)
def assemble(
    mesh: TriMesh,
    materials,
    method: Method=Method.DEC,
    dirichlet: DirichletSet=None
) -> LinearSystem:
    """
    Scatter the element systems of a mesh into a global sparse system. No
    boundary conditions are applied.

    @param mesh: [`TriMesh`] A valid mesh
    @param materials: [`dict` or `list`] MaterialSpec per material id used
    @param method: [`Method`] `Method.DEC` or `Method.FEML` (or 'dec'/'feml')
    @param dirichlet: [`dict`] Optional Dirichlet set stored on the system
    @return: [`LinearSystem`] n x n CSR matrix with duplicate entries summed
    """
    method = Method(method)
    K, q_nodal = element_coefficients(mesh, materials)
    vertices = mesh.points[mesh.triangles]
    results = parallelize(_ElementBatch(vertices, K, q_nodal), _local_chunk,
        ELEMENT_CHUNK, method)
    stiffness = np.concatenate([r[0] for r in results])
    load = np.concatenate([r[1] for r in results])

    n = mesh.n_nodes
    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, (1, 3)).ravel()
    matrix = sp.coo_matrix((stiffness.ravel(), (rows, cols)),
        shape=(n, n)).tocsr()
    rhs = np.bincount(mesh.triangles.ravel(), weights=load.ravel(), minlength=n)
    fixed = {} if dirichlet is None else validate_dirichlet(mesh, dirichlet)
    logger.info(f'Assembled {method.value.upper()} system: {n} nodes, '
        f'{mesh.n_triangles} elements, {matrix.nnz} stored entries')
    return LinearSystem(matrix=matrix, rhs=rhs, fixed=fixed)


def with_dirichlet(system: LinearSystem, dirichlet: DirichletSet) -> LinearSystem:
    return replace(system, fixed={int(k): float(v) for k, v
        in sorted(dirichlet.items())})


@logger.catch(reraise=True)
def apply_dirichlet(system: LinearSystem) -> LinearSystem:
    """
    Impose the Dirichlet set by symmetric elimination: prescribed values are
    moved to the right-hand side of the free rows, the fixed rows and
    columns are zeroed and their diagonal set to 1 with rhs = value.

    @param system: [`LinearSystem`] An assembled system with `fixed` set
    @return: [`LinearSystem`] A new, still symmetric system
    """
    if not system.fixed:
        raise SingularSystemError('No Dirichlet nodes: the pure Neumann '
            'stiffness matrix is singular')
    n = system.n
    nodes = np.fromiter(system.fixed.keys(), dtype=np.int64)
    values = np.fromiter(system.fixed.values(), dtype=float)
    g = np.zeros(n)
    g[nodes] = values
    free = np.ones(n)
    free[nodes] = 0.0

    rhs = system.rhs - system.matrix @ g
    rhs[nodes] = values
    keep = sp.diags(free)
    matrix = (keep @ system.matrix @ keep + sp.diags(1.0 - free)).tocsr()
    logger.info(f'Applied {nodes.size} Dirichlet conditions')
    return LinearSystem(matrix=matrix, rhs=rhs, fixed=system.fixed,
        constrained=True)


def system_digest(system: LinearSystem):
    """
    Round-off tolerant hashes of the matrix (pattern and values) and of the
    right-hand side, used to compare DEC and FEML assemblies.

    @return: [`tuple`] (matrix hash, rhs hash)
    """
    matrix = system.matrix.tocsr(copy=True)
    matrix.sort_indices()
    pattern = array_digest(np.concatenate([matrix.indptr, matrix.indices]))
    values = array_digest(matrix.data)
    combined = hashlib.sha256(f"{pattern}:{values}".encode("ascii"))
    return combined.hexdigest()[:16], array_digest(system.rhs)
