from .errors import *
from .mesh import (MaterialSpec, MeshDocument, TriMesh, Triangle,
    boundary_dirichlet, build_trimesh, mesh_area, mesh_edges, signed_areas,
    validate_dirichlet, validate_materials)
from .read_mesh import parse_mesh, read_mesh_file, write_mesh, write_mesh_file
from .build_meshes import (CircleInclusion, gen_disk, gen_egg, gen_square,
    refine, refine_dirichlet)
from .geometry import (AnisotropyTensor, TriangleGeometry, circumcenter,
    material_tensor, rotate90, triangle_geometry)
from .local_ops import (AnisoCoeffs, LocalSystem, Method, anisotropic_flux, d0,
    flux, gradient_operator, hodge0, hodge1, k_dec, local_system_dec,
    local_system_feml)
from .assemble_system import (LinearSystem, apply_dirichlet, assemble,
    element_vertices, system_digest, with_dirichlet)
from .solve_system import SolveStats, solve_cg, solve_dense
from .postprocess import (FluxField, ScalarField, element_fluxes, error_norms,
    max_principle_violations, nearest_node, nodal_flux_magnitude,
    nodal_values_at, sample_line)
from .write_fields import read_csv, render_vtk, write_csv, write_vtk
from .scenarios import ScenarioConfig, load_problem, load_scenario, parse_scenario
from .run_scenarios import cmd_convergence, cmd_meshgen, cmd_sample, cmd_solve
from .utilities import configure_logging, parallelize
