import os
import numpy as np

from loguru import logger

from .errors import MeshParseError, MeshValidationError
from .mesh import (MeshDocument, MaterialSpec, TriMesh, build_trimesh,
    validate_dirichlet)


# Section keyword -> number of fields on each following line
SECTION_FIELDS = {'nodes': 2, 'elements': 4, 'materials': 5, 'dirichlet': 2,
    'circle': 3}


def _strip(line: str) -> str:
    return line.split('#', 1)[0].strip()


def _parse_fields(tokens, kinds, line_number):
    try:
        return [kind(token) for kind, token in zip(kinds, tokens)]
    except ValueError:
        raise MeshParseError(f'could not parse {" ".join(tokens)!r}',
            line_number) from None


def parse_mesh(text: str) -> MeshDocument:
    """
    Parse a mesh document.

    The format is line oriented: a section header `nodes N`, `elements M`,
    `materials P` or `dirichlet D` is followed by exactly that many data
    lines (`x y`, `i j k mat_id`, `mat_id kx ky angle_deg q`,
    `node_id value`). Indices are 0-based, `#` starts a comment and blank
    lines are ignored. `nodes` and `elements` are required. An optional
    `circle 1` section holds one `cx cy radius` line: the circle the
    boundary lies on, used by `refine` to place new boundary nodes.

    @param text: [`str`] The mesh file content
    @return: [`MeshDocument`] The validated mesh (CCW winding enforced, see
        `TriMesh.reoriented`), its materials by id and the Dirichlet set
    """
    rows = {name: [] for name in SECTION_FIELDS}
    seen = set()
    section, remaining = None, 0
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        tokens = line.split()
        if remaining == 0:
            keyword = tokens[0].lower()
            if keyword not in SECTION_FIELDS or len(tokens) != 2:
                raise MeshParseError(f'expected a section header, got {line!r}',
                    line_number)
            if keyword in seen:
                raise MeshParseError(f'duplicate {keyword} section', line_number)
            (count,) = _parse_fields(tokens[1:], [int], line_number)
            if count < 0:
                raise MeshParseError(f'negative {keyword} count', line_number)
            if keyword == 'circle' and count != 1:
                raise MeshParseError(f'circle section needs exactly 1 line, '
                    f'got {count}', line_number)
            seen.add(keyword)
            section, remaining = keyword, count
            continue
        if len(tokens) != SECTION_FIELDS[section]:
            raise MeshParseError(f'{section} lines need '
                f'{SECTION_FIELDS[section]} fields, got {len(tokens)}',
                line_number)
        kinds = {
            'nodes': [float, float],
            'elements': [int, int, int, int],
            'materials': [int, float, float, float, float],
            'dirichlet': [int, float],
            'circle': [float, float, float]
        }[section]
        rows[section].append(_parse_fields(tokens, kinds, line_number))
        remaining -= 1
    if remaining:
        raise MeshParseError(f'{section} section ends {remaining} lines early')
    for required in ('nodes', 'elements'):
        if required not in seen:
            raise MeshParseError(f'missing {required} section')

    elements = np.asarray(rows['elements'], dtype=np.int64).reshape(-1, 4)
    circle = rows['circle'][0] if rows['circle'] else None
    if circle is not None and not circle[2] > 0:
        raise MeshValidationError(f'Boundary circle radius must be positive, '
            f'got {circle[2]}')
    mesh = build_trimesh(rows['nodes'], elements[:, :3], elements[:, 3],
        boundary_circle=circle)
    materials = {}
    for mat_id, kx, ky, angle_deg, q in rows['materials']:
        if mat_id in materials:
            raise MeshValidationError(f'Material {mat_id} is defined twice')
        materials[mat_id] = MaterialSpec(mat_id, kx, ky, angle_deg, q)
    dirichlet = {}
    for node, value in rows['dirichlet']:
        if not 0 <= node < mesh.n_nodes:
            raise MeshValidationError(f'Dirichlet node {node} is outside '
                f'0..{mesh.n_nodes - 1}')
        if node in dirichlet:
            raise MeshValidationError(f'Dirichlet node {node} is listed twice')
        dirichlet[node] = value
    dirichlet = validate_dirichlet(mesh, dirichlet)
    logger.info(f'Parsed mesh with {mesh.n_nodes} nodes, {mesh.n_triangles} '
        f'elements, {len(materials)} materials, {len(dirichlet)} Dirichlet nodes')
    return MeshDocument(mesh, materials, dirichlet)


def read_mesh_file(file_path: str) -> MeshDocument:
    """
    Read and parse a mesh file.

    @param file_path: [`str`] Path to the mesh file
    @return: [`MeshDocument`] See `parse_mesh`
    """
    if not os.path.exists(file_path):
        raise FileNotFoundError(f'Could not find the mesh file {file_path}')
    with open(file_path) as f:
        return parse_mesh(f.read())


def write_mesh(
    mesh: TriMesh,
    materials: dict=None,
    dirichlet: dict=None,
    comment: str=None
) -> str:
    """
    Render a mesh document in the format read by `parse_mesh`, with reals
    written to 17 significant digits so they parse back bit for bit.

    @param mesh: [`TriMesh`] The mesh
    @param materials: [`dict`] Optional {id: MaterialSpec}
    @param dirichlet: [`dict`] Optional {node: value}
    @param comment: [`str`] Optional header comment
    @return: [`str`] The document text
    """
    lines = []
    if comment:
        lines.extend(f'# {line}' for line in comment.splitlines())
    lines.append(f'nodes {mesh.n_nodes}')
    lines.extend(f'{x:.17g} {y:.17g}' for x, y in mesh.points)
    lines.append(f'elements {mesh.n_triangles}')
    lines.extend(f'{i} {j} {k} {m}' for (i, j, k), m
        in zip(mesh.triangles.tolist(), mesh.materials.tolist()))
    if mesh.boundary_circle is not None:
        lines.append('circle 1')
        lines.append(' '.join(f'{v:.17g}' for v in mesh.boundary_circle))
    if materials:
        lines.append(f'materials {len(materials)}')
        lines.extend(f'{spec.id} {spec.kx:.17g} {spec.ky:.17g} '
            f'{spec.angle_deg:.17g} {spec.q:.17g}'
            for _, spec in sorted(materials.items()))
    if dirichlet:
        lines.append(f'dirichlet {len(dirichlet)}')
        lines.extend(f'{node} {value:.17g}'
            for node, value in sorted(dirichlet.items()))
    return '\n'.join(lines) + '\n'


def write_mesh_file(file_path: str, mesh: TriMesh, materials: dict=None,
    dirichlet: dict=None, comment: str=None) -> None:
    directory = os.path.dirname(file_path)
    if directory and not os.path.exists(directory):
        os.makedirs(directory)
    logger.info(f'Writing mesh to {file_path}...')
    with open(file_path, 'w') as f:
        f.write(write_mesh(mesh, materials, dirichlet, comment))
