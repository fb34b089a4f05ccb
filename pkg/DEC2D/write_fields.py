import os
import numpy as np
import pandas as pd

from loguru import logger

from .mesh import TriMesh


# VTK cell type of a linear triangle
VTK_TRIANGLE = 5


def _real(value) -> str:
    return f'{value + 0.0:.17g}'


def render_vtk(
    mesh: TriMesh,
    point_data: dict=None,
    cell_data: dict=None,
    title: str='DEC2D solution'
) -> str:
    """
    Legacy ASCII VTK text of a triangle mesh.

    @param mesh: [`TriMesh`] The mesh; points get z = 0
    @param point_data: [`dict`] name -> (N,) nodal scalars
    @param cell_data: [`dict`] name -> (T, 2) element vectors or (T,) scalars
    @param title: [`str`] Header line
    @return: [`str`] The file content
    """
    lines = [
        '# vtk DataFile Version 3.0',
        title,
        'ASCII',
        'DATASET UNSTRUCTURED_GRID',
        f'POINTS {mesh.n_nodes} double'
    ]
    lines.extend(f'{_real(x)} {_real(y)} 0' for x, y in mesh.points)
    lines.append(f'CELLS {mesh.n_triangles} {4 * mesh.n_triangles}')
    lines.extend(f'3 {i} {j} {k}' for i, j, k in mesh.triangles.tolist())
    lines.append(f'CELL_TYPES {mesh.n_triangles}')
    lines.extend([str(VTK_TRIANGLE)] * mesh.n_triangles)

    if point_data:
        lines.append(f'POINT_DATA {mesh.n_nodes}')
        for name, values in point_data.items():
            values = np.asarray(values, dtype=float)
            if values.shape != (mesh.n_nodes,):
                raise ValueError(f'Point field {name} has shape {values.shape}, '
                    f'expected ({mesh.n_nodes},)')
            lines.extend([f'SCALARS {name} double 1', 'LOOKUP_TABLE default'])
            lines.extend(_real(v) for v in values)
    if cell_data:
        lines.append(f'CELL_DATA {mesh.n_triangles}')
        for name, values in cell_data.items():
            values = np.asarray(values, dtype=float)
            if values.shape == (mesh.n_triangles,):
                lines.extend([f'SCALARS {name} double 1', 'LOOKUP_TABLE default'])
                lines.extend(_real(v) for v in values)
            elif values.shape == (mesh.n_triangles, 2):
                lines.append(f'VECTORS {name} double')
                lines.extend(f'{_real(vx)} {_real(vy)} 0' for vx, vy in values)
            else:
                raise ValueError(f'Cell field {name} has shape {values.shape}, '
                    f'expected ({mesh.n_triangles},) or ({mesh.n_triangles}, 2)')
    return '\n'.join(lines) + '\n'


def _ensure_directory(file_path: str) -> None:
    directory = os.path.dirname(file_path)
    if directory and not os.path.exists(directory):
        os.makedirs(directory)


def write_vtk(file_path: str, mesh: TriMesh, point_data: dict=None,
    cell_data: dict=None) -> None:
    """
    Write a mesh and its fields as a legacy ASCII VTK unstructured grid.

    @param file_path: [`str`] Destination, parent directories are created
    @return: [`None`]
    """
    text = render_vtk(mesh, point_data, cell_data)
    _ensure_directory(file_path)
    logger.info(f'Writing VTK file {file_path}...')
    with open(file_path, 'w') as f:
        f.write(text)


def write_csv(samples: pd.DataFrame, file_path: str) -> None:
    """
    Write a table with reals at 17 significant digits; NaN becomes an empty
    cell.

    @param samples: [`pd.DataFrame`] E.g. the output of `sample_line`
    @param file_path: [`str`] Destination
    @return: [`None`]
    """
    _ensure_directory(file_path)
    logger.info(f'Writing {samples.shape[0]} rows to {file_path}...')
    samples.to_csv(file_path, index=False, float_format='%.17g', na_rep='',
        lineterminator='\n')


def read_csv(file_path: str) -> pd.DataFrame:
    if not os.path.exists(file_path):
        raise FileNotFoundError(f'Could not find {file_path}')
    return pd.read_csv(file_path, float_precision='round_trip')
