import os
import time
from typing import NamedTuple
import numpy as np
import pandas as pd

from loguru import logger

from .assemble_system import LinearSystem, apply_dirichlet, assemble, system_digest
from .errors import ScenarioError
from .local_ops import Method
from .mesh import MaterialSpec, boundary_dirichlet, mesh_edges
from .postprocess import (FluxField, ScalarField, element_fluxes, error_norms,
    max_principle_violations, nearest_node, nodal_flux_magnitude,
    nodal_values_at, sample_line)
from .read_mesh import write_mesh, write_mesh_file
from .scenarios import (Problem, ScenarioConfig, exact_function, load_problem,
    parse_generator_spec)
from .solve_system import SolveStats, solve_cg
from .write_fields import write_csv, write_vtk


REPORT_COLUMNS = ['method', 'nodes', 'elements', 'max_temperature',
    'probe_value', 'flux_probe', 'max_flux_magnitude', 'iterations',
    'residual', 'converged', 'stiffness_hash', 'rhs_hash']

CONVERGENCE_COLUMNS = ['level', 'method', 'nodes', 'elements', 'h',
    'max_temperature', 'probe_value', 'max_flux_magnitude', 'iterations',
    'converged', 'linf', 'l2', 'order_linf', 'order_l2']


class MethodRun(NamedTuple):
    method: Method
    system: LinearSystem
    temperature: ScalarField
    stats: SolveStats
    flux: FluxField
    flux_magnitude: ScalarField


@logger.catch(reraise=True)
def solve_problem(
    problem: Problem,
    method: Method,
    tol: float=1e-10,
    max_iter: int=None
) -> MethodRun:
    """
    Assemble, constrain and solve one problem with one method, then recover
    the fluxes.

    @param problem: [`Problem`] Mesh, materials and Dirichlet set
    @param method: [`Method`] DEC or FEML
    @param tol: [`float`] CG relative residual tolerance
    @param max_iter: [`int`] CG iteration cap, defaults to 10 n
    @return: [`MethodRun`] The system before constraints, the solution,
        solver statistics and the flux fields
    """
    start = time.perf_counter()
    mesh, materials = problem.mesh, problem.materials
    system = assemble(mesh, materials, method, problem.dirichlet)
    u, stats = solve_cg(apply_dirichlet(system), tol=tol, max_iter=max_iter)
    temperature = ScalarField(mesh, u)
    flux = element_fluxes(mesh, materials, temperature)
    run = MethodRun(Method(method), system, temperature, stats, flux,
        nodal_flux_magnitude(flux))
    logger.info(f'{run.method.value.upper()} solve on {mesh.n_nodes} nodes '
        f'took {time.perf_counter() - start:.3f} s')
    return run


def _check_maximum_principle(problem: Problem, run: MethodRun) -> None:
    values = set(problem.dirichlet.values())
    used = np.unique(problem.mesh.materials)
    if len(values) == 1 and all(problem.materials[int(i)].q >= 0 for i in used):
        max_principle_violations(run.temperature, values.pop())


def _probe(field, point) -> float:
    if point is None:
        return np.nan
    return float(nodal_values_at(field, point)[0])


def _flux_probe(run: MethodRun, point) -> float:
    if point is None:
        return np.nan
    node = nearest_node(run.temperature.mesh, point)
    return float(run.flux_magnitude.values[node])


def report_row(config: ScenarioConfig, run: MethodRun) -> dict:
    mesh = run.temperature.mesh
    stiffness_hash, rhs_hash = system_digest(run.system)
    return {
        'method': run.method.value,
        'nodes': mesh.n_nodes,
        'elements': mesh.n_triangles,
        'max_temperature': float(run.temperature.values.max()),
        'probe_value': _probe(run.temperature, config.probe),
        'flux_probe': _flux_probe(run, config.flux_probe),
        'max_flux_magnitude': float(run.flux_magnitude.values.max()),
        'iterations': run.stats.iterations,
        'residual': run.stats.final_residual,
        'converged': run.stats.converged,
        'stiffness_hash': stiffness_hash,
        'rhs_hash': rhs_hash
    }


def write_lines(config: ScenarioConfig, run: MethodRun, out_dir: str) -> list:
    """
    Write temperature and nodal flux magnitude samples along every
    configured line.

    @return: [`list`] One dict per written file (line, quantity, path,
        samples, missing)
    """
    written = []
    for index, line in enumerate(config.lines, start=1):
        for field in (run.temperature, run.flux_magnitude):
            samples = sample_line(field, line.p0, line.p1, line.samples)
            path = os.path.join(out_dir,
                f'line{index}_{run.method.value}_{field.name}.csv')
            write_csv(samples, path)
            written.append({'method': run.method.value, 'line': index,
                'quantity': field.name, 'path': path,
                'samples': samples.shape[0],
                'missing': int(samples['value'].isna().sum())})
    return written


def write_solution_vtk(run: MethodRun, out_dir: str) -> str:
    path = os.path.join(out_dir, f'solution_{run.method.value}.vtk')
    write_vtk(path, run.temperature.mesh,
        point_data={'temperature': run.temperature.values,
            'flux_magnitude': run.flux_magnitude.values},
        cell_data={'flux': run.flux.vectors})
    return path


@logger.catch(reraise=True)
def cmd_solve(config: ScenarioConfig, out_dir: str=None) -> pd.DataFrame:
    """
    Solve a scenario with each configured method and write its artifacts.

    @param config: [`ScenarioConfig`] The scenario
    @param out_dir: [`str`] Where report, VTK and line CSVs go; nothing is
        written when None
    @return: [`pd.DataFrame`] One report row per method (REPORT_COLUMNS)
    """
    problem = load_problem(config)
    rows = []
    for method in config.methods:
        run = solve_problem(problem, method, config.tol, config.max_iter)
        _check_maximum_principle(problem, run)
        rows.append(report_row(config, run))
        if out_dir is not None:
            if config.vtk:
                write_solution_vtk(run, out_dir)
            write_lines(config, run, out_dir)
    report = pd.DataFrame(rows, columns=REPORT_COLUMNS)
    if out_dir is not None:
        write_csv(report, os.path.join(out_dir, config.report))
    return report


def observed_order(errors) -> np.ndarray:
    """log2(e_h / e_(h/2)) between consecutive levels, NaN for the first."""
    errors = np.asarray(errors, dtype=float)
    order = np.full(errors.shape, np.nan)
    with np.errstate(divide='ignore', invalid='ignore'):
        order[1:] = np.log2(errors[:-1] / errors[1:])
    return order


def _mesh_size(mesh) -> float:
    edges = mesh_edges(mesh.triangles)
    return float(np.max(np.linalg.norm(mesh.points[edges[:, 1]] -
        mesh.points[edges[:, 0]], axis=1)))


@logger.catch(reraise=True)
def cmd_convergence(
    config: ScenarioConfig,
    levels: int,
    out_dir: str=None
) -> pd.DataFrame:
    """
    Solve a scenario on `levels` successively doubled resolutions.

    Error columns are filled when the scenario has an exact solution;
    observed orders compare each level with the previous one for the same
    method.

    @param config: [`ScenarioConfig`] The scenario
    @param levels: [`int`] Number of levels, at least 1
    @param out_dir: [`str`] Where convergence.csv goes; nothing is written
        when None
    @return: [`pd.DataFrame`] One row per level and method
        (CONVERGENCE_COLUMNS)
    """
    if levels < 1:
        raise ScenarioError(f'levels must be >= 1, got {levels}')
    exact = exact_function(config.exact) if config.exact else None
    rows = []
    for level in range(levels):
        problem = load_problem(config, level)
        h = _mesh_size(problem.mesh)
        for method in config.methods:
            run = solve_problem(problem, method, config.tol, config.max_iter)
            linf, l2 = error_norms(run.temperature, exact) if exact \
                else (np.nan, np.nan)
            rows.append({
                'level': level,
                'method': run.method.value,
                'nodes': problem.mesh.n_nodes,
                'elements': problem.mesh.n_triangles,
                'h': h,
                'max_temperature': float(run.temperature.values.max()),
                'probe_value': _probe(run.temperature, config.probe),
                'max_flux_magnitude': float(run.flux_magnitude.values.max()),
                'iterations': run.stats.iterations,
                'converged': run.stats.converged,
                'linf': linf,
                'l2': l2
            })
            logger.info(f'Level {level} {run.method.value.upper()}: '
                f'{problem.mesh.n_nodes} nodes, max temperature '
                f'{rows[-1]["max_temperature"]:.6f}')
    table = pd.DataFrame(rows)
    table['order_linf'] = np.nan
    table['order_l2'] = np.nan
    for _, group in table.groupby('method', sort=False):
        table.loc[group.index, 'order_linf'] = observed_order(group['linf'])
        table.loc[group.index, 'order_l2'] = observed_order(group['l2'])
    table = table[CONVERGENCE_COLUMNS]
    if out_dir is not None:
        write_csv(table, os.path.join(out_dir, 'convergence.csv'))
    return table


@logger.catch(reraise=True)
def cmd_meshgen(spec: str, out_dir: str=None) -> str:
    """
    Generate a mesh file from a one-line generator spec, e.g.
    "disk rings=2 radius=1 dirichlet=10" or "square n=2 side=1".

    Every material id of the mesh gets the constants kx, ky, angle and q
    from the spec (isotropic, unit diffusion and no source by default);
    `dirichlet=g` adds a block prescribing g on all boundary nodes.

    @param spec: [`str`] Generator spec
    @param out_dir: [`str`] When given, the text is also written to
        <out_dir>/<generator>.mesh
    @return: [`str`] The mesh file text
    """
    generator, extras = parse_generator_spec(spec)
    mesh = generator.build()
    kx = extras.get('kx', 1.0)
    materials = {int(i): MaterialSpec(int(i), kx, extras.get('ky', kx),
        extras.get('angle', 0.0), extras.get('q', 0.0))
        for i in np.unique(mesh.materials)}
    dirichlet = None
    if 'dirichlet' in extras:
        dirichlet = boundary_dirichlet(mesh, extras['dirichlet'])
    comment = f'generated by dec2d meshgen: {" ".join(spec.split())}'
    if out_dir is not None:
        write_mesh_file(os.path.join(out_dir, f'{generator.kind}.mesh'), mesh,
            materials, dirichlet, comment)
    return write_mesh(mesh, materials, dirichlet, comment)


@logger.catch(reraise=True)
def cmd_sample(config: ScenarioConfig, out_dir: str) -> pd.DataFrame:
    """
    Solve a scenario and write only its line samples.

    @return: [`pd.DataFrame`] One row per written CSV file
    """
    if not config.lines:
        raise ScenarioError(f'Scenario {config.name} has no sample lines; '
            'add [output] lines or pass --line')
    problem = load_problem(config)
    written = []
    for method in config.methods:
        run = solve_problem(problem, method, config.tol, config.max_iter)
        written.extend(write_lines(config, run, out_dir))
    return pd.DataFrame(written, columns=['method', 'line', 'quantity', 'path',
        'samples', 'missing'])
