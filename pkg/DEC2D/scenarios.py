"""
Scenario files: INI documents describing one boundary value problem.

    [mesh]            file = PATH, or generator = square | disk | egg plus
                      generator keys (see GENERATOR_KEYS)
    [material.<id>]   k (isotropic shortcut) or kx, ky; angle; q
    [dirichlet]       value = g on every boundary node, or file = PATH with
                      `node value` lines
    [solver]          method = dec | feml | both; tol; max_iter
    [output]          vtk = yes | no; report = NAME; probe = x,y;
                      flux_probe = x,y; lines = x0,y0,x1,y1,n; ...
    [exact]           solution = expression in x and y

Relative paths are resolved against the directory of the scenario file.
"""
import configparser
import os
from dataclasses import dataclass, field, replace
from typing import Dict, NamedTuple, Optional, Tuple
import numpy as np
import pandas as pd

from loguru import logger

from .build_meshes import (CircleInclusion, gen_disk, gen_egg, gen_square,
    refine, refine_dirichlet)
from .errors import MeshParseError, ScenarioError
from .local_ops import Method
from .mesh import (DirichletSet, MaterialSpec, TriMesh, boundary_dirichlet,
    validate_dirichlet)
from .read_mesh import read_mesh_file


PRESET_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'presets')

GENERATOR_KEYS = {
    'square': {'n': int, 'side': float, 'x0': float, 'y0': float,
        'circle_x': float, 'circle_y': float, 'circle_r': float,
        'inner': int, 'outer': int},
    'disk': {'rings': int, 'radius': float, 'cx': float, 'cy': float,
        'material': int},
    'egg': {'rings_per_band': int}
}

# The key doubled at each convergence level, also the one key required
RESOLUTION_KEY = {'square': 'n', 'disk': 'rings', 'egg': 'rings_per_band'}

# Levels of these generators refine the level-0 mesh with `refine`, so an
# element keeps its parent's material and interfaces stay fixed
NESTED_GENERATORS = {'square'}

# Extra keys `meshgen` accepts after the generator keys
MESHGEN_KEYS = {'dirichlet': float, 'kx': float, 'ky': float, 'angle': float,
    'q': float}

MATERIAL_KEYS = {'k', 'kx', 'ky', 'angle', 'q'}


def _convert(kind, key, value, context):
    try:
        return kind(value)
    except ValueError:
        raise ScenarioError(f'{context}: {key}={value!r} is not a valid '
            f'{kind.__name__}') from None


class GeneratorSpec(NamedTuple):
    kind: str
    params: Tuple[Tuple[str, object], ...]

    def get(self, key, default=None):
        return dict(self.params).get(key, default)

    @property
    def nested(self) -> bool:
        return self.kind in NESTED_GENERATORS

    def at_level(self, level: int) -> 'GeneratorSpec':
        """The same generator with its resolution multiplied by 2^level."""
        params = dict(self.params)
        key = RESOLUTION_KEY[self.kind]
        params[key] = params[key] * 2 ** level
        return GeneratorSpec(self.kind, tuple(sorted(params.items())))

    def build(self) -> TriMesh:
        p = dict(self.params)
        if self.kind == 'square':
            inclusion = None
            if 'circle_r' in p:
                inclusion = CircleInclusion((p.get('circle_x', 0.0),
                    p.get('circle_y', 0.0)), p['circle_r'], p.get('inner', 1))
            return gen_square(p['n'], side=p.get('side', 1.0),
                inclusion=inclusion, outer_material=p.get('outer', 0),
                origin=(p.get('x0', 0.0), p.get('y0', 0.0)))
        if self.kind == 'disk':
            return gen_disk(p['rings'], radius=p.get('radius', 1.0),
                center=(p.get('cx', 0.0), p.get('cy', 0.0)),
                material=p.get('material', 0))
        return gen_egg(p['rings_per_band'])


def generator_spec(kind: str, values: dict) -> GeneratorSpec:
    """
    Validate generator keys given as strings.

    @param kind: [`str`] square, disk or egg
    @param values: [`dict`] key -> string value
    @return: [`GeneratorSpec`] Typed, sorted parameters
    """
    if kind not in GENERATOR_KEYS:
        raise ScenarioError(f'Unknown generator {kind!r}, expected one of '
            f'{sorted(GENERATOR_KEYS)}')
    allowed = GENERATOR_KEYS[kind]
    params = {}
    for key, value in values.items():
        if key not in allowed:
            raise ScenarioError(f'{kind} generator has no parameter {key!r}')
        params[key] = _convert(allowed[key], key, value, kind)
    resolution = RESOLUTION_KEY[kind]
    if resolution not in params:
        raise ScenarioError(f'{kind} generator needs {resolution}=')
    if params[resolution] < 1:
        raise ScenarioError(f'{kind} generator needs {resolution} >= 1, got '
            f'{params[resolution]}')
    return GeneratorSpec(kind, tuple(sorted(params.items())))


def parse_generator_spec(text: str):
    """
    Parse a one-line generator spec such as "disk rings=2 radius=1
    dirichlet=10".

    @param text: [`str`] Generator name followed by key=value pairs
    @return: [`tuple`] (GeneratorSpec, dict of the MESHGEN_KEYS given)
    """
    tokens = text.split()
    if not tokens:
        raise ScenarioError('Empty generator spec')
    kind, pairs = tokens[0].lower(), tokens[1:]
    values, extras = {}, {}
    for pair in pairs:
        key, sep, value = pair.partition('=')
        if not sep or not key or not value:
            raise ScenarioError(f'Expected key=value, got {pair!r}')
        if key in MESHGEN_KEYS:
            extras[key] = _convert(MESHGEN_KEYS[key], key, value, kind)
        else:
            values[key] = value
    return generator_spec(kind, values), extras


class LineSpec(NamedTuple):
    p0: Tuple[float, float]
    p1: Tuple[float, float]
    samples: int


def parse_point(text: str) -> Tuple[float, float]:
    parts = [part.strip() for part in text.split(',')]
    if len(parts) != 2:
        raise ScenarioError(f'Expected a point "x,y", got {text!r}')
    return tuple(_convert(float, 'point', part, 'point') for part in parts)


def parse_line(text: str) -> LineSpec:
    """Parse "x0,y0,x1,y1,n" into a LineSpec."""
    parts = [part.strip() for part in text.split(',')]
    if len(parts) != 5:
        raise ScenarioError(f'Expected a line "x0,y0,x1,y1,n", got {text!r}')
    x0, y0, x1, y1 = (_convert(float, 'line', part, 'line') for part in parts[:4])
    samples = _convert(int, 'n', parts[4], 'line')
    if samples < 1:
        raise ScenarioError(f'A sample line needs n >= 1, got {samples}')
    return LineSpec((x0, y0), (x1, y1), samples)


def parse_methods(text: str) -> Tuple[Method, ...]:
    text = text.strip().lower()
    if text == 'both':
        return (Method.DEC, Method.FEML)
    try:
        return (Method(text),)
    except ValueError:
        raise ScenarioError(f'method must be dec, feml or both, got '
            f'{text!r}') from None


def exact_function(expression: str):
    """
    Compile an exact solution expression in x and y with `pandas.eval`.

    @param expression: [`str`] E.g. "10 + 0.2*(1 - x**2 - y**2)"
    @return: [`callable`] f(x, y) vectorised over arrays
    """
    def exact(x, y):
        return pd.eval(expression, engine='python',
            local_dict={'x': np.asarray(x, dtype=float),
                'y': np.asarray(y, dtype=float)})
    try:
        np.asarray(exact(np.zeros(1), np.zeros(1)), dtype=float)
    except Exception as e:
        raise ScenarioError(f'Could not evaluate exact solution '
            f'{expression!r}: {e}') from None
    return exact


@dataclass(frozen=True)
class ScenarioConfig:
    """One boundary value problem plus what to do with it."""
    name: str
    mesh_file: Optional[str] = None
    generator: Optional[GeneratorSpec] = None
    materials: Dict[int, MaterialSpec] = field(default_factory=dict)
    dirichlet_value: Optional[float] = None
    dirichlet_file: Optional[str] = None
    methods: Tuple[Method, ...] = (Method.DEC,)
    tol: float = 1e-10
    max_iter: Optional[int] = None
    vtk: bool = True
    report: str = 'report.csv'
    lines: Tuple[LineSpec, ...] = ()
    probe: Optional[Tuple[float, float]] = None
    flux_probe: Optional[Tuple[float, float]] = None
    exact: Optional[str] = None

    def __post_init__(self):
        if (self.mesh_file is None) == (self.generator is None):
            raise ScenarioError(f'Scenario {self.name} needs exactly one mesh '
                'source (file or generator)')
        if not self.methods:
            raise ScenarioError(f'Scenario {self.name} has no method')
        if not self.tol > 0:
            raise ScenarioError(f'tol must be positive, got {self.tol}')
        if self.max_iter is not None and self.max_iter < 1:
            raise ScenarioError(f'max_iter must be >= 1, got {self.max_iter}')

    def with_overrides(self, method: str=None, tol: float=None, lines=None):
        """Apply command line overrides; None leaves a value unchanged."""
        changes = {}
        if method is not None:
            changes['methods'] = parse_methods(method)
        if tol is not None:
            changes['tol'] = tol
        if lines:
            changes['lines'] = tuple(parse_line(line) for line in lines)
        return replace(self, **changes)


def _resolve(path: str, base_dir: str) -> str:
    return path if os.path.isabs(path) else os.path.join(base_dir, path)


def _material(section_name: str, section) -> MaterialSpec:
    _, _, suffix = section_name.partition('.')
    mat_id = _convert(int, 'material id', suffix, section_name)
    unknown = set(section) - MATERIAL_KEYS
    if unknown:
        raise ScenarioError(f'[{section_name}] has unknown keys {sorted(unknown)}')
    values = {key: _convert(float, key, section[key], section_name)
        for key in section}
    if 'k' in values:
        if 'kx' in values or 'ky' in values:
            raise ScenarioError(f'[{section_name}] gives both k and kx/ky')
        values['kx'] = values['ky'] = values.pop('k')
    if 'kx' not in values:
        raise ScenarioError(f'[{section_name}] needs k or kx')
    return MaterialSpec(mat_id, values['kx'], values.get('ky', values['kx']),
        values.get('angle', 0.0), values.get('q', 0.0))


def parse_scenario(text: str, name: str='scenario', base_dir: str='.') \
        -> ScenarioConfig:
    """
    Parse the text of a scenario file.

    @param text: [`str`] INI document, see the module docstring
    @param name: [`str`] Scenario name used in messages
    @param base_dir: [`str`] Directory relative paths are resolved against
    @return: [`ScenarioConfig`] The validated configuration
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=name)
    except configparser.Error as e:
        raise ScenarioError(f'Could not parse scenario {name}: {e}') from None

    known = {'mesh', 'dirichlet', 'solver', 'output', 'exact'}
    for section in parser.sections():
        if section not in known and not section.startswith('material.'):
            raise ScenarioError(f'Unknown section [{section}] in {name}')
    if not parser.has_section('mesh'):
        raise ScenarioError(f'Scenario {name} has no [mesh] section')

    mesh = dict(parser['mesh'])
    mesh_file, generator = None, None
    if 'file' in mesh:
        if len(mesh) > 1:
            raise ScenarioError('[mesh] with a file takes no other keys')
        mesh_file = _resolve(mesh['file'], base_dir)
    elif 'generator' in mesh:
        kind = mesh.pop('generator').strip().lower()
        generator = generator_spec(kind, mesh)

    materials = {}
    for section in parser.sections():
        if section.startswith('material.'):
            spec = _material(section, parser[section])
            if spec.id in materials:
                raise ScenarioError(f'Material {spec.id} is defined twice')
            materials[spec.id] = spec

    options = {}
    if parser.has_section('dirichlet'):
        dirichlet = parser['dirichlet']
        if 'value' in dirichlet and 'file' in dirichlet:
            raise ScenarioError('[dirichlet] takes value or file, not both')
        if 'value' in dirichlet:
            options['dirichlet_value'] = _convert(float, 'value',
                dirichlet['value'], 'dirichlet')
        elif 'file' in dirichlet:
            options['dirichlet_file'] = _resolve(dirichlet['file'], base_dir)

    if parser.has_section('solver'):
        solver = parser['solver']
        if 'method' in solver:
            options['methods'] = parse_methods(solver['method'])
        if 'tol' in solver:
            options['tol'] = _convert(float, 'tol', solver['tol'], 'solver')
        if 'max_iter' in solver:
            options['max_iter'] = _convert(int, 'max_iter', solver['max_iter'],
                'solver')

    if parser.has_section('output'):
        output = parser['output']
        if 'vtk' in output:
            try:
                options['vtk'] = output.getboolean('vtk')
            except ValueError:
                raise ScenarioError(f'vtk must be yes or no, got '
                    f'{output["vtk"]!r}') from None
        if 'report' in output:
            options['report'] = output['report']
        if 'lines' in output:
            options['lines'] = tuple(parse_line(line) for line
                in output['lines'].split(';') if line.strip())
        for key in ('probe', 'flux_probe'):
            if key in output:
                options[key] = parse_point(output[key])

    if parser.has_section('exact') and 'solution' in parser['exact']:
        options['exact'] = parser['exact']['solution']
        exact_function(options['exact'])

    return ScenarioConfig(name=name, mesh_file=mesh_file, generator=generator,
        materials=materials, **options)


def load_scenario(source: str) -> ScenarioConfig:
    """
    Load a scenario file, or a shipped preset by name (example1, example2,
    example3).

    @param source: [`str`] Path to an INI file or a preset name
    @return: [`ScenarioConfig`] The parsed configuration
    """
    path = source
    if not os.path.exists(path):
        preset = os.path.join(PRESET_DIR, f'{source}.ini')
        if not os.path.exists(preset):
            raise FileNotFoundError(f'No scenario file or preset named {source}')
        path = preset
    with open(path) as f:
        text = f.read()
    name = os.path.splitext(os.path.basename(path))[0]
    logger.info(f'Loading scenario {name} from {path}')
    return parse_scenario(text, name=name,
        base_dir=os.path.dirname(os.path.abspath(path)))


def read_dirichlet_file(file_path: str) -> DirichletSet:
    """Read `node value` lines (with # comments) into a Dirichlet set."""
    if not os.path.exists(file_path):
        raise FileNotFoundError(f'Could not find the Dirichlet file {file_path}')
    try:
        table = pd.read_csv(file_path, sep=r'\s+', comment='#', header=None,
            names=['node', 'value'], dtype={'node': np.int64, 'value': float})
    except (ValueError, pd.errors.ParserError) as e:
        raise MeshParseError(f'{file_path}: {e}') from None
    if table.isna().values.any():
        raise MeshParseError(f'{file_path}: every line needs a node and a value')
    if table['node'].duplicated().any():
        raise MeshParseError(f'{file_path}: a node is listed twice')
    return dict(zip(table['node'].tolist(), table['value'].tolist()))


class Problem(NamedTuple):
    mesh: TriMesh
    materials: Dict[int, MaterialSpec]
    dirichlet: DirichletSet


def load_problem(config: ScenarioConfig, level: int=0) -> Problem:
    """
    Build the mesh, materials and Dirichlet set of a scenario at a
    refinement level. Disk and egg meshes are regenerated at 2^level times
    their resolution; square and file meshes are refined `level` times with
    `refine`, per-node Dirichlet data following along.

    @param config: [`ScenarioConfig`] The scenario
    @param level: [`int`] Refinement level, 0 is the configured mesh
    @return: [`Problem`] Validated inputs for `assemble`
    """
    if level < 0:
        raise ScenarioError(f'Refinement level must be >= 0, got {level}')
    materials = {}
    dirichlet = None
    if config.dirichlet_file is not None:
        dirichlet = read_dirichlet_file(config.dirichlet_file)

    generator = config.generator
    if generator is not None and not generator.nested:
        if dirichlet is not None and level > 0:
            raise ScenarioError('Per-node Dirichlet files do not carry over to '
                f'regenerated {generator.kind} meshes; use [dirichlet] value '
                'instead')
        mesh = generator.at_level(level).build()
    else:
        if generator is not None:
            mesh = generator.build()
        else:
            document = read_mesh_file(config.mesh_file)
            mesh = document.mesh
            materials.update(document.materials)
            if dirichlet is None and config.dirichlet_value is None:
                dirichlet = document.dirichlet or None
        for _ in range(level):
            if dirichlet is not None:
                dirichlet = refine_dirichlet(mesh, dirichlet)
            mesh = refine(mesh)

    materials.update(config.materials)
    if config.dirichlet_value is not None:
        dirichlet = boundary_dirichlet(mesh, config.dirichlet_value)
    if not dirichlet:
        raise ScenarioError(f'Scenario {config.name} prescribes no Dirichlet '
            'values')
    return Problem(mesh, materials, validate_dirichlet(mesh, dirichlet))
