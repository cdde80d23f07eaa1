"""
Run configuration: a JSON document validated into a ``RunConfig``.

A config may name a ``preset`` (see ``fpeit.presets``); the preset supplies
the base document and every key given next to it overrides the preset's.
Nested objects are merged key by key, except that changing a ``variant``
or ``kind`` replaces the whole object.
"""

import json
import logging
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
import pydantic
from pydantic import BaseModel, ConfigDict, Field, field_validator, \
    model_validator

from fpeit import settings
from fpeit.conductivity import Annulus, ConstantField, Disk, \
    GeometricScene, GriddedSampler, LimitCase, Polygon, radial_rings, \
    sample_piecewise
from fpeit.errors import ValidationError
from fpeit.presets import PRESETS
from fpeit.pseudoanalytic import RadialMesh
from fpeit.verification import harmonic_case, lorentzian_case, \
    sinusoidal_case

logger = logging.getLogger(__name__)

Point = Tuple[float, float]


class _Schema(BaseModel):
    model_config = ConfigDict(extra='forbid')


class ConstantSpec(_Schema):
    variant: Literal['constant'] = 'constant'
    value: float = Field(1.0, gt=0)


class SinusoidalSpec(_Schema):
    variant: Literal['sinusoidal'] = 'sinusoidal'
    omega: float = Field(np.pi, gt=0, le=np.pi)
    branch: Literal['continuous', 'principal'] = 'continuous'


class LorentzianSpec(_Schema):
    variant: Literal['lorentzian'] = 'lorentzian'
    beta: float = 0.0


class RadialRingsSpec(_Schema):
    variant: Literal['radial-rings'] = 'radial-rings'


class _Centered(_Schema):
    """Shapes placed by ``cx``, ``cy``; ``center: [x, y]`` also works."""
    cx: float = 0.0
    cy: float = 0.0

    @model_validator(mode='before')
    @classmethod
    def _split_center(cls, data):
        if not isinstance(data, dict) or 'center' not in data:
            return data
        if 'cx' in data or 'cy' in data:
            raise ValueError("give either center or cx/cy")
        data = dict(data)
        center = data.pop('center')
        if not isinstance(center, (list, tuple)) or len(center) != 2:
            raise ValueError("center must be a pair [x, y]")
        (data['cx'], data['cy']) = center
        return data


class DiskShape(_Centered):
    kind: Literal['disk'] = 'disk'
    r2: float = Field(gt=0)
    value: float = Field(gt=0)


class AnnulusShape(_Centered):
    kind: Literal['annulus'] = 'annulus'
    r2_inner: float = Field(ge=0)
    r2_outer: float = Field(gt=0)
    value: float = Field(gt=0)

    @model_validator(mode='after')
    def _ordered(self):
        if self.r2_inner >= self.r2_outer:
            raise ValueError("annulus needs r2_inner < r2_outer")
        return self


class PolygonShape(_Schema):
    kind: Literal['polygon'] = 'polygon'
    vertices: List[Point] = Field(min_length=3)
    value: float = Field(gt=0)


Shape = Annotated[Union[DiskShape, AnnulusShape, PolygonShape],
                  Field(discriminator='kind')]


class SceneSpec(_Schema):
    variant: Literal['scene'] = 'scene'
    background: float = Field(gt=0)
    shapes: List[Shape] = []


class GridSpec(_Schema):
    variant: Literal['grid'] = 'grid'
    path: str


Source = Annotated[Union[ConstantSpec, SinusoidalSpec, LorentzianSpec,
                         RadialRingsSpec, SceneSpec, GridSpec],
                   Field(discriminator='variant')]


class PiecewiseSpec(_Schema):
    """Slab-wise separable approximation of another field."""
    variant: Literal['piecewise'] = 'piecewise'
    source: Source
    M: int = Field(16, ge=1)
    q: int = Field(16, ge=2)
    K: float = Field(settings.SLAB_K, gt=1)
    interpolant: Literal['linear', 'cubic'] = 'linear'
    extent: Literal['chord', 'full'] = 'chord'


Conductivity = Annotated[Union[ConstantSpec, SinusoidalSpec, LorentzianSpec,
                               RadialRingsSpec, SceneSpec, GridSpec,
                               PiecewiseSpec],
                         Field(discriminator='variant')]


class ExactData(_Schema):
    """The exact potential of the conductivity (sinusoidal, lorentzian, or
    constant with a harmonic potential)."""
    kind: Literal['exact'] = 'exact'
    n: int = Field(2, ge=0)


class CubicData(_Schema):
    """u = ((x - shift)^3 + y^3)/3 + 0.1 (x - shift + y)."""
    kind: Literal['cubic'] = 'cubic'
    shift: float = 0.0


class HarmonicData(_Schema):
    kind: Literal['harmonic'] = 'harmonic'
    n: int = Field(2, ge=0)


class CsvData(_Schema):
    kind: Literal['csv'] = 'csv'
    path: str


Boundary = Annotated[Union[ExactData, CubicData, HarmonicData, CsvData],
                     Field(discriminator='kind')]


class Thresholds(_Schema):
    divergence: Optional[float] = settings.DIVERGENCE_THRESHOLD
    successor: Optional[float] = settings.SUCCESSOR_THRESHOLD
    vekua: Optional[float] = settings.VEKUA_THRESHOLD


class RunConfig(_Schema):
    preset: Optional[str] = None
    conductivity: Conductivity = ConstantSpec()
    boundary: Boundary = HarmonicData()
    N: int = settings.MAX_DEGREE
    P: int = Field(settings.RAY_COUNT, ge=3)
    S: int = settings.STEP_COUNT
    Q: int = settings.ERROR_POINTS
    h: float = Field(settings.STENCIL_H, gt=0)
    drop_tol: float = Field(settings.DROP_TOL, gt=0)
    basis_size: Optional[int] = Field(None, ge=1)
    quadrature: Literal['trapezoid', 'simpson'] = settings.QUADRATURE
    radial_ratio: float = Field(settings.RADIAL_RATIO, gt=0)
    dense_error: bool = False
    corner_snap: bool = True
    dump_powers: bool = False
    interior: bool = False
    threads: int = Field(settings.THREADS, ge=0)
    thresholds: Thresholds = Thresholds()
    seed: int = settings.VERIFY_SEED
    verify_points: int = Field(settings.VERIFY_POINTS, ge=1)

    @field_validator('N')
    @classmethod
    def _degree(cls, value):
        if value < 1:
            raise ValueError("N must be at least 1")
        return value

    @field_validator('S')
    @classmethod
    def _steps(cls, value):
        if value < 50:
            raise ValueError("S must be at least 50")
        return value

    @model_validator(mode='after')
    def _sizes(self):
        if self.Q < self.P:
            raise ValueError("Q must be at least P")
        wanted = 2 * self.N + 1
        if self.basis_size is not None:
            wanted = min(wanted, self.basis_size)
        if self.P < wanted:
            logger.warning("P=%d rays for %d functions: the basis will be "
                           "smaller", self.P, wanted)
        return self


def merge(base, override):
    """Deep merge of two config documents.
    >>> merge({'a': {'b': 1, 'c': 2}}, {'a': {'c': 3}})
    {'a': {'b': 1, 'c': 3}}
    >>> merge({'a': {'kind': 'x', 'b': 1}}, {'a': {'kind': 'y'}})
    {'a': {'kind': 'y'}}
    """
    out = dict(base)
    for (key, value) in override.items():
        previous = out.get(key)
        if isinstance(value, dict) and isinstance(previous, dict) and \
           all(value.get(tag, previous.get(tag)) == previous.get(tag)
               for tag in ('variant', 'kind')):
            out[key] = merge(previous, value)
        else:
            out[key] = value
    return out


def parse_config(document):
    """RunConfig from a decoded JSON document, presets resolved."""
    if not isinstance(document, dict):
        raise ValidationError("A config must be a JSON object.")
    name = document.get('preset')
    if name is not None:
        if name not in PRESETS:
            raise ValidationError("Unknown preset %r; known presets: %s."
                                  % (name, ', '.join(sorted(PRESETS))))
        document = merge(PRESETS[name], document)
    try:
        return RunConfig.model_validate(document)
    except pydantic.ValidationError as err:
        raise ValidationError("Invalid config: %s" % err) from err


def load_config(path):
    try:
        with open(path) as handle:
            document = json.load(handle)
    except OSError as err:
        raise ValidationError("Could not read config %s: %s" % (path, err))
    except ValueError as err:
        raise ValidationError("Config %s is not valid JSON: %s" % (path, err))
    return parse_config(document)


def _build_shape(spec):
    if spec.kind == 'disk':
        return Disk(spec.cx, spec.cy, spec.r2, spec.value)
    if spec.kind == 'annulus':
        return Annulus(spec.cx, spec.cy, spec.r2_inner,
                       spec.r2_outer, spec.value)
    return Polygon(spec.vertices, spec.value)


def build_conductivity(spec):
    """ConductivityField for a conductivity spec."""
    if spec.variant == 'constant':
        return ConstantField(spec.value)
    if spec.variant == 'sinusoidal':
        return sinusoidal_case(spec.omega, spec.branch).sigma
    if spec.variant == 'lorentzian':
        return lorentzian_case(spec.beta).sigma
    if spec.variant == 'radial-rings':
        return radial_rings()
    if spec.variant == 'scene':
        return GeometricScene(spec.background,
                              [_build_shape(s) for s in spec.shapes],
                              name='scene')
    if spec.variant == 'grid':
        return LimitCase(GriddedSampler.from_csv(spec.path),
                         name='grid %s' % spec.path)
    source = build_conductivity(spec.source)
    return sample_piecewise(source, spec.M, spec.q, spec.K, spec.extent,
                            spec.interpolant)


def exact_case(config):
    """The ExactCase matching the config, or None."""
    spec = config.conductivity
    if spec.variant == 'sinusoidal':
        return sinusoidal_case(spec.omega, spec.branch)
    if spec.variant == 'lorentzian':
        return lorentzian_case(spec.beta)
    if spec.variant == 'constant' and config.boundary.kind in ('exact',
                                                                'harmonic'):
        return harmonic_case(config.boundary.n, spec.value)
    return None


def cubic_potential(shift):
    def u(x, y):
        x = np.asarray(x, dtype=float) - shift
        y = np.asarray(y, dtype=float)
        return (x ** 3 + y ** 3) / 3 + 0.1 * (x + y)
    return u


def _csv_data(path):
    try:
        table = np.genfromtxt(path, delimiter=',', names=True,
                              encoding='utf-8')
    except (OSError, ValueError) as err:
        raise ValidationError("Could not read boundary data %s: %s"
                              % (path, err))
    if table.dtype.names is None or \
       tuple(n.lower() for n in table.dtype.names) != ('theta', 'u'):
        raise ValidationError("Boundary data %s must have the header "
                              "theta,u." % path)
    table = np.atleast_1d(table)
    (theta, u) = (table['theta'], table['u'])
    if len(theta) < 2 or not np.all(np.isfinite(u)):
        raise ValidationError("Boundary data %s needs at least two finite "
                              "rows." % path)
    if np.any(theta < 0) or np.any(theta >= 2 * np.pi):
        raise ValidationError("Boundary data %s: theta must lie in "
                              "[0, 2pi)." % path)

    def data(angles):
        return np.interp(angles, theta, u, period=2 * np.pi)
    return data


def boundary_function(config):
    """u on the rim as a function of theta."""
    spec = config.boundary
    if spec.kind == 'exact':
        case = exact_case(config)
        if case is None:
            raise ValidationError("Conductivity %r has no exact solution; "
                                  "choose other boundary data."
                                  % config.conductivity.variant)
        return case.boundary_data
    if spec.kind == 'csv':
        return _csv_data(spec.path)
    if spec.kind == 'cubic':
        u = cubic_potential(spec.shift)
    else:
        n = spec.n
        u = lambda x, y: ((np.asarray(x) + 1j * np.asarray(y)) ** n).real
    return lambda theta: u(np.cos(theta), np.sin(theta))


def build_mesh(config, field, P=None):
    """Uniform rays (P defaults to config.P) through the field's corners."""
    snap = field.corners() if config.corner_snap else ()
    return RadialMesh.uniform(P or config.P, config.S,
                              ratio=config.radial_ratio, snap_points=snap)
