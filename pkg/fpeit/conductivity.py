"""Conductivity fields on the closed unit disk.

Four kinds of field feed the rest of the pipeline:

``AnalyticSeparable``
    sigma(x, y) = sigma1(x) * sigma2(y) given as two real functions.

``PiecewiseSeparable``
    The disk is cut into M vertical slabs; inside slab j the field is
    ((x + K) / (chi_j + K)) * f_j(y) where f_j interpolates conductivity
    values collected along the line x = chi_j. Built with
    ``build_piecewise`` (explicit samples) or ``sample_piecewise`` (sampling
    another field).

``LimitCase``
    Any total, positive evaluator: a closure, a radial profile or a bilinear
    interpolation of a gridded CSV file. The generating sequence for these
    has period one.

``GeometricScene``
    A background value with disks, annuli and polygons painted over it; the
    last listed shape containing a point wins and shape boundaries belong to
    the shape.

Every field is immutable once built and evaluation is a pure function of the
coordinates, so fields can be shared between worker threads.
"""

import logging
from collections import namedtuple

import numpy as np
import shapely
from scipy.interpolate import CubicSpline, RegularGridInterpolator

from fpeit import settings
from fpeit.errors import DomainError, ValidationError

logger = logging.getLogger(__name__)

RING_EDGES = (0.2, 0.4, 0.6, 0.8)
RING_VALUES = (100.0, 30.0, 20.0, 15.0, 30.0)

Slab = namedtuple('Slab', 'x_lo x_hi chi K f')


def _as_arrays(x, y):
    (x, y) = np.broadcast_arrays(np.asarray(x, dtype=float),
                                 np.asarray(y, dtype=float))
    return (x, y)


def check_in_disk(x, y, tol=settings.DISK_TOL):
    """Raise DomainError unless every (x, y) satisfies x^2 + y^2 <= 1 + tol."""
    (x, y) = _as_arrays(x, y)
    outside = x * x + y * y > 1.0 + tol
    if np.any(outside):
        (bad_x, bad_y) = (x[outside].flat[0], y[outside].flat[0])
        raise DomainError("Point (%g, %g) lies outside the unit disk."
                          % (bad_x, bad_y))


class ConductivityField(object):
    """Base class: a positive scalar field sigma(x, y) on the unit disk.

    Subclasses implement ``sample``, a vectorised evaluator that does no
    domain checking (finite-difference stencils step a little past the rim).
    ``evaluate`` is the checked entry point.
    """

    variant = None
    separable = False
    is_constant = False
    # constant between jumps; derivatives only make sense away from them
    piecewise_constant = False
    name = None

    def sample(self, x, y):
        raise NotImplementedError

    def __call__(self, x, y):
        return self.sample(x, y)

    def evaluate(self, x, y):
        """Checked evaluation: domain first, positivity of the result after."""
        check_in_disk(x, y)
        value = np.asarray(self.sample(x, y), dtype=float)
        if not np.all(np.isfinite(value)) or np.any(value <= 0):
            raise ValidationError(
                "Conductivity %s produced a non-positive or non-finite value."
                % (self.name or self.variant))
        return value[()] if value.ndim == 0 else value

    @property
    def bounds(self):
        """(sigma_min, sigma_max) over a polar sampling of the closed disk."""
        if getattr(self, '_bounds', None) is None:
            r = np.linspace(0.0, 1.0, 65)
            theta = np.linspace(0.0, 2 * np.pi, 128, endpoint=False)
            z = np.outer(r, np.exp(1j * theta))
            values = self.evaluate(z.real, z.imag)
            self._bounds = (float(values.min()), float(values.max()))
        return self._bounds

    def corners(self):
        """Points that some integration ray should pass through."""
        return []

    def __repr__(self):
        return '<%s %s>' % (type(self).__name__, self.name or '')


class AnalyticSeparable(ConductivityField):
    """sigma(x, y) = sigma1(x) * sigma2(y)."""

    variant = 'AnalyticSeparable'
    separable = True

    def __init__(self, sigma1, sigma2, name=None):
        self.sigma1 = sigma1
        self.sigma2 = sigma2
        self.name = name

    def factors(self, x, y):
        (x, y) = _as_arrays(x, y)
        return (np.broadcast_to(self.sigma1(x), x.shape).astype(float),
                np.broadcast_to(self.sigma2(y), y.shape).astype(float))

    def sample(self, x, y):
        (s1, s2) = self.factors(x, y)
        return s1 * s2


def _constant(value, t):
    return np.full(np.shape(t), value, dtype=float)


class ConstantField(AnalyticSeparable):
    is_constant = True

    def __init__(self, value=1.0):
        if not value > 0:
            raise ValidationError("Constant conductivity must be positive.")
        self.value = float(value)
        super(ConstantField, self).__init__(
            lambda x: _constant(self.value, x),
            lambda y: _constant(1.0, y),
            name='constant %g' % value)

    @property
    def bounds(self):
        return (self.value, self.value)


class SlabProfile(object):
    """f_j(y): an interpolant through (y, sigma) samples of one slab.

    Outside the sampled range the endpoint values are held.
    """

    def __init__(self, ys, values, kind='linear'):
        self.ys = np.asarray(ys, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.kind = kind
        if kind == 'cubic':
            self._spline = CubicSpline(self.ys, self.values)
        elif kind != 'linear':
            raise ValidationError("Unknown interpolant %r." % kind)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind == 'linear':
            return np.interp(y, self.ys, self.values)
        return self._spline(np.clip(y, self.ys[0], self.ys[-1]))


class PiecewiseSeparable(ConductivityField):
    variant = 'PiecewiseSeparable'
    separable = True

    def __init__(self, slabs, name=None):
        self.slabs = tuple(slabs)
        self.edges = np.array([s.x_lo for s in self.slabs]
                              + [self.slabs[-1].x_hi])
        self.name = name

    def slab_index(self, x):
        """Slab of each abscissa; slabs are [x_lo, x_hi) except the last,
        which is closed, and abscissas past either end clamp to the end slabs.
        """
        index = np.searchsorted(self.edges, x, side='right') - 1
        return np.clip(index, 0, len(self.slabs) - 1)

    def factors(self, x, y):
        (x, y) = _as_arrays(x, y)
        index = self.slab_index(x)
        s1 = np.empty_like(x)
        s2 = np.empty_like(y)
        for (j, slab) in enumerate(self.slabs):
            mask = index == j
            if not np.any(mask):
                continue
            s1[mask] = (x[mask] + slab.K) / (slab.chi + slab.K)
            s2[mask] = slab.f(y[mask])
        return (s1, s2)

    def sample(self, x, y):
        (s1, s2) = self.factors(x, y)
        return s1 * s2


class LimitCase(ConductivityField):
    variant = 'LimitCase'

    def __init__(self, sampler, name=None, piecewise_constant=False):
        self.sampler = sampler
        self.name = name
        self.piecewise_constant = piecewise_constant

    def sample(self, x, y):
        (x, y) = _as_arrays(x, y)
        return np.asarray(self.sampler(x, y), dtype=float)


class GriddedSampler(object):
    """Bilinear interpolation of sigma samples on a rectilinear grid.

    Points outside the grid's hull are clamped to the nearest cell.
    """

    def __init__(self, xs, ys, values):
        self.xs = np.asarray(xs, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        values = np.asarray(values, dtype=float)
        if values.shape != (len(self.xs), len(self.ys)):
            raise ValidationError("Grid values do not match the grid axes.")
        if len(self.xs) < 2 or len(self.ys) < 2:
            raise ValidationError("A conductivity grid needs at least 2x2 nodes.")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise ValidationError("Grid conductivity values must be positive.")
        self._interpolator = RegularGridInterpolator((self.xs, self.ys), values,
                                                     method='linear')

    def __call__(self, x, y):
        (x, y) = _as_arrays(x, y)
        points = np.stack([np.clip(x, self.xs[0], self.xs[-1]),
                           np.clip(y, self.ys[0], self.ys[-1])], axis=-1)
        return self._interpolator(points.reshape(-1, 2)).reshape(x.shape)

    @classmethod
    def from_csv(cls, path):
        """Read an ``x,y,sigma`` file listing every node of a rectilinear grid."""
        try:
            table = np.genfromtxt(path, delimiter=',', names=True,
                                  encoding='utf-8')
        except (OSError, ValueError) as err:
            raise ValidationError("Could not read conductivity grid %s: %s"
                                  % (path, err))
        if table.dtype.names is None or \
           tuple(n.lower() for n in table.dtype.names) != ('x', 'y', 'sigma'):
            raise ValidationError("Conductivity grid %s must have the header "
                                  "x,y,sigma." % path)
        table = np.atleast_1d(table)
        (xs, ix) = np.unique(table['x'], return_inverse=True)
        (ys, iy) = np.unique(table['y'], return_inverse=True)
        if len(table) != len(xs) * len(ys):
            raise ValidationError("Conductivity grid %s is not a complete "
                                  "rectilinear grid." % path)
        values = np.full((len(xs), len(ys)), np.nan)
        values[ix, iy] = table['sigma']
        if np.any(np.isnan(values)):
            raise ValidationError("Conductivity grid %s repeats a node." % path)
        logger.debug('grid %s: %d x %d nodes', path, len(xs), len(ys))
        return cls(xs, ys, values)


class Disk(namedtuple('Disk', 'cx cy r2 value')):
    """Closed disk (x - cx)^2 + (y - cy)^2 <= r2."""

    def contains(self, x, y):
        return (x - self.cx) ** 2 + (y - self.cy) ** 2 <= self.r2

    def corners(self):
        return []


class Annulus(namedtuple('Annulus', 'cx cy r2_inner r2_outer value')):

    def contains(self, x, y):
        d2 = (x - self.cx) ** 2 + (y - self.cy) ** 2
        return (d2 >= self.r2_inner) & (d2 <= self.r2_outer)

    def corners(self):
        return []


class Polygon(object):
    """Closed polygon; points within ``tol`` of an edge count as inside."""

    def __init__(self, vertices, value, tol=settings.POLYGON_TOL):
        self.vertices = tuple((float(vx), float(vy)) for (vx, vy) in vertices)
        if len(self.vertices) < 3:
            raise ValidationError("A polygon needs at least three vertices.")
        self.value = float(value)
        self.tol = tol
        self._geometry = shapely.Polygon(self.vertices)
        if not self._geometry.is_valid or self._geometry.area == 0:
            raise ValidationError("Polygon vertices do not describe a simple "
                                  "polygon.")
        shapely.prepare(self._geometry)

    def contains(self, x, y):
        points = shapely.points(np.asarray(x, dtype=float),
                                np.asarray(y, dtype=float))
        return shapely.dwithin(self._geometry, points, self.tol)

    def corners(self):
        return list(self.vertices)


class GeometricScene(ConductivityField):
    variant = 'GeometricScene'
    piecewise_constant = True

    def __init__(self, background, shapes, name=None):
        if not background > 0:
            raise ValidationError("Scene background must be positive.")
        for shape in shapes:
            if not shape.value > 0:
                raise ValidationError("Scene shape values must be positive.")
        self.background = float(background)
        self.shapes = tuple(shapes)
        self.name = name

    def sample(self, x, y):
        (x, y) = _as_arrays(x, y)
        out = np.full(x.shape, self.background)
        for shape in self.shapes:
            out[shape.contains(x, y)] = shape.value
        return out

    @property
    def bounds(self):
        values = [self.background] + [s.value for s in self.shapes]
        return (min(values), max(values))

    def corners(self):
        return [c for shape in self.shapes for c in shape.corners()]


def evaluate(field, x, y):
    """sigma(x, y) for any field variant, with domain and positivity checks.
    """
    return field.evaluate(x, y)


def eval_radial_piecewise(r):
    """The ringed radial profile: 100, 30, 20, 15, 30 on half-open rings of
    width 0.2, with the last ring closed at r = 1.
    >>> float(eval_radial_piecewise(0.2))
    30.0
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < -settings.DISK_TOL) or np.any(r > 1.0 + settings.DISK_TOL):
        raise DomainError("Radius must lie in [0, 1].")
    values = np.asarray(RING_VALUES)[np.searchsorted(RING_EDGES, r,
                                                     side='right')]
    return values[()] if values.ndim == 0 else values


def _ring_sampler(x, y):
    # nodes placed on a ring edge must land on the same side on every ray
    r = np.round(np.hypot(x, y), 12)
    return eval_radial_piecewise(np.clip(r, 0.0, 1.0))


def radial_rings():
    return LimitCase(_ring_sampler, name='radial-rings',
                     piecewise_constant=True)


def build_piecewise(samples, slab_edges, K=settings.SLAB_K,
                    interpolant='linear'):
    """Assemble a PiecewiseSeparable field from per-slab line samples.

    ``samples`` holds one ``(chi_j, [(y, sigma), ...])`` entry per slab and
    ``slab_edges`` the M + 1 slab boundaries from -1 to 1.
    """
    edges = [float(e) for e in slab_edges]
    if len(edges) < 2 or len(samples) != len(edges) - 1:
        raise ValidationError("Need one sample line per slab.")
    if abs(edges[0] + 1.0) > settings.DISK_TOL or \
       abs(edges[-1] - 1.0) > settings.DISK_TOL:
        raise ValidationError("Slab edges must run from -1 to 1.")
    if any(b <= a for (a, b) in zip(edges, edges[1:])):
        raise ValidationError("Slab edges must be strictly increasing.")
    if not K > 1.0:
        # x + K must stay away from zero on [-1, 1]
        raise ValidationError("K must exceed 1.")

    slabs = []
    for (j, (chi, points)) in enumerate(samples):
        (lo, hi) = (edges[j], edges[j + 1])
        if not lo <= chi <= hi:
            raise ValidationError("Sampling line %d (x=%g) lies outside its "
                                  "slab [%g, %g]." % (j, chi, lo, hi))
        if len(points) < 2:
            raise ValidationError("Slab %d has fewer than two samples." % j)
        (ys, values) = (np.array([p[0] for p in points], dtype=float),
                        np.array([p[1] for p in points], dtype=float))
        if np.any(np.diff(ys) <= 0):
            raise ValidationError("Samples of slab %d are not strictly "
                                  "increasing in y." % j)
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise ValidationError("Slab %d has a non-positive sample." % j)
        slabs.append(Slab(lo, hi, float(chi), float(K),
                          SlabProfile(ys, values, interpolant)))
    return PiecewiseSeparable(slabs)


def sample_piecewise(sigma, M, q, K=settings.SLAB_K, extent='chord',
                     interpolant='linear'):
    """Approximate ``sigma`` by M equal slabs with q samples on each midline.

    ``extent='chord'`` samples the part of the midline inside the disk,
    ``extent='full'`` samples y over [-1, 1] (for fields defined on the
    whole square).
    """
    if M < 1 or q < 2:
        raise ValidationError("Need M >= 1 slabs and q >= 2 samples per slab.")
    edges = np.linspace(-1.0, 1.0, M + 1)
    samples = []
    for j in range(M):
        chi = 0.5 * (edges[j] + edges[j + 1])
        half = np.sqrt(1.0 - chi * chi) if extent == 'chord' else 1.0
        ys = np.linspace(-half, half, q)
        values = np.asarray(sigma(np.full_like(ys, chi), ys), dtype=float)
        samples.append((chi, list(zip(ys, values))))
    field = build_piecewise(samples, edges, K=K, interpolant=interpolant)
    field.name = 'piecewise M=%d q=%d' % (M, q)
    return field
