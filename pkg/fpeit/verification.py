"""Exact solutions and a finite-difference oracle for div(sigma grad u) = 0."""

import logging

import numpy as np

from fpeit import settings
from fpeit.conductivity import AnalyticSeparable, ConstantField
from fpeit.errors import ValidationError

logger = logging.getLogger(__name__)

SQRT3 = np.sqrt(3.0)


class ExactCase(object):
    """A conductivity with a known potential u solving the equation."""

    def __init__(self, name, sigma, u, params=None, notes=''):
        self.name = name
        self.sigma = sigma
        self.u = u
        self.params = params or {}
        self.notes = notes

    def boundary_data(self, theta):
        theta = np.asarray(theta, dtype=float)
        return self.u(np.cos(theta), np.sin(theta))

    def __repr__(self):
        return '<ExactCase %s %s>' % (self.name, self.params)


class _SinusoidalPotential(object):

    def __init__(self, omega, branch):
        self.omega = omega
        self.branch = branch

    def __call__(self, x, y):
        a = self.omega * np.asarray(x, dtype=float) / 2
        b = self.omega * np.asarray(y, dtype=float) / 2
        if self.branch == 'continuous':
            first = np.arctan2(np.sin(a), SQRT3 * np.cos(a))
            second = np.arctan2(np.cos(b) + 2 * np.sin(b), SQRT3 * np.cos(b))
        else:
            first = np.arctan(np.tan(a) / SQRT3)
            second = np.arctan((1 + 2 * np.tan(b)) / SQRT3)
        return 2 / SQRT3 * (first + second)


def sinusoidal_case(omega, branch='continuous', eps=1e-6):
    """sigma = (2 + cos wx)(2 + sin wy) and its separable potential.

    The ``continuous`` branch writes arctan(tan(.)) through arctan2 and so
    stays finite and continuous up to w = pi on the closed disk. The
    ``principal`` branch uses the plain formula and, at w = pi, backs off
    to w = pi - eps.
    """
    if not 0 < omega <= np.pi:
        raise ValidationError("omega must lie in (0, pi].")
    if branch not in ('continuous', 'principal'):
        raise ValidationError("Unknown branch %r." % branch)
    if branch == 'principal':
        omega = min(omega, np.pi - eps)
    sigma = AnalyticSeparable(lambda x: 2 + np.cos(omega * x),
                              lambda y: 2 + np.sin(omega * y),
                              name='sinusoidal')
    return ExactCase('sinusoidal', sigma, _SinusoidalPotential(omega, branch),
                     {'omega': omega, 'branch': branch})


def lorentzian_case(beta):
    """sigma = 1/((x - b)^2 + 0.1) * 1/(y^2 + 0.1), u cubic."""
    beta = float(beta)

    def u(x, y):
        x = np.asarray(x, dtype=float) - beta
        y = np.asarray(y, dtype=float)
        return (x ** 3 + y ** 3) / 3 + 0.1 * (x + y)

    sigma = AnalyticSeparable(lambda x: 1 / ((x - beta) ** 2 + 0.1),
                              lambda y: 1 / (y ** 2 + 0.1),
                              name='lorentzian %g' % beta)
    return ExactCase('lorentzian', sigma, u, {'beta': beta})


def harmonic_case(n, value=1.0):
    """Constant conductivity with u = Re z^n."""
    if n < 0:
        raise ValidationError("Degree could not be negative.")

    def u(x, y):
        z = np.asarray(x, dtype=float) + 1j * np.asarray(y, dtype=float)
        return (z ** n).real

    return ExactCase('harmonic', ConstantField(value), u, {'n': n})


def random_interior_points(count, seed=settings.VERIFY_SEED, radius=0.95):
    """``count`` points uniformly distributed over the disk |z| <= radius."""
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.random(count))
    theta = 2 * np.pi * rng.random(count)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def divergence_residual(sigma, u, pts, h=settings.STENCIL_H):
    """max |sigma lap(u) + grad(sigma).grad(u)| by central differences.

    Points whose stencil comes closer than 2h to the rim are skipped.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    (x, y) = (pts[:, 0], pts[:, 1])
    inside = np.hypot(x, y) <= 1.0 - 2 * h
    if not np.all(inside):
        logger.warning("skipped %d points closer than 2h to the boundary",
                       np.count_nonzero(~inside))
    (x, y) = (x[inside], y[inside])
    if len(x) == 0:
        raise ValidationError("No sample point left inside the disk.")
    u0 = u(x, y)
    (uxp, uxm) = (u(x + h, y), u(x - h, y))
    (uyp, uym) = (u(x, y + h), u(x, y - h))
    laplacian = (uxp + uxm + uyp + uym - 4 * u0) / (h * h)
    (ux, uy) = ((uxp - uxm) / (2 * h), (uyp - uym) / (2 * h))
    sx = (sigma(x + h, y) - sigma(x - h, y)) / (2 * h)
    sy = (sigma(x, y + h) - sigma(x, y - h)) / (2 * h)
    residual = sigma(x, y) * laplacian + sx * ux + sy * uy
    return float(np.max(np.abs(residual)))


def _same_as_neighbours(values):
    same = (values == np.roll(values, 1, axis=0)) & \
        (values == np.roll(values, -1, axis=0))
    same[:, 1:] &= values[:, 1:] == values[:, :-1]
    same[:, :-1] &= values[:, :-1] == values[:, 1:]
    return same


def smooth_nodes(field, mesh, h=settings.STENCIL_H):
    """Mesh nodes away from the jumps of a field.

    Piecewise-constant fields keep the nodes whose ray and step neighbours
    share their value; slab fields keep the nodes whose neighbours lie in
    the same slab and that are more than 2h from a slab edge. Every node
    counts for smooth fields.
    """
    if hasattr(field, 'slab_index'):
        inner = field.edges[1:-1]
        keep = _same_as_neighbours(field.slab_index(mesh.x))
        if len(inner):
            gap = np.min(np.abs(mesh.x[..., None] - inner), axis=-1)
            keep &= gap > 2 * h
        return keep
    if not field.piecewise_constant:
        return np.ones(mesh.nodes.shape, dtype=bool)
    return _same_as_neighbours(field.sample(mesh.x, mesh.y))
