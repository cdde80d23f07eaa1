"""Generating pairs, their characteristic coefficients and the (F,G)-integral.

Everything here lives on a ``RadialMesh``: P straight rays leaving an
interior center z0, each cut into S steps, with the last node of every ray
on the unit circle. Pairs are kept both as callables (so derivatives can be
taken on a small Cartesian stencil around any node) and as their values at
the mesh nodes.

Derivatives use the factorless operators

    d/dz = d/dx - i d/dy,     d/dzbar = d/dx + i d/dy,

with no 1/2 in front. The (F,G)-integral, on the other hand, inverts the
classical derivative, so integrating the (F,G)-derivative of a
pseudoanalytic W gives back *twice* W minus its degree-zero part.
"""

import logging
from collections import namedtuple

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid
from scipy.interpolate import make_interp_spline

from fpeit import settings
from fpeit.errors import NumericalError, ValidationError

logger = logging.getLogger(__name__)

CharacteristicCoefficients = namedtuple('CharacteristicCoefficients',
                                        'A B a b')


def radial_parameters(S, ratio=1.0):
    """0 = t_0 < ... < t_S = 1, uniform when ratio == 1, otherwise steps
    shrinking geometrically by ``ratio`` toward the rim.
    >>> radial_parameters(4).tolist()
    [0.0, 0.25, 0.5, 0.75, 1.0]
    """
    if S < 1:
        raise ValidationError("A ray needs at least one step.")
    if ratio == 1.0:
        return np.linspace(0.0, 1.0, S + 1)
    if not ratio > 0:
        raise ValidationError("Radial ratio must be positive.")
    steps = ratio ** np.arange(S)
    t = np.concatenate([[0.0], np.cumsum(steps)])
    t /= t[-1]
    t[-1] = 1.0
    return t


def arc_weights(theta):
    """Closed-curve trapezoid weights: half the sum of the two arc gaps
    adjacent to each boundary point (angles in circular order).
    >>> arc_weights(np.array([0.0, np.pi])).tolist() == [np.pi, np.pi]
    True
    """
    theta = np.asarray(theta, dtype=float)
    if len(theta) == 1:
        return np.array([2 * np.pi])
    gaps = np.mod(np.diff(np.append(theta, theta[0])), 2 * np.pi)
    return 0.5 * (gaps + np.roll(gaps, 1))


class RadialMesh(object):
    """Rays from ``center`` at the given angles, sampled at parameters t.

    Node (r, s) is center + t_s * R_r * exp(i angle_r), where R_r is the
    distance from the center to the unit circle along ray r.
    """

    def __init__(self, angles, t, center=0j):
        self.center = complex(center)
        if abs(self.center) >= 1.0:
            raise ValidationError("Mesh center must lie strictly inside the "
                                  "unit disk.")
        self.angles = np.asarray(angles, dtype=float)
        self.t = np.asarray(t, dtype=float)
        if self.angles.ndim != 1 or len(self.angles) < 1:
            raise ValidationError("Mesh needs at least one ray.")
        if self.t[0] != 0.0 or abs(self.t[-1] - 1.0) > settings.DISK_TOL or \
           np.any(np.diff(self.t) <= 0):
            raise ValidationError("Radial parameters must increase strictly "
                                  "from 0 to 1.")
        direction = np.exp(1j * self.angles)
        # |z0 + R e^{ia}| = 1
        proj = (np.conj(self.center) * direction).real
        self.reach = -proj + np.sqrt(proj ** 2 + 1.0 - abs(self.center) ** 2)
        self.direction = direction
        self.nodes = self.center + np.outer(self.reach * direction, self.t)
        # pin the rim exactly onto the circle
        self.nodes[:, -1] /= np.abs(self.nodes[:, -1])
        self.nodes[:, 0] = self.center

    @classmethod
    def uniform(cls, P, S, center=0j, ratio=1.0, snap_points=()):
        """P equally spaced rays; one ray is turned onto each snap point."""
        if P < 1:
            raise ValidationError("Mesh needs at least one ray.")
        angles = 2 * np.pi * np.arange(P) / P
        angles = snap_angles(angles, snap_points, center)
        return cls(angles, radial_parameters(S, ratio), center)

    @property
    def P(self):
        return len(self.angles)

    @property
    def S(self):
        return len(self.t) - 1

    @property
    def x(self):
        return self.nodes.real

    @property
    def y(self):
        return self.nodes.imag

    @property
    def boundary(self):
        return self.nodes[:, -1]

    @property
    def boundary_angles(self):
        return np.mod(np.angle(self.boundary), 2 * np.pi)

    @property
    def weights(self):
        return arc_weights(self.boundary_angles)

    @property
    def equally_spaced(self):
        """True when the ray angles are 2 pi / P apart."""
        gaps = np.mod(np.diff(np.append(self.angles, self.angles[0])),
                      2 * np.pi)
        return bool(np.allclose(gaps, 2 * np.pi / self.P, rtol=0,
                                atol=settings.DISK_TOL))

    def ray_element(self, r=None):
        """dz/dt along ray r (all rays when r is None)."""
        element = self.reach * self.direction
        return element if r is None else element[np.asarray(r)]

    def subset(self, rays):
        return RadialMesh(self.angles[list(rays)], self.t, self.center)

    def __repr__(self):
        return '<RadialMesh P=%d S=%d center=%s>' % (self.P, self.S,
                                                     self.center)


def snap_angles(angles, points, center=0j):
    """Move the nearest free ray onto the direction of each point, keeping
    the angles sorted.
    """
    angles = np.array(angles, dtype=float)
    taken = set()
    for point in points:
        offset = complex(*point) - center if isinstance(point, tuple) \
            else complex(point) - center
        if abs(offset) < settings.DISK_TOL:
            continue
        target = np.mod(np.angle(offset), 2 * np.pi)
        gap = np.abs(np.angle(np.exp(1j * (angles - target))))
        for index in np.argsort(gap):
            if index not in taken:
                break
        else:
            raise ValidationError("More snap points than rays.")
        taken.add(int(index))
        angles[index] = target
    angles = np.sort(np.mod(angles, 2 * np.pi))
    if np.any(np.diff(angles) <= 0):
        raise ValidationError("Two snapped rays coincide; use more rays.")
    return angles


def _outside(x, y):
    return x * x + y * y > 1.0 + settings.DISK_TOL


def _axis_derivative(fn, x, y, h, along_x):
    def at(k):
        return fn(x + k * h, y) if along_x else fn(x, y + k * h)

    (xp, yp) = (x + h, y) if along_x else (x, y + h)
    (xm, ym) = (x - h, y) if along_x else (x, y - h)
    (plus_out, minus_out) = (_outside(xp, yp), _outside(xm, ym))
    (f_plus, f_minus) = (at(1), at(-1))
    result = (f_plus - f_minus) / (2 * h)
    backward = plus_out & ~minus_out
    forward = minus_out & ~plus_out
    if np.any(backward) or np.any(forward):
        f0 = at(0)
        if np.any(backward):
            one_sided = (3 * f0 - 4 * f_minus + at(-2)) / (2 * h)
            result = np.where(backward, one_sided, result)
        if np.any(forward):
            one_sided = (-3 * f0 + 4 * f_plus - at(2)) / (2 * h)
            result = np.where(forward, one_sided, result)
    return result


def partials(fn, x, y, h=settings.STENCIL_H):
    """(d/dx, d/dy) of a vectorised callable by second-order differences.

    Stencil points leaving the closed disk switch that direction to a
    one-sided three-point formula; when both sides leave it (tangential
    direction at the rim) the centered formula is kept, the samplers being
    total a step past the rim.
    """
    (x, y) = np.broadcast_arrays(np.asarray(x, dtype=float),
                                 np.asarray(y, dtype=float))
    return (_axis_derivative(fn, x, y, h, True),
            _axis_derivative(fn, x, y, h, False))


def wirtinger(fn, x, y, h=settings.STENCIL_H):
    """(d/dz, d/dzbar) without the classical 1/2 factor."""
    (dx, dy) = partials(fn, x, y, h)
    return (dx - 1j * dy, dx + 1j * dy)


def _periodic_theta_derivative(values, angles):
    h1 = np.mod(angles - np.roll(angles, 1), 2 * np.pi)
    h2 = np.mod(np.roll(angles, -1) - angles, 2 * np.pi)
    shape = (-1,) + (1,) * (values.ndim - 1)
    (h1, h2) = (h1.reshape(shape), h2.reshape(shape))
    return (-h2 / (h1 * (h1 + h2)) * np.roll(values, 1, axis=0)
            + (h2 - h1) / (h1 * h2) * values
            + h1 / (h2 * (h1 + h2)) * np.roll(values, -1, axis=0))


def _spectral_theta_derivative(values):
    P = values.shape[0]
    k = np.fft.fftfreq(P, 1.0 / P)
    if P % 2 == 0:
        k[P // 2] = 0
    k = k.reshape((-1,) + (1,) * (values.ndim - 1))
    out = np.fft.ifft(1j * k * np.fft.fft(values, axis=0), axis=0)
    return out if np.iscomplexobj(values) else out.real


def _spline_t_derivative(values, t):
    def derivative(part):
        spline = make_interp_spline(t, part, k=5, axis=1)
        return spline.derivative()(t)

    if np.iscomplexobj(values):
        return derivative(values.real) + 1j * derivative(values.imag)
    return derivative(values)


def mesh_partials(values, mesh, high_order=True):
    """(d/dx, d/dy) of a field sampled on the mesh nodes.

    Derivatives are taken in the (angle, t) coordinates of the mesh and
    mapped back through the Jacobian of the node map; the center row, where
    that map degenerates, is NaN.

    With ``high_order`` (for smooth fields) the angle derivative is spectral
    when the rays are equally spaced and the t derivative comes from a
    quintic interpolating spline; otherwise both are second-order
    differences, which keep a jump from spreading beyond its neighbours.
    """
    values = np.asarray(values)
    if values.shape != mesh.nodes.shape:
        raise ValidationError("Field does not match the mesh shape.")
    if mesh.P < 3 or mesh.S < 2:
        raise ValidationError("Mesh too coarse for mesh derivatives.")
    if high_order and mesh.S >= 5:
        d_t = lambda f: _spline_t_derivative(f, mesh.t)
    else:
        d_t = lambda f: np.gradient(f, mesh.t, axis=1, edge_order=2)
    if high_order and mesh.equally_spaced:
        d_a = _spectral_theta_derivative
    else:
        d_a = lambda f: _periodic_theta_derivative(f, mesh.angles)
    (f_t, f_a) = (d_t(values), d_a(values))
    (z_t, z_a) = (d_t(mesh.nodes), d_a(mesh.nodes))
    (x_t, y_t, x_a, y_a) = (z_t.real, z_t.imag, z_a.real, z_a.imag)
    det = x_a * y_t - y_a * x_t
    with np.errstate(divide='ignore', invalid='ignore'):
        dx = (f_a * y_t - f_t * y_a) / det
        dy = (x_a * f_t - x_t * f_a) / det
    dx[:, 0] = np.nan
    dy[:, 0] = np.nan
    return (dx, dy)


def mesh_wirtinger(values, mesh, high_order=True):
    (dx, dy) = mesh_partials(values, mesh, high_order)
    return (dx - 1j * dy, dx + 1j * dy)


class GeneratingPairField(object):
    """A generating pair (F, G): callables plus their values on a mesh.

    Construction checks Im(conj(F) G) > 0 at every node.
    """

    def __init__(self, mesh, F_fn, G_fn):
        self.mesh = mesh
        self.F_fn = F_fn
        self.G_fn = G_fn
        self.F = np.asarray(F_fn(mesh.x, mesh.y), dtype=complex)
        self.G = np.asarray(G_fn(mesh.x, mesh.y), dtype=complex)
        if not (np.all(np.isfinite(self.F)) and np.all(np.isfinite(self.G))):
            raise ValidationError("Generating pair has non-finite values.")
        if np.any(self.condition <= 0):
            raise ValidationError("Im(conj(F) G) must be positive at every "
                                  "node.")

    @property
    def condition(self):
        return (np.conj(self.F) * self.G).imag

    def on(self, mesh):
        """The same pair sampled on another mesh."""
        return GeneratingPairField(mesh, self.F_fn, self.G_fn)


class _Reciprocal(object):
    """z -> i / p(z)."""

    def __init__(self, p):
        self.p = p

    def __call__(self, x, y):
        return 1j / np.asarray(self.p(x, y), dtype=float)


class _Complex(object):

    def __init__(self, p, factor=1.0):
        self.p = p
        self.factor = factor

    def __call__(self, x, y):
        return self.factor * np.asarray(self.p(x, y), dtype=complex)


def pair_from_p(p, mesh):
    """(F, G) = (p, i/p) for a positive callable p; Im(conj(F) G) = 1."""
    values = np.asarray(p(mesh.x, mesh.y), dtype=float)
    if not np.all(np.isfinite(values)) or np.any(values <= 0):
        raise ValidationError("p must be positive and finite on the mesh.")
    return GeneratingPairField(mesh, _Complex(p), _Reciprocal(p))


def adjoint(pair):
    """(F*, G*) = (-iF, -iG)."""
    return GeneratingPairField(pair.mesh, _Complex(pair.F_fn, -1j),
                               _Complex(pair.G_fn, -1j))


def characteristic_coefficients(pair, h=settings.STENCIL_H):
    """A, B, a, b of the pair at the mesh nodes, derivatives by stencil."""
    (x, y) = (pair.mesh.x, pair.mesh.y)
    (F, G) = (pair.F, pair.G)
    (dF, dF_bar) = wirtinger(pair.F_fn, x, y, h)
    (dG, dG_bar) = wirtinger(pair.G_fn, x, y, h)
    den = F * np.conj(G) - G * np.conj(F)
    if np.any(np.abs(den) < np.finfo(float).tiny):
        raise NumericalError("Degenerate generating pair: F conj(G) - "
                             "G conj(F) vanishes.")
    A = (np.conj(F) * dG - np.conj(G) * dF) / den
    a = -(np.conj(F) * dG_bar - np.conj(G) * dF_bar) / den
    B = (F * dG - G * dF) / den
    b = -(G * dF_bar - F * dG_bar) / den
    return CharacteristicCoefficients(A, B, a, b)


def cumulative_integral(values, t, rule=settings.QUADRATURE):
    """Running integral over t along the last axis, starting from 0."""
    values = np.asarray(values)
    if rule == 'trapezoid':
        return cumulative_trapezoid(values, t, axis=-1, initial=0)
    if rule == 'simpson':
        if len(t) < 3:
            raise ValidationError("Simpson's rule needs at least two steps.")
        real = cumulative_simpson(values.real, x=t, axis=-1, initial=0)
        if np.iscomplexobj(values):
            return real + 1j * cumulative_simpson(values.imag, x=t, axis=-1,
                                                  initial=0)
        return real
    raise ValidationError("Unknown quadrature rule %r." % rule)


def contour_integral(W, mesh, ray=None, rule=settings.QUADRATURE):
    """Ordinary complex integral of W dz from the center along each ray.

    ``ray`` selects one ray (an int), several (a sequence) or all (None).
    """
    element = np.asarray(mesh.ray_element(ray))
    if element.ndim == 1:
        element = element[:, None]
    return element * cumulative_integral(W, mesh.t, rule)


def fg_integral(W, pair, ray=None, rule=settings.QUADRATURE):
    """The (F,G)-integral of W from the center, cumulative along rays:

        F Re(int G* W dz) + G Re(int F* W dz)

    ``W`` holds node values for every ray, or only for the rays selected
    by ``ray``.
    """
    W = np.asarray(W, dtype=complex)
    (F, G) = (pair.F, pair.G)
    if ray is not None:
        (F, G) = (F[np.asarray(ray)], G[np.asarray(ray)])
    if W.shape != F.shape:
        raise ValidationError("W does not match the ray sampling.")
    (F_star, G_star) = (-1j * F, -1j * G)
    mesh = pair.mesh
    through_g = contour_integral(G_star * W, mesh, ray, rule).real
    through_f = contour_integral(F_star * W, mesh, ray, rule).real
    return F * through_g + G * through_f


def _node_values_and_dz(W, mesh, h, high_order=True):
    if callable(W):
        values = np.asarray(W(mesh.x, mesh.y), dtype=complex)
        (dz, dz_bar) = wirtinger(W, mesh.x, mesh.y, h)
    else:
        values = np.asarray(W, dtype=complex)
        (dz, dz_bar) = mesh_wirtinger(values, mesh, high_order)
    return (values, dz, dz_bar)


def fg_derivative(W, pair, h=settings.STENCIL_H):
    """dW/dz - A W - B conj(W) at the mesh nodes.

    ``W`` is a callable (Cartesian stencil of spacing h) or an array of node
    values (mesh differences, NaN on the center row).
    """
    (values, dz, _) = _node_values_and_dz(W, pair.mesh, h)
    coeffs = characteristic_coefficients(pair, h)
    return dz - coeffs.A * values - coeffs.B * np.conj(values)


def vekua_residual(W, p, mesh, h=settings.STENCIL_H, high_order=True):
    """|dW/dzbar - (dp/dzbar / p) conj(W)| per node.

    ``high_order`` picks the mesh derivative for array W (see
    ``mesh_partials``).
    """
    (values, _, dz_bar) = _node_values_and_dz(W, mesh, h, high_order)
    p_values = np.asarray(p(mesh.x, mesh.y), dtype=float)
    (_, dp_bar) = wirtinger(p, mesh.x, mesh.y, h)
    return np.abs(dz_bar - dp_bar / p_values * np.conj(values))


class _SeparableRoot(object):
    """sqrt(sigma2/sigma1) (even members) or sqrt(sigma1 sigma2) (odd)."""

    def __init__(self, field, odd):
        self.field = field
        self.odd = odd

    def __call__(self, x, y):
        (s1, s2) = self.field.factors(x, y)
        return np.sqrt(s1 * s2) if self.odd else np.sqrt(s2 / s1)


class _FieldRoot(object):

    def __init__(self, field):
        self.field = field

    def __call__(self, x, y):
        return np.sqrt(self.field.sample(x, y))


class GeneratingSequence(object):
    """Periodic sequence of pairs (p_m, i/p_m), m taken modulo the period."""

    def __init__(self, p_fns, name=None):
        self.p_fns = tuple(p_fns)
        if len(self.p_fns) not in (1, 2):
            raise ValidationError("Only periods 1 and 2 are supported.")
        self.name = name

    @property
    def period(self):
        return len(self.p_fns)

    def p_for(self, m):
        return self.p_fns[m % self.period]

    def pair_for(self, m, mesh):
        return pair_from_p(self.p_for(m), mesh)


def build_sequence(field):
    """Generating sequence of a conductivity field.

    Separable fields (slab-wise for piecewise ones) give period 2 with
    pair 0 = (p2/p1, i p1/p2) and pair 1 = (p1 p2, i/(p1 p2)), p_i =
    sqrt(sigma_i). Other fields are treated as the limit case: period 1 with
    p = sqrt(sigma). A constant field collapses to period 1.
    """
    if field.separable:
        even = _SeparableRoot(field, odd=False)
        if field.is_constant:
            return GeneratingSequence([even], name=field.name)
        return GeneratingSequence([even, _SeparableRoot(field, odd=True)],
                                  name=field.name)
    return GeneratingSequence([_FieldRoot(field)], name=field.name)


def successor_residual(sequence, mesh, m=0, h=settings.STENCIL_H, mask=None):
    """max |B(pair m+1) + b(pair m)| over the mesh nodes (those selected by
    the boolean ``mask`` when given)."""
    current = characteristic_coefficients(sequence.pair_for(m, mesh), h)
    following = characteristic_coefficients(sequence.pair_for(m + 1, mesh), h)
    residual = np.abs(following.B + current.b)
    if mask is not None:
        residual = residual[np.asarray(mask, dtype=bool)]
    return float(np.max(residual)) if residual.size else 0.0
