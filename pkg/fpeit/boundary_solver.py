"""
Boundary fit of Dirichlet data by orthonormalized formal-power traces.

The raw system holds the real parts of the formal powers on the rim in a
fixed order: slot n is Re Z(n)(1) for n = 0..N and slot N+1+n is
Re Z(n)(i). Slot N+1, Re Z(0)(i), vanishes identically and is never used,
so at most 2N+1 functions enter the modified Gram-Schmidt process. Every
coefficient is reported under its raw slot, which keeps the numbering of a
kept function the same from run to run.
"""

import csv
import logging

import numpy as np

from fpeit import settings
from fpeit.errors import ValidationError
from fpeit.pseudoanalytic import arc_weights

logger = logging.getLogger(__name__)


def raw_traces(table):
    """Re Z(n)(1) then Re Z(n)(i) on the rim, shape (2N+2, P)."""
    return np.concatenate([table.boundary('1').real,
                           table.boundary('i').real])


def excluded_slot(N):
    return N + 1


def slot_name(slot, N):
    """
    >>> slot_name(19, 17)
    'Re Z(1)(i)'
    """
    if slot <= N:
        return 'Re Z(%d)(1)' % slot
    return 'Re Z(%d)(i)' % (slot - N - 1)


def inner_product(f, g, weights):
    """Closed-curve trapezoid rule: sum of f g w over the boundary nodes."""
    (f, g, weights) = (np.asarray(f), np.asarray(g), np.asarray(weights))
    if f.shape[-1] != weights.shape[-1] or g.shape[-1] != weights.shape[-1]:
        raise ValidationError("Boundary functions are sampled on different "
                              "nodes.")
    return np.sum(f * g * weights, axis=-1)


class BoundarySystem(object):
    """Raw traces at the ray endpoints with their arc-length weights."""

    def __init__(self, theta, weights, raw, N):
        self.theta = np.asarray(theta, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self.raw = np.asarray(raw, dtype=float)
        self.N = N
        if self.raw.shape != (2 * N + 2, len(self.theta)):
            raise ValidationError("Raw traces do not match N and the "
                                  "boundary nodes.")

    @property
    def P(self):
        return len(self.theta)

    @property
    def slots(self):
        return [s for s in range(2 * self.N + 2)
                if s != excluded_slot(self.N)]


def assemble(table):
    mesh = table.mesh
    return BoundarySystem(mesh.boundary_angles, mesh.weights,
                          raw_traces(table), table.N)


class OrthonormalBasis(object):
    """u_alpha = transform[alpha] . raw, orthonormal under the weights.

    ``kept`` lists the raw slot of each u_alpha; ``dropped`` pairs each
    rejected slot with its relative residual norm. ``left_out`` holds the
    slots beyond a size limit, which never entered the process.
    """

    def __init__(self, system, functions, transform, kept, dropped,
                 left_out=()):
        self.system = system
        self.functions = functions
        self.transform = transform
        self.kept = kept
        self.dropped = dropped
        self.left_out = list(left_out)

    @property
    def size(self):
        return len(self.kept)

    def gram(self):
        w = self.system.weights
        return np.dot(self.functions * w, self.functions.T)


def degree_order(N):
    """Slots by increasing degree, seed 1 before seed i.

    >>> degree_order(2)
    [0, 1, 4, 2, 5]
    """
    order = [0]
    for n in range(1, N + 1):
        order.extend((n, N + 1 + n))
    return order


def orthonormalize(system, drop_tol=settings.DROP_TOL, limit=None):
    """Modified Gram-Schmidt with one re-orthogonalization pass.

    With ``limit`` only the first ``limit`` slots of ``degree_order`` are
    admitted; the others are reported as left out.
    """
    slots = system.slots
    left_out = []
    if limit is not None:
        admitted = set(degree_order(system.N)[:limit])
        left_out = [s for s in slots if s not in admitted]
        slots = [s for s in slots if s in admitted]
        if left_out:
            logger.info("left out %s", ', '.join(slot_name(s, system.N)
                                                 for s in left_out))
    if system.P < len(slots):
        logger.warning("%d boundary nodes for %d raw functions: some will "
                       "be dropped", system.P, len(slots))
    w = system.weights
    size = len(system.raw)
    functions = []
    transform = []
    kept = []
    dropped = []
    for slot in slots:
        v = system.raw[slot].copy()
        c = np.zeros(size)
        c[slot] = 1.0
        norm0 = np.sqrt(inner_product(v, v, w))
        if norm0 == 0:
            logger.warning("dropped %s: zero trace", slot_name(slot, system.N))
            dropped.append((slot, 0.0))
            continue
        for sweep in range(2):
            for (u, cu) in zip(functions, transform):
                projection = inner_product(v, u, w)
                v -= projection * u
                c -= projection * cu
        norm = np.sqrt(inner_product(v, v, w))
        if norm < drop_tol * norm0:
            logger.warning("dropped %s: residual ratio %.3e",
                           slot_name(slot, system.N), norm / norm0)
            dropped.append((slot, float(norm / norm0)))
            continue
        functions.append(v / norm)
        transform.append(c / norm)
        kept.append(slot)
    if not kept:
        raise ValidationError("Every boundary function was dropped.")
    logger.info("basis of %d functions, %d dropped", len(kept), len(dropped))
    return OrthonormalBasis(system, np.array(functions), np.array(transform),
                            kept, dropped, left_out)


def upsample(values, theta, theta_q):
    """Periodic linear interpolation in theta of one or more traces."""
    values = np.atleast_2d(values)
    out = np.array([np.interp(theta_q, theta, row, period=2 * np.pi)
                    for row in values])
    return out


def uniform_angles(Q):
    return 2 * np.pi * np.arange(Q) / Q


def error_norm(data, fitted, theta=None):
    """sqrt of the closed-curve trapezoid integral of (data - fitted)^2.

    Without ``theta`` the samples are taken to be equally spaced.
    """
    (data, fitted) = (np.asarray(data, dtype=float),
                      np.asarray(fitted, dtype=float))
    if data.shape != fitted.shape:
        raise ValidationError("Data and fit are sampled differently.")
    if theta is None:
        weights = np.full(len(data), 2 * np.pi / len(data))
    else:
        weights = arc_weights(theta)
    residual = data - fitted
    return float(np.sqrt(inner_product(residual, residual, weights)))


class FitResult(object):
    """Coefficients, the fitted trace on the fit nodes and on the error
    points, and the error E.
    """

    def __init__(self, basis, coefficients, data, fitted, theta_q, data_q,
                 fitted_q, config=None):
        self.basis = basis
        self.coefficients = coefficients
        self.data = data
        self.fitted = fitted
        self.theta_q = theta_q
        self.data_q = data_q
        self.fitted_q = fitted_q
        self.E = error_norm(data_q, fitted_q, theta_q)
        self.config = config

    @property
    def alpha(self):
        return list(self.basis.kept)

    @property
    def raw_coefficients(self):
        """The fitted trace as a combination of the raw traces."""
        return np.dot(self.coefficients, self.basis.transform)

    @property
    def residual_norm(self):
        """Discrete error on the fit nodes themselves."""
        residual = self.data - self.fitted
        return float(np.sqrt(inner_product(residual, residual,
                                           self.basis.system.weights)))

    def significant(self, tol=1e-3):
        return [(a, float(b)) for (a, b) in zip(self.alpha, self.coefficients)
                if abs(b) > tol]


def fit(basis, data, Q=settings.ERROR_POINTS, data_fn=None, dense=None,
        config=None):
    """Project boundary data on the basis: b_alpha = <data, u_alpha>.

    The error is measured on Q points. ``dense``, a (theta, raw traces)
    pair from a Q-ray mesh, supplies the traces there; otherwise the raw
    traces are interpolated from the fit nodes. ``data_fn(theta)`` gives the
    data on the error points, else the data are interpolated as well.
    """
    system = basis.system
    data = np.asarray(data, dtype=float)
    if data.shape != (system.P,):
        raise ValidationError("Boundary data has %d values for %d nodes."
                              % (data.size, system.P))
    coefficients = inner_product(basis.functions, data, system.weights)
    fitted = np.dot(coefficients, basis.functions)
    raw_combination = np.dot(coefficients, basis.transform)
    if dense is not None:
        (theta_q, traces_q) = dense
        theta_q = np.asarray(theta_q, dtype=float)
    else:
        if Q < system.P:
            raise ValidationError("Q must be at least the number of rays.")
        theta_q = uniform_angles(Q)
        traces_q = upsample(system.raw, system.theta, theta_q)
    fitted_q = np.dot(raw_combination, traces_q)
    if data_fn is not None:
        data_q = np.asarray(data_fn(theta_q), dtype=float)
    else:
        data_q = upsample(data, system.theta, theta_q)[0]
    return FitResult(basis, coefficients, data, fitted, theta_q, data_q,
                     fitted_q, config)


def reconstruct_interior(table, basis, coefficients):
    """u at every mesh node: the fitted combination of interior traces."""
    table.require_interior()
    raw = np.concatenate([table.Z1.real, table.Zi.real])
    combination = np.dot(coefficients, basis.transform)
    return np.tensordot(combination, raw, axes=1)


def write_coefficients(result, path):
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle)
        writer.writerow(('alpha', 'b'))
        for (alpha, b) in zip(result.alpha, result.coefficients):
            writer.writerow((alpha, repr(float(b))))


def write_boundary_fit(result, path):
    """theta,l,data,fit,residual on the error points (l: arc length)."""
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle)
        writer.writerow(('theta', 'l', 'data', 'fit', 'residual'))
        for (theta, d, f) in zip(result.theta_q, result.data_q,
                                 result.fitted_q):
            writer.writerow(tuple(repr(float(v))
                                  for v in (theta, theta, d, f, d - f)))


def write_interior(mesh, u, path):
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle)
        writer.writerow(('x', 'y', 'u'))
        for (z, value) in zip(mesh.nodes.ravel(), np.ravel(u)):
            writer.writerow(tuple(repr(float(v))
                                  for v in (z.real, z.imag, value)))
