"""
Formal powers Z(n)(1, z; z0) and Z(n)(i, z; z0) on a radial mesh.

A formal power of degree n is reached from a degree-zero seed by n
successive (F,G)-integrals, each one multiplied by the degree it produces.
With a generating sequence of period k the chain started at pair j passes
through Z_{(j - i) mod k}(i) after i steps, so the k chains started at
j = 0 .. k-1 together produce Z_0(n) for every n <= N. Rays never talk to
each other, which is what lets ``build_table`` hand buckets of rays to a
worker pool.
"""

import csv
import logging

import numpy as np

from fpeit import settings
from fpeit.errors import NumericalError, ValidationError
from fpeit.parallel import flatten, map_buckets
from fpeit.pseudoanalytic import fg_integral, vekua_residual

logger = logging.getLogger(__name__)

SEEDS = (1 + 0j, 1j)
SEED_NAMES = ('1', 'i')
POWERS_HEADER = ('degree', 'seed', 'ray', 'step', 'x', 'y', 'ReZ', 'ImZ')


def degree_zero_coefficients(pair, a0, z0=None):
    """Real (lambda, mu) with lambda F(z0) + mu G(z0) = a0."""
    z0 = pair.mesh.center if z0 is None else complex(z0)
    F0 = complex(pair.F_fn(np.float64(z0.real), np.float64(z0.imag)))
    G0 = complex(pair.G_fn(np.float64(z0.real), np.float64(z0.imag)))
    det = (np.conj(F0) * G0).imag
    if not det > 0:
        raise NumericalError("Degree-zero system is singular at z0=%s: "
                             "Im(conj(F) G) = %g." % (z0, det))
    matrix = np.array([[F0.real, G0.real], [F0.imag, G0.imag]])
    a0 = complex(a0)
    (lam, mu) = np.linalg.solve(matrix, [a0.real, a0.imag])
    return (float(lam), float(mu))


def degree_zero(pair, a0, z0=None):
    """lambda F + mu G over the whole mesh; equals a0 at z0."""
    z0 = pair.mesh.center if z0 is None else complex(z0)
    (lam, mu) = degree_zero_coefficients(pair, a0, z0)
    values = lam * pair.F + mu * pair.G
    if z0 == pair.mesh.center:
        values[:, 0] = a0
    return values


class FormalPowerTable(object):
    """Z1[n], Zi[n] for n = 0..N, each of shape (P, S+1).

    Tables built with ``boundary_only`` keep just the rim column, shape
    (P, 1), which is all the boundary fit needs.
    """

    def __init__(self, mesh, N, Z1, Zi, starts, rule, boundary_only=False):
        self.mesh = mesh
        self.N = N
        self.Z1 = Z1
        self.Zi = Zi
        # (seed name, chain start) -> (lambda, mu)
        self.starts = starts
        self.rule = rule
        self.boundary_only = boundary_only

    @property
    def center(self):
        return self.mesh.center

    def power(self, n, seed='1'):
        if not 0 <= n <= self.N:
            raise ValidationError("Degree %d is outside the table (N=%d)."
                                  % (n, self.N))
        return (self.Z1 if seed == '1' else self.Zi)[n]

    def boundary(self, seed='1'):
        """Rim values of every degree, shape (N+1, P)."""
        return (self.Z1 if seed == '1' else self.Zi)[:, :, -1]

    def require_interior(self):
        if self.boundary_only:
            raise ValidationError("Table was built for the boundary only.")

    def __repr__(self):
        return '<FormalPowerTable N=%d %r>' % (self.N, self.mesh)


def _last_degree(N, j, k):
    """Largest degree <= N reached by the chain started at pair j."""
    return N - ((N - j) % k)


def _check_finite(values, degree, rays):
    bad = ~np.isfinite(values)
    if np.any(bad):
        (r, s) = np.argwhere(bad)[0]
        raise NumericalError("Formal power of degree %d is not finite at "
                             "ray %d, step %d." % (degree, rays[r], s))


def _chain(pairs, start, a0, rays, last, rule, keep):
    """Yield (degree, values on ``rays``) along one chain of integrals."""
    k = len(pairs)
    (lam, mu) = start
    j = last % k
    W = lam * pairs[j].F[rays] + mu * pairs[j].G[rays]
    W[:, 0] = a0
    yield (0, W)
    for i in range(1, last + 1):
        W = i * fg_integral(W, pairs[(j - i) % k], rays, rule)
        _check_finite(W, i, rays)
        if keep(i):
            yield (i, W)


def _build_rays(pairs, starts, N, rule, boundary_only, rays):
    rays = np.asarray(rays)
    k = len(pairs)
    columns = 1 if boundary_only else pairs[0].mesh.S + 1
    out = np.empty((2, N + 1, len(rays), columns), dtype=complex)
    for (index, (seed, name)) in enumerate(zip(SEEDS, SEED_NAMES)):
        for j in range(min(k, N + 1)):
            last = _last_degree(N, j, k)
            keep = lambda i, j=j: (j - i) % k == 0
            for (degree, W) in _chain(pairs, starts[(name, j)], seed, rays,
                                      last, rule, keep):
                if keep(degree):
                    out[index, degree] = W[:, -columns:]
            logger.debug("chain seed=%s start=%d rays %d..%d done", name, j,
                         rays[0], rays[-1])
    return out


def build_table(sequence, mesh, N, rule=settings.QUADRATURE,
                threads=settings.THREADS, boundary_only=False):
    """Formal powers Z_0(n)(1, z; z0) and Z_0(n)(i, z; z0) for n <= N."""
    if N < 0:
        raise ValidationError("Degree N could not be negative.")
    k = sequence.period
    pairs = [sequence.pair_for(m, mesh) for m in range(k)]
    starts = {}
    for (seed, name) in zip(SEEDS, SEED_NAMES):
        for j in range(k):
            starts[(name, j)] = degree_zero_coefficients(pairs[j], seed)

    def work(rays):
        return _build_rays(pairs, starts, N, rule, boundary_only, rays)

    blocks = map_buckets(work, range(mesh.P), threads)
    values = np.concatenate(blocks, axis=2)
    logger.info("built formal powers up to degree %d on %r", N, mesh)
    return FormalPowerTable(mesh, N, values[0], values[1], starts, rule,
                            boundary_only)


def formal_power(sequence, mesh, n, a0, rule=settings.QUADRATURE):
    """Z_0(n)(a0, z; z0) on every ray for an arbitrary complex seed."""
    if n < 0:
        raise ValidationError("Degree n could not be negative.")
    k = sequence.period
    pairs = [sequence.pair_for(m, mesh) for m in range(k)]
    start = degree_zero_coefficients(pairs[n % k], a0)
    rays = np.arange(mesh.P)
    for (degree, W) in _chain(pairs, start, complex(a0), rays, n, rule,
                              lambda i: i == n):
        if degree == n:
            return W


def pseudoanalyticity_check(table, p, h=settings.STENCIL_H, mask=None,
                            threads=settings.THREADS, high_order=True):
    """Relative Vekua residual of every Z_0(n), shape (2, N+1) (seed 1,
    seed i).

    ``p`` is the pair-0 function of the sequence. Only nodes strictly
    between the center and the rim are used, further restricted by the
    boolean ``mask`` when given (e.g. to stay away from discontinuities).
    The max residual of degree n is divided by max(n, 1) max|Z_0(n)| over
    the same nodes, the size of the derivative of z^n, so one threshold
    serves every degree. ``high_order`` is passed on to the mesh
    derivatives; leave it off for fields with jumps.
    """
    table.require_interior()
    mesh = table.mesh
    nodes = np.zeros(mesh.nodes.shape, dtype=bool)
    nodes[:, 1:-1] = True
    if mask is not None:
        nodes &= np.asarray(mask, dtype=bool)
    if not np.any(nodes):
        raise ValidationError("No mesh node left to check.")
    powers = (table.Z1, table.Zi)

    def relative(index, n):
        W = powers[index][n]
        residual = vekua_residual(W, p, mesh, h, high_order)[nodes]
        scale = max(n, 1) * np.max(np.abs(W[nodes]))
        return np.max(residual) / scale if scale > 0 else np.max(residual)

    def work(jobs):
        return [relative(index, n) for (index, n) in jobs]

    jobs = [(index, n) for index in range(2) for n in range(table.N + 1)]
    values = list(flatten(map_buckets(work, jobs, threads)))
    return np.array(values, dtype=float).reshape(2, table.N + 1)


def write_powers(table, path):
    """Dump every stored value as degree,seed,ray,step,x,y,ReZ,ImZ rows."""
    mesh = table.mesh
    steps = [mesh.S] if table.boundary_only else range(mesh.S + 1)
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle)
        writer.writerow(POWERS_HEADER)
        for (name, Z) in zip(SEED_NAMES, (table.Z1, table.Zi)):
            for n in range(table.N + 1):
                for r in range(mesh.P):
                    for (column, s) in enumerate(steps):
                        node = mesh.nodes[r, s]
                        value = Z[n, r, column]
                        writer.writerow((n, name, r, s) + tuple(
                            repr(float(v)) for v in (node.real, node.imag,
                                                     value.real, value.imag)))
