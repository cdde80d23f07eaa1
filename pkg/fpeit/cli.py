#!/usr/bin/env python
#-*- coding: utf-8 -*-

"""Solve the Dirichlet problem of the conductivity equation on the unit disk.

The program reads a JSON config naming a conductivity, boundary data and
the sizes of the numerical experiment, then:

1. picks the generating sequence of the conductivity (period two for
   separable fields, one otherwise),
2. builds the formal powers Z(n)(1) and Z(n)(i), n <= N, along P rays
   from the center by repeated (F,G)-integration,
3. orthonormalizes the real parts of their boundary traces,
4. projects the boundary data on that basis and measures the error on Q
   boundary points.

``solve`` writes ``coefficients.csv``, ``boundary_fit.csv`` and
``report.json`` (plus ``interior.csv`` and ``powers.csv`` on request) to
the output directory. ``verify`` checks the building blocks against
independent finite-difference oracles and writes ``verify.json``.
``powers`` only dumps the formal powers.

Exit status: 0 on success, 1 when a verify check breaches its threshold,
2 for bad input, 3 when the numerics fail.
"""

import argparse
import json
import logging
import os
import sys
import time
from collections import namedtuple

import numpy as np

from fpeit import settings
from fpeit.boundary_solver import assemble, fit, orthonormalize, raw_traces, \
    reconstruct_interior, slot_name, write_boundary_fit, write_coefficients, \
    write_interior
from fpeit.config import boundary_function, build_conductivity, build_mesh, \
    exact_case, load_config
from fpeit.errors import NumericalError, ValidationError
from fpeit.formal_powers import SEED_NAMES, build_table, \
    pseudoanalyticity_check, write_powers
from fpeit.pseudoanalytic import build_sequence, successor_residual
from fpeit.verification import divergence_residual, random_interior_points, \
    smooth_nodes

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_BREACH = 1
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

Solution = namedtuple('Solution', 'field sequence mesh table basis fit '
                                  'interior timings')


class _Stopwatch(object):
    """Records the wall time of named pipeline stages."""

    def __init__(self):
        self.timings = {}

    def __call__(self, stage, func, *args, **kwargs):
        start = time.perf_counter()
        result = func(*args, **kwargs)
        self.timings[stage] = time.perf_counter() - start
        logger.info("%s took %.3f s", stage, self.timings[stage])
        return result


def solve(config):
    """Run the whole pipeline in memory and return a Solution."""
    clock = _Stopwatch()
    field = build_conductivity(config.conductivity)
    sequence = build_sequence(field)
    mesh = build_mesh(config, field)
    keep_interior = config.interior or config.dump_powers
    table = clock('powers', build_table, sequence, mesh, config.N,
                  config.quadrature, config.threads,
                  boundary_only=not keep_interior)
    basis = clock('orthonormalize', orthonormalize, assemble(table),
                  config.drop_tol, config.basis_size)
    data_fn = boundary_function(config)
    dense = None
    if config.dense_error:
        dense_mesh = build_mesh(config, field, P=config.Q)
        dense_table = clock('dense powers', build_table, sequence, dense_mesh,
                            config.N, config.quadrature, config.threads,
                            boundary_only=True)
        dense = (dense_mesh.boundary_angles, raw_traces(dense_table))
    result = clock('fit', fit, basis, data_fn(mesh.boundary_angles),
                   config.Q, data_fn, dense, config)
    interior = None
    if config.interior:
        interior = reconstruct_interior(table, basis, result.coefficients)
    return Solution(field, sequence, mesh, table, basis, result, interior,
                    clock.timings)


def solve_report(config, solution):
    result = solution.fit
    N = config.N
    return {
        'E': result.E,
        'residual_at_nodes': result.residual_norm,
        'basis_size': solution.basis.size,
        'N': N,
        'P': solution.mesh.P,
        'Q': len(result.theta_q),
        'sequence_period': solution.sequence.period,
        'kept': result.alpha,
        'dropped': [{'alpha': slot, 'function': slot_name(slot, N),
                     'ratio': ratio}
                    for (slot, ratio) in solution.basis.dropped],
        'left_out': [slot_name(slot, N)
                     for slot in solution.basis.left_out],
        'significant': [{'alpha': alpha, 'b': b}
                        for (alpha, b) in result.significant()],
        'timings': solution.timings,
        'config': config.model_dump(mode='json'),
    }


def _write_json(path, document):
    with open(path, 'w') as handle:
        handle.write(json.dumps(document, indent=2, sort_keys=True))
        handle.write('\n')


def _solve(config, out):
    os.makedirs(out, exist_ok=True)
    solution = solve(config)
    write_coefficients(solution.fit, os.path.join(out, 'coefficients.csv'))
    write_boundary_fit(solution.fit, os.path.join(out, 'boundary_fit.csv'))
    if solution.interior is not None:
        write_interior(solution.mesh, solution.interior,
                       os.path.join(out, 'interior.csv'))
    if config.dump_powers:
        write_powers(solution.table, os.path.join(out, 'powers.csv'))
    _write_json(os.path.join(out, 'report.json'),
                solve_report(config, solution))
    logger.info("E = %.6e with %d basis functions", solution.fit.E,
                solution.basis.size)
    return EXIT_OK


def _check(value, threshold):
    return {'value': value, 'threshold': threshold,
            'passed': threshold is None or value <= threshold}


def verify_report(config):
    """Residuals of the exact solution, the successor condition and the
    Vekua equation for the configured conductivity.
    """
    field = build_conductivity(config.conductivity)
    sequence = build_sequence(field)
    mesh = build_mesh(config, field)
    thresholds = config.thresholds
    report = {}

    case = exact_case(config)
    if case is None:
        report['divergence'] = {'skipped': 'no exact solution'}
    else:
        points = random_interior_points(config.verify_points, config.seed)
        report['divergence'] = _check(
            divergence_residual(case.sigma, case.u, points, config.h),
            thresholds.divergence)

    mask = smooth_nodes(field, mesh, config.h)
    if sequence.period == 1 and not field.is_constant:
        # (p, i/p) is its own successor only where dp/dx = 0
        report['successor'] = {'skipped': 'period-1 sequence'}
    else:
        successor = [successor_residual(sequence, mesh, m, config.h, mask)
                     for m in range(sequence.period)]
        report['successor'] = dict(_check(max(successor),
                                          thresholds.successor),
                                   per_pair=successor)

    table = build_table(sequence, mesh, config.N, config.quadrature,
                        config.threads)
    vekua = pseudoanalyticity_check(table, sequence.p_for(0), config.h, mask,
                                    config.threads,
                                    high_order=bool(np.all(mask)))
    report['vekua'] = dict(_check(float(np.max(vekua)), thresholds.vekua),
                           **{'seed_%s' % name: row.tolist()
                              for (name, row) in zip(SEED_NAMES, vekua)})
    report['passed'] = all(check.get('passed', True)
                           for check in report.values())
    report['config'] = config.model_dump(mode='json')
    return report


def _verify(config, out):
    report = verify_report(config)
    os.makedirs(out, exist_ok=True)
    _write_json(os.path.join(out, 'verify.json'), report)
    failed = [name for (name, check) in report.items()
              if isinstance(check, dict) and check.get('passed') is False]
    for name in failed:
        logger.error("check %s failed: %.3e > %.3e", name,
                     report[name]['value'], report[name]['threshold'])
    return EXIT_BREACH if failed else EXIT_OK


def _powers(config, out):
    os.makedirs(out, exist_ok=True)
    field = build_conductivity(config.conductivity)
    mesh = build_mesh(config, field)
    table = build_table(build_sequence(field), mesh, config.N,
                        config.quadrature, config.threads)
    write_powers(table, os.path.join(out, 'powers.csv'))
    return EXIT_OK


def _guarded(action, config, out):
    try:
        return action(config, out)
    except NumericalError as err:
        logger.error("%s", err)
        return EXIT_NUMERICAL
    except (ValidationError, OSError) as err:
        logger.error("%s", err)
        return EXIT_INVALID


def run_solve(config, out='.'):
    """Solve and write the artifacts; returns the exit status."""
    return _guarded(_solve, config, out)


def run_verify(config, out='.'):
    """Write verify.json; status 1 names a breached threshold in the log."""
    return _guarded(_verify, config, out)


def run_powers(config, out='.'):
    return _guarded(_powers, config, out)


def _build_parser():
    """Return a command-line arguments parser."""
    parser = argparse.ArgumentParser(
        prog='fpeit',
        description="Formal-power solver for the conductivity equation.")
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True

    for (name, text) in (('solve', "fit boundary data and write artifacts"),
                         ('verify', "check residuals against thresholds"),
                         ('powers', "dump the formal powers table")):
        command = commands.add_parser(name, help=text)
        config = command.add_argument_group("Configuration Options")
        config.add_argument("-c", "--config", required=True, metavar="CONFIG",
                            help="JSON run configuration.")
        config.add_argument("-o", "--out", default=".", metavar="DIR",
                            help="Directory for the output files.")
        config.add_argument("-t", "--threads", type=int, default=None,
                            metavar="K",
                            help="Worker threads over rays (0 = all cores).")
        if name == 'solve':
            config.add_argument("--dense-error", action="store_true",
                                help="Rebuild the traces on Q rays to "
                                     "measure the error.")
    return parser


_ACTIONS = {'solve': run_solve, 'verify': run_verify, 'powers': run_powers}


def _main(argv=None):
    """Run the command-line interface."""
    logging.basicConfig(level=settings.log_level(), format=settings.LOG_FORMAT)
    parser = _build_parser()
    options = parser.parse_args(argv)
    if options.threads is not None and options.threads < 0:
        parser.error("--threads could not be negative")

    try:
        config = load_config(options.config)
    except ValidationError as err:
        logger.error("%s", err)
        return EXIT_INVALID
    update = {}
    if options.threads is not None:
        update['threads'] = options.threads
    if getattr(options, 'dense_error', False):
        update['dense_error'] = True
    if update:
        config = config.model_copy(update=update)
    return _ACTIONS[options.command](config, options.out)


if __name__ == '__main__':
    sys.exit(_main())
