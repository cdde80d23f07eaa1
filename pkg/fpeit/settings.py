"""
Default settings for fpeit.

Every number the pipeline needs when a config does not say otherwise lives
here. To override any of them for a machine, drop a ``local_settings.py``
somewhere on ``sys.path``; whatever it defines replaces the values below.
"""

import logging
import os

# Standard experiment size: 35 rays, N=17, error measured on 1000 points
MAX_DEGREE = 17
RAY_COUNT = 35
STEP_COUNT = 200
ERROR_POINTS = 1000

# the only experiment with more formal powers: degrees 0..30 of both seeds
# enter the basis, fitted on 91 rays
TRIANGLE_MAX_DEGREE = 32
TRIANGLE_BASIS_SIZE = 61
TRIANGLE_RAY_COUNT = 91

STENCIL_H = 1e-4
DROP_TOL = 1e-10
SLAB_K = 2.0
DISK_TOL = 1e-12
POLYGON_TOL = 1e-9

QUADRATURE = 'trapezoid'
RADIAL_RATIO = 1.0

DIVERGENCE_THRESHOLD = 1e-3
SUCCESSOR_THRESHOLD = 1e-3
# relative to max(n, 1) max|Z(n)|
VEKUA_THRESHOLD = 1e-2
VERIFY_POINTS = 200
VERIFY_SEED = 20131

# 0 = multiprocessing.cpu_count()
THREADS = 1

LOG_ENV = 'FPEIT_LOG'
LOG_LEVELS = {
    'error': logging.ERROR,
    'warn': logging.WARNING,
    'info': logging.INFO,
    'debug': logging.DEBUG,
}
LOG_FORMAT = '[%(levelname)s] %(name)s: %(message)s'


def log_level():
    """Level named by $FPEIT_LOG, warn when unset or unknown."""
    return LOG_LEVELS.get(os.environ.get(LOG_ENV, 'warn').lower(),
                          logging.WARNING)


try:
    from local_settings import *  # noqa: F401,F403
except ImportError:
    pass
