"""
The standard experiments, as config documents.

Each entry is a plain JSON-compatible dict that ``fpeit.config`` uses as
the base of any config naming it. The triangle vertices are not published;
ours put one vertex toward angle pi/4, the opposite one toward 5pi/4 and
the third toward 3pi/4, so any ray crossing them is easy to find on the
boundary.
"""

import math

from fpeit import settings

_A = 0.85 * math.cos(math.pi / 4)
_C = 0.45 * math.cos(3 * math.pi / 4)

TRIANGLE = [[_A, _A], [-_A, -_A], [_C, -_C]]


def _disk(shift):
    return {
        'conductivity': {
            'variant': 'scene',
            'background': 10.0,
            'shapes': [{'kind': 'disk', 'cx': shift, 'cy': 0.0, 'r2': 0.2,
                        'value': 100.0}],
        },
        'boundary': {'kind': 'cubic', 'shift': shift},
        'dense_error': True,
    }


def _lorentzian(beta):
    return {
        'conductivity': {'variant': 'lorentzian', 'beta': beta},
        'boundary': {'kind': 'exact'},
        'dense_error': True,
    }


PRESETS = {
    'sinusoidal': {
        'conductivity': {'variant': 'sinusoidal', 'omega': math.pi},
        'boundary': {'kind': 'exact'},
        'dense_error': True,
    },
    'lorentzian-0': _lorentzian(0.0),
    'lorentzian-0.5': _lorentzian(0.5),
    'lorentzian-1': _lorentzian(1.0),
    'radial-rings': {
        'conductivity': {'variant': 'radial-rings'},
        'boundary': {'kind': 'cubic', 'shift': 0.0},
        'dense_error': True,
    },
    'disk-center': _disk(0.0),
    'disk-0.6': _disk(0.6),
    'disk-0.79': _disk(0.79),
    'triangle': {
        'conductivity': {
            'variant': 'scene',
            'background': 10.0,
            'shapes': [{'kind': 'polygon', 'vertices': TRIANGLE,
                        'value': 100.0}],
        },
        'boundary': {'kind': 'cubic', 'shift': 0.6},
        'N': settings.TRIANGLE_MAX_DEGREE,
        'P': settings.TRIANGLE_RAY_COUNT,
        'basis_size': settings.TRIANGLE_BASIS_SIZE,
        'corner_snap': True,
        'dense_error': True,
    },
}
