"""Formal powers of pseudoanalytic function theory for the forward Dirichlet
problem of the two-dimensional electrical impedance equation on the unit disk.

The package is usable both as a library and, through ``python -m fpeit``, as
a command-line program driven by JSON configs.
"""

__version__ = '0.3.0'
