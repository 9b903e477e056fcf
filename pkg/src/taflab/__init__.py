"""Ideals of triangular AF algebras at finite truncation.

Modules: ``fdcore`` (finite digraph algebras and their ideal lattices),
``tower`` (embedding towers), ``chains`` (chains of matrix units and the
ideals they determine), ``spectrum`` (points, intervals and sigma/tau
ideals), ``nestrep`` (nest representations), ``distance`` (distance to
staircase modules) and ``cli``.
"""

__version__ = "0.1.0"
