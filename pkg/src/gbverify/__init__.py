"""Numerical verification of Gauss-Bonnet type identities.

Modules: ``multilinear`` (Pfaffians, Berezin integrals), ``double_forms``,
``transgression`` (connections, Pfaffian and transgression forms),
``polytope`` (face lattices, outer angles), ``spaceforms`` and ``surface``
(constant-curvature simplices and regions), ``cli``.
"""

__version__ = "0.1.0"
