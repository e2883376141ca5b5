"""Numerical almost contact pseudo-metric 3-manifolds and Legendre curves.

Library layout:

    expr        tiny expression language with exact differentiation
    manifold    chart-level structure tensors and axiom checks
    connection  Levi-Civita connection, alpha/beta, normality
    curve       parametrized curves and causal/Legendre classification
    frenet      direct and closed-form Frenet data, Reeb decompositions,
                null frames
    legendre    built-in example curves and the q3 generator
    spherical   osculating spheres and the spherical characterization
    cli         command-line front end (see `contactgeom --help`)
"""

from .manifold import (StructureTensors, TangentVector, builtin_manifold,
                       causal_character, check_almost_contact,
                       check_compatibility, fundamental_two_form, probe_points,
                       structure_from_expressions)

__version__ = "0.1.0"

__all__ = [
    "StructureTensors",
    "TangentVector",
    "builtin_manifold",
    "causal_character",
    "check_almost_contact",
    "check_compatibility",
    "fundamental_two_form",
    "probe_points",
    "structure_from_expressions",
    "__version__",
]
