"""Graph expansion of the Berezin-Toeplitz style star product on Kähler manifolds."""

from .decorations import DecoratedGraph, enumerate_labelled_circuit_classes
from .enumeration import DegreeFilter, enumerate_acyclic, enumerate_graphs
from .expr import ScalarField, parse_expression
from .geometry import KahlerChart, builtin_chart, load_chart, poisson_bracket
from .graphs import (
    CanonicalForm,
    Graph,
    automorphism_count,
    canonical_form,
    validate,
)
from .jets import Jet
from .operator import (
    emit_symbolic,
    gamma,
    multi_D,
    operator_coefficient,
    star_coefficient,
    star_product,
)
from .series import FormalSeries
from .surgery import bud, debud, defuse, fuse

__all__ = [
    "CanonicalForm", "DecoratedGraph", "DegreeFilter", "FormalSeries", "Graph", "Jet",
    "KahlerChart", "ScalarField", "automorphism_count", "bud", "builtin_chart",
    "canonical_form", "debud", "defuse", "emit_symbolic", "enumerate_acyclic",
    "enumerate_graphs", "enumerate_labelled_circuit_classes", "fuse", "gamma", "load_chart",
    "multi_D", "operator_coefficient", "parse_expression", "poisson_bracket",
    "star_coefficient", "star_product", "validate",
]
