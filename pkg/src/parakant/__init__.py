"""Parametric discrete optimal transport.

Exact Kantorovich solving with a canonical plan selection, stability and
approximation certificates over parameter families, conditional measures and
gluing, and quantile (Skorohod) parametrizations on the line.
"""

from ._numeric import FLOAT, RATIONAL
from .disintegration import (Disintegration, GluingError, OffImageError, PartitionScheme,
                             conditional_sequence, disintegrate, glue, stabilization_level)
from .measures import (DiscreteMeasure, FiniteMetricSpace, MeasureError, ProductSpace, marginals,
                       product, project, pushforward, truncate_normalize, tv_distance)
from .parametric import (Certificate, Family, ParamGrid, ParametricError, SweepResult, cost_ladder,
                         inf_convolution, lipschitz_certificate, lipschitz_slack, monotone_cost_limit,
                         stabilization_threshold, sweep, truncation_convergence)
from .polytope import brute_force_cost, enumerate_optimal_plans, enumerate_vertices
from .skorohod import (QuantileMap, SkorohodReport, d0_distance, quantile_coupling, quantile_map,
                       skorohod_sequence, truncated_w1)
from .solver import (CostMatrix, DualPotentials, SolveResult, SolverError, TransportPlan, duality_gap,
                     normalize_potentials, solve_exact, transport_cost)

__version__ = "0.1.0"

__all__ = [
    "FLOAT", "RATIONAL",
    "FiniteMetricSpace", "ProductSpace", "DiscreteMeasure", "MeasureError",
    "tv_distance", "pushforward", "product", "project", "marginals", "truncate_normalize",
    "CostMatrix", "TransportPlan", "DualPotentials", "SolveResult", "SolverError",
    "solve_exact", "transport_cost", "normalize_potentials", "duality_gap",
    "enumerate_optimal_plans", "enumerate_vertices", "brute_force_cost",
    "ParamGrid", "Family", "SweepResult", "Certificate", "ParametricError", "sweep",
    "lipschitz_certificate", "lipschitz_slack", "inf_convolution", "stabilization_threshold",
    "cost_ladder", "monotone_cost_limit", "truncation_convergence",
    "Disintegration", "PartitionScheme", "OffImageError", "GluingError",
    "disintegrate", "conditional_sequence", "stabilization_level", "glue",
    "QuantileMap", "SkorohodReport", "quantile_map", "d0_distance", "quantile_coupling",
    "skorohod_sequence", "truncated_w1",
]
