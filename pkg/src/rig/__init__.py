"""Weighted random intersection graphs G(n, m, F, H)."""
from .model import (
    HypothesisWarning,
    ModelParams,
    WeightAssignment,
    WeightSpec,
    check_theorem_conditions,
    draw_weights,
    edge_probability,
    element_count,
    exponential,
    gamma,
    moment,
    normalize_to_unit_mean,
    pareto,
    point_mass,
    sample_weights,
    two_point,
    uniform,
)
from .streams import stream
