"""Cost-optimal placement of streaming servers across a public cloud and telco primary/secondary sites."""
from .builder import Placement, build, breakdown, cost_of, decode, encode
from .netmodel import (CostParams, Demand, Topology, VariantFlags, default_params, reference_demand,
                       reference_topology, to_usd, validate)
from .solver import InfeasibleModel, SolverConfig, solve_placement

__all__ = [
    "CostParams", "Demand", "InfeasibleModel", "Placement", "SolverConfig", "Topology", "VariantFlags",
    "breakdown", "build", "cost_of", "decode", "default_params", "encode", "reference_demand",
    "reference_topology", "solve_placement", "to_usd", "validate",
]
