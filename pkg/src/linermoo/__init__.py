"""Bi-objective liner shipping: speed, fleet deployment, schedule and cargo routing."""

from .evaluation import ConstraintReport, Solution, objective_cost, objective_time
from .genotype import Genotype, decode, random_genotype, repair
from .instance import Instance, generate_instance, load_bundled, load_instance

__version__ = "0.1.0"

__all__ = [
    "ConstraintReport", "Genotype", "Instance", "Solution", "decode",
    "generate_instance", "load_bundled", "load_instance", "objective_cost",
    "objective_time", "random_genotype", "repair",
]
