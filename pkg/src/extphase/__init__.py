"""Structure-preserving integrators for ``y' = A(t) y`` in extended phase space."""

from .errors import ExtPhaseError
from .harness import ExperimentConfig, TABLE_ONE_CONFIG, run_reference, run_trajectory, table_one
from .integrators import METHODS, TABLE_ONE_IDS, Method, MethodDescriptor, get_method
from .model import (
    ExtendedPoint,
    LinearHamiltonianProblem,
    PerturbedOscillator,
    PhasePoint,
    extended_hamiltonian,
    hamiltonian,
    initial_point,
)

__all__ = [
    "ExperimentConfig",
    "ExtPhaseError",
    "ExtendedPoint",
    "LinearHamiltonianProblem",
    "METHODS",
    "Method",
    "MethodDescriptor",
    "PerturbedOscillator",
    "PhasePoint",
    "TABLE_ONE_CONFIG",
    "TABLE_ONE_IDS",
    "extended_hamiltonian",
    "get_method",
    "hamiltonian",
    "initial_point",
    "run_reference",
    "run_trajectory",
    "table_one",
]
