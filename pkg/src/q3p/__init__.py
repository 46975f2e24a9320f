"""Density-to-placement pipeline solved on an emulated Rydberg-atom Ising machine."""

__version__ = "0.1.0"

from .emulator import (  # noqa: E402
    NoiseModel,
    QuantumState,
    SampleHistogram,
    evolve,
    evolve_trajectory,
    landscape_scan,
    occupation,
    occupation_error,
    projector_expectation,
    sample,
    sample_dynamics,
)
from .field import ScalarField, load_grid, normalize, save_grid, synthesize_mixture  # noqa: E402
from .ising import PlacementProblem, compile_problem, cost, exact_solve  # noqa: E402
from .qae import map_detunings, run_qae  # noqa: E402
from .register import Register, blockade_graph, build_register, mis_bruteforce  # noqa: E402
from .vqa import OptimizerConfig, bayesian_minimize, estimate_cost, run_vqa  # noqa: E402

__all__ = [
    "NoiseModel",
    "OptimizerConfig",
    "PlacementProblem",
    "QuantumState",
    "Register",
    "SampleHistogram",
    "ScalarField",
    "bayesian_minimize",
    "blockade_graph",
    "build_register",
    "compile_problem",
    "cost",
    "estimate_cost",
    "evolve",
    "evolve_trajectory",
    "exact_solve",
    "landscape_scan",
    "load_grid",
    "map_detunings",
    "mis_bruteforce",
    "normalize",
    "occupation",
    "occupation_error",
    "projector_expectation",
    "run_qae",
    "run_vqa",
    "sample",
    "sample_dynamics",
    "save_grid",
    "synthesize_mixture",
]
