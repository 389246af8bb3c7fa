"""Interpretable clustering where every cluster is described by a polytope
of sparse integer-coefficient hyperplanes."""
from .clustering import alternating_minimization, assign_with_rep, silhouette
from .config import MpcConfig
from .dataset import Dataset, binarize, load_csv
from .descent import coordinate_descent
from .errors import ConfigError, InfeasibleError
from .estimator import PolytopeClustering
from .explain import build_explanation, pairwise_comparison
from .geometry import Hyperplane, Polytope, RepErrorTable, default_epsilon
from .model import MpcModel, evaluate, export, load_model
from .runner import run, sweep
from .separation import SeparationProblem, SeparationResult, separate, solve_separation

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "Dataset", "Hyperplane", "InfeasibleError", "MpcConfig", "MpcModel",
    "Polytope", "PolytopeClustering", "RepErrorTable", "SeparationProblem", "SeparationResult",
    "alternating_minimization", "assign_with_rep", "binarize", "build_explanation",
    "coordinate_descent", "default_epsilon", "evaluate", "export", "load_csv", "load_model",
    "pairwise_comparison", "run", "separate", "silhouette", "solve_separation", "sweep",
]
