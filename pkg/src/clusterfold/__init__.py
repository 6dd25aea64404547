"""Exact cluster scattering diagrams, folding, theta functions and DT transformations."""

from .atlas import Atlas, DTTransform, ExactMap, build_atilde, dt_transform, find_maximal_green_sequence, verify_cocycle
from .folding import AdmissibilityError, FoldingMap, GroupAction, check_admissible, fold_diagram, fold_seed, q_tilde
from .lattice_core import MutationTree, PrincipalSeed, Seed, fixture_seed, mutate_seed
from .poly import LaurentExpr, MonomialMap, TruncatedSeries
from .scattering import (
    NotFiniteTypeError,
    ScatteringDiagram,
    Wall,
    complete_rank2,
    finite_type_diagram,
    initial_diagram,
    path_product,
)
from .theta import ThetaExpansion, enumerate_broken_lines, markov_theta, theta_expand

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError",
    "Atlas",
    "DTTransform",
    "ExactMap",
    "FoldingMap",
    "GroupAction",
    "LaurentExpr",
    "MonomialMap",
    "MutationTree",
    "NotFiniteTypeError",
    "PrincipalSeed",
    "ScatteringDiagram",
    "Seed",
    "ThetaExpansion",
    "TruncatedSeries",
    "Wall",
    "build_atilde",
    "check_admissible",
    "complete_rank2",
    "dt_transform",
    "enumerate_broken_lines",
    "find_maximal_green_sequence",
    "finite_type_diagram",
    "fixture_seed",
    "fold_diagram",
    "fold_seed",
    "initial_diagram",
    "markov_theta",
    "mutate_seed",
    "path_product",
    "q_tilde",
    "theta_expand",
    "verify_cocycle",
]
