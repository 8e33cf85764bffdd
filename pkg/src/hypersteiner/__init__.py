"""Heuristic Steiner minimal trees in the hyperbolic plane (Klein disk)."""

from .bench import reduction_upper_bound, solve
from .datagen import DatasetSpec, generate, read_points, write_points
from .estimators import HyperSteiner, MinimumSpanningTree, NeighborJoiningTree, RandomizedHyperSteiner
from .fermat import best_fst4, fermat_point, fst3, fst4
from .heuristics import RhsConfig, SolveResult, hypersteiner, randomized_hypersteiner
from .klein import distance
from .nj import nj_embed, nj_topology
from .optimize import GdConfig, grad_tree_length, optimize_steiner
from .tree import Tree
from .triangulation import delaunay, mst

__all__ = [
    "DatasetSpec",
    "GdConfig",
    "HyperSteiner",
    "MinimumSpanningTree",
    "NeighborJoiningTree",
    "RandomizedHyperSteiner",
    "RhsConfig",
    "SolveResult",
    "Tree",
    "best_fst4",
    "delaunay",
    "distance",
    "fermat_point",
    "fst3",
    "fst4",
    "generate",
    "grad_tree_length",
    "hypersteiner",
    "mst",
    "nj_embed",
    "nj_topology",
    "optimize_steiner",
    "randomized_hypersteiner",
    "read_points",
    "reduction_upper_bound",
    "solve",
]
