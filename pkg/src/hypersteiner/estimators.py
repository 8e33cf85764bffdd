"""scikit-learn style wrappers around the tree builders."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .heuristics import RhsConfig, SolveResult, hypersteiner, randomized_hypersteiner
from .klein import check_points
from .nj import NJ_GD, nj_embed
from .optimize import GdConfig
from .tree import mst_tree
from .triangulation import mst


def _validate(X, min_samples):
    X = check_array(X, dtype=np.float64, ensure_min_samples=min_samples)
    if X.shape[1] != 2:
        raise ValueError(f"expected points of shape (n, 2), got {X.shape}")
    return check_points(X, "X")


class _TreeEstimator(BaseEstimator):
    # subclasses implement _solve(X) -> SolveResult
    _min_samples = 2

    def fit(self, X, y=None):
        """Build a tree over the rows of ``X`` (Klein coordinates).

        Sets ``tree_``, ``length_``, ``mst_length_``, ``reduction_`` (percent
        shorter than the MST), ``n_steiner_`` and ``result_``.
        """
        X = _validate(X, self._min_samples)
        res = self._solve(X)
        self.result_ = res
        self.tree_ = res.tree
        self.length_ = res.length
        self.mst_length_ = res.mst_length
        self.reduction_ = res.red_percent
        self.n_steiner_ = len(res.tree.steiner)
        self.n_features_in_ = 2
        return self

    def steiner_points(self):
        check_is_fitted(self, "tree_")
        return self.tree_.steiner.copy()

    def edges(self):
        check_is_fitted(self, "tree_")
        return self.tree_.edges.copy()


class MinimumSpanningTree(_TreeEstimator):
    """Hyperbolic MST; the reference every reduction is measured against."""

    def _solve(self, X):
        edges = mst(X)
        return SolveResult("mst", mst_tree(X, edges), edges.total, edges.total)


class HyperSteiner(_TreeEstimator):
    """Deterministic Delaunay/MST heuristic with greedy FST concatenation."""

    def _solve(self, X):
        return hypersteiner(X)


class RandomizedHyperSteiner(_TreeEstimator):
    """Randomized Steiner tree heuristic.

    Parameters
    ----------
    max_iterations : int or None
        Consecutive non-improving iterations before stopping; ``None`` uses
        ``floor(sqrt(n))``.
    insertion_range : (float, float)
        Range of the per-pass probability of inserting a triangle barycenter.
    learning_rate, max_epochs, patience, threshold
        Gradient descent settings used to refine Steiner points.
    random_state : int
    """

    def __init__(
        self,
        max_iterations=None,
        insertion_range=(0.3, 0.6),
        learning_rate=1e-2,
        max_epochs=10000,
        patience=100,
        threshold=1e-6,
        random_state=0,
    ):
        self.max_iterations = max_iterations
        self.insertion_range = insertion_range
        self.learning_rate = learning_rate
        self.max_epochs = max_epochs
        self.patience = patience
        self.threshold = threshold
        self.random_state = random_state

    def _config(self):
        if not isinstance(self.random_state, (int, np.integer)):
            raise ValueError(f"random_state must be an int, got {self.random_state!r}")
        gd = GdConfig(
            max_epochs=self.max_epochs,
            learning_rate=self.learning_rate,
            patience=self.patience,
            threshold=self.threshold,
        )
        return RhsConfig(
            max_iterations=self.max_iterations,
            insertion_range=tuple(self.insertion_range),
            seed=int(self.random_state),
            gd=gd,
        )

    def _solve(self, X):
        return randomized_hypersteiner(X, self._config())


class NeighborJoiningTree(_TreeEstimator):
    """Neighbor-joining topology embedded by gradient descent."""

    _min_samples = 3

    def __init__(self, learning_rate=NJ_GD.learning_rate, max_epochs=NJ_GD.max_epochs, random_state=0):
        self.learning_rate = learning_rate
        self.max_epochs = max_epochs
        self.random_state = random_state

    def _solve(self, X):
        gd = GdConfig(max_epochs=self.max_epochs, learning_rate=self.learning_rate, max_step=NJ_GD.max_step)
        return nj_embed(X, seed=int(self.random_state), gd=gd)
