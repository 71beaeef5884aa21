"""scikit-learn front end for the partition-of-unity operator."""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, validate_data

from .cover import CoverError, build_greedy_net
from .metric_space import _CDIST_NAME, COORD_KINDS, MetricSpace
from .partition import get_kernel, sequential_row_sum


def _collapse_duplicates(X, y):
    """First occurrence of each distinct row, in input order, with y averaged over its copies."""
    _, first, inverse = np.unique(X, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    order = np.argsort(first)
    keep = first[order]
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    group = rank[inverse]
    counts = np.bincount(group, minlength=keep.size).astype(float)
    Y = y.reshape(y.shape[0], -1)
    means = np.column_stack([np.bincount(group, weights=Y[:, j], minlength=keep.size) / counts
                             for j in range(Y.shape[1])])
    return keep, means.reshape((keep.size,) + y.shape[1:])


class PartitionOfUnityRegressor(RegressorMixin, TransformerMixin, BaseEstimator):
    """Finite-rank approximation ``P^k f`` fitted on a point cloud.

    ``fit`` builds the greedy net of radius ``rho / (2k)`` on the training
    points and stores the target at the net centres. ``predict`` returns
    ``sum_t y(t) eta_t(x)`` and ``transform`` returns the sparse weight rows
    ``eta_t(x)`` themselves, one column per centre.

    Parameters
    ----------
    k : int, default=8
        Scale; bumps have support radius ``rho / k``.
    rho : float, default=0.99
        Shrink factor in ``(0, 1]``.
    kernel : {"hat", "cosine", "wendland_c2"}, default="hat"
    metric : {"euclidean", "manhattan", "chebyshev", "precomputed"}, default="euclidean"
        With ``"precomputed"``, ``fit`` takes an ``(n, n)`` distance matrix and
        ``predict``/``transform`` take ``(n_queries, n_train)`` distances.

    Attributes
    ----------
    centers_ : ndarray of int
        Indices of training rows kept as centres. Repeated training rows are
        collapsed to their first occurrence before the net is built, and the
        centre value is the mean target over the copies.
    center_values_ : ndarray
        Target values at the centres.
    """

    def __init__(self, k=8, rho=0.99, kernel="hat", metric="euclidean"):
        self.k = k
        self.rho = rho
        self.kernel = kernel
        self.metric = metric

    def _check_params(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        if not 0.0 < self.rho <= 1.0:
            raise ValueError(f"rho must lie in (0, 1], got {self.rho!r}")
        if self.metric not in COORD_KINDS + ("precomputed",):
            raise ValueError(f"unsupported metric {self.metric!r}")
        get_kernel(self.kernel)

    def fit(self, X, y):
        self._check_params()
        X, y = validate_data(self, X, y, y_numeric=True, multi_output=True)
        y = np.asarray(y, dtype=float)
        if self.metric == "precomputed":
            space = MetricSpace.from_table(X)
            keep, values = np.arange(X.shape[0]), y
        else:
            keep, values = _collapse_duplicates(X, y)
            space = MetricSpace.from_coords(X[keep], self.metric)
        net = build_greedy_net(space, int(self.k), float(self.rho))
        self.centers_ = keep[net.center_array()]
        self.center_values_ = values[net.center_array()]
        self.support_radius_ = net.support
        if self.metric != "precomputed":
            self.center_coords_ = X[self.centers_]
        return self

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.target_tags.multi_output = True
        tags.target_tags.single_output = True
        return tags

    def _distances(self, X):
        if self.metric == "precomputed":
            X = check_array(X)
            if X.shape[1] != self.n_features_in_:
                raise ValueError(f"expected distances to {self.n_features_in_} training points")
            return X[:, self.centers_]
        X = validate_data(self, X, reset=False)
        return cdist(X, self.center_coords_, metric=_CDIST_NAME[self.metric])

    def _weights(self, X) -> np.ndarray:
        check_is_fitted(self)
        D = self._distances(X)
        h = self.support_radius_
        _, phi = get_kernel(self.kernel)
        raw = np.where(D < h, phi(D / h), 0.0)
        Z = sequential_row_sum(raw)
        bad = np.flatnonzero(~(Z > 0.0))
        if bad.size:
            raise CoverError(
                f"{bad.size} query row(s) lie outside every bump (first: row {int(bad[0])}); "
                "the fitted cover does not reach them"
            )
        return raw / Z[:, None]

    def transform(self, X):
        W = self._weights(X)
        return sparse.csr_matrix(W)

    def predict(self, X):
        W = self._weights(X)
        vals = self.center_values_
        if vals.ndim == 1:
            return sequential_row_sum(W * vals[None, :])
        return np.column_stack([sequential_row_sum(W * vals[None, :, j]) for j in range(vals.shape[1])])
