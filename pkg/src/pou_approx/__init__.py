"""Partition-of-unity approximation of the identity on finite metric spaces."""

from .approximation import apply, as_matrix, partial_sum_apply, rank_on, seminorm
from .convergence import equicontinuity_check, modulus, rank_one_tail, sweep, verify_bound
from .cover import Net, active_centers, active_centers_on, build_greedy_net, multiplicity
from .estimator import PartitionOfUnityRegressor
from .functions import FunctionOnM
from .metric_space import CompactSubset, MetricSpace, min_pairwise_distance, validate_metric
from .oracle import dense_pk, identity_threshold, rank_one_reconstruction
from .partition import PartitionOfUnity

__all__ = [
    "CompactSubset", "FunctionOnM", "MetricSpace", "Net", "PartitionOfUnity",
    "PartitionOfUnityRegressor", "active_centers", "active_centers_on", "apply",
    "as_matrix", "build_greedy_net", "dense_pk", "equicontinuity_check",
    "identity_threshold", "min_pairwise_distance", "modulus", "multiplicity",
    "partial_sum_apply", "rank_on", "rank_one_reconstruction", "rank_one_tail",
    "seminorm", "sweep", "validate_metric", "verify_bound",
]

__version__ = "0.1.0"
