"""Brute-force dense reference for small spaces.

Nothing here reuses the vectorized machinery: the greedy scan, the kernels
and the normalization are re-derived with scalar loops over
``space.distance``. Agreement with :func:`approximation.as_matrix` is a
cross-check between two independent implementations.
"""

from __future__ import annotations

import math

import numpy as np

from .metric_space import MetricSpace, min_pairwise_distance

ORACLE_MAX_N = 512
TOL = 1e-12


def _phi(kernel: str, u: float) -> float:
    if u >= 1.0:
        return 0.0
    if kernel == "hat":
        return 1.0 - u
    if kernel == "cosine":
        return 0.5 * (1.0 + math.cos(math.pi * u))
    if kernel in ("wendland", "wendland_c2"):
        return (1.0 - u) ** 4 * (4.0 * u + 1.0)
    raise ValueError(f"unknown kernel {kernel!r}")


def _check_size(space: MetricSpace):
    if space.n > ORACLE_MAX_N:
        raise ValueError(f"oracle refuses n = {space.n} > {ORACLE_MAX_N}")


def greedy_centers(space: MetricSpace, k: int, rho: float) -> list[int]:
    r = rho / (2 * k)
    centers: list[int] = []
    for i in range(space.n):
        if all(space.distance(i, c) >= r for c in centers):
            centers.append(i)
    return centers


def dense_pk(space: MetricSpace, k: int, rho: float = 0.99, kernel: str = "hat") -> np.ndarray:
    """``n x n`` table with entry ``(x, t) = eta_t(x)`` for centres ``t`` and 0 elsewhere."""
    _check_size(space)
    n = space.n
    h = rho / k
    centers = greedy_centers(space, k, rho)
    P = np.zeros((n, n))
    for x in range(n):
        raw = {}
        for t in centers:
            d = space.distance(x, t)
            if d < h:
                raw[t] = _phi(kernel, d / h)
        z = 0.0
        for t in centers:
            z += raw.get(t, 0.0)
        if not z > 0.0:
            raise RuntimeError(f"oracle: normalizer vanished at point {x}")
        for t, v in raw.items():
            P[x, t] = v / z
    return P


def identity_threshold(space: MetricSpace, rho: float = 0.99) -> int:
    """Smallest integer ``k`` with ``rho / k <= min_pairwise_distance``."""
    m = min_pairwise_distance(space)
    k = max(1, math.ceil(rho / m))
    while rho / k > m:
        k += 1
    while k > 1 and rho / (k - 1) <= m:
        k -= 1
    return k


def rank_one_reconstruction(space: MetricSpace, k: int, rho: float = 0.99,
                            kernel: str = "hat", keep=None) -> float:
    """Rebuild ``P`` as a sum of outer products ``eta_t (x) e_t`` and return the max deviation.

    ``keep`` restricts the sum to a subset of centres (a truncated series).
    """
    P = dense_pk(space, k, rho, kernel)
    n = space.n
    centers = greedy_centers(space, k, rho)
    if keep is not None:
        keep = set(int(t) for t in keep)
        centers = [t for t in centers if t in keep]
    R = np.zeros((n, n))
    for t in centers:
        column = P[:, t].copy()  # eta_t at every point x
        indicator = np.zeros(n)
        indicator[t] = 1.0  # evaluation at t
        R += np.outer(column, indicator)
    return float(np.max(np.abs(R - P)))


def identity_deviation(P: np.ndarray) -> float:
    return float(np.max(np.abs(P - np.eye(P.shape[0]))))


def oracle_check(space: MetricSpace, k_list, rho: float = 0.99, kernel: str = "hat") -> dict:
    """Compare the dense oracle against the sparse path at every ``k``.

    Checks entrywise agreement, the rank-one reconstruction and, past the
    identity threshold, exact reproduction of the identity.
    """
    from .approximation import as_matrix, to_dense_over_cloud
    from .partition import PartitionOfUnity

    _check_size(space)
    k_star = identity_threshold(space, rho) if space.n >= 2 else 1
    rows = []
    ok = True
    for k in k_list:
        P = dense_pk(space, k, rho, kernel)
        pou = PartitionOfUnity.build(space, k, rho, kernel)
        W = to_dense_over_cloud(pou, as_matrix(pou))
        agree = float(np.max(np.abs(P - W)))
        recon = rank_one_reconstruction(space, k, rho, kernel)
        to_id = identity_deviation(P)
        row_sum = float(np.max(np.abs(P.sum(axis=1) - 1.0)))
        item = {
            "k": int(k),
            "max_deviation_vs_sparse": agree,
            "rank_one_deviation": recon,
            "identity_deviation": to_id,
            "row_sum_deviation": row_sum,
            "past_threshold": k >= k_star,
        }
        item["ok"] = (agree <= TOL and recon <= TOL and row_sum <= 1e-9
                      and (k < k_star or to_id <= TOL))
        ok &= item["ok"]
        rows.append(item)
    return {"ok": ok, "identity_threshold": int(k_star), "rho": rho, "kernel": kernel,
            "n": space.n, "tolerance": TOL, "checks": rows}
