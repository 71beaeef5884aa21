"""The finite-rank operator ``P f = sum_t f(t) eta_t`` and its partial sums.

Every value here is a left-to-right sum over centres in ascending index
order. :func:`apply`, :func:`partial_sum_apply` and the CSR table from
:func:`as_matrix` therefore agree bit for bit on real inputs.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse

from .cover import active_centers_on
from .functions import FunctionError, FunctionOnM
from .metric_space import CompactSubset
from .partition import PartitionOfUnity, sequential_row_sum

CHUNK = 1024


def _rows(E, n: int) -> np.ndarray:
    if E is None:
        return np.arange(n)
    if isinstance(E, CompactSubset):
        return E.as_array()
    rows = np.asarray(E, dtype=np.intp).reshape(-1)
    if rows.size and (rows.min() < 0 or rows.max() >= n):
        raise IndexError(f"evaluation index out of range for cloud of size {n}")
    return rows


def function_values(pou: PartitionOfUnity, f) -> np.ndarray:
    if isinstance(f, FunctionOnM):
        return f.values(pou.space)
    vals = np.asarray(f)
    if vals.shape != (pou.space.n,):
        raise FunctionError(f"expected {pou.space.n} function values, got shape {vals.shape}")
    return vals


def center_values(pou: PartitionOfUnity, f, centers=None) -> np.ndarray:
    """``f`` at the centres; raises naming the first centre where it is not evaluable."""
    C = pou.centers if centers is None else np.asarray(centers, dtype=np.intp)
    vals = function_values(pou, f)[C]
    bad = np.flatnonzero(~np.isfinite(vals))
    if bad.size:
        raise FunctionError(f"function is not evaluable at centre {int(C[bad[0]])}")
    return vals


def _combine(W: np.ndarray, fc: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(fc):
        return _combine(W, fc.real) + 1j * _combine(W, fc.imag)
    return sequential_row_sum(W * fc[None, :])


def apply(pou: PartitionOfUnity, f, E=None) -> np.ndarray:
    """``(P f)(x)`` for each ``x`` in ``E`` (default: the whole cloud)."""
    rows = _rows(E, pou.space.n)
    fc = center_values(pou, f)
    out = [_combine(pou.weights(rows[s:s + CHUNK]), fc) for s in range(0, rows.size, CHUNK)]
    return np.concatenate(out) if out else np.zeros(0)


def partial_sum_apply(pou: PartitionOfUnity, f, N, E=None) -> np.ndarray:
    """``sum_{t in N} f(t) eta_t(x)`` over ``x`` in ``E`` for a subset ``N`` of centres."""
    rows = _rows(E, pou.space.n)
    C = pou.centers
    N = np.unique(np.asarray(list(N), dtype=np.intp))
    outside = np.setdiff1d(N, C)
    if outside.size:
        raise ValueError(f"index {int(outside[0])} in N is not a centre of the net")
    keep = np.isin(C, N)
    dtype = np.result_type(function_values(pou, f).dtype, float)
    fc = np.zeros(C.size, dtype=dtype)
    if keep.any():
        fc[keep] = center_values(pou, f, C[keep])
    out = [_combine(pou.weights(rows[s:s + CHUNK]) * keep[None, :], fc)
           for s in range(0, rows.size, CHUNK)]
    return np.concatenate(out) if out else np.zeros(0)


def as_matrix(pou: PartitionOfUnity, E=None) -> sparse.csr_matrix:
    """Row-stochastic CSR table ``W[x, j] = eta_{centers[j]}(x)``.

    Rows follow ``E``; columns follow the ascending centre list. Stored
    entries are exactly the active centres of each row.
    """
    rows = _rows(E, pou.space.n)
    C = pou.centers
    blocks = []
    for s in range(0, rows.size, CHUNK):
        r = rows[s:s + CHUNK]
        W = pou.weights(r)
        active = pou.space.block(r, C) < pou.support
        ii, jj = np.nonzero(active)
        blocks.append(sparse.csr_matrix((W[ii, jj], (ii, jj)), shape=(r.size, C.size)))
    M = sparse.vstack(blocks, format="csr") if blocks else sparse.csr_matrix((0, C.size))
    M.sort_indices()
    return M


def matrix_apply(M: sparse.csr_matrix, fc: np.ndarray) -> np.ndarray:
    """Row-by-row sequential product of a CSR table with centre values."""
    fc = np.asarray(fc)
    if np.iscomplexobj(fc):
        return matrix_apply(M, fc.real) + 1j * matrix_apply(M, fc.imag)
    out = np.zeros(M.shape[0])
    for i in range(M.shape[0]):
        lo, hi = M.indptr[i], M.indptr[i + 1]
        terms = M.data[lo:hi] * fc[M.indices[lo:hi]]
        out[i] = np.cumsum(terms)[-1] if hi > lo else 0.0
    return out


def to_dense_over_cloud(pou: PartitionOfUnity, M: sparse.csr_matrix) -> np.ndarray:
    """Expand centre columns to an ``len(E) x n`` table with zero non-centre columns."""
    out = np.zeros((M.shape[0], pou.space.n))
    out[:, pou.centers] = M.toarray()
    return out


def export_triplets(pou: PartitionOfUnity, M: sparse.csr_matrix, E=None) -> list[tuple[int, int, float]]:
    """``(row point, column point, weight)`` triplets with cloud indices on both sides."""
    rows = _rows(E, pou.space.n)
    C = pou.centers
    coo = M.tocoo()
    order = np.lexsort((coo.col, coo.row))
    return [(int(rows[coo.row[i]]), int(C[coo.col[i]]), float(coo.data[i])) for i in order]


def seminorm(values, T=None) -> float:
    """``max_{x in T} |v(x)|``; ``T`` indexes into ``values`` when given."""
    v = np.asarray(values)
    if T is not None:
        v = v[_rows(T, v.shape[0])]
    if v.size == 0:
        raise ValueError("seminorm over an empty set")
    return float(np.max(np.abs(v)))


def rank_on(pou: PartitionOfUnity, T) -> int:
    """Number of rank-one terms that do not vanish on ``T``."""
    return int(active_centers_on(pou.space, pou.net, _rows(T, pou.space.n)).size)
