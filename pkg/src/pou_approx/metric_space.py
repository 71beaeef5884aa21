"""Finite samples of a metric space with a validated distance oracle.

A :class:`MetricSpace` bundles a point cloud (ids plus optional coordinates)
with one of six distance kinds. Distances are served either from a dense
all-pairs table built at load time or, for large coordinate clouds, computed
per block with :func:`scipy.spatial.distance.cdist`. Both routes yield
bit-identical values for the same pair, so threshold tests such as
``d < h`` agree no matter which code path asked.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path
from scipy.spatial.distance import cdist

COORD_KINDS = ("euclidean", "manhattan", "chebyshev")
KINDS = COORD_KINDS + ("discrete", "graph", "precomputed")

_CDIST_NAME = {"euclidean": "euclidean", "manhattan": "cityblock", "chebyshev": "chebyshev"}

# coordinate clouds up to this size get a dense table at load
DENSE_TABLE_MAX = 4096
GRAPH_MAX = 10_000
SYMMETRY_TOL = 1e-12


class MetricError(ValueError):
    """Raised when a point cloud or metric fails load-time validation."""


@dataclass(frozen=True)
class CompactSubset:
    """A nonempty set of distinct cloud indices, kept in ascending order."""

    indices: tuple[int, ...]

    def __post_init__(self):
        if len(self.indices) == 0:
            raise ValueError("compact subset must be nonempty")
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("compact subset indices must be distinct")

    @classmethod
    def of(cls, indices, n: int) -> CompactSubset:
        idx = sorted(int(i) for i in indices)
        for i in idx:
            if not 0 <= i < n:
                raise IndexError(f"index {i} out of range for cloud of size {n}")
        return cls(tuple(idx))

    @classmethod
    def whole(cls, n: int) -> CompactSubset:
        return cls(tuple(range(n)))

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp)


@dataclass(frozen=True, eq=False)
class MetricSpace:
    """Finite metric space: point ids, optional coordinates and a distance kind.

    Use the ``from_*`` constructors; they validate the input and prepare the
    distance table. Instances are immutable and safe to share across threads.
    """

    ids: tuple
    kind: str
    coords: np.ndarray | None = None
    table: np.ndarray | None = field(default=None, repr=False)
    edges: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.ids) < 1:
            raise MetricError("point cloud must contain at least one point")
        if len(set(self.ids)) != len(self.ids):
            raise MetricError("point ids must be unique")
        if self.kind not in KINDS:
            raise MetricError(f"unknown metric kind {self.kind!r}")
        if self.coords is not None:
            if self.coords.ndim != 2 or self.coords.shape[0] != len(self.ids):
                raise MetricError("coordinates must form an n x dim array")
            if not np.all(np.isfinite(self.coords)):
                raise MetricError("coordinates must be finite")
        if self.kind in COORD_KINDS and self.coords is None:
            raise MetricError(f"metric {self.kind!r} needs coordinates")
        for arr in (self.coords, self.table):
            if arr is not None:
                arr.setflags(write=False)

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_coords(cls, coords, kind: str = "euclidean", ids=None) -> MetricSpace:
        X = np.asarray(coords, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if ids is None:
            ids = range(X.shape[0])
        if kind not in COORD_KINDS:
            raise MetricError(f"{kind!r} is not a coordinate metric")
        X = np.ascontiguousarray(X)
        if X.shape[0] >= 2:
            # norm metrics vanish exactly on identical coordinate rows
            uniq = np.unique(X, axis=0)
            if uniq.shape[0] != X.shape[0]:
                raise MetricError("duplicate points in cloud (d = 0 between distinct ids)")
        table = None
        if X.shape[0] <= DENSE_TABLE_MAX:
            table = cdist(X, X, metric=_CDIST_NAME[kind])
        space = cls(ids=tuple(ids), kind=kind, coords=X, table=table)
        if table is not None:
            _check_table_distinct(table)
        return space

    @classmethod
    def discrete(cls, n: int | None = None, ids=None, coords=None) -> MetricSpace:
        if ids is None:
            if n is None:
                raise MetricError("discrete metric needs n or ids")
            ids = range(n)
        X = None if coords is None else np.asarray(coords, dtype=float).reshape(len(tuple(ids)), -1)
        return cls(ids=tuple(ids), kind="discrete", coords=X)

    @classmethod
    def from_table(cls, table, ids=None, coords=None) -> MetricSpace:
        D = np.array(table, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise MetricError("precomputed distance table must be square")
        if not np.all(np.isfinite(D)):
            raise MetricError("precomputed distance table has non-finite entries")
        asym = np.abs(D - D.T)
        if asym.max(initial=0.0) > SYMMETRY_TOL:
            i, j = np.unravel_index(np.argmax(asym), asym.shape)
            raise MetricError(
                f"precomputed table is asymmetric at ({i}, {j}): "
                f"{D[i, j]!r} vs {D[j, i]!r}"
            )
        D = 0.5 * (D + D.T)
        if np.any(np.diag(D) != 0.0):
            i = int(np.flatnonzero(np.diag(D) != 0.0)[0])
            raise MetricError(f"precomputed table has nonzero diagonal at {i}")
        if np.any(D < 0):
            i, j = np.argwhere(D < 0)[0]
            raise MetricError(f"precomputed table has negative entry at ({i}, {j})")
        _check_table_distinct(D)
        if ids is None:
            ids = range(D.shape[0])
        X = None if coords is None else np.asarray(coords, dtype=float)
        return cls(ids=tuple(ids), kind="precomputed", coords=X, table=D)

    @classmethod
    def from_edges(cls, edges, n: int | None = None, ids=None, coords=None) -> MetricSpace:
        """Shortest-path metric of a weighted undirected graph.

        ``edges`` is a sequence of ``(i, j, w)`` with ``w >= 0``. The
        all-pairs table is computed once here.
        """
        edges = [(int(i), int(j), float(w)) for i, j, w in edges]
        if ids is not None:
            n = len(tuple(ids))
        if n is None:
            n = 1 + max((max(i, j) for i, j, _ in edges), default=-1)
        if n > GRAPH_MAX:
            raise MetricError(f"graph metric limited to {GRAPH_MAX} nodes, got {n}")
        for i, j, w in edges:
            if not (0 <= i < n and 0 <= j < n):
                raise MetricError(f"edge ({i}, {j}) references a node outside 0..{n - 1}")
            if not np.isfinite(w) or w < 0:
                raise MetricError(f"edge ({i}, {j}) has invalid weight {w!r}")
        # keep the lightest parallel edge; csgraph would otherwise sum duplicates
        best: dict[tuple[int, int], float] = {}
        for i, j, w in edges:
            if i == j:
                continue
            key = (min(i, j), max(i, j))
            best[key] = min(w, best.get(key, np.inf))
        if any(w == 0.0 for w in best.values()):
            raise MetricError("zero-weight edge joins distinct nodes (duplicate points)")
        rows = [a for a, _ in best] + [b for _, b in best]
        cols = [b for _, b in best] + [a for a, _ in best]
        vals = list(best.values()) * 2
        G = csr_matrix((vals, (rows, cols)), shape=(n, n))
        D = shortest_path(G, method="D", directed=False)
        if not np.all(np.isfinite(D)):
            i, j = np.argwhere(~np.isfinite(D))[0]
            raise MetricError(f"graph is disconnected: no path between {i} and {j}")
        D = np.minimum(D, D.T)
        if ids is None:
            ids = range(n)
        X = None if coords is None else np.asarray(coords, dtype=float)
        return cls(ids=tuple(ids), kind="graph", coords=X, table=D,
                   edges=tuple(edges))

    # -- queries --------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def dim(self) -> int | None:
        return None if self.coords is None else self.coords.shape[1]

    def _check_index(self, i) -> int:
        i = int(i)
        if not 0 <= i < self.n:
            raise IndexError(f"point index {i} out of range for cloud of size {self.n}")
        return i

    def distance(self, i: int, j: int) -> float:
        """Distance between points ``i`` and ``j``."""
        i, j = self._check_index(i), self._check_index(j)
        if self.table is not None:
            return float(self.table[i, j])
        if self.kind == "discrete":
            return 0.0 if i == j else 1.0
        return float(cdist(self.coords[i:i + 1], self.coords[j:j + 1],
                           metric=_CDIST_NAME[self.kind])[0, 0])

    def block(self, rows, cols) -> np.ndarray:
        """Distance block ``D[rows][:, cols]`` as a fresh float array."""
        rows = np.asarray(rows, dtype=np.intp).reshape(-1)
        cols = np.asarray(cols, dtype=np.intp).reshape(-1)
        for idx in (rows, cols):
            if idx.size and (idx.min() < 0 or idx.max() >= self.n):
                raise IndexError(f"point index out of range for cloud of size {self.n}")
        if self.table is not None:
            return self.table[np.ix_(rows, cols)]
        if self.kind == "discrete":
            return (rows[:, None] != cols[None, :]).astype(float)
        return cdist(self.coords[rows], self.coords[cols], metric=_CDIST_NAME[self.kind])

    def distances_from(self, i: int, targets=None) -> np.ndarray:
        i = self._check_index(i)
        if targets is None:
            targets = np.arange(self.n)
        return self.block([i], targets)[0]

    def distance_matrix(self) -> np.ndarray:
        return self.block(np.arange(self.n), np.arange(self.n))

    def distances_to_coords(self, x0) -> np.ndarray:
        """Distances from every cloud point to an outside coordinate vector."""
        if self.coords is None or self.kind not in COORD_KINDS:
            raise MetricError("distances to raw coordinates need a coordinate metric")
        x0 = np.asarray(x0, dtype=float).reshape(1, -1)
        if x0.shape[1] != self.dim:
            raise MetricError(f"point has dimension {x0.shape[1]}, cloud has {self.dim}")
        return cdist(self.coords, x0, metric=_CDIST_NAME[self.kind])[:, 0]

    def describe(self) -> dict:
        return {"kind": self.kind, "n": self.n, "dim": self.dim}


def _check_table_distinct(D: np.ndarray) -> None:
    off = D + np.diag(np.full(D.shape[0], np.inf))
    if D.shape[0] >= 2 and off.min() <= 0.0:
        i, j = np.unravel_index(np.argmin(off), off.shape)
        raise MetricError(f"duplicate points: d({i}, {j}) = 0 for distinct indices")


def min_pairwise_distance(space: MetricSpace, chunk: int = 1024) -> float:
    """Smallest distance between distinct points of the cloud."""
    n = space.n
    if n < 2:
        raise MetricError("minimum pairwise distance needs at least two points")
    if space.kind == "discrete":
        return 1.0
    best = np.inf
    idx = np.arange(n)
    for start in range(0, n, chunk):
        rows = idx[start:start + chunk]
        B = space.block(rows, idx)
        B[np.arange(rows.size), rows] = np.inf
        best = min(best, float(B.min()))
    if best <= 0.0:
        raise MetricError("duplicate points (d = 0 between distinct indices)")
    return best


@dataclass
class MetricValidationReport:
    n: int
    kind: str
    pairs_checked: int
    triples_checked: int
    exhaustive_triples: bool
    violations: list = field(default_factory=list)
    triangle_violation_count: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "pairs_checked": self.pairs_checked,
            "triples_checked": self.triples_checked,
            "exhaustive_triples": self.exhaustive_triples,
            "triangle_violation_count": self.triangle_violation_count,
            "ok": self.ok,
            "violations": self.violations,
        }


def validate_metric(space: MetricSpace, trial_count: int = 10_000, seed=0,
                    pair_cap: int = 1024, tol: float = 1e-12,
                    max_witnesses: int = 20) -> MetricValidationReport:
    """Check the metric axioms on the sample.

    Symmetry, zero diagonal and nonnegativity are checked on all pairs among
    the first ``pair_cap`` points. The triangle inequality is checked on every
    triple when ``n <= 64`` and otherwise on ``trial_count`` random triples.
    """
    if trial_count < 1:
        raise ValueError("trial_count must be positive")
    n = space.n
    violations: list[dict] = []

    def note(v):
        if len(violations) < max_witnesses:
            violations.append(v)

    m = min(n, pair_cap)
    idx = np.arange(m)
    D = space.block(idx, idx)
    diag = np.flatnonzero(np.diag(D) != 0.0)
    for i in diag:
        note({"axiom": "zero_diagonal", "witness": [int(i)], "value": float(D[i, i])})
    for i, j in np.argwhere(np.triu(np.abs(D - D.T) > tol)):
        note({"axiom": "symmetry", "witness": [int(i), int(j)],
              "value": float(D[i, j] - D[j, i])})
    for i, j in np.argwhere(D < 0):
        note({"axiom": "nonnegativity", "witness": [int(i), int(j)], "value": float(D[i, j])})
    zero_off = (D == 0.0) & ~np.eye(m, dtype=bool)
    for i, j in np.argwhere(np.triu(zero_off)):
        note({"axiom": "identity_of_indiscernibles", "witness": [int(i), int(j)], "value": 0.0})

    exhaustive = n <= 64
    if exhaustive:
        Dn = D if m == n else space.distance_matrix()
        # slack[i, j, l] = d(i,l) + d(l,j) - d(i,j)
        slack = Dn[:, None, :] + Dn.T[None, :, :] - Dn[:, :, None]
        bad = np.argwhere(slack < -tol)
        for i, j, l in bad:
            note({"axiom": "triangle", "witness": [int(i), int(j), int(l)],
                  "value": float(-slack[i, j, l])})
        n_bad = len(bad)
        triples = n ** 3
    else:
        rng = np.random.default_rng(seed)
        tr = rng.integers(0, n, size=(trial_count, 3))
        i, j, l = tr[:, 0], tr[:, 1], tr[:, 2]
        dij = _pairs(space, i, j)
        dil = _pairs(space, i, l)
        dlj = _pairs(space, l, j)
        excess = dij - (dil + dlj)
        bad = np.flatnonzero(excess > tol)
        for b in bad:
            note({"axiom": "triangle", "witness": [int(i[b]), int(j[b]), int(l[b])],
                  "value": float(excess[b])})
        n_bad = len(bad)
        triples = trial_count
    return MetricValidationReport(n=n, kind=space.kind, pairs_checked=m * m,
                                  triples_checked=int(triples),
                                  exhaustive_triples=exhaustive, violations=violations,
                                  triangle_violation_count=int(n_bad))


def _pairs(space: MetricSpace, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if space.table is not None:
        return space.table[a, b]
    if space.kind == "discrete":
        return (a != b).astype(float)
    return np.array([space.distance(x, y) for x, y in zip(a, b)])
