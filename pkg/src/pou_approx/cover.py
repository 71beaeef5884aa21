"""Greedy nets and ball covers at scale ``k``.

A net at scale ``k`` with shrink ``rho`` uses radius ``r = rho / (2k)``;
bumps centred on net points have support radius ``h = rho / k = 2r``.
Covering (every point within ``< r`` of a centre) then guarantees that each
point sits strictly inside at least one bump.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .metric_space import CompactSubset, MetricSpace


class CoverError(RuntimeError):
    """A net invariant failed; carries the offending point."""


def check_scale(k: int, rho: float) -> None:
    if int(k) != k or k < 1:
        raise ValueError(f"scale k must be a positive integer, got {k!r}")
    if not 0.0 < rho <= 1.0:
        raise ValueError(f"shrink rho must lie in (0, 1], got {rho!r}")


@dataclass(frozen=True)
class Net:
    """Centre indices of a greedy net together with its scale parameters."""

    centers: tuple[int, ...]
    k: int
    rho: float

    def __post_init__(self):
        ordered = tuple(sorted(set(int(c) for c in self.centers)))
        if len(ordered) != len(self.centers):
            raise ValueError("net centres must be distinct")
        object.__setattr__(self, "centers", ordered)

    @property
    def radius(self) -> float:
        return self.rho / (2 * self.k)

    @property
    def support(self) -> float:
        return self.rho / self.k

    def center_array(self) -> np.ndarray:
        return np.asarray(self.centers, dtype=np.intp)

    def __len__(self):
        return len(self.centers)

    def to_dict(self) -> dict:
        return {"k": self.k, "rho": self.rho, "r": self.radius, "centers": list(self.centers)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> Net:
        net = cls(centers=tuple(int(c) for c in data["centers"]), k=int(data["k"]),
                  rho=float(data["rho"]))
        check_scale(net.k, net.rho)
        if "r" in data and float(data["r"]) != net.radius:
            raise ValueError(f"stored radius {data['r']!r} disagrees with rho/(2k) = {net.radius!r}")
        return net

    @classmethod
    def from_json(cls, text: str) -> Net:
        return cls.from_dict(json.loads(text))


def build_greedy_net(space: MetricSpace, k: int, rho: float = 0.99) -> Net:
    """Scan points in index order, admitting each one farther than ``r`` from all centres so far.

    Implemented with a "covered" mask: once a centre is admitted, every point
    strictly within ``r`` of it is marked, and a later point is admitted iff
    it is still unmarked. This is the same rule, evaluated one row at a time.
    """
    check_scale(k, rho)
    r = rho / (2 * k)
    covered = np.zeros(space.n, dtype=bool)
    centers = []
    everyone = np.arange(space.n)
    for i in range(space.n):
        if covered[i]:
            continue
        centers.append(i)
        covered |= space.block([i], everyone)[0] < r
    return Net(centers=tuple(centers), k=int(k), rho=float(rho))


def check_net(space: MetricSpace, net: Net) -> None:
    """Raise :class:`CoverError` if covering or separation fails (exhaustive)."""
    C = net.center_array()
    r = net.radius
    if C.size == 0:
        raise CoverError("net has no centres")
    for start in range(0, space.n, 1024):
        rows = np.arange(start, min(space.n, start + 1024))
        B = space.block(rows, C)
        uncovered = np.flatnonzero(B.min(axis=1) >= r)
        if uncovered.size:
            raise CoverError(f"point {int(rows[uncovered[0]])} is not within r = {r!r} of any centre")
    S = space.block(C, C)
    np.fill_diagonal(S, np.inf)
    if S.min() < r:
        a, b = np.unravel_index(np.argmin(S), S.shape)
        raise CoverError(f"centres {int(C[a])} and {int(C[b])} are closer than r = {r!r}")


def active_centers(space: MetricSpace, net: Net, x: int) -> np.ndarray:
    """Centres whose bump can be nonzero at ``x``: ``{t : d(x, t) < rho/k}``."""
    C = net.center_array()
    d = space.distances_from(x, C)
    out = C[d < net.support]
    if out.size == 0:
        raise CoverError(f"no active centre at point {int(x)}; the net does not cover it")
    return out


def active_mask(space: MetricSpace, net: Net, rows) -> np.ndarray:
    """Boolean ``len(rows) x len(centers)`` table of ``d(x, t) < rho/k``."""
    return space.block(rows, net.center_array()) < net.support


def active_centers_on(space: MetricSpace, net: Net, T) -> np.ndarray:
    """The finite set of centres whose bumps do not vanish identically on ``T``."""
    rows = _as_indices(T)
    if rows.size == 0:
        raise ValueError("T must be nonempty")
    C = net.center_array()
    hit = np.zeros(C.size, dtype=bool)
    for start in range(0, rows.size, 1024):
        hit |= active_mask(space, net, rows[start:start + 1024]).any(axis=0)
    return C[hit]


def multiplicity(space: MetricSpace, net: Net, eval_points=None) -> tuple[int, dict[int, int]]:
    """Largest number of overlapping bumps over ``eval_points`` and the count histogram."""
    rows = np.arange(space.n) if eval_points is None else _as_indices(eval_points)
    counts = []
    for start in range(0, rows.size, 1024):
        counts.append(active_mask(space, net, rows[start:start + 1024]).sum(axis=1))
    counts = np.concatenate(counts) if counts else np.zeros(0, dtype=int)
    hist = Counter(int(c) for c in counts)
    return (int(counts.max()) if counts.size else 0), dict(sorted(hist.items()))


def _as_indices(T) -> np.ndarray:
    if isinstance(T, CompactSubset):
        return T.as_array()
    return np.asarray(list(T) if not isinstance(T, np.ndarray) else T, dtype=np.intp).reshape(-1)
