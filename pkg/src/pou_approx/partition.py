"""Normalized compactly supported bumps forming a partition of unity.

For a net at scale ``k`` the weight of centre ``t`` at point ``x`` is

    eta_t(x) = phi(d(x, t) / h) / Z(x),    Z(x) = sum_s phi(d(x, s) / h),

with ``h = rho / k`` and ``phi`` one of the kernels below. ``Z`` is summed
left to right in ascending centre order, so every evaluation path that sums
in that order gets the same bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cover import CoverError, Net, build_greedy_net, check_scale
from .metric_space import MetricSpace


def hat(u):
    u = np.asarray(u, dtype=float)
    return np.where(u < 1.0, 1.0 - u, 0.0)


def cosine(u):
    # (1 + cos(pi u)) / 2 rewritten as sin^2(pi (1 - u) / 2): stays positive for u just below 1
    u = np.asarray(u, dtype=float)
    v = np.where(u < 1.0, 1.0 - u, 0.0)
    return np.sin(0.5 * np.pi * v) ** 2


def wendland_c2(u):
    u = np.asarray(u, dtype=float)
    v = np.where(u < 1.0, 1.0 - u, 0.0)
    return v ** 4 * (4.0 * u + 1.0)


KERNELS = {"hat": hat, "cosine": cosine, "wendland_c2": wendland_c2}
KERNEL_ALIASES = {"wendland": "wendland_c2"}


def get_kernel(name: str):
    name = KERNEL_ALIASES.get(name, name)
    try:
        return name, KERNELS[name]
    except KeyError:
        raise ValueError(f"unknown kernel {name!r}; choose from {sorted(KERNELS)}") from None


def sequential_row_sum(A: np.ndarray) -> np.ndarray:
    """Left-to-right row sums; ``cumsum`` is strictly sequential, unlike ``sum``."""
    if A.shape[1] == 0:
        return np.zeros(A.shape[0])
    return np.cumsum(A, axis=1)[:, -1]


@dataclass(frozen=True, eq=False)
class PartitionOfUnity:
    """Partition of unity subordinate to the balls ``U(t, rho/k)`` of a net."""

    space: MetricSpace
    net: Net
    kernel: str = "hat"

    def __post_init__(self):
        name, _ = get_kernel(self.kernel)
        object.__setattr__(self, "kernel", name)

    @classmethod
    def build(cls, space: MetricSpace, k: int, rho: float = 0.99, kernel: str = "hat",
              strict: bool = False) -> PartitionOfUnity:
        check_scale(k, rho)
        if strict and rho >= 1.0:
            raise ValueError("rho = 1 gives open-support bumps only; rejected in strict mode")
        return cls(space, build_greedy_net(space, k, rho), kernel)

    @property
    def k(self) -> int:
        return self.net.k

    @property
    def rho(self) -> float:
        return self.net.rho

    @property
    def support(self) -> float:
        return self.net.support

    @property
    def open_support_only(self) -> bool:
        return self.rho >= 1.0

    @property
    def centers(self) -> np.ndarray:
        return self.net.center_array()

    def phi(self, u):
        return KERNELS[self.kernel](u)

    def weights(self, rows) -> np.ndarray:
        """Dense ``len(rows) x len(centers)`` block of ``eta_t(x)``."""
        rows = np.asarray(rows, dtype=np.intp).reshape(-1)
        D = self.space.block(rows, self.centers)
        raw = np.where(D < self.support, self.phi(D / self.support), 0.0)
        Z = sequential_row_sum(raw)
        bad = np.flatnonzero(~(Z > 0.0))
        if bad.size:
            raise CoverError(
                f"normalizer Z(x) = {Z[bad[0]]!r} at point {int(rows[bad[0]])}; covering invariant violated"
            )
        return raw / Z[:, None]

    def eval_bump(self, t: int, x: int) -> float:
        pos = np.searchsorted(self.centers, t)
        if pos >= len(self.centers) or self.centers[pos] != t:
            raise ValueError(f"{t} is not a centre of the net")
        return float(self.weights([x])[0, pos])

    def eval_all(self, x: int) -> dict[int, float]:
        """Sparse row at ``x``: active centre -> weight, in ascending centre order."""
        C = self.centers
        D = self.space.distances_from(x, C)
        active = D < self.support
        W = self.weights([x])[0]
        return {int(t): float(w) for t, w, a in zip(C, W, active) if a}

    def describe(self) -> dict:
        return {
            "k": self.k,
            "rho": self.rho,
            "kernel": self.kernel,
            "support_radius": self.support,
            "net_radius": self.net.radius,
            "n_centers": len(self.net),
            "open_support_only": self.open_support_only,
        }


def check_partition(pou: PartitionOfUnity, rows=None, chunk: int = 1024) -> dict:
    """Measure the partition identities over ``rows`` (default: every point).

    Reports the worst ``|sum_t eta_t(x) - 1|``, the weight range, weights that
    are nonzero outside the support ball, and rows where the nonzero count
    differs from the number of active centres.
    """
    rows = np.arange(pou.space.n) if rows is None else np.asarray(rows, dtype=np.intp).reshape(-1)
    C = pou.centers
    worst_sum, lo, hi = 0.0, np.inf, -np.inf
    support_violations = finiteness_violations = 0
    max_mult = 0
    for s in range(0, rows.size, chunk):
        r = rows[s:s + chunk]
        W = pou.weights(r)
        D = pou.space.block(r, C)
        active = D < pou.support
        worst_sum = max(worst_sum, float(np.max(np.abs(W.sum(axis=1) - 1.0))))
        lo, hi = min(lo, float(W.min())), max(hi, float(W.max()))
        support_violations += int(np.count_nonzero((W != 0.0) & ~active))
        finiteness_violations += int(np.count_nonzero((W != 0.0).sum(axis=1) != active.sum(axis=1)))
        max_mult = max(max_mult, int(active.sum(axis=1).max()))
    return {
        "k": pou.k,
        "kernel": pou.kernel,
        "max_sum_deviation": worst_sum,
        "min_weight": lo,
        "max_weight": hi,
        "support_violations": support_violations,
        "local_finiteness_violations": finiteness_violations,
        "max_multiplicity": max_mult,
        "ok": (worst_sum <= 1e-9 and lo >= 0.0 and hi <= 1.0
               and support_violations == 0 and finiteness_violations == 0),
    }
