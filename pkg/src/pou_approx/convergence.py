"""Error certificates, modulus of continuity, sweeps and equicontinuity checks."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .approximation import CHUNK, _combine, _rows, apply, center_values, function_values, seminorm
from .cover import active_centers_on, multiplicity
from .functions import FunctionOnM
from .metric_space import MetricSpace
from .partition import PartitionOfUnity, get_kernel

BOUND_TOL = 1e-12
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class ModulusEstimate:
    delta: float
    omega: float
    witness: tuple[int, int] | None  # (s, x) attaining omega, None if no admissible pair


def _family_modulus(space: MetricSpace, F: np.ndarray, D: np.ndarray, delta: float):
    """Per-row modulus of ``F`` (m functions x n points) over ordered pairs of ``D``.

    Returns ``(omega, s_idx, x_idx)`` arrays; witness indices are cloud indices,
    the first maximiser in row-major ``(s, x)`` order over ``D``.
    """
    m = F.shape[0]
    omega = np.zeros(m)
    wit_s = np.full(m, -1, dtype=np.intp)
    wit_x = np.full(m, -1, dtype=np.intp)
    FD = F[:, D]
    for start in range(0, D.size, CHUNK):
        srows = D[start:start + CHUNK]
        admissible = space.block(srows, D) < delta
        if not admissible.any():
            continue
        si, xi = np.nonzero(admissible)
        for j in range(m):
            gaps = np.abs(FD[j, start + si] - FD[j, xi])
            best = int(np.argmax(gaps))
            if gaps[best] > omega[j] or wit_s[j] < 0:
                omega[j] = float(gaps[best])
                wit_s[j], wit_x[j] = srows[si[best]], D[xi[best]]
    return omega, wit_s, wit_x


def modulus(space: MetricSpace, f, D, delta: float) -> ModulusEstimate:
    """``sup |f(s) - f(x)|`` over ordered pairs of ``D`` with ``d(s, x) < delta``."""
    D = _rows(D, space.n)
    if D.size == 0:
        raise ValueError("pair domain must be nonempty")
    vals = f.values(space) if isinstance(f, FunctionOnM) else np.asarray(f)
    omega, s, x = _family_modulus(space, vals[None, :], np.unique(D), delta)
    witness = None if s[0] < 0 else (int(s[0]), int(x[0]))
    return ModulusEstimate(float(delta), float(omega[0]), witness)


@dataclass(frozen=True)
class BoundCheck:
    error: float
    bound: float
    ok: bool
    witness: tuple[int, int] | None
    rank: int


def verify_bound(pou: PartitionOfUnity, f, T=None) -> BoundCheck:
    """Compare ``||P f - f||_T`` with the modulus of ``f`` at the support radius.

    The pair domain is ``T`` together with the centres active on ``T``, since
    the error at ``x`` compares ``f(x)`` with ``f(t)`` for active ``t``.
    """
    space = pou.space
    rows = _rows(T, space.n)
    vals = function_values(pou, f)
    err = seminorm(apply(pou, f, rows) - vals[rows])
    MT = active_centers_on(space, pou.net, rows)
    dom = np.union1d(rows, MT)
    est = modulus(space, vals, dom, pou.support)
    return BoundCheck(err, est.omega, err <= est.omega + BOUND_TOL, est.witness, int(MT.size))


@dataclass
class SweepEntry:
    k: int
    errors: list[float]
    bounds: list[float]
    family_error: float
    family_bound: float
    rank: int
    n_centers: int
    max_multiplicity: int
    bound_satisfied: bool
    open_support_only: bool


@dataclass
class ConvergenceReport:
    params: dict
    functions: list[str]
    entries: list[SweepEntry] = field(default_factory=list)

    @property
    def all_bounds_satisfied(self) -> bool:
        return all(e.bound_satisfied for e in self.entries)

    def trend(self) -> dict:
        fe = [e.family_error for e in self.entries]
        fb = [e.family_bound for e in self.entries]
        return {
            "family_error_nonincreasing": all(b <= a + BOUND_TOL for a, b in zip(fe, fe[1:])),
            "family_bound_nonincreasing": all(b <= a + BOUND_TOL for a, b in zip(fb, fb[1:])),
            "family_error_increases": [
                [self.entries[i].k, self.entries[i + 1].k]
                for i in range(len(fe) - 1) if fe[i + 1] > fe[i] + BOUND_TOL
            ],
            "all_bounds_satisfied": self.all_bounds_satisfied,
        }

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "functions": self.functions,
            "entries": [asdict(e) for e in self.entries],
            "trend": self.trend(),
        }


def _sweep_one(space, vals, T, k, rho, kernel) -> SweepEntry:
    pou = PartitionOfUnity.build(space, k, rho, kernel)
    FC = [center_values(pou, v) for v in vals]
    errors = [0.0] * vals.shape[0]
    for s in range(0, T.size, CHUNK):
        r = T[s:s + CHUNK]
        W = pou.weights(r)
        for j, fc in enumerate(FC):
            e = np.abs(_combine(W, fc) - vals[j][r])
            errors[j] = max(errors[j], float(e.max()))
    MT = active_centers_on(space, pou.net, T)
    dom = np.union1d(T, MT)
    omega, _, _ = _family_modulus(space, vals, dom, pou.support)
    bounds = [float(w) for w in omega]
    ok = all(e <= b + BOUND_TOL for e, b in zip(errors, bounds))
    mult, _ = multiplicity(space, pou.net, T)
    return SweepEntry(
        k=int(k), errors=errors, bounds=bounds,
        family_error=max(errors), family_bound=max(bounds),
        rank=int(MT.size), n_centers=len(pou.net), max_multiplicity=mult,
        bound_satisfied=ok, open_support_only=pou.open_support_only,
    )


def worker_count() -> int:
    """Worker cap from ``POU_APPROX_THREADS``; 0 or unset means sequential."""
    raw = os.environ.get("POU_APPROX_THREADS", "0").strip() or "0"
    try:
        return max(0, int(raw))
    except ValueError:
        raise ValueError(f"POU_APPROX_THREADS must be an integer, got {raw!r}") from None


def sweep(space: MetricSpace, family, k_list, T=None, rho: float = 0.99,
          kernel: str = "hat", threads: int | None = None) -> ConvergenceReport:
    """Rebuild net and partition at each ``k`` and record per-function errors and bounds."""
    k_list = [int(k) for k in k_list]
    if not k_list or any(k < 1 for k in k_list) or any(b <= a for a, b in zip(k_list, k_list[1:])):
        raise ValueError(f"k_list must be strictly increasing positive integers, got {k_list}")
    family = [FunctionOnM.from_spec(f) for f in family]
    if not family:
        raise ValueError("function family is empty")
    rows = _rows(T, space.n)
    if rows.size == 0:
        raise ValueError("T must be nonempty")
    vals = np.vstack([np.asarray(f.values(space)) for f in family])
    threads = worker_count() if threads is None else threads
    if threads > 0:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            entries = list(pool.map(lambda k: _sweep_one(space, vals, rows, k, rho, kernel), k_list))
    else:
        entries = [_sweep_one(space, vals, rows, k, rho, kernel) for k in k_list]
    params = {"rho": float(rho), "kernel": get_kernel(kernel)[0],
              "k_list": k_list, "T_size": int(rows.size), "space": space.describe()}
    return ConvergenceReport(params, [f.name for f in family], entries)


@dataclass(frozen=True)
class EquicontinuityVerdict:
    verdict: str  # "EQUICONTINUOUS_AT_SCALE" or "FAIL"
    delta: float
    epsilon: float
    sup_modulus: float
    witness: dict | None

    @property
    def passed(self) -> bool:
        return self.verdict == "EQUICONTINUOUS_AT_SCALE"

    def to_dict(self) -> dict:
        return asdict(self)


def equicontinuity_check(space: MetricSpace, family, D, delta: float, epsilon: float) -> EquicontinuityVerdict:
    """Decide whether every member of ``family`` moves by at most ``epsilon`` within ``delta``.

    On failure the witness names the function and the pair ``(s, x)`` with
    ``d(s, x) < delta`` and ``|f(s) - f(x)| > epsilon``; the largest such gap
    over the family is reported.
    """
    if not delta > 0 or not epsilon > 0:
        raise ValueError("delta and epsilon must be positive")
    family = [FunctionOnM.from_spec(f) for f in family]
    D = np.unique(_rows(D, space.n))
    if not family:
        return EquicontinuityVerdict("EQUICONTINUOUS_AT_SCALE", delta, epsilon, 0.0, None)
    vals = np.vstack([np.asarray(f.values(space)) for f in family])
    omega, s, x = _family_modulus(space, vals, D, delta)
    j = int(np.argmax(omega))
    sup = float(omega[j])
    if sup <= epsilon:
        return EquicontinuityVerdict("EQUICONTINUOUS_AT_SCALE", delta, epsilon, sup, None)
    witness = {
        "function_index": j,
        "function": family[j].name,
        "s": int(s[j]),
        "x": int(x[j]),
        "gap": sup,
        "distance": space.distance(s[j], x[j]),
    }
    return EquicontinuityVerdict("FAIL", delta, epsilon, sup, witness)


@dataclass(frozen=True)
class TailReport:
    errors: list[float]  # errors[m] for the prefix of length m, m = 0..len(ordering)
    first_zero: int | None  # smallest m with errors[m] <= ZERO_TOL
    covering_prefix: int  # smallest m whose prefix contains every centre active on T
    active_size: int

    def to_dict(self) -> dict:
        return asdict(self)


def rank_one_tail(pou: PartitionOfUnity, f, T=None, ordering=None) -> TailReport:
    """Seminorm of ``P_N f - P f`` on ``T`` along the prefixes ``N`` of ``ordering``.

    Each prefix sum is recomputed from scratch in ascending centre order.
    """
    C = pou.centers
    ordering = list(C) if ordering is None else [int(t) for t in ordering]
    if sorted(ordering) != list(C):
        raise ValueError("ordering must be a permutation of the net centres")
    rows = _rows(T, pou.space.n)
    MT = set(int(t) for t in active_centers_on(pou.space, pou.net, rows))
    pos = {int(t): j for j, t in enumerate(C)}
    fc = np.zeros(C.size, dtype=np.result_type(function_values(pou, f).dtype, float))
    fc[:] = center_values(pou, f)
    W = pou.weights(rows)
    full = _combine(W, fc)
    keep = np.zeros(C.size, dtype=bool)
    errors = [seminorm(full)]
    seen = set()
    covering = 0 if not MT else None
    for m, t in enumerate(ordering, start=1):
        keep[pos[t]] = True
        seen.add(t)
        part = _combine(W * keep[None, :], fc)
        errors.append(seminorm(part - full))
        if covering is None and MT <= seen:
            covering = m
    first_zero = next((m for m, e in enumerate(errors) if e <= ZERO_TOL), None)
    return TailReport(errors, first_zero, int(covering), len(MT))
