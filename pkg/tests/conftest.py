import numpy as np
import pytest
from scipy.sparse.csgraph import shortest_path

from pou_approx import FunctionOnM, MetricSpace

K_LIST = [1, 2, 4, 8, 16, 32, 64]
KERNELS = ["hat", "cosine", "wendland_c2"]


def grid_1d(n=257):
    return MetricSpace.from_coords(np.linspace(0.0, 1.0, n))


def random_2d(n=500, seed=7):
    return MetricSpace.from_coords(np.random.default_rng(seed).random((n, 2)))


def discrete(n=50, seed=11):
    coords = np.random.default_rng(seed).random((n, 1))
    return MetricSpace.discrete(n=n, coords=coords)


def graph_path(n=100, seed=3):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.01, 0.05, size=n - 1)
    edges = [(i, i + 1, w[i]) for i in range(n - 1)]
    pos = np.concatenate([[0.0], np.cumsum(w)])
    return MetricSpace.from_edges(edges, n=n, coords=pos[:, None])


def random_table_metric(n=64, seed=5):
    """Shortest-path closure of random complete-graph weights: a generic finite metric."""
    rng = np.random.default_rng(seed)
    W = rng.uniform(0.02, 1.0, size=(n, n))
    W = np.triu(W, 1)
    W = W + W.T
    D = shortest_path(W, method="FW", directed=False)
    return MetricSpace.from_table(D, coords=rng.random((n, 1)))


SPACES = {
    "grid_1d": grid_1d,
    "random_2d": random_2d,
    "discrete": discrete,
    "graph_path": graph_path,
    "random_table": random_table_metric,
}


def preset_family(space):
    """constant, projection, cone L in {1, 5}, polynomial, sin nu = 1..8."""
    if space.kind in ("euclidean", "manhattan", "chebyshev"):
        mid = [0.5] * space.dim
        cones = [FunctionOnM.cone(1.0, mid), FunctionOnM.cone(5.0, mid)]
    else:
        cones = [FunctionOnM.cone(1.0, center=space.n // 2), FunctionOnM.cone(5.0, center=space.n // 2)]
    return (
        [FunctionOnM.constant(2.5), FunctionOnM.projection(0)]
        + cones
        + [FunctionOnM.polynomial([0.5, -1.0, 0.0, 2.0])]
        + [FunctionOnM.sin(nu) for nu in range(1, 9)]
    )


@pytest.fixture(scope="session")
def spaces():
    return {name: make() for name, make in SPACES.items()}


@pytest.fixture
def grid11():
    return MetricSpace.from_coords(np.linspace(0.0, 1.0, 11))


# -- acceptance summary ---------------------------------------------------

ACCEPTANCE_RESULTS: dict = {}


@pytest.fixture
def acceptance():
    def record(number: int, title: str, ok: bool, detail: str = ""):
        ACCEPTANCE_RESULTS[number] = (title, ok, detail)
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        title, ok, detail = ACCEPTANCE_RESULTS[number]
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title}" + (f" -- {detail}" if detail else ""))
