import numpy as np
import pytest

from pou_approx import MetricSpace, Net, active_centers, active_centers_on, build_greedy_net, multiplicity
from pou_approx.cover import check_net

from .conftest import SPACES


def greedy_by_hand(space, r):
    centers = []
    for i in range(space.n):
        if all(space.distance(i, c) >= r for c in centers):
            centers.append(i)
    return centers


def test_single_point_cloud():
    space = MetricSpace.from_coords([[0.3, 0.4]])
    for k in (1, 7, 100):
        assert build_greedy_net(space, k).centers == (0,)


def test_grid_example(grid11):
    net = build_greedy_net(grid11, k=1, rho=1.0)
    assert net.radius == 0.5
    assert [grid11.coords[c, 0] for c in net.centers] == [0.0, 0.5, 1.0]
    check_net(grid11, net)


@pytest.mark.parametrize("name", sorted(SPACES))
@pytest.mark.parametrize("k", [1, 3, 8, 32])
def test_net_matches_hand_scan_and_invariants(spaces, name, k):
    space = spaces[name]
    if space.n > 150:
        space = MetricSpace.from_coords(space.coords[:150]) if space.coords is not None else space
    net = build_greedy_net(space, k, 0.99)
    r = 0.99 / (2 * k)
    assert list(net.centers) == greedy_by_hand(space, r)
    D = space.distance_matrix()
    C = list(net.centers)
    for x in range(space.n):
        assert min(D[x, c] for c in C) < r
    for a in C:
        for b in C:
            if a != b:
                assert D[a, b] >= r


def test_net_deterministic(spaces):
    space = spaces["random_2d"]
    assert build_greedy_net(space, 8).centers == build_greedy_net(space, 8).centers


def test_bad_scale():
    space = MetricSpace.discrete(n=3)
    with pytest.raises(ValueError):
        build_greedy_net(space, 0)
    with pytest.raises(ValueError):
        build_greedy_net(space, 1, rho=1.5)
    with pytest.raises(ValueError):
        build_greedy_net(space, 1, rho=0.0)


def test_net_json_round_trip(spaces):
    net = build_greedy_net(spaces["grid_1d"], 4)
    back = Net.from_json(net.to_json())
    assert back == net
    assert set(net.to_dict()) == {"k", "rho", "r", "centers"}


def test_active_centers_single_point():
    space = MetricSpace.from_coords([[1.0]])
    net = build_greedy_net(space, 3)
    assert list(active_centers(space, net, 0)) == [0]


def test_active_centers_grid_example(grid11):
    net = build_greedy_net(grid11, k=1, rho=1.0)
    x = 2  # coordinate 0.2
    got = [grid11.coords[t, 0] for t in active_centers(grid11, net, x)]
    # distances 0.2, 0.3, 0.8 are all < rho/k = 1
    assert got == [0.0, 0.5, 1.0]


@pytest.mark.parametrize("name", sorted(SPACES))
def test_active_centers_match_filter(spaces, name):
    space = spaces[name]
    net = build_greedy_net(space, 16)
    for x in range(0, space.n, max(1, space.n // 40)):
        ref = [t for t in net.centers if space.distance(x, t) < net.support]
        assert list(active_centers(space, net, x)) == ref


def test_active_centers_on_whole_cloud(spaces):
    space = spaces["random_2d"]
    net = build_greedy_net(space, 4)
    got = set(active_centers_on(space, net, range(space.n)).tolist())
    ref = {t for t in net.centers if any(space.distance(x, t) < net.support for x in range(space.n))}
    assert got == ref


def test_active_centers_on_isolated_center():
    space = MetricSpace.from_coords([0.0, 5.0, 10.0])
    net = build_greedy_net(space, 1)
    assert list(active_centers_on(space, net, [1])) == [1]


def test_active_centers_on_matches_union(spaces):
    space = spaces["graph_path"]
    net = build_greedy_net(space, 8)
    rng = np.random.default_rng(0)
    T = rng.choice(space.n, size=15, replace=False)
    ref = set()
    for x in T:
        ref |= set(active_centers(space, net, x).tolist())
    assert set(active_centers_on(space, net, T).tolist()) == ref


def test_multiplicity_single_center():
    space = MetricSpace.from_coords([[0.0]])
    assert multiplicity(space, build_greedy_net(space, 1))[0] == 1


@pytest.mark.parametrize("k", [1, 2, 4, 8, 16, 32, 64])
def test_multiplicity_on_line_at_most_four(spaces, k):
    space = spaces["grid_1d"]
    net = build_greedy_net(space, k)
    mx, hist = multiplicity(space, net)
    assert mx <= 4
    counts = [sum(space.distance(x, t) < net.support for t in net.centers) for x in range(space.n)]
    assert mx == max(counts)
    assert hist == {c: counts.count(c) for c in sorted(set(counts))}
