import math

import numpy as np
import pytest

from pou_approx import MetricSpace, Net, PartitionOfUnity, active_centers, multiplicity
from pou_approx.cover import CoverError
from pou_approx.partition import KERNELS, check_partition, cosine, get_kernel, hat, wendland_c2

from .conftest import KERNELS as KERNEL_NAMES
from .conftest import SPACES


@pytest.mark.parametrize("phi", [hat, cosine, wendland_c2])
def test_kernel_shape(phi):
    u = np.linspace(0, 1.5, 301)
    v = phi(u)
    assert phi(0.0) == 1.0
    assert np.all(v[u >= 1] == 0.0)
    assert np.all(v[u < 1] > 0.0)
    assert np.all(np.diff(v) <= 0.0)
    assert np.all((0 <= v) & (v <= 1))


def test_kernel_formulas():
    u = np.array([0.1, 0.37, 0.8])
    assert np.allclose(hat(u), 1 - u)
    assert np.allclose(cosine(u), (1 + np.cos(np.pi * u)) / 2, atol=1e-15)
    assert np.allclose(wendland_c2(u), (1 - u) ** 4 * (4 * u + 1))


def test_cosine_positive_just_below_one():
    u = np.nextafter(1.0, 0.0)
    assert cosine(u) > 0.0


def test_kernel_alias():
    assert get_kernel("wendland")[0] == "wendland_c2"
    with pytest.raises(ValueError):
        get_kernel("gauss")


def test_isolated_center_weight_one():
    space = MetricSpace.from_coords([0.0, 3.0])
    pou = PartitionOfUnity.build(space, 1)
    assert pou.eval_bump(0, 0) == 1.0
    assert pou.eval_all(1) == {1: 1.0}


def test_equidistant_point_splits_evenly():
    # point 2 sits halfway between the two centres, both within rho/k = 1
    space = MetricSpace.from_coords([0.0, 1.6, 0.8])
    for kernel in KERNEL_NAMES:
        pou = PartitionOfUnity(space, Net((0, 1), k=1, rho=1.0), kernel)
        assert pou.eval_all(2) == {0: 0.5, 1: 0.5}


def two_pass_weights(dists, h, phi):
    raw = [phi(d / h) if d < h else 0.0 for d in dists]
    total = 0.0
    for v in raw:
        total += v
    return [v / total for v in raw]


def test_grid_hat_example(grid11):
    pou = PartitionOfUnity.build(grid11, k=1, rho=1.0, kernel="hat")
    assert [grid11.coords[c, 0] for c in pou.centers] == [0.0, 0.5, 1.0]
    x = 2
    dists = [grid11.distance(x, int(t)) for t in pou.centers]
    ref = two_pass_weights(dists, 1.0, lambda u: 1 - u)
    assert ref == pytest.approx([0.8 / 1.7, 0.7 / 1.7, 0.2 / 1.7], rel=1e-15)
    got = pou.eval_all(x)
    assert list(got) == [0, 5, 10]
    assert list(got.values()) == pytest.approx(ref, rel=1e-15)


@pytest.mark.parametrize("kernel", KERNEL_NAMES)
def test_eval_all_matches_per_center_eval(spaces, kernel):
    space = spaces["graph_path"]
    pou = PartitionOfUnity.build(space, 8, kernel=kernel)
    for x in range(0, space.n, 7):
        row = pou.eval_all(x)
        assert list(row) == list(active_centers(space, pou.net, x))
        for t, w in row.items():
            assert pou.eval_bump(t, x) == w
        assert abs(sum(row.values()) - 1.0) <= 1e-9


def test_eval_all_single_point():
    space = MetricSpace.discrete(n=1)
    assert PartitionOfUnity.build(space, 2).eval_all(0) == {0: 1.0}


def test_eval_bump_rejects_non_center(grid11):
    pou = PartitionOfUnity.build(grid11, 1, rho=1.0)
    with pytest.raises(ValueError):
        pou.eval_bump(3, 0)


def test_uncovered_point_is_hard_error():
    space = MetricSpace.from_coords([0.0, 1.0, 2.0])
    pou = PartitionOfUnity(space, Net((0,), k=1, rho=0.99), "hat")
    with pytest.raises(CoverError, match="point 2"):
        pou.weights([2])


@pytest.mark.parametrize("name", sorted(SPACES))
@pytest.mark.parametrize("kernel", KERNEL_NAMES)
@pytest.mark.parametrize("k", [1, 4, 16, 64])
def test_partition_identities(spaces, name, kernel, k):
    space = spaces[name]
    pou = PartitionOfUnity.build(space, k, kernel=kernel)
    rep = check_partition(pou)
    assert rep["ok"], rep
    assert rep["max_multiplicity"] == multiplicity(space, pou.net)[0]


def test_strict_rejects_rho_one(grid11):
    with pytest.raises(ValueError):
        PartitionOfUnity.build(grid11, 1, rho=1.0, strict=True)
    assert PartitionOfUnity.build(grid11, 1, rho=1.0).open_support_only


def test_support_strictly_inside_unit_ball(spaces):
    space = spaces["random_2d"]
    for k in (2, 8):
        pou = PartitionOfUnity.build(space, k, rho=0.99)
        W = pou.weights(np.arange(space.n))
        D = space.block(np.arange(space.n), pou.centers)
        assert np.all(D[W > 0] < 0.99 / k)
        assert np.all(D[W > 0] < 1.0 / k)


def test_kernel_registry_complete():
    assert set(KERNELS) == {"hat", "cosine", "wendland_c2"}
    assert math.isclose(KERNELS["wendland_c2"](np.array(0.5)), 0.5 ** 4 * 3)
