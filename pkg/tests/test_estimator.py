import numpy as np
import pytest
from scipy.spatial.distance import cdist
from sklearn.base import clone
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer
from sklearn.utils.estimator_checks import parametrize_with_checks

from pou_approx import FunctionOnM, MetricSpace, PartitionOfUnity, PartitionOfUnityRegressor, apply
from pou_approx.cover import CoverError


@parametrize_with_checks(
    [PartitionOfUnityRegressor()],
    # queries far from the training cloud are outside every bump and raise by design
    expected_failed_checks=lambda est: {"check_fit_idempotent": "uncovered query points raise CoverError"},
)
def test_sklearn_compatible(estimator, check):
    check(estimator)


@pytest.fixture
def cloud():
    rng = np.random.default_rng(0)
    X = rng.random((300, 2))
    y = np.sin(3 * X[:, 0]) + X[:, 1] ** 2
    return X, y


@pytest.mark.parametrize("kernel", ["hat", "cosine", "wendland_c2"])
@pytest.mark.parametrize("k", [1, 4, 16])
def test_predict_matches_operator(cloud, kernel, k):
    X, y = cloud
    est = PartitionOfUnityRegressor(k=k, kernel=kernel).fit(X, y)
    pou = PartitionOfUnity.build(MetricSpace.from_coords(X), k, kernel=kernel)
    assert np.array_equal(est.centers_, pou.centers)
    ref = apply(pou, FunctionOnM.tabulated(y))
    assert np.max(np.abs(est.predict(X) - ref)) <= 1e-12


def test_transform_rows_sum_to_one(cloud):
    X, y = cloud
    est = PartitionOfUnityRegressor(k=8).fit(X, y)
    W = est.transform(X)
    assert W.shape == (X.shape[0], est.centers_.size)
    assert np.max(np.abs(np.asarray(W.sum(axis=1)).ravel() - 1)) <= 1e-12
    assert W.min() >= 0


def test_constant_target_exact(cloud):
    X, _ = cloud
    est = PartitionOfUnityRegressor(k=4).fit(X, np.full(X.shape[0], 2.5))
    Q = np.random.default_rng(1).random((50, 2))
    assert np.max(np.abs(est.predict(Q) - 2.5)) <= 1e-12


def test_multi_output(cloud):
    X, y = cloud
    Y = np.column_stack([y, -2 * y])
    est = PartitionOfUnityRegressor(k=8).fit(X, Y)
    P = est.predict(X)
    assert P.shape == Y.shape
    assert np.allclose(P[:, 1], -2 * P[:, 0], rtol=1e-12, atol=1e-13)


def test_precomputed_matches_euclidean(cloud):
    X, y = cloud
    a = PartitionOfUnityRegressor(k=8).fit(X, y)
    b = PartitionOfUnityRegressor(k=8, metric="precomputed").fit(cdist(X, X), y)
    assert np.array_equal(a.centers_, b.centers_)
    Q = X[:40] + 0.001
    assert np.allclose(a.predict(Q), b.predict(cdist(Q, X)), rtol=1e-12, atol=1e-13)
    with pytest.raises(ValueError):
        b.predict(cdist(Q, X[:10]))


def test_uncovered_query_raises(cloud):
    X, y = cloud
    est = PartitionOfUnityRegressor(k=16).fit(X, y)
    with pytest.raises(CoverError, match="row 1"):
        est.predict(np.array([[0.5, 0.5], [5.0, 5.0]]))


def test_duplicate_rows_are_averaged():
    X = np.array([[0.0], [0.0], [3.0]])
    est = PartitionOfUnityRegressor(k=1).fit(X, [1.0, 3.0, 7.0])
    assert est.centers_.tolist() == [0, 2]
    assert est.center_values_.tolist() == [2.0, 7.0]
    assert est.predict([[0.0], [3.0]]).tolist() == [2.0, 7.0]


def test_params_and_clone():
    est = PartitionOfUnityRegressor(k=3, rho=0.5, kernel="cosine", metric="manhattan")
    assert est.get_params() == {"k": 3, "rho": 0.5, "kernel": "cosine", "metric": "manhattan"}
    c = clone(est)
    assert c.get_params() == est.get_params() and c is not est


@pytest.mark.parametrize("bad", [{"k": 0}, {"k": 1.5}, {"rho": 0.0}, {"rho": 2.0},
                                 {"kernel": "gauss"}, {"metric": "cosine"}])
def test_bad_params(bad, cloud):
    X, y = cloud
    with pytest.raises(ValueError):
        PartitionOfUnityRegressor(**bad).fit(X, y)


def test_in_pipeline(cloud):
    X, y = cloud
    pipe = make_pipeline(FunctionTransformer(lambda Z: Z * 0.5), PartitionOfUnityRegressor(k=4))
    pipe.fit(X, y)
    assert pipe.predict(X).shape == y.shape
    assert 0.0 < pipe.score(X, y) <= 1.0
