import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.metrics import adjusted_rand_score

from polyclust import PolytopeClustering
from polyclust.synth import blobs, minmax


@pytest.fixture
def data():
    X, y = blobs(3, 60, sep=10, seed=2)
    return minmax(X), y


def test_params_and_clone():
    est = PolytopeClustering(n_clusters=3, max_coef=2, reg=0.1)
    assert est.get_params()["max_coef"] == 2
    assert clone(est).get_params() == est.get_params()


def test_fit_predict(data):
    X, y = data
    est = PolytopeClustering(n_clusters=3, n_init=2).fit(X)
    assert adjusted_rand_score(y, est.labels_) == 1.0
    assert np.array_equal(est.predict(X), est.labels_)
    assert np.array_equal(PolytopeClustering(n_clusters=3, n_init=2).fit_predict(X), est.labels_)
    assert est.transform(X).shape == (60, 3)
    assert est.cluster_centers_.shape == (3, 2)


def test_not_fitted():
    with pytest.raises(NotFittedError):
        PolytopeClustering().predict(np.zeros((2, 2)))


def test_feature_names_from_dataframe(data):
    pd = pytest.importorskip("pandas")
    X, _ = data
    df = pd.DataFrame(X, columns=["width", "height"])
    est = PolytopeClustering(n_clusters=3).fit(df)
    text = " ".join(est.explain(k).inline for k in range(est.n_clusters_))
    assert "width" in text or "height" in text
    assert est.compare(0, 1).startswith("IF ")


def test_separate_explanation_view(data):
    X, y = data
    Xe = np.column_stack([X, (X[:, 0] > 0.5).astype(float)])
    est = PolytopeClustering(n_clusters=3).fit(X, X_explain=Xe)
    assert len(next(iter(est.hyperplanes_.values())).w) == 3
    with pytest.raises(ValueError):
        est.predict(X)
    assert est.predict(X, X_explain=Xe).shape == (60,)


def test_wrong_width(data):
    X, _ = data
    est = PolytopeClustering(n_clusters=3).fit(X)
    with pytest.raises(ValueError):
        est.predict(X[:, :1])
