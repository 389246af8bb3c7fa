import numpy as np
import pytest

from polyclust import Dataset, binarize, load_csv
from polyclust.dataset import DistanceProvider, FeatureSpec

from oracles import naive_distances


def write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_numeric_column_is_minmax_scaled(tmp_path):
    ds = load_csv(write(tmp_path, "a\n2\n4\n6\n"))
    assert ds.points[:, 0].tolist() == [0.0, 0.5, 1.0]
    assert ds.raw_min[0] == 2 and ds.raw_max[0] == 6


def test_categorical_column_is_one_hot(tmp_path):
    ds = load_csv(write(tmp_path, "color,v\nred,1\nblue,2\nred,3\n"))
    assert ds.columns[:2] == ("color=red", "color=blue")
    assert ds.points[:, :2].tolist() == [[1, 0], [0, 1], [1, 0]]
    assert ds.binary_columns[:2].all()


def test_missing_rows_dropped(tmp_path):
    ds = load_csv(write(tmp_path, "a,b\n1,2\nNA,3\n4,\n5,6\n"))
    assert ds.n == 2
    assert ds.dropped_rows == 2


def test_constant_column_warns_and_zeros(tmp_path):
    with pytest.warns(UserWarning, match="constant"):
        ds = load_csv(write(tmp_path, "a,b\n1,7\n2,7\n3,7\n"))
    assert ds.constant_columns == ("b",)
    assert np.all(ds.points[:, 1] == 0)


def test_schema_overrides_inference(tmp_path):
    path = write(tmp_path, "zip,flag\n10,0\n20,1\n10,1\n")
    ds = load_csv(path, schema={"zip": "categorical", "flag": "binary"})
    assert ds.columns == ("zip=10", "zip=20", "flag")
    ds2 = load_csv(path, schema=[FeatureSpec("zip", "categorical")])
    assert ds2.columns[:2] == ("zip=10", "zip=20")


def test_schema_file(tmp_path):
    path = write(tmp_path, "zip,v\n10,0\n20,1\n")
    schema = write(tmp_path, "zip: categorical\n", "schema.yaml")
    assert load_csv(path, schema=schema).columns == ("zip=10", "zip=20", "v")


@pytest.mark.parametrize("text, msg", [
    ("a\n", "no rows"),
    ("a,b\n1\n", "cells"),
    ("", "empty"),
])
def test_malformed_csv(tmp_path, text, msg):
    with pytest.raises(ValueError, match=msg):
        load_csv(write(tmp_path, text))


def test_bad_binary_column(tmp_path):
    with pytest.raises(ValueError, match="binary"):
        load_csv(write(tmp_path, "f\n0\n2\n"), schema={"f": "binary"})


def test_iris_shape():
    from sklearn.datasets import load_iris

    ds = Dataset.from_arrays(load_iris().data)
    assert (ds.n, ds.d) == (150, 4)


def test_iris_csv_roundtrip(tmp_path):
    from sklearn.datasets import load_iris

    iris = load_iris()
    lines = ["sl,sw,pl,pw"] + [",".join(map(repr, r)) for r in iris.data.tolist()]
    ds = load_csv(write(tmp_path, "\n".join(lines) + "\n"))
    assert (ds.n, ds.d) == (150, 4)
    assert ds.points.min() == 0.0 and ds.points.max() == 1.0


def test_distance_basics():
    ds = Dataset.from_arrays([[0.0, 0.0], [3.0, 4.0]])
    assert ds.distance(0, 0) == 0.0
    assert ds.distance(0, 1) == 5.0
    with pytest.raises(IndexError):
        ds.distance(0, 2)


@pytest.mark.parametrize("mode", ["precomputed_matrix", "on_demand"])
def test_distance_matches_double_loop(rng, mode):
    X = rng.random((10, 3))
    ref = naive_distances(X.tolist())
    dp = DistanceProvider(X, mode)
    got = np.array([[dp(a, b) for b in range(10)] for a in range(10)])
    np.testing.assert_allclose(got, ref, atol=1e-12)
    np.testing.assert_allclose(dp.columns([1, 4]), np.array(ref)[:, [1, 4]], atol=1e-12)


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset.from_arrays([[0.0]])
    with pytest.raises(ValueError):
        Dataset.from_arrays([[0.0], [np.nan]])
    with pytest.raises(ValueError):
        Dataset.from_arrays([[0.0], [1.0]], [[0.0]])


def test_separate_explanation_view():
    ds = Dataset.from_arrays([[0.0], [1.0], [2.0]], [[1, 0], [0, 1], [0, 1]],
                             explain_columns=("hair", "milk"))
    assert ds.d == 1 and ds.d_explain == 2
    assert ds.binary_columns.tolist() == [True, True]


def test_binarize(tmp_path):
    ds = load_csv(write(tmp_path, "legs\n0\n2\n4\n8\n"))
    b = binarize(ds, {"legs": [1, 4]})
    assert b.explain_columns == ("legs >= 1", "legs >= 4")
    assert b.explain_points.tolist() == [[0, 0], [1, 0], [1, 1], [1, 1]]
    assert np.array_equal(b.points, ds.points)
