import csv
import json

import numpy as np
import pytest

from polyclust import Dataset, MpcConfig, evaluate, export, load_model, run
from polyclust.geometry import Hyperplane


@pytest.fixture
def fitted(three_blobs):
    ds, _ = three_blobs
    return ds, run(MpcConfig(K=4, K_max=4, lam=0.5, restarts=2), ds).model


def test_round_trip(tmp_path, fitted):
    ds, model = fitted
    export(model, tmp_path, ds)
    back = load_model(tmp_path)
    assert back.K == model.K and np.array_equal(back.labels, model.labels)
    assert back.hyperplanes == model.hyperplanes
    assert back.config == model.config
    ev = evaluate(back, ds)
    assert ev["silhouette"] == pytest.approx(model.silhouette, abs=1e-9)
    assert ev["loss"] == pytest.approx(model.loss, abs=1e-9)
    assert ev["representation_error"] == pytest.approx(model.rep_error, abs=1e-9)


def test_files(tmp_path, fitted):
    ds, model = fitted
    paths = export(model, tmp_path, ds)
    with open(paths["assignments"], newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["row", "cluster"] and len(rows) == ds.n + 1
    doc = json.loads(paths["model"].read_text())
    for rec in doc["hyperplanes"]:
        assert set(rec) == {"i", "j", "w", "b", "epsilon"}
        assert rec["i"] < rec["j"] and all(isinstance(v, int) for v in rec["w"])
        Hyperplane.from_record(rec)
    moves = [json.loads(l) for l in paths["moves"].read_text().splitlines()]
    assert len(moves) == len(model.moves)
    for m in moves:
        assert set(m) == {"kind", "target", "delta", "loss_after", "K_after"}
    assert "explanations" in doc


def test_exact_intercepts(tmp_path):
    ds = Dataset.from_arrays([[0.1], [0.2], [0.7], [0.9]])
    model = run(MpcConfig(K=2), ds).model
    h = next(iter(model.hyperplanes.values()))
    export(model, tmp_path)
    assert load_model(tmp_path / "model.json").hyperplanes[h.pair].b == h.b


def test_byte_stable(tmp_path, three_blobs):
    ds, _ = three_blobs
    cfg = MpcConfig(K=3, K_max=4, restarts=3, seed=9)
    a = export(run(cfg, ds).model, tmp_path / "a", ds)
    b = export(run(cfg, ds).model, tmp_path / "b", ds)
    for key in a:
        assert a[key].read_bytes() == b[key].read_bytes()


def test_load_rejects_other_documents(tmp_path):
    p = tmp_path / "x.json"
    p.write_text('{"format": "other"}')
    with pytest.raises(ValueError):
        load_model(p)
