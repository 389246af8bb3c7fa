"""The fitted-model artifact and its on-disk document format."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import MpcConfig
from .geometry import Hyperplane, RepErrorTable

FORMAT = "polyclust-model/1"


@dataclass(eq=False)
class MpcModel:
    labels: np.ndarray
    K: int
    hyperplanes: dict
    config: MpcConfig
    epsilon: float
    silhouette: float
    loss: float
    rep_error: float
    loss_trace: list = field(default_factory=list)
    moves: list = field(default_factory=list)
    init_trace: list = field(default_factory=list)
    feature_names: tuple = ()

    @property
    def pairs(self) -> list:
        return sorted(self.hyperplanes)

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.K)

    def tables(self, X_explain) -> RepErrorTable:
        return RepErrorTable.from_hyperplanes(self.hyperplanes, X_explain)

    def hyperplane(self, i: int, j: int) -> Hyperplane:
        if (i, j) not in self.hyperplanes:
            raise KeyError(f"no active hyperplane for clusters {(i, j)}")
        return self.hyperplanes[(i, j)]


_F17 = "__f17_{}__"


def _dumps_with_exact_intercepts(doc: dict) -> str:
    """JSON text where every hyperplane intercept is written with 17
    significant digits."""
    exact = []
    for rec in doc["hyperplanes"]:
        exact.append(rec["b"])
        rec["b"] = _F17.format(len(exact) - 1)
    text = json.dumps(doc, indent=2, sort_keys=True)
    for k, b in enumerate(exact):
        text = text.replace(f'"{_F17.format(k)}"', format(b, ".17g"))
    return text


def model_document(model: MpcModel, explanations=None) -> dict:
    doc = {
        "format": FORMAT,
        "config": model.config.to_dict(),
        "epsilon": model.epsilon,
        "K": model.K,
        "labels": [int(v) for v in model.labels],
        "hyperplanes": [model.hyperplanes[p].to_record() for p in model.pairs],
        "metrics": {
            "silhouette": model.silhouette,
            "loss": model.loss,
            "representation_error": model.rep_error,
        },
        "loss_trace": list(model.loss_trace),
        "init_trace": list(model.init_trace),
        "feature_names": list(model.feature_names),
    }
    if explanations is not None:
        doc["explanations"] = explanations
    return doc


def export(model: MpcModel, out_dir, ds=None, trace: bool = True) -> dict:
    """Write ``model.json``, ``assignments.csv`` and optionally ``moves.jsonl``.

    When ``ds`` is given, per-cluster explanations are embedded in the model
    document. Returns the written paths.
    """
    from .explain import explanation_documents

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    expl = explanation_documents(model, ds) if ds is not None else None
    paths = {"model": out / "model.json", "assignments": out / "assignments.csv"}
    paths["model"].write_text(_dumps_with_exact_intercepts(model_document(model, expl)) + "\n",
                              encoding="utf-8")
    with open(paths["assignments"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "cluster"])
        for t, k in enumerate(model.labels):
            w.writerow([t, int(k)])
    if trace:
        paths["moves"] = out / "moves.jsonl"
        with open(paths["moves"], "w", encoding="utf-8") as fh:
            for rec in model.moves:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return paths


def load_model(path) -> MpcModel:
    path = Path(path)
    if path.is_dir():
        path = path / "model.json"
    doc = json.loads(path.read_text(encoding="utf-8"))
    if doc.get("format") != FORMAT:
        raise ValueError(f"{path}: not a {FORMAT} document")
    hs = [Hyperplane.from_record(r) for r in doc["hyperplanes"]]
    m = doc["metrics"]
    return MpcModel(
        labels=np.array(doc["labels"], dtype=int),
        K=int(doc["K"]),
        hyperplanes={h.pair: h for h in hs},
        config=MpcConfig.from_dict(doc["config"]),
        epsilon=float(doc["epsilon"]),
        silhouette=float(m["silhouette"]),
        loss=float(m["loss"]),
        rep_error=float(m["representation_error"]),
        loss_trace=list(doc.get("loss_trace", [])),
        init_trace=list(doc.get("init_trace", [])),
        feature_names=tuple(doc.get("feature_names", [])),
    )


def evaluate(model: MpcModel, ds) -> dict:
    """Recompute silhouette, representation error and loss from the data."""
    from .descent import loss_fn
    from .clustering import Assignment, silhouette
    from .geometry import representation_error

    z = Assignment.from_labels(ds.points, model.labels, model.K)
    tables = model.tables(ds.explain_points)
    return {
        "silhouette": silhouette(ds, z).mean,
        "representation_error": representation_error(z, tables, model.config.lam),
        "loss": loss_fn(ds, z, tables, model.config),
    }
