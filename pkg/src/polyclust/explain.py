"""Human-readable cluster explanations built from the fitted hyperplanes."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Polytope


@dataclass(frozen=True)
class Clause:
    """``sum_k coefficients[k] * x[features[k]] + intercept`` compared with 0.

    ``comparator`` is ``">="`` (i-side of the pair) or ``"<"`` (j-side);
    ``threshold`` is ``-intercept``.
    """

    pair: tuple
    features: tuple
    names: tuple
    coefficients: tuple
    comparator: str
    intercept: float
    text: str
    units: str

    @property
    def threshold(self) -> float:
        return -self.intercept

    def holds(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        # same arithmetic as Hyperplane.values so membership agrees bit for bit
        w = np.zeros(X.shape[1])
        w[list(self.features)] = self.coefficients
        v = X @ w + self.intercept
        return v >= 0 if self.comparator == ">=" else v < 0

    def to_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "features": list(self.features),
            "names": list(self.names),
            "coefficients": list(self.coefficients),
            "comparator": self.comparator,
            "threshold": self.threshold,
            "intercept": self.intercept,
            "text": self.text,
            "units": self.units,
        }


@dataclass(frozen=True)
class Explanation:
    cluster: int
    clauses: tuple
    style: str

    @property
    def text(self) -> str:
        """One clause per line, joined by AND."""
        return "\nAND ".join(c.text for c in self.clauses) if self.clauses else "(ALL)"

    @property
    def inline(self) -> str:
        return " AND ".join(c.text for c in self.clauses) if self.clauses else "(ALL)"

    def contains(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        mask = np.ones(len(X), dtype=bool)
        for c in self.clauses:
            mask &= c.holds(X)
        return mask

    def to_dict(self) -> dict:
        return {"cluster": self.cluster, "style": self.style, "text": self.text,
                "clauses": [c.to_dict() for c in self.clauses]}


def _fmt(v: float) -> str:
    return f"{v:.2f}"


_FLIP = {">=": "<=", "<": ">"}


def _single_feature_text(ds, d: int, coef: int, comparator: str, threshold: float):
    """Render ``coef * x_d  comparator  threshold`` as a condition on x_d."""
    name = ds.explain_columns[d]
    cut = threshold / coef
    op = comparator if coef > 0 else _FLIP[comparator]
    if ds.binary_columns[d]:
        ops = {">=": np.greater_equal, "<": np.less, "<=": np.less_equal, ">": np.greater}[op]
        at0, at1 = bool(ops(0.0, cut)), bool(ops(1.0, cut))
        if at1 and not at0:
            return f"({name})", "binary"
        if at0 and not at1:
            return f"(NOT {name})", "binary"
    lo, hi = ds.raw_min[d], ds.raw_max[d]
    if np.isfinite(lo) and np.isfinite(hi) and hi > lo:
        return f"({name} {op} {_fmt(lo + cut * (hi - lo))})", "raw"
    return f"({name} {op} {_fmt(cut)})", "normalized"


def _terms(names, coefs, binary: bool) -> str:
    parts = []
    for k, (nm, c) in enumerate(zip(names, coefs)):
        mag = abs(c)
        body = f"({nm})" if (binary and mag == 1) else f"{mag}*({nm})"
        if k == 0:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f"{'+' if c > 0 else '-'} {body}")
    return " ".join(parts)


def _clause(ds, h, plus: bool) -> Clause:
    feats = h.support
    coefs = tuple(h.w[d] for d in feats)
    names = tuple(ds.explain_columns[d] for d in feats)
    comparator = ">=" if plus else "<"
    threshold = -h.b
    if len(feats) == 1:
        text, units = _single_feature_text(ds, feats[0], coefs[0], comparator, threshold)
    elif all(ds.binary_columns[d] for d in feats):
        # integer score on 0/1 features: snap the cut to the integer grid
        if plus:
            text = f"[{_terms(names, coefs, True)} > {math.ceil(threshold) - 1}]"
        else:
            text = f"[{_terms(names, coefs, True)} < {math.ceil(threshold)}]"
        units = "binary"
    else:
        text = f"[{_terms(names, coefs, False)} {comparator} {_fmt(threshold)}]"
        units = "normalized"
    return Clause(h.pair, feats, names, coefs, comparator, h.b, text, units)


def _style(ds, polytope: Polytope) -> str:
    hs = [h for h, _ in polytope.facets]
    if all(len(h.support) == 1 for h in hs):
        return "rule"
    if all(ds.binary_columns[d] for h in hs for d in h.support):
        return "scorecard"
    return "linear_rule_set"


def build_explanation(model, ds, cluster: int) -> Explanation:
    """Pruned polytope of ``cluster`` rendered as a conjunction of clauses."""
    if not 0 <= cluster < model.K:
        raise ValueError(f"cluster {cluster} is not active (K={model.K})")
    poly = Polytope.for_cluster(cluster, model.hyperplanes).prune(ds.explain_points)
    clauses = tuple(_clause(ds, h, plus) for h, plus in poly.facets)
    return Explanation(cluster, clauses, _style(ds, poly))


def pairwise_comparison(model, ds, i: int, j: int):
    """``IF <condition>: Cluster i ELSE Cluster j`` from the (i, j) hyperplane."""
    if i == j:
        raise ValueError("need two different clusters")
    a, b = min(i, j), max(i, j)
    if (a, b) not in model.hyperplanes:
        raise ValueError(f"no active hyperplane between clusters {i} and {j}")
    clause = _clause(ds, model.hyperplanes[(a, b)], plus=(i == a))
    text = f"IF {clause.text}: Cluster {i} ELSE Cluster {j}"
    return text, {"if": i, "else": j, "clause": clause.to_dict(), "text": text}


def explanation_documents(model, ds) -> dict:
    return {
        "clusters": [build_explanation(model, ds, k).to_dict() for k in range(model.K)],
        "comparisons": [pairwise_comparison(model, ds, i, j)[1] for (i, j) in model.pairs],
    }
