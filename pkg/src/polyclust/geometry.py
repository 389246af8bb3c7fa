"""Hyperplanes, polytopes and representation-error tables.

Side convention for the hyperplane of an ordered pair ``(i, j)``: cluster
``i`` wants ``w.x + b >= 0`` and cluster ``j`` wants ``w.x + b + eps <= 0``.
Membership tests (side test, polytope containment) use ``>= 0`` for the
i-side and ``< 0`` for the j-side.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

EPSILON_FALLBACK = 1e-4
EPSILON_MAX_CANDIDATES = 10**6
EPSILON_MAX_POINTS = 2000
# gaps below this are treated as rounding noise, not separation
_GAP_TOL = 1e-12


@dataclass(frozen=True)
class Hyperplane:
    i: int
    j: int
    w: tuple
    b: float
    epsilon: float

    def __post_init__(self):
        object.__setattr__(self, "w", tuple(int(v) for v in self.w))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "epsilon", float(self.epsilon))
        if not self.i < self.j:
            raise ValueError(f"hyperplane pair must be ordered, got ({self.i}, {self.j})")
        if not any(self.w):
            raise ValueError("the all-zero slope is not a hyperplane")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    @property
    def pair(self) -> tuple:
        return (self.i, self.j)

    @property
    def support(self) -> tuple:
        return tuple(d for d, v in enumerate(self.w) if v != 0)

    def check_limits(self, M: int, beta: int) -> None:
        if max(abs(v) for v in self.w) > M:
            raise ValueError(f"coefficient exceeds M={M}: {self.w}")
        if len(self.support) > beta:
            raise ValueError(f"more than beta={beta} nonzeros: {self.w}")

    def values(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != len(self.w):
            raise ValueError(f"dimension mismatch: hyperplane has {len(self.w)}, points have {X.shape[-1]}")
        return X @ np.asarray(self.w, dtype=float) + self.b

    def relabel(self, i: int, j: int) -> "Hyperplane":
        return Hyperplane(i, j, self.w, self.b, self.epsilon)

    def to_record(self) -> dict:
        return {"i": self.i, "j": self.j, "w": list(self.w), "b": self.b, "epsilon": self.epsilon}

    @classmethod
    def from_record(cls, rec: dict) -> "Hyperplane":
        return cls(int(rec["i"]), int(rec["j"]), tuple(rec["w"]), float(rec["b"]), float(rec["epsilon"]))


def signed_value(h: Hyperplane, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a single point")
    return float(h.values(x))


def rep_errors(h: Hyperplane, X) -> tuple:
    """Violation costs of every point if it were put in cluster i or cluster j."""
    v = h.values(X)
    xi_plus = np.maximum(-v, 0.0)
    xi_minus = np.maximum(v + h.epsilon, 0.0)
    return xi_plus, xi_minus


class RepErrorTable:
    """xi+/xi- columns for every pair with a hyperplane.

    ``xi_plus[(i, j)][t]`` is what point t pays on the (i, j) hyperplane when
    labelled i, ``xi_minus[(i, j)][t]`` when labelled j.
    """

    def __init__(self, n: int, xi_plus=None, xi_minus=None):
        self.n = n
        self.xi_plus = dict(xi_plus or {})
        self.xi_minus = dict(xi_minus or {})

    @classmethod
    def zeros(cls, n: int, K: int) -> "RepErrorTable":
        pairs = [(i, j) for i in range(K) for j in range(i + 1, K)]
        return cls(n, {p: np.zeros(n) for p in pairs}, {p: np.zeros(n) for p in pairs})

    @classmethod
    def from_hyperplanes(cls, hyperplanes, X) -> "RepErrorTable":
        hs = hyperplanes.values() if isinstance(hyperplanes, dict) else hyperplanes
        t = cls(len(X))
        for h in hs:
            t.set(h.pair, *rep_errors(h, X))
        return t

    def set(self, pair, xi_plus, xi_minus) -> None:
        self.xi_plus[pair] = np.asarray(xi_plus, dtype=float)
        self.xi_minus[pair] = np.asarray(xi_minus, dtype=float)

    def copy(self) -> "RepErrorTable":
        return RepErrorTable(self.n, self.xi_plus, self.xi_minus)

    @property
    def pairs(self) -> list:
        return sorted(self.xi_plus)

    def cluster_costs(self, K: int) -> np.ndarray:
        """N x K matrix: unweighted representation cost of putting t in cluster k."""
        cost = np.zeros((self.n, K))
        for i in range(K):
            for j in range(i + 1, K):
                if (i, j) not in self.xi_plus:
                    raise KeyError(f"no representation errors for active pair {(i, j)}")
                cost[:, i] += self.xi_plus[(i, j)]
                cost[:, j] += self.xi_minus[(i, j)]
        return cost


def representation_error(z, tables: RepErrorTable, lam: float) -> float:
    """lam * sum_t sum_{i<j} [z_ti xi+_t + z_tj xi-_t] for labels ``z``."""
    labels = np.asarray(getattr(z, "labels", z), dtype=int)
    if lam == 0:
        return 0.0
    K = int(getattr(z, "K", labels.max() + 1))
    cost = tables.cluster_costs(K)
    return float(lam * cost[np.arange(len(labels)), labels].sum())


def n_slope_candidates(d: int, M: int, beta: int) -> int:
    """Size of the feasible integer slope set."""
    return sum(comb(d, s) * (2 * M) ** s for s in range(1, min(beta, d) + 1))


def default_epsilon(X, M: int, beta: int, fallback: float = EPSILON_FALLBACK) -> float:
    """Smallest nonzero gap ``|w.(x - x')|`` over feasible slopes and point pairs.

    Falls back to ``fallback`` when the enumeration is too large or no
    nonzero gap exists.
    """
    from .separation import enumerate_slopes

    X = np.asarray(X, dtype=float)
    n, d = X.shape
    b = min(beta, d)
    if comb(d, b) * (2 * M) ** b > EPSILON_MAX_CANDIDATES or n > EPSILON_MAX_POINTS:
        return fallback
    W = np.array(list(enumerate_slopes(d, M, beta)), dtype=float)
    # w and -w give the same gaps; keep one of each
    first = W[np.arange(len(W)), np.argmax(W != 0, axis=1)]
    W = W[first > 0]
    best = np.inf
    for start in range(0, len(W), 2048):
        P = np.sort(X @ W[start:start + 2048].T, axis=0)
        gaps = np.diff(P, axis=0)
        gaps = gaps[gaps > _GAP_TOL]
        if gaps.size:
            best = min(best, float(gaps.min()))
    return best if np.isfinite(best) else fallback


@dataclass(frozen=True)
class Polytope:
    """Intersection of half-spaces bounding one cluster.

    ``facets`` holds ``(hyperplane, on_plus_side)`` tuples; ``on_plus_side``
    is True when the cluster is the i-side (``>= 0``) of that hyperplane.
    """

    cluster: int
    facets: tuple

    @classmethod
    def for_cluster(cls, k: int, hyperplanes: dict) -> "Polytope":
        facets = []
        for (i, j), h in sorted(hyperplanes.items()):
            if i == k:
                facets.append((h, True))
            elif j == k:
                facets.append((h, False))
        return cls(k, tuple(facets))

    @staticmethod
    def facet_mask(facet, X) -> np.ndarray:
        h, plus = facet
        v = h.values(X)
        return v >= 0 if plus else v < 0

    def contains(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        mask = np.ones(len(X), dtype=bool)
        for f in self.facets:
            mask &= self.facet_mask(f, X)
        return mask

    def is_redundant(self, index: int, X) -> bool:
        """True if dropping facet ``index`` changes no point's membership."""
        masks = [self.facet_mask(f, X) for f in self.facets]
        full = np.logical_and.reduce(masks) if masks else np.ones(len(X), bool)
        rest = [m for q, m in enumerate(masks) if q != index]
        without = np.logical_and.reduce(rest) if rest else np.ones(len(X), bool)
        return bool(np.array_equal(full, without))

    def prune(self, X) -> "Polytope":
        """Drop facets one at a time, in order, while membership on X is unchanged."""
        X = np.asarray(X, dtype=float)
        masks = [self.facet_mask(f, X) for f in self.facets]
        target = np.logical_and.reduce(masks) if masks else np.ones(len(X), bool)
        keep = list(range(len(self.facets)))
        for q in range(len(self.facets)):
            trial = [k for k in keep if k != q]
            m = np.logical_and.reduce([masks[k] for k in trial]) if trial else np.ones(len(X), bool)
            if np.array_equal(m, target):
                keep = trial
        return Polytope(self.cluster, tuple(self.facets[k] for k in keep))
