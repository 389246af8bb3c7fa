"""Silhouette evaluation, k-means++ and representation-aware k-means.

Equidistant points always go to the lowest cluster index.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .errors import InfeasibleError
from .geometry import RepErrorTable, representation_error
from .separation import separate


@dataclass(frozen=True, eq=False)
class Assignment:
    labels: np.ndarray
    K: int
    centers: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=int)
        if labels.ndim != 1:
            raise ValueError("labels must be 1-D")
        if labels.size and (labels.min() < 0 or labels.max() >= self.K):
            raise ValueError(f"labels outside [0, {self.K})")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "centers", np.asarray(self.centers, dtype=float))

    @classmethod
    def from_labels(cls, X, labels, K: int | None = None) -> "Assignment":
        labels = np.asarray(labels, dtype=int)
        K = int(labels.max()) + 1 if K is None else K
        return update_centers(X, cls(labels, K, np.zeros((K, np.shape(X)[1]))))

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.K)

    @property
    def n(self) -> int:
        return len(self.labels)


@dataclass(frozen=True, eq=False)
class SilhouetteReport:
    per_point: np.ndarray
    per_point_r: np.ndarray
    per_point_q: np.ndarray

    @property
    def mean(self) -> float:
        return float(np.mean(self.per_point))


@dataclass(frozen=True)
class KmRepObjective:
    kmeans_term: float
    rep_term: float

    @property
    def total(self) -> float:
        return self.kmeans_term + self.rep_term


def _labels_of(z):
    return np.asarray(getattr(z, "labels", z), dtype=int)


def cluster_sums(dist, labels, K: int) -> np.ndarray:
    """N x K matrix of summed distances from each point to each cluster."""
    labels = np.asarray(labels, dtype=int)
    S = np.zeros((len(labels), K))
    for k in range(K):
        idx = np.flatnonzero(labels == k)
        if idx.size:
            S[:, k] = dist.columns(idx).sum(axis=1)
    return S


def silhouette_from_sums(S: np.ndarray, labels: np.ndarray, sizes: np.ndarray) -> SilhouetteReport:
    n, K = S.shape
    rows = np.arange(n)
    own = sizes[labels]
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(own > 1, S[rows, labels] / np.maximum(own - 1, 1), 0.0)
        means = S / sizes[None, :]
    means[rows, labels] = np.inf
    means[:, sizes == 0] = np.inf
    q = means.min(axis=1)
    m = np.maximum(q, r)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where((own > 1) & (m > 0), (q - r) / m, 0.0)
    return SilhouetteReport(s, r, q)


def silhouette(ds, z) -> SilhouetteReport:
    """Per-point silhouette (q - r) / max(q, r); members of singleton
    clusters score 0."""
    labels = _labels_of(z)
    K = int(getattr(z, "K", labels.max() + 1))
    sizes = np.bincount(labels, minlength=K)
    if np.count_nonzero(sizes) < 2:
        raise ValueError("silhouette needs at least two nonempty clusters")
    if np.any(sizes == 0):
        raise ValueError("silhouette needs every active cluster nonempty")
    return silhouette_from_sums(cluster_sums(ds.dist, labels, K), labels, sizes)


def sq_distances(X, centers) -> np.ndarray:
    diff = X[:, None, :] - centers[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def kmeans_pp_seeds(X, K: int, rng) -> np.ndarray:
    n = len(X)
    idx = [int(rng.integers(n))]
    d2 = np.sum((X - X[idx[0]]) ** 2, axis=1)
    for _ in range(1, K):
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            free = np.setdiff1d(np.arange(n), idx)
            nxt = int(rng.choice(free)) if free.size else int(rng.integers(n))
        idx.append(nxt)
        d2 = np.minimum(d2, np.sum((X - X[nxt]) ** 2, axis=1))
    return np.array(idx)


def lloyd(X, centers, max_iter: int = 100) -> Assignment:
    """Plain Lloyd iterations; empty clusters are reseeded with the point
    farthest from its own center."""
    centers = np.array(centers, dtype=float)
    K = len(centers)
    labels = None
    for _ in range(max_iter):
        d2 = sq_distances(X, centers)
        new = np.argmin(d2, axis=1)
        sizes = np.bincount(new, minlength=K)
        for k in np.flatnonzero(sizes == 0):
            own = d2[np.arange(len(X)), new]
            far = int(np.argmax(own))
            new[far] = k
            own[far] = -1
            centers[k] = X[far]
            d2 = sq_distances(X, centers)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for k in range(K):
            centers[k] = X[labels == k].mean(axis=0)
    return Assignment(labels, K, centers)


def kmeans_pp_init(X, K: int, seed: int, max_iter: int = 100) -> Assignment:
    """k-means++ seeding followed by Lloyd iterations; deterministic in ``seed``."""
    X = np.asarray(getattr(X, "points", X), dtype=float)
    if K > len(X):
        raise ValueError(f"K={K} exceeds the number of points {len(X)}")
    if K < 1:
        raise ValueError("K must be positive")
    rng = np.random.default_rng(seed)
    seeds = kmeans_pp_seeds(X, K, rng)
    return lloyd(X, X[seeds], max_iter)


def _min_cost_assignment(cost: np.ndarray, n_min: int, n_max: int, resolution: float) -> np.ndarray:
    n, K = cost.shape
    # subtracting a per-row constant leaves the optimum unchanged
    shifted = cost - cost.min(axis=1, keepdims=True)
    icost = np.rint(shifted / resolution).astype(np.int64)
    g = nx.DiGraph()
    for t in range(n):
        g.add_node(("p", t), demand=-1)
    for k in range(K):
        g.add_node(("c", k), demand=n_min)
        g.add_edge(("c", k), "sink", capacity=n_max - n_min, weight=0)
    g.add_node("sink", demand=n - K * n_min)
    for t in range(n):
        for k in range(K):
            g.add_edge(("p", t), ("c", k), capacity=1, weight=int(icost[t, k]))
    _, flow = nx.network_simplex(g)
    labels = np.empty(n, dtype=int)
    for t in range(n):
        out = flow[("p", t)]
        labels[t] = next(k for (_, k), f in sorted(out.items()) if f > 0)
    return labels


def assignment_costs(X, centers, tables: RepErrorTable | None, lam: float) -> np.ndarray:
    cost = sq_distances(X, centers)
    if tables is not None and lam > 0:
        cost = cost + lam * tables.cluster_costs(len(centers))
    return cost


def assign_with_rep(X, centers, tables, lam: float, n_min: int = 0, n_max: int | None = None,
                    X_explain=None, resolution: float = 1e-9) -> Assignment:
    """Optimal labels for fixed centers under cardinality bounds.

    Minimizes sum_t ||x_t - c_k||^2 + lam * (representation cost of t in k)
    subject to n_min <= |C_k| <= n_max. The unconstrained argmin is returned
    when it already satisfies the bounds; otherwise a min-cost flow is solved
    on costs rounded to ``resolution``.
    """
    X = np.asarray(X, dtype=float)
    centers = np.asarray(centers, dtype=float)
    n, K = len(X), len(centers)
    n_max = n if n_max is None else n_max
    if K * n_min > n or K * n_max < n or n_max < n_min:
        raise InfeasibleError(f"cannot place {n} points in {K} clusters of size [{n_min}, {n_max}]")
    cost = assignment_costs(X, centers, tables, lam)
    labels = np.argmin(cost, axis=1)
    sizes = np.bincount(labels, minlength=K)
    if sizes.min() < n_min or sizes.max() > n_max:
        labels = _min_cost_assignment(cost, n_min, n_max, resolution)
    return Assignment(labels, K, centers)


def assignment_objective(X, labels, centers, tables, lam) -> float:
    cost = assignment_costs(np.asarray(X, float), np.asarray(centers, float), tables, lam)
    return float(cost[np.arange(len(labels)), labels].sum())


def update_centers(X, z: Assignment) -> Assignment:
    X = np.asarray(getattr(X, "points", X), dtype=float)
    sizes = np.bincount(z.labels, minlength=z.K)
    if np.any(sizes == 0):
        raise ValueError(f"empty clusters {np.flatnonzero(sizes == 0).tolist()}; repair or drop them first")
    centers = np.zeros((z.K, X.shape[1]))
    np.add.at(centers, z.labels, X)
    centers /= sizes[:, None]
    return Assignment(z.labels, z.K, centers)


def kmrep_objective(X, z: Assignment, tables: RepErrorTable, lam: float) -> KmRepObjective:
    X = np.asarray(getattr(X, "points", X), dtype=float)
    d = X - z.centers[z.labels]
    km = float(np.einsum("nd,nd->", d, d))
    return KmRepObjective(km, representation_error(z, tables, lam))


def fit_hyperplanes(X_explain, labels, K: int, M: int, beta: int, eps: float, budget: int) -> dict:
    """Solve the separation problem for every cluster pair."""
    hyperplanes = {}
    for i in range(K):
        left = X_explain[labels == i]
        for j in range(i + 1, K):
            res = separate(left, X_explain[labels == j], M, beta, eps, (i, j), budget)
            hyperplanes[(i, j)] = res.hyperplane
    return hyperplanes


@dataclass(eq=False)
class InitResult:
    assignment: Assignment
    hyperplanes: dict
    tables: RepErrorTable
    epsilon: float
    trace: list = field(default_factory=list)
    converged: bool = False

    @property
    def n_outer(self) -> int:
        return len(self.trace)


def alternating_minimization(ds, cfg, seed: int | None = None) -> InitResult:
    """Cluster initialization: alternate representation-aware k-means and
    pairwise hyperplane fitting.

    ``trace[l - 1]`` is the representation-aware k-means objective at the
    end of outer iteration ``l``. The loop stops once an iteration fails to
    lower it by more than ``cfg.tol``.
    """
    X, Xe = ds.points, ds.explain_points
    n = len(X)
    cfg.validate(n)
    seed = cfg.seed if seed is None else seed
    K = cfg.K
    eps = cfg.resolve_epsilon(Xe)
    # every cluster stays in use during initialization
    n_min = max(cfg.n_min, 1)
    n_max = cfg.n_max_for(n)

    z = kmeans_pp_init(X, K, seed)
    tables = RepErrorTable.zeros(n, K)
    trace, hyperplanes = [], {}
    converged = False
    for _ in range(cfg.outer_cap):
        for _ in range(cfg.inner_cap):
            new = assign_with_rep(X, z.centers, tables, cfg.lam, n_min, n_max,
                                  resolution=cfg.flow_resolution)
            new = update_centers(X, new)
            stable = np.array_equal(new.labels, z.labels)
            z = new
            if stable:
                break
        hyperplanes = fit_hyperplanes(Xe, z.labels, K, cfg.M, cfg.beta, eps, cfg.budget)
        tables = RepErrorTable.from_hyperplanes(hyperplanes, Xe)
        obj = kmrep_objective(X, z, tables, cfg.lam).total
        trace.append(obj)
        if len(trace) >= 2 and trace[-2] - obj <= cfg.tol:
            converged = True
            break
    return InitResult(z, hyperplanes, tables, eps, trace, converged)
