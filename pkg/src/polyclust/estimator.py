"""scikit-learn estimator wrapper."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, validate_data

from .config import MpcConfig
from .dataset import Dataset
from .explain import build_explanation, pairwise_comparison
from .runner import run


class PolytopeClustering(ClusterMixin, TransformerMixin, BaseEstimator):
    """Clustering with an integer-hyperplane polytope around every cluster.

    Parameters
    ----------
    n_clusters : int, default=2
        Initial number of clusters.
    max_clusters : int or None, default=None
        Upper bound on clusters created by splits; ``None`` means
        ``n_clusters``.
    reg : float, default=1.0
        Weight of the representation error against the clustering loss.
    max_coef : int, default=1
        Largest absolute integer coefficient of a hyperplane (M).
    max_nonzero : int, default=1
        Largest number of nonzero coefficients of a hyperplane (beta).
        ``max_coef=1, max_nonzero=1`` gives axis-parallel explanations.
    epsilon : float or "auto", default="auto"
        Margin required on the lower side of each hyperplane.
    min_cluster_size, max_cluster_size : int
        Cardinality bounds on every cluster.
    n_init : int, default=1
        Number of restarts; the run with the best silhouette is kept.
    random_state : int, default=0
        Base seed; restart r uses ``random_state + r``.
    objective : {"silhouette", "kmeans"}, default="silhouette"
        Loss driven by coordinate descent.

    Attributes
    ----------
    labels_ : ndarray of shape (n_samples,)
    n_clusters_ : int
        Number of clusters after coordinate descent.
    hyperplanes_ : dict
        ``(i, j) -> Hyperplane`` for every cluster pair.
    cluster_centers_ : ndarray of shape (n_clusters_, n_features)
    silhouette_ : float
    model_ : MpcModel
    """

    def __init__(self, n_clusters=2, max_clusters=None, reg=1.0, max_coef=1, max_nonzero=1,
                 epsilon="auto", min_cluster_size=1, max_cluster_size=None, n_init=1,
                 random_state=0, objective="silhouette", n_jobs=1):
        self.n_clusters = n_clusters
        self.max_clusters = max_clusters
        self.reg = reg
        self.max_coef = max_coef
        self.max_nonzero = max_nonzero
        self.epsilon = epsilon
        self.min_cluster_size = min_cluster_size
        self.max_cluster_size = max_cluster_size
        self.n_init = n_init
        self.random_state = random_state
        self.objective = objective
        self.n_jobs = n_jobs

    def _config(self) -> MpcConfig:
        return MpcConfig(
            K=self.n_clusters, K_max=self.max_clusters, lam=self.reg, M=self.max_coef,
            beta=self.max_nonzero, epsilon=self.epsilon, n_min=self.min_cluster_size,
            n_max=self.max_cluster_size, restarts=self.n_init, seed=int(self.random_state or 0),
            cd_objective=self.objective, workers=self.n_jobs,
        )

    def fit(self, X, y=None, X_explain=None):
        """Cluster ``X``; hyperplanes live in ``X_explain`` when given."""
        X = validate_data(self, X, dtype=np.float64, ensure_min_samples=2)
        names = getattr(self, "feature_names_in_", None)
        cols = tuple(names) if names is not None else None
        if X_explain is not None:
            X_explain = check_array(X_explain, dtype=np.float64)
            if len(X_explain) != len(X):
                raise ValueError("X and X_explain have different numbers of rows")
            ds = Dataset.from_arrays(X, X_explain, columns=cols)
        else:
            ds = Dataset.from_arrays(X, columns=cols, explain_columns=cols)
        cfg = self._config().validate(ds.n)
        result = run(cfg, ds)
        m = result.model
        self.model_ = m
        self.dataset_ = ds
        self.labels_ = m.labels.copy()
        self.n_clusters_ = m.K
        self.hyperplanes_ = dict(m.hyperplanes)
        self.silhouette_ = m.silhouette
        self.loss_ = m.loss
        self.epsilon_ = m.epsilon
        self.cluster_centers_ = np.array([X[m.labels == k].mean(axis=0) for k in range(m.K)])
        self.seed_used_ = result.seed_used
        return self

    def transform(self, X, X_explain=None):
        """Signed hyperplane values ``w.x + b``, one column per cluster pair."""
        check_is_fitted(self, "model_")
        Xe = self._explain_view(X, X_explain)
        pairs = self.model_.pairs
        return np.column_stack([self.hyperplanes_[p].values(Xe) for p in pairs])

    def predict(self, X, X_explain=None):
        """Cluster whose polytope the point violates the fewest facets of;
        ties go to the nearest center, then the lowest index."""
        check_is_fitted(self, "model_")
        Xc = validate_data(self, X, dtype=np.float64, reset=False)
        Xe = self._explain_view(Xc, X_explain)
        K = self.n_clusters_
        violations = np.zeros((len(Xc), K), dtype=int)
        for (i, j), h in self.hyperplanes_.items():
            v = h.values(Xe)
            violations[:, i] += v < 0
            violations[:, j] += v >= 0
        d2 = ((Xc[:, None, :] - self.cluster_centers_[None]) ** 2).sum(-1)
        fewest = violations == violations.min(axis=1, keepdims=True)
        d2 = np.where(fewest, d2, np.inf)
        return np.argmin(d2, axis=1)

    def _explain_view(self, X, X_explain):
        if X_explain is not None:
            Xe = check_array(X_explain, dtype=np.float64)
        elif self.dataset_.explain_points is self.dataset_.points:
            Xe = check_array(X, dtype=np.float64)
        else:
            raise ValueError("model was fitted with a separate explanation view; pass X_explain")
        if Xe.shape[1] != self.dataset_.d_explain:
            raise ValueError(f"X_explain has {Xe.shape[1]} features, expected {self.dataset_.d_explain}")
        return Xe

    def explain(self, cluster: int):
        check_is_fitted(self, "model_")
        return build_explanation(self.model_, self.dataset_, cluster)

    def compare(self, i: int, j: int) -> str:
        check_is_fitted(self, "model_")
        return pairwise_comparison(self.model_, self.dataset_, i, j)[0]
