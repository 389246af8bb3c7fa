"""Coordinate descent over the polytope structure: boundary shifts,
cluster splits and cluster merges.

Every accepted move strictly lowers the loss. Candidate evaluation for a
boundary shift is vectorized: for one slope, every intercept induces a
threshold partition of the two clusters' points sorted by projection, so
all partitions are scored at once from cumulative distance sums.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .clustering import (Assignment, cluster_sums, kmeans_pp_init, kmrep_objective,
                         silhouette, silhouette_from_sums)
from .geometry import Hyperplane, Polytope, RepErrorTable, rep_errors, representation_error
from .model import MpcModel
from .separation import _BLOCK_ENTRIES, separate, slope_blocks

# a move must improve the loss by more than this
IMPROVE_TOL = 1e-12


def loss_fn(ds, z, tables: RepErrorTable, cfg) -> float:
    """Descent loss: -mean silhouette + representation error (default), or
    the representation-aware k-means objective when
    ``cfg.cd_objective == "kmeans"``."""
    labels = np.asarray(getattr(z, "labels", z), dtype=int)
    K = int(getattr(z, "K", labels.max() + 1))
    if K < 2:
        raise ValueError("loss needs at least two clusters")
    if cfg.cd_objective == "kmeans":
        return kmrep_objective(ds.points, Assignment.from_labels(ds.points, labels, K), tables, cfg.lam).total
    return -silhouette(ds, Assignment(labels, K, np.zeros((K, ds.d)))).mean + \
        representation_error(Assignment(labels, K, np.zeros((K, ds.d))), tables, cfg.lam)


@dataclass(eq=False)
class DescentState:
    labels: np.ndarray
    K: int
    hyperplanes: dict
    tables: RepErrorTable
    sums: np.ndarray  # N x K summed distances to each cluster
    loss: float

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.K)

    @property
    def pairs(self) -> list:
        return [(i, j) for i in range(self.K) for j in range(i + 1, self.K)]

    def queue(self) -> deque:
        return deque([("pair", p) for p in self.pairs] + [("cluster", k) for k in range(self.K)])


@dataclass(eq=False)
class Move:
    kind: str
    target: tuple
    proposal: dict
    delta: float
    state: DescentState
    predicted_loss: float | None = None

    def record(self) -> dict:
        return {
            "kind": self.kind,
            "target": list(self.target),
            "delta": self.delta,
            "loss_after": self.state.loss,
            "K_after": self.state.K,
        }


class _Engine:
    """Loss bookkeeping shared by the move generators."""

    def __init__(self, ds, cfg, epsilon: float):
        self.ds = ds
        self.cfg = cfg
        self.eps = epsilon
        self.X = ds.points
        self.Xe = ds.explain_points
        self.n = ds.n
        self.n_min = max(cfg.n_min, 1)
        self.n_max = cfg.n_max_for(ds.n)
        self.sq = np.einsum("nd,nd->n", self.X, self.X)

    def state_loss(self, labels, K, tables, sums) -> float:
        sizes = np.bincount(labels, minlength=K)
        if self.cfg.cd_objective == "kmeans":
            return self._sse(labels, K) + self._rep(labels, K, tables)
        sil = silhouette_from_sums(sums, labels, sizes).mean
        return -sil + self._rep(labels, K, tables)

    def _rep(self, labels, K, tables) -> float:
        if self.cfg.lam == 0:
            return 0.0
        cost = tables.cluster_costs(K)
        return float(self.cfg.lam * cost[np.arange(self.n), labels].sum())

    def _sse(self, labels, K) -> float:
        total = 0.0
        for k in range(K):
            pts = self.X[labels == k]
            if len(pts):
                d = pts - pts.mean(axis=0)
                total += float(np.einsum("nd,nd->", d, d))
        return total

    def make_state(self, labels, K, hyperplanes, tables=None, sums=None) -> DescentState:
        if tables is None:
            tables = RepErrorTable.from_hyperplanes(hyperplanes, self.Xe)
        if sums is None:
            sums = cluster_sums(self.ds.dist, labels, K)
        return DescentState(labels, K, hyperplanes, tables, sums,
                            self.state_loss(labels, K, tables, sums))

    def sizes_ok(self, sizes) -> bool:
        return bool(np.all(sizes >= self.n_min) and np.all(sizes <= self.n_max))

    def separate(self, labels, a: int, b: int) -> Hyperplane:
        cfg = self.cfg
        return separate(self.Xe[labels == a], self.Xe[labels == b], cfg.M, cfg.beta,
                        self.eps, (a, b), cfg.budget).hyperplane


def _threshold_silhouette(eng: _Engine, state: DescentState, i: int, j: int, A_sorted, s_values):
    """Mean silhouette for each split position s: the first s points of
    ``A_sorted`` go to cluster j, the rest to cluster i."""
    S, labels, sizes = state.sums, state.labels, state.sizes
    N, K = S.shape
    n = len(A_sorted)
    rows = np.arange(N)
    with np.errstate(divide="ignore", invalid="ignore"):
        means = S / sizes[None, :]
    means[:, [i, j]] = np.inf
    own_other = ~np.isin(labels, (i, j))
    means_o = means.copy()
    means_o[rows[own_other], labels[own_other]] = np.inf
    mo = means_o.min(axis=1) if K > 2 else np.full(N, np.inf)

    own = sizes[labels]
    with np.errstate(divide="ignore", invalid="ignore"):
        r_other = np.where(own > 1, S[rows, labels] / np.maximum(own - 1, 1), 0.0)

    DA = eng.ds.dist.columns(A_sorted)
    cum = np.concatenate([np.zeros((N, 1)), np.cumsum(DA, axis=1)], axis=1)
    tot = cum[:, -1:]
    pos = np.full(N, -1)
    pos[A_sorted] = np.arange(n)
    in_a = pos >= 0

    out = np.empty(len(s_values))
    chunk = max(1, 4_000_000 // max(N, 1))
    for c0 in range(0, len(s_values), chunk):
        sv = np.asarray(s_values[c0:c0 + chunk])
        Sj = cum[:, sv]
        Si = tot - Sj
        nj = sv[None, :].astype(float)
        ni = (n - sv)[None, :].astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            Mi = np.where(ni > 0, Si / ni, np.inf)
            Mj = np.where(nj > 0, Sj / nj, np.inf)
            to_j = in_a[:, None] & (pos[:, None] < sv[None, :])
            own_n = np.where(to_j, nj, ni)
            r = np.where(to_j, Sj / (nj - 1), Si / (ni - 1))
            q = np.minimum(mo[:, None], np.where(to_j, Mi, Mj))
            q_o = np.minimum(mo[:, None], np.minimum(Mi, Mj))
            r = np.where(in_a[:, None], r, r_other[:, None])
            q = np.where(in_a[:, None], q, q_o)
            own_n = np.where(in_a[:, None], own_n, own[:, None])
            m = np.maximum(q, r)
            sil = np.where((own_n > 1) & (m > 0), (q - r) / m, 0.0)
        out[c0:c0 + len(sv)] = sil.sum(axis=0) / N
    return out


def _threshold_sse(eng: _Engine, state: DescentState, i: int, j: int, A_sorted):
    """k-means term for every split position (length n + 1)."""
    labels = state.labels
    base = 0.0
    for k in range(state.K):
        if k in (i, j):
            continue
        pts = eng.X[labels == k]
        d = pts - pts.mean(axis=0)
        base += float(np.einsum("nd,nd->", d, d))
    XA = eng.X[A_sorted]
    n = len(A_sorted)
    cx = np.vstack([np.zeros(XA.shape[1]), np.cumsum(XA, axis=0)])
    cq = np.concatenate([[0.0], np.cumsum(eng.sq[A_sorted])])
    s = np.arange(n + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        sse_j = np.where(s > 0, cq - np.einsum("sd,sd->s", cx, cx) / s, 0.0)
        rx = cx[-1] - cx
        sse_i = np.where(n - s > 0, (cq[-1] - cq) - np.einsum("sd,sd->s", rx, rx) / (n - s), 0.0)
    return base + sse_i + sse_j


def boundary_shift(state: DescentState, pair, eng: _Engine) -> Move | None:
    """Best strictly improving replacement of the (i, j) hyperplane.

    Every feasible slope is tried with every breakpoint intercept induced by
    the points of clusters i and j; those points are relabelled by the side
    test and the loss is re-scored.
    """
    i, j = pair
    cfg, lam, eps = eng.cfg, eng.cfg.lam, eng.eps
    labels = state.labels
    A = np.flatnonzero((labels == i) | (labels == j))
    n = len(A)
    cost = state.tables.cluster_costs(state.K) if lam > 0 else np.zeros((eng.n, state.K))
    xp, xm = state.tables.xi_plus[(i, j)], state.tables.xi_minus[(i, j)]
    others = ~np.isin(labels, (i, j))
    rep_const = lam * cost[np.flatnonzero(others), labels[others]].sum()
    Ri = lam * (cost[A, i] - xp[A])
    Rj = lam * (cost[A, j] - xm[A])

    size_ok = np.zeros(n + 1, dtype=bool)
    s_all = np.arange(n + 1)
    size_ok[:] = ((s_all >= eng.n_min) & (s_all <= eng.n_max)
                  & (n - s_all >= eng.n_min) & (n - s_all <= eng.n_max))
    if not size_ok.any():
        return None

    best = None  # (loss, w, b, order, s)
    XeA = eng.Xe[A]
    rows = max(1, _BLOCK_ENTRIES // max(n, 1))
    for _, W in slope_blocks(eng.Xe.shape[1], cfg.M, cfg.beta, rows, cfg.budget):
        P = XeA @ W.T
        for c in range(W.shape[0]):
            p = P[:, c]
            order = np.argsort(p, kind="stable")
            ps = p[order]
            bs = np.unique(np.concatenate([-ps, -ps - eps]))
            s_of_b = np.searchsorted(ps, -bs, side="left")
            ok = size_ok[s_of_b]
            if not ok.any():
                continue
            bs, s_of_b = bs[ok], s_of_b[ok]
            # j-side hinge: points with -b - eps < p < -b pay p + b + eps
            c_lo = np.searchsorted(ps, -bs - eps, side="right")
            cs = np.concatenate([[0.0], np.cumsum(ps)])
            cnt = np.maximum(s_of_b - c_lo, 0)
            hinge = np.where(cnt > 0, cs[s_of_b] - cs[np.minimum(c_lo, s_of_b)] + cnt * (bs + eps), 0.0)
            rj = np.concatenate([[0.0], np.cumsum(Rj[order])])
            ri = np.concatenate([[0.0], np.cumsum(Ri[order])])
            rep = rep_const + rj[s_of_b] + (ri[-1] - ri[s_of_b]) + lam * hinge
            uniq_s = np.unique(s_of_b)
            if cfg.cd_objective == "kmeans":
                score = _threshold_sse(eng, state, i, j, A[order])[uniq_s]
            else:
                score = -_threshold_silhouette(eng, state, i, j, A[order], uniq_s)
            loss = score[np.searchsorted(uniq_s, s_of_b)] + rep
            k = int(np.argmin(loss))
            if best is None or loss[k] < best[0]:
                best = (float(loss[k]), W[c].copy(), float(bs[k]), order, int(s_of_b[k]))

    if best is None or not best[0] < state.loss - IMPROVE_TOL:
        return None
    pred, w, b, order, s = best
    h = Hyperplane(i, j, tuple(int(round(v)) for v in w), b, eps)
    new_labels = labels.copy()
    new_labels[A[order[:s]]] = j
    new_labels[A[order[s:]]] = i
    moved_to_j = np.flatnonzero((labels == i) & (new_labels == j))
    moved_to_i = np.flatnonzero((labels == j) & (new_labels == i))
    sums = state.sums.copy()
    dist = eng.ds.dist
    if moved_to_j.size:
        dj = dist.columns(moved_to_j).sum(axis=1)
        sums[:, j] += dj
        sums[:, i] -= dj
    if moved_to_i.size:
        di = dist.columns(moved_to_i).sum(axis=1)
        sums[:, i] += di
        sums[:, j] -= di
    hyperplanes = dict(state.hyperplanes)
    hyperplanes[(i, j)] = h
    tables = state.tables.copy()
    tables.set((i, j), *rep_errors(h, eng.Xe))
    new = eng.make_state(new_labels, state.K, hyperplanes, tables, sums)
    if not new.loss < state.loss - IMPROVE_TOL:
        return None
    return Move("boundary_shift", (i, j), {"hyperplane": h.to_record()},
                new.loss - state.loss, new, pred)


def _adjacent(state: DescentState, i: int, j: int, Xe) -> bool:
    for k in (i, j):
        poly = Polytope.for_cluster(k, state.hyperplanes)
        idx = next(q for q, (h, _) in enumerate(poly.facets) if h.pair == (i, j))
        if not poly.is_redundant(idx, Xe):
            return True
    return False


def merge_clusters(state: DescentState, pair, eng: _Engine) -> Move | None:
    """Merge cluster j into i when the (i, j) facet is not redundant for at
    least one of the two polytopes."""
    i, j = pair
    if state.K < 3:
        return None
    if not _adjacent(state, i, j, eng.Xe):
        return None
    sizes = state.sizes
    if sizes[i] + sizes[j] > eng.n_max:
        return None
    K = state.K - 1
    remap = np.array([k if k < j else (i if k == j else k - 1) for k in range(state.K)])
    labels = remap[state.labels]
    hyperplanes = {}
    for (a, b), h in state.hyperplanes.items():
        if i in (a, b) or j in (a, b):
            continue
        h = h.relabel(int(remap[a]), int(remap[b]))
        hyperplanes[h.pair] = h
    for other in range(K):
        if other == i:
            continue
        a, b = (i, other) if i < other else (other, i)
        hyperplanes[(a, b)] = eng.separate(labels, a, b)
    hyperplanes = dict(sorted(hyperplanes.items()))
    sums = np.delete(state.sums, j, axis=1)
    sums[:, i] += state.sums[:, j]
    new = eng.make_state(labels, K, hyperplanes, None, sums)
    if not new.loss < state.loss - IMPROVE_TOL:
        return None
    return Move("merge", (i, j), {"merged_into": i}, new.loss - state.loss, new)


def _split_with(state: DescentState, i: int, eng: _Engine, h: Hyperplane, members) -> DescentState | None:
    K = state.K
    v = h.values(eng.Xe[members])
    moved = members[v < 0]
    if moved.size == 0 or moved.size == members.size:
        return None
    labels = state.labels.copy()
    labels[moved] = K
    sizes = np.bincount(labels, minlength=K + 1)
    if not eng.sizes_ok(sizes):
        return None
    hyperplanes = dict(state.hyperplanes)
    hyperplanes[(i, K)] = h
    for other in range(K):
        if other != i:
            hyperplanes[(other, K)] = eng.separate(labels, other, K)
    hyperplanes = dict(sorted(hyperplanes.items()))
    tables = state.tables.copy()
    for p in hyperplanes:
        if K in p:
            tables.set(p, *rep_errors(hyperplanes[p], eng.Xe))
    dm = eng.ds.dist.columns(moved).sum(axis=1)
    sums = np.column_stack([state.sums, dm])
    sums[:, i] -= dm
    return eng.make_state(labels, K + 1, hyperplanes, tables, sums)


def split_cluster(state: DescentState, i: int, eng: _Engine) -> Move | None:
    """Split cluster i with a new hyperplane; the new cluster gets index K."""
    cfg = eng.cfg
    if state.K >= cfg.k_max:
        return None
    members = np.flatnonzero(state.labels == i)
    if members.size < 2:
        return None
    K = state.K
    if cfg.split_search == "exhaustive":
        best = None
        seen = set()
        for w in itertools.chain.from_iterable(
                map(lambda blk: blk[1], slope_blocks(eng.Xe.shape[1], cfg.M, cfg.beta, 4096, cfg.budget))):
            p = eng.Xe[members] @ w
            for b in np.unique(np.concatenate([-p, -p - eng.eps])):
                key = tuple(p + b < 0)
                if key in seen:
                    continue
                seen.add(key)
                h = Hyperplane(i, K, tuple(int(round(x)) for x in w), float(b), eng.eps)
                new = _split_with(state, i, eng, h, members)
                if new is not None and (best is None or new.loss < best[1].loss):
                    best = (h, new)
        if best is None:
            return None
        h, new = best
    else:
        halves = kmeans_pp_init(eng.X[members], 2, cfg.split_seed).labels
        if halves.min() == halves.max():
            return None
        h = separate(eng.Xe[members[halves == 0]], eng.Xe[members[halves == 1]],
                     cfg.M, cfg.beta, eng.eps, (i, K), cfg.budget).hyperplane
        new = _split_with(state, i, eng, h, members)
        if new is None:
            return None
    if not new.loss < state.loss - IMPROVE_TOL:
        return None
    return Move("split", (i,), {"hyperplane": h.to_record()}, new.loss - state.loss, new)


@dataclass(eq=False)
class DescentResult:
    state: DescentState
    loss_trace: list = field(default_factory=list)
    moves: list = field(default_factory=list)


def descend(ds, init, cfg) -> DescentResult:
    """Run the move queue to a local optimum."""
    eng = _Engine(ds, cfg, init.epsilon)
    z = init.assignment
    state = eng.make_state(z.labels.copy(), z.K, dict(sorted(init.hyperplanes.items())))
    trace = [state.loss]
    moves = []
    queue = state.queue()
    while queue and len(moves) < cfg.max_moves:
        kind, target = queue.popleft()
        if kind == "pair":
            cands = [m for m in (boundary_shift(state, target, eng),
                                 merge_clusters(state, target, eng)) if m is not None]
            move = min(cands, key=lambda m: m.state.loss) if cands else None
        else:
            move = split_cluster(state, target, eng)
        if move is None:
            continue
        state = move.state
        trace.append(state.loss)
        moves.append(move)
        queue = state.queue()
    return DescentResult(state, trace, moves)


def coordinate_descent(ds, init, cfg) -> MpcModel:
    res = descend(ds, init, cfg)
    st = res.state
    sizes = st.sizes
    sil = silhouette_from_sums(st.sums, st.labels, sizes).mean
    rep = representation_error(Assignment(st.labels, st.K, np.zeros((st.K, ds.d))), st.tables, cfg.lam)
    return MpcModel(
        labels=st.labels, K=st.K, hyperplanes=st.hyperplanes, config=cfg,
        epsilon=init.epsilon, silhouette=float(sil), loss=st.loss, rep_error=rep,
        loss_trace=res.loss_trace, moves=[m.record() for m in res.moves],
        init_trace=list(init.trace), feature_names=tuple(ds.explain_columns),
    )
