"""Acceptance gate: one check per release criterion.

Each check returns ``(passed, detail)``. Under pytest every check is a test
and the pass/fail lines are printed in the terminal summary; running this
file directly prints the same lines.
"""
import itertools
import os
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from polyclust import (Dataset, MpcConfig, alternating_minimization, evaluate, export, load_model,
                       run, separate, sweep)
from polyclust.clustering import (assign_with_rep, assignment_costs, fit_hyperplanes, kmeans_pp_init,
                                  silhouette, sq_distances)
from polyclust.descent import coordinate_descent
from polyclust.geometry import RepErrorTable
from polyclust.synth import blobs, minmax, xor_diagonal

sys.path.insert(0, str(Path(__file__).parent))
from oracles import brute_assignment, naive_silhouette, separation_oracle  # noqa: E402

RESULTS = []

SEEDS_CANDIDATES = [os.environ.get("POLYCLUST_SEEDS"), Path(__file__).parent / "data" / "seeds_dataset.txt"]


def _iris() -> Dataset:
    from sklearn.datasets import load_iris

    return Dataset.from_arrays(minmax(load_iris().data))


def _sweep_mpc1(ds, restarts=100):
    t0 = time.perf_counter()
    res = sweep(MpcConfig.preset("mpc1", k_sweep=tuple(range(2, 11)), restarts=restarts), ds)
    return res, time.perf_counter() - t0


def criterion_1():
    res, wall = _sweep_mpc1(_iris())
    s = res.best.silhouette
    ok = s >= 0.620 and wall <= 300
    return ok, f"Iris MPC-1 sweep k=2..10 x 100 restarts: silhouette {s:.4f} (need >= 0.620), {wall:.0f}s (need <= 300s)"


def criterion_2():
    path = next((Path(p) for p in SEEDS_CANDIDATES if p and Path(p).is_file()), None)
    if path is None:
        return False, ("Seeds data not found; set POLYCLUST_SEEDS or place the UCI file at "
                       "tests/data/seeds_dataset.txt")
    raw = np.loadtxt(path)
    ds = Dataset.from_arrays(minmax(raw[:, :7]))
    res, wall = _sweep_mpc1(ds)
    s = res.best.silhouette
    ok = s >= 0.496 and wall <= 900
    return ok, f"Seeds MPC-1 sweep: silhouette {s:.4f} (need >= 0.496), {wall:.0f}s (need <= 900s)"


def criterion_3():
    # small lambda keeps the diagonal strips as the clustering for both
    # presets, so the two differ only in how well they can represent it
    details, ok = [], True
    for seed in range(5):
        X, y = xor_diagonal(200, seed=seed)
        ds = Dataset.from_arrays(minmax(X))
        reps = {}
        for preset in ("mpc1", "mpc2"):
            m = run(MpcConfig.preset(preset, K=2, lam=1e-3, restarts=5), ds).model
            reps[preset] = m.rep_error
        truth_axis = separate(ds.points[y == 0], ds.points[y == 1], 1, 1, 1e-3).objective
        truth_diag = separate(ds.points[y == 0], ds.points[y == 1], 3, 2, 1e-3).objective
        good = reps["mpc2"] == 0.0 and reps["mpc1"] > 0.0 and truth_diag == 0.0 and truth_axis > 0.0
        ok &= good
        details.append(f"seed {seed}: mpc1 {reps['mpc1']:.2e}, mpc2 {reps['mpc2']:.1e}")
    return ok, "XOR-diagonal representation error; " + "; ".join(details)


def criterion_4():
    failures, runs = 0, 0
    for seed in range(120):
        r = np.random.default_rng(seed)
        n, d, K = int(r.integers(10, 201)), int(r.integers(1, 6)), int(r.integers(2, 7))
        X = r.normal(size=(n, d)) + r.integers(0, 4, size=(n, 1))
        z = kmeans_pp_init(X, K, seed)
        C = z.centers
        # a Lloyd fixed point: labels are the lowest-index nearest centers
        if not np.array_equal(np.argmin(sq_distances(X, C), axis=1), z.labels):
            continue
        runs += 1
        for i, j in itertools.combinations(range(K), 2):
            w = C[j] - C[i]
            b = -w @ ((C[i] + C[j]) / 2)
            v = X @ w + b
            # v > 0 means strictly closer to c_j; ties belong to the lower index i
            failures += int(np.sum((z.labels == i) & (v > 0)) + np.sum((z.labels == j) & (v <= 0)))
    ok = runs >= 100 and failures == 0
    return ok, f"midpoint hyperplanes on {runs} k-means local optima: {failures} misclassified points"


def criterion_5():
    bad, runs, worst = 0, 0, 0.0
    for seed in range(60):
        r = np.random.default_rng(1000 + seed)
        K = int(r.integers(2, 5))
        X, _ = blobs(K, int(r.integers(30, 90)), sep=float(r.uniform(1.5, 6)), seed=seed, dim=2)
        ds = Dataset.from_arrays(minmax(X))
        cfg = MpcConfig(K=K, lam=float(r.choice([0.5, 1.0, 2.0])), M=int(r.integers(1, 3)),
                        beta=int(r.integers(1, 3)))
        init = alternating_minimization(ds, cfg, seed=seed)
        runs += 1
        tr = np.array(init.trace)
        rise = float(np.max(np.diff(tr))) if len(tr) > 1 else 0.0
        worst = max(worst, rise)
        if rise > 1e-9 or not init.converged or init.n_outer >= cfg.outer_cap:
            bad += 1
    return bad == 0, f"{runs} alternating-minimization runs: {bad} failures, largest rise {worst:.1e}"


def criterion_6():
    mismatches, worst, solve_time = 0, 0.0, 0.0
    for seed in range(110):
        r = np.random.default_rng(seed)
        d, M = int(r.integers(1, 4)), int(r.integers(1, 3))
        beta = int(r.integers(1, 3))
        nl, nr = int(r.integers(1, 7)), int(r.integers(1, 7))
        L, R = r.random((nl, d)), r.random((nr, d))
        eps = float(r.choice([0.001, 0.01, 0.05]))
        t0 = time.perf_counter()
        got = separate(L, R, M, beta, eps).objective
        solve_time += time.perf_counter() - t0
        ref = separation_oracle(L, R, M, beta, eps)
        worst = max(worst, abs(got - ref))
        mismatches += abs(got - ref) > 1e-9
    ok = mismatches == 0 and solve_time <= 60
    return ok, f"110 separation problems: {mismatches} mismatches (max |diff| {worst:.1e}), solver {solve_time:.2f}s"


def criterion_7():
    mismatches, count, worst = 0, 0, 0.0
    for lam in (0.0, 0.5, 2.0):
        for seed in range(40):
            r = np.random.default_rng(seed + int(lam * 100))
            n, K = int(r.integers(3, 9)), int(r.integers(2, 4))
            X, C = r.random((n, 2)), r.random((K, 2))
            labels = np.concatenate([np.arange(K), r.integers(0, K, n - K)])
            hs = fit_hyperplanes(X, labels, K, 1, 2, 0.02, 10**6)
            tables = RepErrorTable.from_hyperplanes(hs, X)
            n_min = int(r.integers(0, n // K + 1))
            n_max = int(r.integers(max(n_min, -(-n // K)), n + 1))
            z = assign_with_rep(X, C, tables, lam, n_min, n_max)
            cost = assignment_costs(X, C, tables, lam)
            ref, _ = brute_assignment(cost, n_min, n_max)
            got = float(cost[np.arange(n), z.labels].sum())
            sizes = np.bincount(z.labels, minlength=K)
            worst = max(worst, abs(got - ref))
            mismatches += abs(got - ref) > 1e-9 or sizes.min() < n_min or sizes.max() > n_max
            count += 1
    return mismatches == 0, f"{count} assignment instances: {mismatches} mismatches (max |diff| {worst:.1e})"


def criterion_8():
    worst, count, singletons = 0.0, 0, 0
    for seed in range(150):
        r = np.random.default_rng(seed)
        n, K = int(r.integers(3, 25)), int(r.integers(2, 6))
        K = min(K, n)
        X = r.random((n, int(r.integers(1, 4))))
        if seed % 5 == 0:
            X[1] = X[0]  # duplicates
        labels = np.concatenate([np.arange(K), r.integers(0, K, n - K)])
        singletons += int(np.any(np.bincount(labels) == 1))
        got = silhouette(Dataset.from_arrays(X), labels).per_point
        worst = max(worst, float(np.max(np.abs(got - naive_silhouette(X, labels)))))
        count += 1
    ok = worst <= 1e-10 and singletons > 0
    return ok, f"{count} silhouette instances ({singletons} with singletons): max |diff| {worst:.1e}"


def criterion_9():
    problems, runs = [], 0
    for seed in range(30):
        r = np.random.default_rng(seed)
        k_true = int(r.integers(2, 5))
        X, _ = blobs(k_true, 60, sep=float(r.uniform(2, 8)), seed=seed)
        ds = Dataset.from_arrays(minmax(X))
        K = int(r.integers(2, 6))
        cfg = MpcConfig(K=K, K_max=K + int(r.integers(0, 3)), lam=float(r.choice([0.0, 0.3, 1.0])))
        m = coordinate_descent(ds, alternating_minimization(ds, cfg, seed=seed), cfg)
        runs += 1
        tr = m.loss_trace
        if not all(b < a for a, b in zip(tr, tr[1:])):
            problems.append(f"seed {seed}: trace not strictly decreasing")
        if not 2 <= m.K <= cfg.k_max:
            problems.append(f"seed {seed}: K={m.K} outside [2, {cfg.k_max}]")
    over = []
    for seed in range(10):
        X, _ = blobs(2, 60, sep=10, seed=100 + seed)
        ds = Dataset.from_arrays(minmax(X))
        cfg = MpcConfig(K=4, K_max=4)
        over.append(coordinate_descent(ds, alternating_minimization(ds, cfg, seed=seed), cfg).K)
    if any(k != 2 for k in over):
        problems.append(f"over-clustered 2-blob runs ended at K={over}")
    detail = f"{runs} descent runs + 10 over-clustered inits (final K {sorted(set(over))})"
    return not problems, detail + ("; " + "; ".join(problems) if problems else "")


def criterion_10(tmp: Path):
    X, _ = blobs(3, 90, sep=6, seed=8)
    ds = Dataset.from_arrays(minmax(X))
    cfg = MpcConfig.preset("mpc2", K=4, K_max=5, lam=0.5, restarts=3, seed=2)
    m1 = run(cfg, ds).model
    export(m1, tmp / "a", ds)
    back = load_model(tmp / "a")
    ev = evaluate(back, ds)
    d_sil = abs(ev["silhouette"] - m1.silhouette)
    d_loss = abs(ev["loss"] - m1.loss)
    export(run(cfg, ds).model, tmp / "b", ds)
    same = all((tmp / "a" / f).read_bytes() == (tmp / "b" / f).read_bytes()
               for f in ("model.json", "assignments.csv", "moves.jsonl"))
    ok = d_sil <= 1e-9 and d_loss <= 1e-9 and same
    return ok, f"round trip |d silhouette| {d_sil:.1e}, |d loss| {d_loss:.1e}; byte-stable: {same}"


def _record(n, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    RESULTS.append(line)
    print(line)
    return line


@pytest.mark.parametrize("n", range(1, 10))
def test_criterion(n):
    ok, detail = globals()[f"criterion_{n}"]()
    _record(n, ok, detail)
    assert ok, detail


def test_criterion_10(tmp_path):
    ok, detail = criterion_10(tmp_path)
    _record(10, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    import tempfile

    failed = 0
    for n in range(1, 11):
        if n == 10:
            with tempfile.TemporaryDirectory() as d:
                ok, detail = criterion_10(Path(d))
        else:
            ok, detail = globals()[f"criterion_{n}"]()
        _record(n, ok, detail)
        failed += not ok
    sys.exit(1 if failed else 0)
