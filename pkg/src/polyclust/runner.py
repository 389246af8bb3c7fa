"""Multi-restart runs and k sweeps."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

from .clustering import alternating_minimization
from .config import MpcConfig
from .descent import coordinate_descent
from .model import MpcModel

log = logging.getLogger(__name__)


@dataclass(eq=False)
class RunResult:
    model: MpcModel
    silhouette: float
    loss: float
    K_final: int
    wall_time: float
    seed_used: int
    K_init: int = 0

    def row(self) -> dict:
        return {"k": self.K_init, "seed": self.seed_used, "silhouette": self.silhouette,
                "loss": self.loss, "K_final": self.K_final, "wall_time": self.wall_time}


def _init_key(init) -> tuple:
    z = init.assignment
    hs = tuple((p, h.w, h.b) for p, h in sorted(init.hyperplanes.items()))
    return (z.K, z.labels.tobytes(), hs, init.epsilon, tuple(init.trace))


def run_once(cfg: MpcConfig, ds, seed: int, cache: dict | None = None) -> RunResult:
    """Alternating-minimization init followed by coordinate descent.

    Descent only depends on the initial state, so ``cache`` (keyed on it)
    lets restarts that land on the same init reuse the descent result.
    """
    t0 = time.perf_counter()
    init = alternating_minimization(ds, cfg, seed=seed)
    key = _init_key(init) if cache is not None else None
    if cache is not None and key in cache:
        model = cache[key]
    else:
        model = coordinate_descent(ds, init, cfg)
        if cache is not None:
            cache[key] = model
    wall = time.perf_counter() - t0
    return RunResult(model, model.silhouette, model.loss, model.K, wall, seed, cfg.K)


def _restart_seeds(cfg: MpcConfig) -> list:
    return [cfg.seed + r for r in range(cfg.restarts)]


def _best(results: list) -> RunResult:
    # max silhouette; ties go to the lowest seed
    return max(results, key=lambda r: (r.silhouette, -r.seed_used))


def run_all(cfg: MpcConfig, ds) -> list:
    cfg.validate(ds.n)
    seeds = _restart_seeds(cfg)
    if cfg.workers > 1 and len(seeds) > 1:
        from joblib import Parallel, delayed

        return Parallel(n_jobs=cfg.workers)(delayed(run_once)(cfg, ds, s) for s in seeds)
    cache = {}
    return [run_once(cfg, ds, s, cache) for s in seeds]


def run(cfg: MpcConfig, ds) -> RunResult:
    """Best-of-restarts run; restart r uses seed ``cfg.seed + r``."""
    return _best(run_all(cfg, ds))


@dataclass(eq=False)
class SweepResult:
    best: RunResult
    per_k: list
    results: list = field(default_factory=list)

    def table(self) -> list:
        return [r.row() for r in self.per_k]


def sweep(cfg: MpcConfig, ds) -> SweepResult:
    """Run every k in ``cfg.k_sweep`` with ``cfg.restarts`` restarts each.

    Unless ``K_max`` is set, each k runs with ``K_max = k``.
    """
    ks = list(cfg.k_sweep) if cfg.k_sweep else [cfg.K]
    per_k, everything = [], []
    for k in ks:
        k_max = k if cfg.K_max is None else max(k, cfg.K_max)
        sub = cfg.with_(K=k, K_max=k_max, k_sweep=None)
        res = run_all(sub, ds)
        everything.extend(res)
        best = _best(res)
        per_k.append(best)
        log.info("k=%d best silhouette %.6f (K_final=%d)", k, best.silhouette, best.K_final)
    return SweepResult(_best(per_k), per_k, everything)


def parse_k_range(text: str) -> tuple:
    """'2..10' -> (2, ..., 10); '3' -> (3,); '2,4,6' -> (2, 4, 6)."""
    text = text.strip()
    if ".." in text:
        lo, hi = (int(v) for v in text.split(".."))
        if hi < lo:
            raise ValueError(f"empty k range {text!r}")
        return tuple(range(lo, hi + 1))
    return tuple(int(v) for v in text.split(","))

