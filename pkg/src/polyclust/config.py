"""Run configuration and the MPC-1 / MPC-2 presets."""
from __future__ import annotations

from dataclasses import asdict, dataclass, replace

from .errors import ConfigError, InfeasibleError
from .geometry import default_epsilon

PRESETS = {
    "mpc1": {"M": 1, "beta": 1},
    "mpc2": {"M": 3, "beta": 2},
}


@dataclass(frozen=True)
class MpcConfig:
    K: int = 2
    K_max: int | None = None
    lam: float = 1.0
    M: int = 1
    beta: int = 1
    epsilon: float | str = "auto"
    n_min: int = 1
    n_max: int | None = None
    restarts: int = 1
    seed: int = 0
    cd_objective: str = "silhouette"
    k_sweep: tuple | None = None
    # split proposals: "two_means" or "exhaustive" (tiny instances only)
    split_search: str = "two_means"
    split_seed: int = 0
    inner_cap: int = 100
    outer_cap: int = 50
    tol: float = 1e-10
    flow_resolution: float = 1e-9
    budget: int = 5_000_000
    max_moves: int = 100_000
    workers: int = 1

    @classmethod
    def preset(cls, name: str, **overrides) -> "MpcConfig":
        try:
            base = PRESETS[name.lower().replace("-", "")]
        except KeyError:
            raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
        return cls(**{**base, **overrides})

    def with_(self, **kw) -> "MpcConfig":
        return replace(self, **kw)

    @property
    def k_max(self) -> int:
        return self.K if self.K_max is None else self.K_max

    def n_max_for(self, n: int) -> int:
        return n if self.n_max is None else self.n_max

    def validate(self, n: int | None = None) -> "MpcConfig":
        if self.K < 2:
            raise ConfigError(f"K must be at least 2, got {self.K}")
        if self.k_max < self.K:
            raise ConfigError(f"K_max ({self.k_max}) must be >= K ({self.K})")
        if self.lam < 0:
            raise ConfigError("lambda must be nonnegative")
        if self.M < 1 or self.beta < 1:
            raise ConfigError("M and beta must be >= 1")
        if isinstance(self.epsilon, str):
            if self.epsilon != "auto":
                raise ConfigError(f"epsilon must be a positive number or 'auto', got {self.epsilon!r}")
        elif not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")
        if self.cd_objective not in ("silhouette", "kmeans"):
            raise ConfigError(f"cd_objective must be 'silhouette' or 'kmeans', got {self.cd_objective!r}")
        if self.split_search not in ("two_means", "exhaustive"):
            raise ConfigError(f"unknown split_search {self.split_search!r}")
        if self.n_min < 0:
            raise ConfigError("n_min must be >= 0")
        if self.k_sweep is not None and len(self.k_sweep) == 0:
            raise ConfigError("k_sweep is empty")
        if n is not None:
            if self.k_max > n:
                raise InfeasibleError(f"K_max={self.k_max} exceeds the number of points N={n}")
            n_max = self.n_max_for(n)
            lo = max(self.n_min, 1)
            if self.K * lo > n or self.K * n_max < n or n_max < lo:
                raise InfeasibleError(
                    f"cardinality bounds [{self.n_min}, {n_max}] cannot cover N={n} points with K={self.K}"
                )
        return self

    def resolve_epsilon(self, X) -> float:
        if self.epsilon == "auto":
            return default_epsilon(X, self.M, self.beta)
        return float(self.epsilon)

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["k_sweep"] is not None:
            d["k_sweep"] = list(d["k_sweep"])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MpcConfig":
        d = dict(d)
        if d.get("k_sweep") is not None:
            d["k_sweep"] = tuple(d["k_sweep"])
        return cls(**d)
