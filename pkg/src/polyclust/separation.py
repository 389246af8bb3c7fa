"""Exact sparse-integer separating hyperplanes.

The slope set {w integer, |w_d| <= M, at most beta nonzeros, w != 0} is
finite, and for a fixed slope the best intercept minimizes a convex
piecewise-linear function whose minimum sits on a breakpoint. Enumerating
slopes and scanning breakpoints therefore solves the integer program
exactly.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError
from .geometry import Hyperplane, n_slope_candidates

DEFAULT_BUDGET = 5_000_000
_BLOCK_ENTRIES = 2_000_000


def _coefficient_values(M: int) -> list:
    out = []
    for m in range(1, M + 1):
        out += [m, -m]
    return out


def iter_slopes(d: int, M: int, beta: int):
    """Yield slopes as tuples: sparser supports first, then lexicographic
    support, then coefficients in the order 1, -1, 2, -2, ..."""
    vals = _coefficient_values(M)
    for size in range(1, min(beta, d) + 1):
        for support in itertools.combinations(range(d), size):
            for coefs in itertools.product(vals, repeat=size):
                w = [0] * d
                for s, c in zip(support, coefs):
                    w[s] = c
                yield tuple(w)


def check_budget(d: int, M: int, beta: int, budget: int = DEFAULT_BUDGET) -> int:
    if M < 1 or beta < 1:
        raise ConfigError(f"need M >= 1 and beta >= 1, got M={M}, beta={beta}")
    b = min(beta, d)
    from math import comb

    if comb(d, b) * (2 * M) ** b > budget:
        raise ConfigError(
            f"slope enumeration too large: C({d},{b})*(2*{M})^{b} exceeds budget {budget}; "
            "lower M or beta, or use a smaller explanation feature space"
        )
    return n_slope_candidates(d, M, beta)


def enumerate_slopes(d: int, M: int, beta: int, budget: int = DEFAULT_BUDGET):
    """All feasible integer slopes, each once, in a fixed deterministic order."""
    check_budget(d, M, beta, budget)
    return list(iter_slopes(d, M, beta))


@lru_cache(maxsize=32)
def _slope_matrix(d: int, M: int, beta: int) -> np.ndarray:
    W = np.array(list(iter_slopes(d, M, beta)), dtype=float).reshape(-1, d)
    W.setflags(write=False)
    return W


def slope_blocks(d: int, M: int, beta: int, rows: int, budget: int = DEFAULT_BUDGET):
    """Yield (offset, W) blocks of the slope enumeration with at most ``rows`` rows."""
    total = check_budget(d, M, beta, budget)
    if total <= 50_000:
        W = _slope_matrix(d, M, beta)
        for start in range(0, len(W), rows):
            yield start, W[start:start + rows]
        return
    buf, start = [], 0
    for w in iter_slopes(d, M, beta):
        buf.append(w)
        if len(buf) == rows:
            yield start, np.array(buf, dtype=float)
            start += rows
            buf = []
    if buf:
        yield start, np.array(buf, dtype=float)


@dataclass(frozen=True, eq=False)
class SeparationProblem:
    """Separate ``left`` (cluster i, the >= side) from ``right`` (cluster j)."""

    left: np.ndarray
    right: np.ndarray
    M: int
    beta: int
    epsilon: float
    pair: tuple = (0, 1)
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        left = np.atleast_2d(np.asarray(self.left, dtype=float))
        right = np.atleast_2d(np.asarray(self.right, dtype=float))
        if left.shape[0] == 0 or right.shape[0] == 0 or left.size == 0 or right.size == 0:
            raise ValueError("both sides of a separation problem need points")
        if left.shape[1] != right.shape[1]:
            raise ValueError(f"dimension mismatch: left has {left.shape[1]}, right has {right.shape[1]}")
        if self.M < 1 or not 1 <= self.beta:
            raise ValueError("need M >= 1 and beta >= 1")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @property
    def d(self) -> int:
        return self.left.shape[1]


@dataclass(frozen=True)
class SeparationResult:
    hyperplane: Hyperplane
    objective: float

    @property
    def perfect(self) -> bool:
        return self.objective == 0.0


def hinge_objective(pl, pr, b, eps):
    """sum_left max(-(p+b), 0) + sum_right max(p+b+eps, 0); broadcasts over b."""
    return (np.maximum(-(pl + b), 0.0).sum(axis=0)
            + np.maximum(pr + b + eps, 0.0).sum(axis=0))


def intercept_scan(PL: np.ndarray, PR: np.ndarray, eps: float):
    """Best intercept per column of the projection matrices.

    ``PL`` (nL x S) and ``PR`` (nR x S) hold projections w.x of the left and
    right points for S slopes. Returns ``(b, f)``: for each slope the smallest
    optimal breakpoint and the objective there, found in O(n log n) with
    prefix sums.
    """
    nL = PL.shape[0]
    C = np.vstack([-PL, -PR - eps])
    order = np.argsort(C, axis=0, kind="stable")
    Cs = np.take_along_axis(C, order, axis=0)
    is_left = order < nL
    lv = np.where(is_left, Cs, 0.0)
    rv = np.where(is_left, 0.0, Cs)
    l_sum = np.cumsum(lv[::-1], axis=0)[::-1]
    l_cnt = np.cumsum(is_left[::-1], axis=0)[::-1]
    r_sum = np.cumsum(rv, axis=0)
    r_cnt = np.cumsum(~is_left, axis=0)
    # ties on either side of a breakpoint contribute zero, so positional
    # prefixes are exact
    f = (l_sum - Cs * l_cnt) + (Cs * r_cnt - r_sum)
    fmin = f.min(axis=0)
    scale = np.abs(Cs).sum(axis=0) + 1.0
    first = np.argmax(f <= fmin + 1e-13 * scale, axis=0)
    cols = np.arange(C.shape[1])
    return Cs[first, cols], f[first, cols]


def best_intercept(w, prob: SeparationProblem) -> tuple:
    """Smallest objective-minimizing intercept for slope ``w``."""
    w = np.asarray(w, dtype=float)
    if w.shape != (prob.d,):
        raise ValueError("slope dimension does not match the problem")
    pl = prob.left @ w
    pr = prob.right @ w
    b, _ = intercept_scan(pl[:, None], pr[:, None], prob.epsilon)
    b = float(b[0])
    return b, float(hinge_objective(pl, pr, b, prob.epsilon))


def solve_separation(prob: SeparationProblem) -> SeparationResult:
    """Globally optimal (w, b) for the separating-hyperplane integer program.

    Ties go to the first slope in enumeration order, then to the smallest
    optimal intercept.
    """
    d, eps = prob.d, prob.epsilon
    m = len(prob.left) + len(prob.right)
    rows = max(1, _BLOCK_ENTRIES // max(m, 1))
    best = None
    for start, W in slope_blocks(d, prob.M, prob.beta, rows, prob.budget):
        PL = prob.left @ W.T
        PR = prob.right @ W.T
        b, _ = intercept_scan(PL, PR, eps)
        obj = hinge_objective(PL, PR, b, eps)
        k = int(np.argmin(obj))
        tol = 1e-12 * (1.0 + abs(obj[k]))
        k = int(np.argmax(obj <= obj[k] + tol))
        if best is None or obj[k] < best[0] - 1e-12 * (1.0 + abs(best[0])):
            best = (float(obj[k]), W[k].copy(), float(b[k]))
    obj, w, b = best
    h = Hyperplane(prob.pair[0], prob.pair[1], tuple(int(round(v)) for v in w), b, eps)
    return SeparationResult(h, obj)


def separate(left, right, M: int, beta: int, epsilon: float, pair=(0, 1),
             budget: int = DEFAULT_BUDGET) -> SeparationResult:
    return solve_separation(SeparationProblem(left, right, M, beta, epsilon, tuple(pair), budget))
