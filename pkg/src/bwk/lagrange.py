"""Lagrangian of the benchmark LP and the zero-sum game it defines.

With scaling parameters (B0, T0) the Lagrange payoff of arm a against
resource i on an outcome matrix M is

    r(a) + 1 - (T0 / B0) * c_i(a),

which lies in [1 - T0/B0, 2]. The mixed game matrix has shape (K, d): rows
are arms (maximizer), columns are resources (minimizer).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lp import LpStatus, solve_lp


@dataclass(frozen=True)
class LagrangeParams:
    B0: float
    T0: float

    def __post_init__(self):
        if not (self.B0 > 0 and self.T0 > 0):
            raise ValueError("B0 and T0 must be positive")

    @property
    def ratio(self) -> float:
        return self.T0 / self.B0

    @property
    def payoff_range(self) -> tuple[float, float]:
        return 1.0 - self.ratio, 2.0


def lagrange_value(M, B: float, T: float, X, lam) -> float:
    """L(X, lambda) = X.r + sum_i lambda_i (1 - (T/B) X.c_i)."""
    M = np.asarray(M, dtype=float)
    X, lam = np.asarray(X, dtype=float), np.asarray(lam, dtype=float)
    if X.shape != (M.shape[0],) or lam.shape != (M.shape[1] - 1,):
        raise ValueError("X or lambda has the wrong length")
    if (lam < 0).any():
        raise ValueError("lambda must be nonnegative")
    r, c = M[:, 0], M[:, 1:]
    return float(X @ r + lam @ (1.0 - (T / B) * (X @ c)))


def payoff(row, i: int, params: LagrangeParams) -> float:
    """Lagrange payoff of one arm's outcome row against resource i."""
    row = np.asarray(row, dtype=float)
    return float(row[0] + 1.0 - params.ratio * row[1 + i])


def payoff_vector(row, params: LagrangeParams) -> np.ndarray:
    """Payoffs of one arm's outcome row against every resource."""
    row = np.asarray(row, dtype=float)
    return row[0] + 1.0 - params.ratio * row[1:]


def game_matrix(M, params: LagrangeParams) -> np.ndarray:
    """G[a, i] = r(a) + 1 - (T0/B0) c_i(a)."""
    M = np.asarray(M, dtype=float)
    return M[:, :1] + 1.0 - params.ratio * M[:, 1:]


def minimax(G):
    """Value and optimal mixed strategies of the zero-sum game G.

    The row player maximizes. Solves max v s.t. G^T x >= v, x in the simplex,
    and the column player's counterpart.

    Returns:
        (value, row_strategy, column_strategy)
    """
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or 0 in G.shape:
        raise ValueError("game matrix must be two-dimensional and nonempty")
    K, d = G.shape
    # variables (x_1..x_K, v): maximize v
    c = np.zeros(K + 1)
    c[-1] = 1.0
    A_ub = np.hstack([-G.T, np.ones((d, 1))])
    A_eq = np.concatenate([np.ones(K), [0.0]])[None]
    bounds = [(0.0, None)] * K + [(None, None)]
    row = solve_lp(c, A_ub, np.zeros(d), A_eq, [1.0], bounds)
    # variables (y_1..y_d, w): minimize w s.t. G y <= w
    c2 = np.zeros(d + 1)
    c2[-1] = -1.0
    A_ub2 = np.hstack([G, -np.ones((K, 1))])
    A_eq2 = np.concatenate([np.ones(d), [0.0]])[None]
    col = solve_lp(c2, A_ub2, np.zeros(K), A_eq2, [1.0], [(0.0, None)] * d + [(None, None)])
    if row.status is not LpStatus.OPTIMAL or col.status is not LpStatus.OPTIMAL:
        raise RuntimeError("game LP did not solve")
    x = np.clip(row.x[:K], 0.0, None)
    y = np.clip(col.x[:d], 0.0, None)
    return row.value, x / x.sum(), y / y.sum()


def nash_gap(avg_primal, G, value: float) -> float:
    """How far the row strategy is from guaranteeing the game value."""
    G = np.asarray(G, dtype=float)
    return float(value - np.min(np.asarray(avg_primal, dtype=float) @ G))


def nash_gap_bound(r_min: float, r_max: float, R1: float, R2: float,
                   T: int, delta: float, tau: int) -> float:
    """Bound on nash_gap of the average play after tau rounds of two learners.

    (r_max - r_min) * (R1 + R2 + 4 sqrt(2 T ln(T / delta))) / tau, where R1 and
    R2 are the learners' regret bounds on the unit payoff scale.
    """
    width = r_max - r_min
    return width * (R1 + R2 + 4.0 * math.sqrt(2.0 * T * math.log(T / delta))) / tau
