"""Linear programs: a dense two-phase tableau simplex and the benchmark LPs.

The simplex uses Bland's rule (smallest eligible index enters, ties in the
ratio test go to the smallest basic index), so it never cycles and always
returns the same vertex for the same input. The pivoting loop is compiled
with numba because the stopped-LP benchmark and the guess updates solve one
small LP per round.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numba import njit

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-9

_OPTIMAL, _INFEASIBLE, _UNBOUNDED = 0, 1, 2


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


_STATUS = {_OPTIMAL: LpStatus.OPTIMAL, _INFEASIBLE: LpStatus.INFEASIBLE, _UNBOUNDED: LpStatus.UNBOUNDED}


class LpInfeasible(Exception):
    pass


class LpUnbounded(Exception):
    pass


# ---------------------------------------------------------------------------
# Compiled kernel
# ---------------------------------------------------------------------------

@njit(cache=True)
def _pivot(tab, row, col):
    tab[row, :] /= tab[row, col]
    for i in range(tab.shape[0]):
        if i != row:
            f = tab[i, col]
            if f != 0.0:
                tab[i, :] -= f * tab[row, :]


@njit(cache=True)
def _iterate(tab, basis, n_allowed, tol):
    # Objective row (last row) holds reduced profits; maximize.
    m = tab.shape[0] - 1
    rhs = tab.shape[1] - 1
    while True:
        col = -1
        for j in range(n_allowed):
            if tab[m, j] > tol:
                col = j
                break
        if col < 0:
            return _OPTIMAL
        row = -1
        best = np.inf
        for i in range(m):
            a = tab[i, col]
            if a > tol:
                r = tab[i, rhs] / a
                if row < 0 or r < best - 1e-13 or (r <= best + 1e-13 and basis[i] < basis[row]):
                    row = i
                    best = r
        if row < 0:
            return _UNBOUNDED
        _pivot(tab, row, col)
        basis[row] = col


@njit(cache=True)
def _solve_standard(A, b, c, hint, ptol, ftol):
    """Maximize c.x subject to A x = b, x >= 0, with b >= 0.

    `hint[i]` is a column that is a unit vector for row i (a slack), or -1 if
    the row needs an artificial variable.
    """
    m, n = A.shape
    n_art = 0
    for i in range(m):
        if hint[i] < 0:
            n_art += 1
    width = n + n_art + 1
    tab = np.zeros((m + 1, width))
    basis = np.empty(m, dtype=np.int64)
    k = n
    for i in range(m):
        tab[i, :n] = A[i]
        tab[i, width - 1] = b[i]
        if hint[i] < 0:
            tab[i, k] = 1.0
            basis[i] = k
            k += 1
        else:
            basis[i] = hint[i]
    x = np.zeros(n)
    if n_art > 0:
        for i in range(m):
            if basis[i] >= n:
                tab[m, :n] += tab[i, :n]
                tab[m, width - 1] += tab[i, width - 1]
        _iterate(tab, basis, n + n_art, ptol)
        if tab[m, width - 1] > ftol:
            return _INFEASIBLE, x, 0.0
        # move artificials that stayed basic (at zero) out of the basis
        for i in range(m):
            if basis[i] >= n:
                for j in range(n):
                    if abs(tab[i, j]) > ptol:
                        _pivot(tab, i, j)
                        basis[i] = j
                        break
        tab[m, :] = 0.0
    tab[m, :n] = c
    for i in range(m):
        if basis[i] < n:
            cb = c[basis[i]]
            if cb != 0.0:
                tab[m, :] -= cb * tab[i, :]
    status = _iterate(tab, basis, n, ptol)
    if status != _OPTIMAL:
        return status, x, 0.0
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = max(tab[i, width - 1], 0.0)
    return _OPTIMAL, x, -tab[m, width - 1]


@njit(cache=True)
def _benchmark_kernel(rewards, cons, rate, ptol, ftol):
    # max r.X  s.t.  sum X = 1,  cons[:, i].X <= rate,  X >= 0
    K, d = cons.shape
    A = np.zeros((d + 1, K + d))
    b = np.zeros(d + 1)
    hint = np.empty(d + 1, dtype=np.int64)
    for i in range(d):
        A[i, :K] = cons[:, i]
        A[i, K + i] = 1.0
        b[i] = rate
        hint[i] = K + i
    A[d, :K] = 1.0
    b[d] = 1.0
    hint[d] = -1
    c = np.zeros(K + d)
    c[:K] = rewards
    status, x, value = _solve_standard(A, b, c, hint, ptol, ftol)
    return status, x[:K], value


@njit(cache=True)
def _stopped_scan(prefix, B, ptol, ftol):
    # prefix[t] = sum of outcome matrices over rounds 1..t+1
    T, K, w = prefix.shape
    values = np.zeros(T)
    dists = np.zeros((T, K))
    status = np.zeros(T, dtype=np.int64)
    for t in range(T):
        tau = t + 1
        mean = prefix[t] / tau
        s, x, v = _benchmark_kernel(mean[:, 0].copy(), mean[:, 1:].copy(), B / tau, ptol, ftol)
        status[t] = s
        values[t] = tau * v
        dists[t] = x
    return status, values, dists


# ---------------------------------------------------------------------------
# General LP
# ---------------------------------------------------------------------------

@dataclass
class LpResult:
    status: LpStatus
    x: Optional[np.ndarray]
    value: float


def _as_2d(A, n, name):
    if A is None:
        return np.zeros((0, n))
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[1] != n:
        raise ValueError(f"{name} has {A.shape[1]} columns, expected {n}")
    return A


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None,
             bounds: Optional[Sequence] = None) -> LpResult:
    """Maximize c.x subject to A_ub x <= b_ub, A_eq x = b_eq and bounds.

    Args:
        c: objective coefficients, length n.
        A_ub, b_ub: inequality rows (optional).
        A_eq, b_eq: equality rows (optional).
        bounds: sequence of (low, high) per variable, None meaning unbounded
            on that side. Defaults to (0, None) for every variable.

    Returns:
        LpResult with status, solution x (None unless optimal) and value.
    """
    c = np.asarray(c, dtype=float).ravel()
    n = len(c)
    A_ub, A_eq = _as_2d(A_ub, n, "A_ub"), _as_2d(A_eq, n, "A_eq")
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    if len(b_ub) != len(A_ub) or len(b_eq) != len(A_eq):
        raise ValueError("constraint matrix and right-hand side lengths differ")
    if bounds is None:
        bounds = [(0.0, None)] * n
    if len(bounds) != n:
        raise ValueError(f"{len(bounds)} bounds for {n} variables")
    for arr in (c, A_ub, A_eq, b_ub, b_eq):
        if not np.all(np.isfinite(arr)):
            raise ValueError("LP data must be finite")

    # x = shift + S @ y with y >= 0; extra rows for finite upper bounds
    cols, shift, upper = [], np.zeros(n), []
    for j, (lo, hi) in enumerate(bounds):
        lo = -np.inf if lo is None else float(lo)
        hi = np.inf if hi is None else float(hi)
        if lo > hi:
            return LpResult(LpStatus.INFEASIBLE, None, 0.0)
        if np.isfinite(lo):
            shift[j] = lo
            cols.append((j, 1.0))
            if np.isfinite(hi):
                upper.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            shift[j] = hi
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    S = np.zeros((n, len(cols)))
    for k, (j, s) in enumerate(cols):
        S[j, k] = s
    ny = len(cols)

    rows, rhs, kinds = [], [], []  # kind: 1 for <=, 0 for =
    for a, bb in zip(A_ub, b_ub):
        rows.append(a @ S)
        rhs.append(bb - a @ shift)
        kinds.append(1)
    for k, u in upper:
        e = np.zeros(ny)
        e[k] = 1.0
        rows.append(e)
        rhs.append(u)
        kinds.append(1)
    for a, bb in zip(A_eq, b_eq):
        rows.append(a @ S)
        rhs.append(bb - a @ shift)
        kinds.append(0)
    m = len(rows)
    n_slack = sum(kinds)
    A = np.zeros((m, ny + n_slack))
    b = np.zeros(m)
    hint = np.full(m, -1, dtype=np.int64)
    s = ny
    for i in range(m):
        A[i, :ny] = rows[i]
        b[i] = rhs[i]
        if kinds[i] == 1:
            A[i, s] = 1.0
            hint[i] = s
            s += 1
        if b[i] < 0:
            A[i] *= -1
            b[i] *= -1
            hint[i] = -1
    cy = np.concatenate([c @ S, np.zeros(n_slack)])
    status, y, value = _solve_standard(A, b, cy, hint, PIVOT_TOL, FEAS_TOL)
    st = _STATUS[status]
    if st is not LpStatus.OPTIMAL:
        return LpResult(st, None, 0.0)
    x = shift + S @ y[:ny]
    return LpResult(st, x, float(value + c @ shift))


# ---------------------------------------------------------------------------
# Benchmark LPs
# ---------------------------------------------------------------------------

@dataclass
class LpSolution:
    value: float
    distribution: np.ndarray
    status: LpStatus


def _check_matrix(M):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[1] < 2:
        raise ValueError(f"outcome matrix must have shape (K, d + 1), got {M.shape}")
    if not np.all(np.isfinite(M)) or (M < 0).any() or (M > 1).any():
        raise ValueError("outcome matrix entries must lie in [0, 1]")
    return M


def _lex_smallest_feasible(M, rate):
    # minimize X(0), then X(1) with X(0) fixed, and so on
    K = M.shape[0]
    A_ub, b_ub = M[:, 1:].T, np.full(M.shape[1] - 1, rate)
    fixed = []
    for a in range(K):
        c = np.zeros(K)
        c[a] = -1.0
        A_eq = np.vstack([np.ones(K)] + [np.eye(K)[j] for j, _ in fixed])
        b_eq = np.array([1.0] + [v for _, v in fixed])
        res = solve_lp(c, A_ub, b_ub, A_eq, b_eq)
        if res.status is not LpStatus.OPTIMAL:
            raise LpInfeasible("no distribution satisfies the per-round budget")
        fixed.append((a, max(res.x[a], 0.0)))
    x = np.array([v for _, v in fixed])
    return x / x.sum()


def benchmark_lp(M, B: float, T: float, null_arm: Optional[int] = None,
                 check: bool = True) -> LpSolution:
    """Best distribution over arms for the mean outcome matrix M.

    Maximizes sum_a X(a) r(a) over distributions X with per-round expected
    consumption at most B/T for every resource. When all rewards are zero and
    a null arm exists, the null arm's point mass is returned.

    Raises:
        LpInfeasible: if no distribution meets the consumption constraints.
    """
    M = _check_matrix(M) if check else np.asarray(M, dtype=float)
    if B < 0 or T <= 0:
        raise ValueError("need B >= 0 and T > 0")
    K = M.shape[0]
    if not (M[:, 0] > 0).any():
        if null_arm is not None:
            x = np.zeros(K)
            x[null_arm] = 1.0
            return LpSolution(0.0, x, LpStatus.OPTIMAL)
        return LpSolution(0.0, _lex_smallest_feasible(M, B / T), LpStatus.OPTIMAL)
    status, x, v = _benchmark_kernel(np.ascontiguousarray(M[:, 0]), np.ascontiguousarray(M[:, 1:]),
                                     float(B) / float(T), PIVOT_TOL, FEAS_TOL)
    if status == _INFEASIBLE:
        raise LpInfeasible("no distribution satisfies the per-round budget")
    return LpSolution(float(v), x, LpStatus.OPTIMAL)


@dataclass
class StoppedLpResult:
    value: float
    argmax_time: int
    distribution: np.ndarray
    values: np.ndarray  # values[tau - 1] = tau * OPT_LP(mean over 1..tau, B, tau)


def stopped_lp(matrices, B: float, null_arm: Optional[int] = None) -> StoppedLpResult:
    """max over tau of tau * OPT_LP(average of rounds 1..tau, B, tau).

    Ties go to the smallest tau.
    """
    m = np.asarray(matrices, dtype=float)
    if m.ndim != 3 or len(m) == 0:
        raise ValueError("need a nonempty (T, K, d + 1) sequence")
    prefix = np.cumsum(m, axis=0)
    status, values, dists = _stopped_scan(prefix, float(B), PIVOT_TOL, FEAS_TOL)
    # a prefix whose per-round budget no arm mix can meet does not compete
    values = np.where(status == _OPTIMAL, values, -np.inf)
    if not np.isfinite(values).any():
        raise LpInfeasible("per-round budget infeasible for every prefix")
    best = int(np.argmax(values))  # first maximum
    x = dists[best]
    if values[best] == 0.0 and null_arm is not None:
        x = np.zeros(m.shape[1])
        x[null_arm] = 1.0
    return StoppedLpResult(float(values[best]), best + 1, x, values)


def interval_obj(matrices, start: int, stop: int, B: float) -> float:
    """OBJ over rounds start..stop: tau * OPT_LP(mean there, B, tau), tau = stop - start + 1."""
    m = np.asarray(matrices, dtype=float)
    if not (1 <= start <= stop <= len(m)):
        raise ValueError(f"bad round range [{start}, {stop}]")
    tau = stop - start + 1
    return tau * benchmark_lp(m[start - 1: stop].mean(axis=0), B, tau).value


def rescale_budget_value(M, B: float, T: float, psi: float) -> tuple[float, float]:
    """(OPT_LP(M, psi * B, T), OPT_LP(M, B, T)).

    The first is at least psi times the second: scaling an optimal X by psi
    and moving the remaining mass to a zero-consumption arm stays feasible.
    """
    if not (0 < psi <= 1):
        raise ValueError("psi must lie in (0, 1]")
    return benchmark_lp(M, psi * B, T).value, benchmark_lp(M, B, T).value
