"""Small dense two-phase simplex with Bland's pivoting rule.

Written for the tiny equality systems that come out of CAR admissibility
checks. Bland's rule (lowest-index entering and leaving variables) makes
the pivot sequence cycle-free and fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ProblemTooLarge

MAX_SIZE = 200
PIVOT_TOL = 1e-11
FEAS_TOL = 1e-9


@dataclass(frozen=True)
class LpResult:
    status: str                 # "optimal", "infeasible" or "unbounded"
    value: float | None
    x: np.ndarray | None
    phase1_residual: float
    pivots: int


def _pivot(T: np.ndarray, r: int, c: int) -> None:
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    T[np.abs(T) < 1e-15] = 0.0


def _iterate(T: np.ndarray, basis: list, allowed: int, tol: float, max_pivots: int = 100_000) -> tuple:
    """Maximize with the reduced costs kept in the last row (negative = improving)."""
    pivots = 0
    while pivots < max_pivots:
        improving = np.nonzero(T[-1, :allowed] < -tol)[0]
        if improving.size == 0:
            return "optimal", pivots
        e = int(improving[0])
        best = None
        for i in range(T.shape[0] - 1):
            if T[i, e] > tol:
                ratio = T[i, -1] / T[i, e]
                key = (ratio, basis[i])
                if best is None or ratio < best[0][0] - 1e-14 or (
                        abs(ratio - best[0][0]) <= 1e-14 and basis[i] < best[0][1]):
                    best = (key, i)
        if best is None:
            return "unbounded", pivots
        r = best[1]
        _pivot(T, r, e)
        basis[r] = e
        pivots += 1
    raise RuntimeError("simplex exceeded its pivot budget")


def simplex_max(c, A_eq, b_eq, tol: float = PIVOT_TOL, feas_tol: float = FEAS_TOL,
                max_size: int = MAX_SIZE) -> LpResult:
    """maximize c.x subject to A_eq x = b_eq, x >= 0."""
    A = np.array(A_eq, dtype=float)
    b = np.array(b_eq, dtype=float)
    c = np.array(c, dtype=float)
    m, n = A.shape
    if m > max_size or n > max_size:
        raise ProblemTooLarge(f"LP with {m} rows and {n} columns exceeds {max_size}")
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    # phase 1: artificials n..n+m-1 start in the basis
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    _, p1 = _iterate(T, basis, n + m, tol)
    residual = -T[-1, -1]
    if residual > feas_tol:
        return LpResult("infeasible", None, None, float(residual), p1)

    # drive artificials out of the basis; drop redundant rows
    keep = []
    for i in range(m):
        if basis[i] >= n:
            cols = np.nonzero(np.abs(T[i, :n]) > tol)[0]
            if cols.size:
                _pivot(T, i, int(cols[0]))
                basis[i] = int(cols[0])
                keep.append(i)
        else:
            keep.append(i)
    rows = [T[i, :n].tolist() + [T[i, -1]] for i in keep]
    T2 = np.zeros((len(keep) + 1, n + 1))
    if rows:
        T2[:-1] = np.array(rows)
    basis2 = [basis[i] for i in keep]
    cb = c[basis2] if basis2 else np.zeros(0)
    T2[-1, :n] = cb @ T2[:-1, :n] - c
    T2[-1, -1] = cb @ T2[:-1, -1]
    status, p2 = _iterate(T2, basis2, n, tol)
    if status == "unbounded":
        return LpResult("unbounded", None, None, float(residual), p1 + p2)
    x = np.zeros(n)
    for i, j in enumerate(basis2):
        x[j] = T2[i, -1]
    x[np.abs(x) < 1e-14] = 0.0
    return LpResult("optimal", float(c @ x), x, float(residual), p1 + p2)


def lp_solve_maxmin(A_eq, b_eq, max_size: int = MAX_SIZE) -> LpResult:
    """maximize t subject to A_eq a = b_eq, a_i >= t >= 0.

    The returned x holds the a-part only; ``value`` is the optimal t.
    """
    A = np.array(A_eq, dtype=float)
    b = np.array(b_eq, dtype=float)
    m, n = A.shape
    if m > max_size or n > max_size:
        raise ProblemTooLarge(f"system with {m} equations and {n} unknowns exceeds {max_size}")
    # columns: a (n), t (1), slacks s_i = a_i - t (n)
    big = np.zeros((m + n, 2 * n + 1))
    big[:m, :n] = A
    big[m:, :n] = np.eye(n)
    big[m:, n] = -1.0
    big[m:, n + 1:] = -np.eye(n)
    rhs = np.concatenate([b, np.zeros(n)])
    c = np.zeros(2 * n + 1)
    c[n] = 1.0
    res = simplex_max(c, big, rhs, max_size=max(max_size, 2 * n + 1, m + n))
    if res.status != "optimal":
        return res
    return LpResult(res.status, res.value, res.x[:n], res.phase1_residual, res.pivots)
