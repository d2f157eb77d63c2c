"""
Small dense linear programs.

``simplex_max`` is a tableau simplex with Bland's rule for problems of the
form ``max c.x  s.t.  A x <= b, x >= 0`` with ``b >= 0``, so the slack basis
is feasible from the start. Problems here have at most a few hundred
variables.
"""
import logging

import numpy as np

from .exceptions import LinearProgramError

logger = logging.getLogger('solvers')

PIVOT_TOL = 1e-12


def simplex_max(c, A, b, max_pivots=None):
    """
    Solve ``max c.x  s.t.  A x <= b, x >= 0``.

    Returns ``(x, y, value)`` where ``y`` are the optimal dual prices of the
    constraints.
    """
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if np.any(b < 0):
        raise LinearProgramError("simplex_max needs a non-negative right-hand side")

    # Row 0 holds reduced costs, the last column the right-hand side.
    T = np.zeros((m + 1, n + m + 1))
    T[0, :n] = -c
    T[1:, :n] = A
    T[1:, n:n + m] = np.eye(m)
    T[1:, -1] = b
    basis = np.arange(n, n + m)

    max_pivots = max_pivots or 50 * (n + m) + 100
    for _ in range(max_pivots):
        entering = np.flatnonzero(T[0, :-1] < -PIVOT_TOL)
        if len(entering) == 0:
            break
        j = entering[0]
        column = T[1:, j]
        rows = np.flatnonzero(column > PIVOT_TOL)
        if len(rows) == 0:
            raise LinearProgramError("Linear program is unbounded")
        ratios = T[1:, -1][rows] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
        i = tied[np.argmin(basis[tied])] + 1
        T[i] /= T[i, j]
        others = np.arange(m + 1) != i
        T[others] -= np.outer(T[others, j], T[i])
        basis[i - 1] = j
    else:
        raise LinearProgramError(f"Simplex did not terminate within {max_pivots} pivots")

    x = np.zeros(n + m)
    x[basis] = T[1:, -1]
    duals = T[0, n:n + m].copy()
    return x[:n], duals, float(T[0, -1])


def solve_matrix_game(G):
    """
    Optimal mixed strategies of a zero-sum matrix game.

    Rows are played by the minimiser, columns by the maximiser and ``G`` is
    the payoff to the maximiser. Returns ``(row_strategy, column_strategy,
    value)``.
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    k, n = G.shape
    shift = 1.0 - G.min()
    shifted = G + shift

    # Minimiser: max sum(y)  s.t.  shifted^T y <= 1. Its duals are the maximiser's weights.
    y, duals, total = simplex_max(np.ones(k), shifted.T, np.ones(n))
    if total <= 0:
        raise LinearProgramError("Matrix game LP returned a non-positive objective")
    scale = 1.0 / total
    rows = np.clip(y * scale, 0.0, None)
    columns = np.clip(duals * scale, 0.0, None)
    rows /= rows.sum()
    columns /= columns.sum()
    return rows, columns, scale - shift
