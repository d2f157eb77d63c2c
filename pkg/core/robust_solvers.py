"""
Inner problems over interval rows, value iteration and the belief-dependent
worst case for non-measuring steps.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .exceptions import InfeasibleRowError, LinearProgramError, SolverDivergenceError
from .lp import solve_matrix_game
from .ram_model import Belief, PointModel, gather_rows
from .solver_config import SolverConfig
from .utils import argmax_rows, tied_argmax

logger = logging.getLogger('solvers')


@dataclass(frozen=True)
class WorstCaseRow:
    distribution: tuple
    achieved_value: float

    def as_dict(self):
        return dict(self.distribution)


def _row_values(row, values):
    if isinstance(values, dict):
        return np.array([values.get(int(s), 0.0) for s in row.successors], dtype=float)
    return np.asarray(values, dtype=float)[row.successors]


def _single_row(row, values, maximize):
    eps = SolverConfig.prob_epsilon()
    lo_sum, hi_sum = float(row.lo.sum()), float(row.hi.sum())
    if lo_sum > 1.0 + eps or hi_sum < 1.0 - eps or np.any(row.lo > row.hi):
        raise InfeasibleRowError(-1, -1, lo_sum, hi_sum)
    v = _row_values(row, values)
    indptr = np.array([0, len(v)])
    probs, expectation = greedy_allocation(indptr, np.zeros(len(v), dtype=np.int64), v, row.lo, row.hi, maximize)
    distribution = tuple((int(s), float(p)) for s, p in zip(row.successors, probs) if p > 0)
    return WorstCaseRow(distribution, float(expectation[0]))


def inner_worst_expectation(row, values):
    """Distribution in the row's interval set that minimises the expected value"""
    return _single_row(row, values, maximize=False)


def inner_best_expectation(row, values):
    """Distribution in the row's interval set that maximises the expected value"""
    return _single_row(row, values, maximize=True)


def greedy_allocation(indptr, row_ids, values, lo, hi, maximize=False, order=None):
    """
    Greedy interval allocation for many rows at once.

    Every entry receives its lower bound; the remaining mass of each row goes
    to entries in ascending value order (descending when maximising), each up
    to its upper bound. Ties go to the lower entry index. Returns the per-entry
    probabilities and per-row expectations. A precomputed ``order`` must sort
    every row by value; its tie order does not change the expectations.
    """
    key = -values if maximize else values
    if order is None:
        order = np.lexsort((np.arange(len(values)), key, row_ids))
    lo_s = lo[order]
    cap = hi[order] - lo_s
    starts = indptr[:-1]
    free = 1.0 - np.add.reduceat(lo, starts)

    # Exclusive cumulative capacity inside each row, padded to the longest row
    position = np.arange(len(values)) - starts[row_ids]
    padded = np.zeros((len(starts), int(np.diff(indptr).max())))
    padded[row_ids, position] = cap
    before = (np.cumsum(padded, axis=1) - padded)[row_ids, position]
    alloc = lo_s + np.clip(free[row_ids] - before, 0.0, cap)

    probs = np.empty_like(alloc)
    probs[order] = alloc
    expectations = np.add.reduceat(probs * values, starts)
    return probs, expectations


def _repair_order(order, key, row_ids):
    """Re-sort only the rows whose order no longer matches key"""
    ranked = key[order]
    broken = (ranked[1:] < ranked[:-1]) & (row_ids[1:] == row_ids[:-1])
    if not broken.any():
        return order
    bad_rows = np.unique(row_ids[1:][broken])
    positions = np.flatnonzero(np.isin(row_ids, bad_rows))
    entries = order[positions]
    order = order.copy()
    order[positions] = entries[np.lexsort((entries, key[entries], row_ids[entries]))]
    return order


@dataclass
class QTable:
    """
    Action values of a solved model.

    ``rows`` holds the transition distribution chosen at the fixed point:
    the worst-case rows for the robust variant, the best-case rows for the
    optimistic variant and the given point model for the exact variant.
    """
    values: np.ndarray
    variant: str
    rows: PointModel
    iterations: int = 0
    residuals: list = field(default_factory=list)

    @property
    def num_states(self):
        return self.values.shape[0]

    def state_values(self):
        return self.values.max(axis=1)

    def greedy_actions(self):
        return argmax_rows(self.values)

    def to_frame(self):
        S, A = self.values.shape
        return pd.DataFrame({
            's': np.repeat(np.arange(S), A),
            'a': np.tile(np.arange(A), S),
            'value': self.values.ravel(),
        })

    def to_csv(self, path):
        self.to_frame().to_csv(path, index=False, float_format='%.12g')
        logger.info(f"Exported {self.variant} Q-table to {path}")


def value_iteration(m, variant='robust', tol=None, max_iter=None):
    """
    Q-values of an interval model.

    ``variant`` is ``'robust'`` (nature minimises), ``'optimistic'`` (nature
    maximises) or a PointModel over the same state space (exact). Iterates
    ``Q = R + gamma * E[V]`` with ``V = max_a Q`` until the sup-norm change
    of V drops below ``tol``.
    """
    tol = SolverConfig.vi_tolerance() if tol is None else tol
    max_iter = SolverConfig.vi_max_iter() if max_iter is None else max_iter
    S, A = m.num_states, m.num_actions
    gamma = m.discount
    terminal = m.terminal_mask

    if isinstance(variant, PointModel):
        point, tag = variant, SolverConfig.EXACT
    elif variant in (SolverConfig.ROBUST, SolverConfig.OPTIMISTIC):
        point, tag = None, variant
    else:
        raise ValueError(f"Unknown value iteration variant: {variant!r}")

    maximize = tag == SolverConfig.OPTIMISTIC
    V = np.zeros(S)
    residuals = []
    order = None
    row_ids = m.row_ids if point is None else None
    sign = -1.0 if maximize else 1.0

    for iteration in range(1, max_iter + 1):
        if point is None:
            values = V[m.successors]
            key = sign * values
            if order is None:
                order = np.lexsort((np.arange(len(values)), key, row_ids))
            else:
                order = _repair_order(order, key, row_ids)
            _, expectations = greedy_allocation(m.indptr, row_ids, values, m.lo, m.hi, maximize, order)
        else:
            expectations = point.expectations(V)
        Q = m.rewards + gamma * expectations.reshape(S, A)
        Q[terminal] = 0.0
        V_next = Q.max(axis=1)
        residual = float(np.max(np.abs(V_next - V)))
        residuals.append(residual)
        V = V_next
        if residual < tol:
            break
    else:
        logger.error(f"{tag} value iteration diverged on {m!r}: residual {residuals[-1]:.3e}")
        raise SolverDivergenceError(max_iter, residuals[-1])

    if point is None:
        values = V[m.successors]
        probs, expectations = greedy_allocation(m.indptr, row_ids, values, m.lo, m.hi, maximize)
        rows = PointModel.sharing_layout(m, probs)
    else:
        expectations = point.expectations(V)
        rows = point
    Q = m.rewards + gamma * expectations.reshape(S, A)
    Q[terminal] = 0.0

    logger.info(f"{tag} value iteration converged in {iteration} iterations (residual {residuals[-1]:.3e})")
    return QTable(values=Q, variant=tag, rows=rows, iterations=iteration, residuals=residuals)


def robust_belief_update(m, b, ap, pr):
    """
    Next belief under the per-state rows chosen by nature.

    ``pr`` maps every state in the support of ``b`` to a WorstCaseRow (or a
    ``{successor: probability}`` mapping).
    """
    states, mass = [], []
    for s, weight in zip(b.support, b.probs):
        row = pr[s]
        distribution = row.distribution if isinstance(row, WorstCaseRow) else tuple(row.items())
        for sp, p in distribution:
            states.append(sp)
            mass.append(weight * p)
    return Belief(states, mass)


@dataclass
class NatureResponse:
    """Nature's belief-dependent answer to a non-measuring action"""
    rows: dict
    response_action: int
    game_value: float
    response_values: np.ndarray
    rounds: int = 0

    def distribution(self, state):
        return self.rows[state].as_dict()


def _mixture_rows(states, indptr, succ, probs, values):
    rows = {}
    for i, s in enumerate(states):
        sel = slice(indptr[i], indptr[i + 1])
        dist = tuple((int(sp), float(p)) for sp, p in zip(succ[sel], probs[sel]) if p > 0)
        rows[int(s)] = WorstCaseRow(dist, float(probs[sel] @ values[sel]))
    return rows


def worst_case_transition_nomeasure(m, b, a, q, rng=None):
    """
    Nature's worst case for the control action ``a`` when the next state is
    not measured.

    Solves ``min_P max_a' sum_s b(s) sum_s' P(s'|s,a) Q(s',a')`` over the
    product of the interval rows of the support of ``b``. Nature's
    candidates are greedy best responses to mixtures of the agent's actions;
    each round solves the restricted matrix game and stops once the greedy
    response to the agent's optimal mixture reaches the restricted value.
    The returned rows mix the candidates with nature's optimal weights.
    """
    Qv = q.values if isinstance(q, QTable) else np.asarray(q, dtype=float)
    A = Qv.shape[1]
    tol = SolverConfig.game_tolerance()
    states = b.states
    rows = states * m.num_actions + a
    entries, owner = gather_rows(m.indptr, rows)
    succ = m.successors[entries]
    lo, hi = m.lo[entries], m.hi[entries]
    lengths = np.bincount(owner, minlength=len(states))
    indptr = np.concatenate(([0], np.cumsum(lengths)))
    weights = b.probs[owner]
    Qs = Qv[succ]  # entry x response

    def best_response(sigma):
        mixed = Qs @ sigma
        probs, _ = greedy_allocation(indptr, owner, mixed, lo, hi)
        return probs

    def payoff(probs):
        return (weights * probs) @ Qs

    if np.array_equal(lo, hi):
        cuts = [lo.copy()]
    else:
        cuts = []
        for j in range(A):
            candidate = best_response(np.eye(A)[j])
            if not any(np.allclose(candidate, c, rtol=0.0, atol=1e-15) for c in cuts):
                cuts.append(candidate)

    max_rounds = SolverConfig.game_max_rounds()
    for rounds in range(1, max_rounds + 1):
        G = np.array([payoff(c) for c in cuts])
        lam, sigma, upper = solve_matrix_game(G)
        if len(cuts) == 1 and np.array_equal(lo, hi):
            break
        candidate = best_response(sigma)
        lower = float(payoff(candidate) @ sigma)
        if lower >= upper - tol * max(1.0, abs(upper)):
            break
        if any(np.allclose(candidate, c, rtol=0.0, atol=1e-15) for c in cuts):
            break
        cuts.append(candidate)
    else:
        logger.error(f"Minimax for action {a} did not close after {max_rounds} rounds")
        raise LinearProgramError(f"Cutting planes did not converge in {max_rounds} rounds")

    probs = np.clip(np.asarray(cuts).T @ lam, 0.0, None)
    response_values = payoff(probs)
    response = tied_argmax(response_values, rng=rng)
    nature_rows = _mixture_rows(states, indptr, succ, probs, Qs[:, response])
    return NatureResponse(
        rows=nature_rows,
        response_action=response,
        game_value=float(response_values.max()),
        response_values=response_values,
        rounds=rounds,
    )
