"""
RAM-MDP data model: interval models, point models, beliefs and validation.

Transition rows are stored in compressed sparse row layout. Row ``k`` holds
the successors of the state-action pair ``(k // num_actions, k % num_actions)``
and its entries live in ``successors[indptr[k]:indptr[k + 1]]``, sorted by
successor index.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError
from .solver_config import SolverConfig

logger = logging.getLogger('core')


def _frozen(array, dtype):
    array = np.ascontiguousarray(array, dtype=dtype)
    array.setflags(write=False)
    return array


def gather_rows(indptr, rows):
    """
    Entry indices of several CSR rows.

    Returns ``(entries, owner)`` where ``owner[i]`` is the position in
    ``rows`` of the row that ``entries[i]`` belongs to.
    """
    rows = np.asarray(rows, dtype=np.int64)
    starts = indptr[rows]
    lengths = indptr[rows + 1] - starts
    total = int(lengths.sum())
    owner = np.repeat(np.arange(len(rows)), lengths)
    offsets = np.repeat(np.cumsum(lengths) - lengths, lengths)
    entries = np.repeat(starts, lengths) + (np.arange(total) - offsets)
    return entries, owner


def _sort_coo(num_rows, rows, successors, *columns):
    rows = np.asarray(rows, dtype=np.int64)
    successors = np.asarray(successors, dtype=np.int64)
    order = np.lexsort((successors, rows))
    indptr = np.zeros(num_rows + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=num_rows), out=indptr[1:])
    return (indptr, successors[order]) + tuple(np.asarray(c, dtype=float)[order] for c in columns)


def _reward_matrix(num_states, num_actions, rewards):
    if isinstance(rewards, dict):
        matrix = np.zeros((num_states, num_actions))
        for (s, a), r in rewards.items():
            matrix[s, a] = r
        return matrix
    return np.asarray(rewards, dtype=float).reshape(num_states, num_actions)


@dataclass(frozen=True)
class ActionPair:
    control: int
    measure: bool

    def __str__(self):
        return f"<{self.control}, {int(self.measure)}>"


@dataclass(frozen=True)
class ProbInterval:
    lo: float
    hi: float

    @property
    def is_valid(self):
        return 0.0 <= self.lo <= self.hi <= 1.0


@dataclass(frozen=True, eq=False)
class UncertainRow:
    """Successors of one state-action pair with their probability intervals"""
    successors: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def from_entries(cls, entries):
        """Build from ``(successor, lo, hi)`` triples in any order"""
        entries = sorted(entries)
        if not entries:
            return cls(np.zeros(0, dtype=np.int64), np.zeros(0), np.zeros(0))
        succ, lo, hi = zip(*entries)
        return cls(np.asarray(succ, dtype=np.int64), np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))

    @property
    def entries(self):
        return [
            (int(s), ProbInterval(float(l), float(h)))
            for s, l, h in zip(self.successors, self.lo, self.hi)
        ]

    def is_feasible(self, eps=None):
        eps = SolverConfig.prob_epsilon() if eps is None else eps
        return self.lo.sum() <= 1.0 + eps and self.hi.sum() >= 1.0 - eps and bool(np.all(self.lo <= self.hi))

    def __len__(self):
        return len(self.successors)


class RamMdp:
    """
    Robust active-measuring MDP with interval transition uncertainty.

    Arrays are read-only once the model is built; share instances freely.
    """

    def __init__(self, num_states, num_actions, indptr, successors, lo, hi, rewards,
                 measure_cost=0.0, discount=1.0, initial_state=0, terminal_states=(), name=''):
        self.num_states = int(num_states)
        self.num_actions = int(num_actions)
        self.indptr = _frozen(indptr, np.int64)
        self.successors = _frozen(successors, np.int64)
        self.lo = _frozen(lo, float)
        self.hi = _frozen(hi, float)
        self.rewards = _frozen(_reward_matrix(self.num_states, self.num_actions, rewards), float)
        self.measure_cost = float(measure_cost)
        self.discount = float(discount)
        self.initial_state = int(initial_state)
        self.terminal_states = frozenset(int(s) for s in terminal_states)
        self.name = name
        self._row_ids = None

    @classmethod
    def from_rows(cls, num_states, num_actions, rows, rewards, **kwargs):
        """Build from a mapping ``(s, a) -> [(successor, lo, hi), ...]``"""
        row_idx, succ, lo, hi = [], [], [], []
        for (s, a), entries in rows.items():
            for sp, l, h in entries:
                row_idx.append(s * num_actions + a)
                succ.append(sp)
                lo.append(l)
                hi.append(h)
        return cls.from_arrays(num_states, num_actions, row_idx, succ, lo, hi, rewards, **kwargs)

    @classmethod
    def from_arrays(cls, num_states, num_actions, rows, successors, lo, hi, rewards, **kwargs):
        """
        Build from coordinate triples.

        Duplicate successors are kept so that validation can report them.
        """
        indptr, succ, lo, hi = _sort_coo(num_states * num_actions, rows, successors, lo, hi)
        return cls(num_states, num_actions, indptr, succ, lo, hi, rewards, **kwargs)

    @property
    def num_rows(self):
        return self.num_states * self.num_actions

    @property
    def num_entries(self):
        return len(self.successors)

    @property
    def row_ids(self):
        """Row index of every entry"""
        if self._row_ids is None:
            ids = np.repeat(np.arange(self.num_rows, dtype=np.int64), np.diff(self.indptr))
            self._row_ids = _frozen(ids, np.int64)
        return self._row_ids

    @property
    def terminal_mask(self):
        mask = np.zeros(self.num_states, dtype=bool)
        mask[list(self.terminal_states)] = True
        return mask

    @property
    def is_degenerate(self):
        """True when every interval is a single point"""
        return bool(np.array_equal(self.lo, self.hi))

    def row_index(self, s, a):
        return s * self.num_actions + a

    def row_slice(self, s, a):
        k = self.row_index(s, a)
        return slice(int(self.indptr[k]), int(self.indptr[k + 1]))

    def row(self, s, a):
        sl = self.row_slice(s, a)
        return UncertainRow(self.successors[sl], self.lo[sl], self.hi[sl])

    def reward(self, s, a):
        return float(self.rewards[s, a])

    def is_terminal(self, s):
        return int(s) in self.terminal_states

    def with_measure_cost(self, measure_cost):
        """Copy of the model with another measuring cost"""
        return RamMdp(
            self.num_states, self.num_actions, self.indptr, self.successors, self.lo, self.hi,
            self.rewards, measure_cost=measure_cost, discount=self.discount,
            initial_state=self.initial_state, terminal_states=self.terminal_states, name=self.name,
        )

    def __eq__(self, other):
        if not isinstance(other, RamMdp):
            return NotImplemented
        return (
            self.num_states == other.num_states
            and self.num_actions == other.num_actions
            and self.measure_cost == other.measure_cost
            and self.discount == other.discount
            and self.initial_state == other.initial_state
            and self.terminal_states == other.terminal_states
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.successors, other.successors)
            and np.array_equal(self.lo, other.lo)
            and np.array_equal(self.hi, other.hi)
            and np.array_equal(self.rewards, other.rewards)
        )

    __hash__ = object.__hash__

    def __repr__(self):
        label = f"{self.name} " if self.name else ''
        return (
            f"<RamMdp {label}|S|={self.num_states} |A|={self.num_actions} "
            f"entries={self.num_entries} c={self.measure_cost} gamma={self.discount}>"
        )


class PointModel:
    """Model with a single transition distribution per state-action pair"""

    def __init__(self, num_states, num_actions, indptr, successors, probs, rewards,
                 measure_cost=0.0, discount=1.0, initial_state=0, terminal_states=(),
                 renormalized=False, name=''):
        self.num_states = int(num_states)
        self.num_actions = int(num_actions)
        self.indptr = _frozen(indptr, np.int64)
        self.successors = _frozen(successors, np.int64)
        self.probs = _frozen(probs, float)
        self.rewards = _frozen(_reward_matrix(self.num_states, self.num_actions, rewards), float)
        self.measure_cost = float(measure_cost)
        self.discount = float(discount)
        self.initial_state = int(initial_state)
        self.terminal_states = frozenset(int(s) for s in terminal_states)
        self.renormalized = renormalized
        self.name = name

    @classmethod
    def from_arrays(cls, num_states, num_actions, rows, successors, probs, rewards, **kwargs):
        """Build from coordinate triples, summing duplicate successors"""
        num_rows = num_states * num_actions
        keys = np.asarray(rows, dtype=np.int64) * num_states + np.asarray(successors, dtype=np.int64)
        unique_keys, inverse = np.unique(keys, return_inverse=True)
        merged = np.bincount(inverse, weights=np.asarray(probs, dtype=float))
        indptr, succ, merged = _sort_coo(num_rows, unique_keys // num_states, unique_keys % num_states, merged)
        return cls(num_states, num_actions, indptr, succ, merged, rewards, **kwargs)

    @classmethod
    def from_rows(cls, num_states, num_actions, rows, rewards, **kwargs):
        """Build from a mapping ``(s, a) -> [(successor, p), ...]``"""
        row_idx, succ, probs = [], [], []
        for (s, a), entries in rows.items():
            for sp, p in entries:
                row_idx.append(s * num_actions + a)
                succ.append(sp)
                probs.append(p)
        return cls.from_arrays(num_states, num_actions, row_idx, succ, probs, rewards, **kwargs)

    @classmethod
    def sharing_layout(cls, model, probs, **kwargs):
        """Point model over the rows of an interval model"""
        return cls(
            model.num_states, model.num_actions, model.indptr, model.successors, probs, model.rewards,
            measure_cost=model.measure_cost, discount=model.discount,
            initial_state=model.initial_state, terminal_states=model.terminal_states,
            name=model.name, **kwargs,
        )

    @property
    def num_rows(self):
        return self.num_states * self.num_actions

    def row_slice(self, s, a):
        k = s * self.num_actions + a
        return slice(int(self.indptr[k]), int(self.indptr[k + 1]))

    def row(self, s, a):
        sl = self.row_slice(s, a)
        return [(int(sp), float(p)) for sp, p in zip(self.successors[sl], self.probs[sl]) if p > 0]

    def row_sums(self):
        return np.add.reduceat(self.probs, self.indptr[:-1]) if len(self.probs) else np.zeros(self.num_rows)

    def expectations(self, values):
        """Expected value of ``values`` under every row"""
        return np.add.reduceat(self.probs * values[self.successors], self.indptr[:-1])

    def transition(self, belief, action):
        """Exact filtering step for a non-measuring action"""
        rows = belief.states * self.num_actions + action
        entries, owner = gather_rows(self.indptr, rows)
        mass = belief.probs[owner] * self.probs[entries]
        return Belief(self.successors[entries], mass)

    def as_interval_model(self):
        """Degenerate interval model ``[p, p]`` over the same rows"""
        return RamMdp(
            self.num_states, self.num_actions, self.indptr, self.successors, self.probs, self.probs,
            self.rewards, measure_cost=self.measure_cost, discount=self.discount,
            initial_state=self.initial_state, terminal_states=self.terminal_states, name=self.name,
        )

    def __repr__(self):
        return f"<PointModel |S|={self.num_states} |A|={self.num_actions} entries={len(self.successors)}>"


class Belief:
    """
    Sparse probability distribution over states.

    Non-positive entries are pruned and the remaining mass is normalised on
    construction, so every instance sums to one.
    """

    __slots__ = ('states', 'probs')

    def __init__(self, states, probs):
        states = np.asarray(states, dtype=np.int64).ravel()
        probs = np.asarray(probs, dtype=float).ravel()
        if len(states) != len(probs):
            raise DomainError("Belief states and probabilities differ in length")
        if len(states) and np.any(np.diff(states) <= 0):
            states, inverse = np.unique(states, return_inverse=True)
            probs = np.bincount(inverse, weights=probs)
        keep = probs > 0
        states, probs = states[keep], probs[keep]
        total = probs.sum()
        if total <= 0 or not np.isfinite(total):
            raise DomainError("Belief has no positive mass")
        self.states = _frozen(states, np.int64)
        self.probs = _frozen(probs / total, float)

    @classmethod
    def delta(cls, state):
        return cls([state], [1.0])

    @classmethod
    def from_mapping(cls, mapping):
        items = sorted(mapping.items())
        return cls([s for s, _ in items], [p for _, p in items])

    @property
    def support(self):
        return tuple(int(s) for s in self.states)

    @property
    def is_point(self):
        return len(self.states) == 1

    def prob(self, state):
        pos = np.searchsorted(self.states, state)
        if pos < len(self.states) and self.states[pos] == state:
            return float(self.probs[pos])
        return 0.0

    def as_dict(self):
        return {int(s): float(p) for s, p in zip(self.states, self.probs)}

    def entropy(self):
        """Shannon entropy in nats"""
        return float(-np.sum(self.probs * np.log(self.probs)))

    def expectation(self, values):
        """``sum_s b(s) * values[s]``; works row-wise for a value matrix"""
        return self.probs @ np.asarray(values)[self.states]

    def key(self, digits=12):
        """Hashable key for memoisation"""
        return tuple(zip(self.support, np.round(self.probs, digits).tolist()))

    def __len__(self):
        return len(self.states)

    def __eq__(self, other):
        if not isinstance(other, Belief):
            return NotImplemented
        return np.array_equal(self.states, other.states) and np.allclose(
            self.probs, other.probs, rtol=0.0, atol=SolverConfig.prob_epsilon()
        )

    __hash__ = None

    def __repr__(self):
        body = ', '.join(f"{s}: {p:.4g}" for s, p in list(self.as_dict().items())[:8])
        more = ', ...' if len(self) > 8 else ''
        return f"Belief({{{body}{more}}})"


@dataclass(frozen=True)
class ConfidenceSpec:
    base_model: PointModel
    alpha: float


@dataclass(frozen=True)
class Violation:
    state: int
    action: int
    kind: str
    message: str

    def __str__(self):
        where = '' if self.state < 0 else f"({self.state}, {self.action}) "
        return f"{where}{self.kind}: {self.message}"


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def kinds(self):
        return {v.kind for v in self.violations}

    def add(self, state, action, kind, message):
        self.violations.append(Violation(int(state), int(action), kind, message))

    def __str__(self):
        if self.ok:
            return 'ok'
        return '\n'.join(str(v) for v in self.violations)


def validate_model(m):
    """Check every structural invariant of a model; violations are returned, not raised"""
    eps = SolverConfig.prob_epsilon()
    report = ValidationReport()
    A = m.num_actions

    def where(row):
        return divmod(int(row), A)

    if len(m.indptr) != m.num_rows + 1:
        report.add(-1, -1, 'layout', f"indptr has {len(m.indptr)} entries, expected {m.num_rows + 1}")
        return report

    if not 0.0 < m.discount <= 1.0:
        report.add(-1, -1, 'discount', f"discount {m.discount} outside (0, 1]")
    if m.measure_cost < 0:
        report.add(-1, -1, 'measure cost', f"negative measuring cost {m.measure_cost}")
    if not 0 <= m.initial_state < m.num_states:
        report.add(-1, -1, 'initial state', f"initial state {m.initial_state} out of range")
    for t in sorted(m.terminal_states):
        if not 0 <= t < m.num_states:
            report.add(t, -1, 'terminal', f"terminal state {t} out of range")

    lengths = np.diff(m.indptr)
    for row in np.flatnonzero(lengths == 0):
        s, a = where(row)
        report.add(s, a, 'missing row', 'no successors')

    row_ids = m.row_ids
    out_of_range = (m.successors < 0) | (m.successors >= m.num_states)
    for e in np.flatnonzero(out_of_range):
        s, a = where(row_ids[e])
        report.add(s, a, 'successor', f"successor {m.successors[e]} out of range")

    same_row = row_ids[1:] == row_ids[:-1]
    for e in np.flatnonzero(same_row & (m.successors[1:] == m.successors[:-1])):
        s, a = where(row_ids[e])
        report.add(s, a, 'duplicate successor', f"successor {m.successors[e]} appears twice")

    for e in np.flatnonzero(m.lo > m.hi):
        s, a = where(row_ids[e])
        report.add(s, a, 'lo>hi', f"interval ({m.lo[e]:.12g}, {m.hi[e]:.12g}) for successor {m.successors[e]}")
    for e in np.flatnonzero((m.lo < 0) | (m.hi > 1) | ~np.isfinite(m.lo) | ~np.isfinite(m.hi)):
        s, a = where(row_ids[e])
        report.add(s, a, 'probability range', f"interval ({m.lo[e]:.12g}, {m.hi[e]:.12g}) outside [0, 1]")

    nonempty = np.flatnonzero(lengths > 0)
    if len(nonempty):
        starts = m.indptr[:-1][nonempty]
        lo_sum = np.add.reduceat(m.lo, starts)
        hi_sum = np.add.reduceat(m.hi, starts)
        for pos in np.flatnonzero((lo_sum > 1.0 + eps) | (hi_sum < 1.0 - eps)):
            s, a = where(nonempty[pos])
            report.add(s, a, 'row infeasible', f"sum(lo)={lo_sum[pos]:.12g}, sum(hi)={hi_sum[pos]:.12g}")

    for s, a in zip(*np.nonzero(~np.isfinite(m.rewards))):
        report.add(s, a, 'reward', 'reward is not finite')

    for t in sorted(m.terminal_states):
        if not 0 <= t < m.num_states:
            continue
        for a in range(A):
            row = m.row(t, a)
            if not (len(row) == 1 and row.successors[0] == t and row.lo[0] == 1.0 and row.hi[0] == 1.0):
                report.add(t, a, 'terminal', 'terminal state needs a [1, 1] self-loop')
            if m.rewards[t, a] != 0.0:
                report.add(t, a, 'terminal', 'terminal state has a non-zero reward')

    return report


def intervals_from_confidence(spec):
    """
    Interval model around a point model at confidence level alpha.

    Every probability p becomes ``[0, min(p / alpha, 1)]``; successors with
    p = 0 get no entry and terminal self-loops stay ``[1, 1]``.
    """
    alpha = float(spec.alpha)
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"Confidence level must lie in (0, 1], got {alpha}")
    base = spec.base_model
    keep = base.probs > 0
    row_ids = np.repeat(np.arange(base.num_rows, dtype=np.int64), np.diff(base.indptr))[keep]
    succ = base.successors[keep]
    hi = np.minimum(base.probs[keep] / alpha, 1.0)
    lo = np.zeros_like(hi)
    if base.terminal_states:
        terminal = np.isin(row_ids // base.num_actions, list(base.terminal_states))
        lo[terminal] = base.probs[keep][terminal]
        hi[terminal] = base.probs[keep][terminal]
    return RamMdp.from_arrays(
        base.num_states, base.num_actions, row_ids, succ, lo, hi, base.rewards,
        measure_cost=base.measure_cost, discount=base.discount,
        initial_state=base.initial_state, terminal_states=base.terminal_states, name=base.name,
    )


def average_point_model(m):
    """
    Midpoint model of an interval model.

    Rows whose midpoints do not sum to one are scaled uniformly; the returned
    model's ``renormalized`` flag records whether that happened.
    """
    eps = SolverConfig.prob_epsilon()
    probs = (m.lo + m.hi) / 2.0
    sums = np.add.reduceat(probs, m.indptr[:-1])
    off = np.abs(sums - 1.0) > eps
    renormalized = bool(np.any(off))
    if renormalized:
        probs = probs / np.repeat(sums, np.diff(m.indptr))
        logger.warning(f"Average model renormalised {int(off.sum())} of {m.num_rows} rows")
    return PointModel.sharing_layout(m, probs, renormalized=renormalized)


def scalarized_reward(m, s, ap):
    """``R(s, a) - c * m``"""
    return m.reward(s, ap.control) - (m.measure_cost if ap.measure else 0.0)
