"""
Online act-then-measure planners.

RatmPlanner picks the control action that is best for the current robust
belief under the fully observable robust Q-values, then measures when the
value of knowing the next state covers the measuring cost. MlatmPlanner adds
measurements that a less pessimistic model considers worthwhile, without
changing control actions. AtmPlanner runs the same machinery on a point
model (degenerate intervals).
"""
import logging
import threading
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import ContractViolationError, DomainError
from .ram_model import ActionPair, Belief, average_point_model, gather_rows
from .robust_solvers import robust_belief_update, value_iteration, worst_case_transition_nomeasure
from .solver_config import SolverConfig
from .utils import argmax_rows, tied_argmax, tied_indices

logger = logging.getLogger('planners')

KINDS = ('ratm', 'mlatm', 'atm')
VARIANTS = {
    'ratm': (None,),
    'mlatm': ('opt', 'pes', 'avg'),
    'atm': ('avg', 'pes'),
}
TIE_BREAKS = (SolverConfig.TIE_LEXICOGRAPHIC, SolverConfig.TIE_SEEDED_RANDOM, SolverConfig.TIE_ML_PREFERRED)
ML_MV_MODES = ('robust_actions', 'ml_optimal_actions')


@dataclass(frozen=True)
class PlannerConfig:
    kind: str = 'ratm'
    variant: str = None
    tie_break: str = SolverConfig.TIE_LEXICOGRAPHIC
    ml_mv_mode: str = 'robust_actions'

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"Unknown planner kind '{self.kind}'")
        if self.variant not in VARIANTS[self.kind]:
            raise DomainError(f"Planner '{self.kind}' has no variant '{self.variant}'")
        if self.tie_break not in TIE_BREAKS:
            raise DomainError(f"Unknown tie-break mode '{self.tie_break}'")
        if self.tie_break == SolverConfig.TIE_ML_PREFERRED and self.kind != 'mlatm':
            raise DomainError("Tie-break 'ml_preferred' needs a measurement-lenient planner")
        if self.ml_mv_mode not in ML_MV_MODES:
            raise DomainError(f"Unknown measuring-value mode '{self.ml_mv_mode}'")

    @classmethod
    def from_name(cls, name, **kwargs):
        """Parse names such as ``ratm``, ``mlatm-avg`` or ``atm-pes``"""
        kind, _, variant = name.strip().lower().partition('-')
        return cls(kind=kind, variant=variant or None, **kwargs)

    @property
    def name(self):
        return self.kind if self.variant is None else f"{self.kind}-{self.variant}"

    @property
    def label(self):
        return self.kind.upper() if self.variant is None else f"{self.kind.upper()}-{self.variant}"


@dataclass
class PlannerState:
    robust_belief: Belief
    ml_belief: Belief = None


@dataclass(frozen=True)
class Decision:
    action_pair: ActionPair
    mv_robust: float
    mv_ml: float = None
    control_q: float = 0.0
    chosen_response: int = None
    informative: bool = True
    robust_next: int = None

    @property
    def control(self):
        return self.action_pair.control

    @property
    def measure(self):
        return self.action_pair.measure

    def as_row(self):
        return {
            'control': self.control,
            'measure': self.measure,
            'mv_robust': self.mv_robust,
            'mv_ml': self.mv_ml,
        }


class SolvedModel:
    """
    A model together with the value tables every planner on it needs.

    Tables are computed on first use and shared by all planners built from
    this instance. Call ``warm`` before handing the instance to worker
    threads.
    """

    def __init__(self, model):
        self.model = model
        self._lock = threading.RLock()
        self._exact = {}
        self._atm = {}

    @cached_property
    def robust(self):
        return value_iteration(self.model, SolverConfig.ROBUST)

    @cached_property
    def optimistic(self):
        return value_iteration(self.model, SolverConfig.OPTIMISTIC)

    @cached_property
    def average(self):
        return average_point_model(self.model)

    def ml_model(self, variant):
        """Point model a measurement-lenient planner evaluates regret with"""
        if variant == 'opt':
            return self.optimistic.rows
        if variant == 'pes':
            return self.robust.rows
        if variant == 'avg':
            return self.average
        raise DomainError(f"Unknown lenient model variant '{variant}'")

    def ml_qtable(self, variant):
        with self._lock:
            if variant not in self._exact:
                self._exact[variant] = value_iteration(self.model, self.ml_model(variant))
            return self._exact[variant]

    def atm_solution(self, variant):
        """Solved degenerate-interval model for a non-robust baseline"""
        with self._lock:
            if variant not in self._atm:
                self._atm[variant] = SolvedModel(self.ml_model(variant).as_interval_model())
            return self._atm[variant]

    def warm(self, configs):
        """Compute every table the given planner configurations will read"""
        for config in configs:
            planner = build_planner(self, config)
            planner.q  # noqa: B018
            if isinstance(planner, MlatmPlanner):
                planner.q_ml  # noqa: B018
        return self


class RatmPlanner:
    """Robust act-then-measure planner"""

    def __init__(self, solved, config=None):
        self.solved = solved
        self.config = config or PlannerConfig()
        self.state = None
        self.rng = None
        self._pending = None
        self._committed = None

    def _solution(self):
        return self.solved

    @property
    def model(self):
        return self._solution().model

    @property
    def q(self):
        return self._solution().robust

    @property
    def tie_tolerance(self):
        return SolverConfig.tie_tolerance()

    def clone(self):
        return type(self)(self.solved, self.config)

    def reset(self, rng=None, initial_state=None):
        start = self.model.initial_state if initial_state is None else initial_state
        self.rng = rng
        self.state = PlannerState(robust_belief=Belief.delta(start), ml_belief=self._initial_ml_belief(start))
        self._pending = None
        self._committed = None
        return self.state

    def _initial_ml_belief(self, start):
        return None

    def _execution_rng(self):
        return self.rng if self.config.tie_break == SolverConfig.TIE_SEEDED_RANDOM else None

    def _pick(self, values, belief_ml=None):
        return tied_argmax(values, self.tie_tolerance, self._execution_rng())

    def control_action(self):
        """
        Action maximising the belief-weighted robust Q-values.

        After an unmeasured step this is the robust next action the previous
        decision already committed to.
        """
        values = self.state.robust_belief.expectation(self.q.values)
        if self._committed is not None:
            a, self._committed = self._committed, None
            return a, values
        return self._pick(values, self.state.ml_belief), values

    def _measuring_branch(self, a):
        b = self.state.robust_belief
        rows = self.q.rows
        entries, owner = gather_rows(rows.indptr, b.states * self.model.num_actions + a)
        V = self.q.state_values()
        return float(np.sum(b.probs[owner] * rows.probs[entries] * V[rows.successors[entries]]))

    def measuring_value(self, a):
        """
        Value of measuring after control action ``a``.

        Difference between knowing the next state (fully observable worst
        case) and facing the belief-dependent worst case without knowing
        it, minus the measuring cost. Returns ``(value, nature_response)``.
        """
        m = self.model
        response = worst_case_transition_nomeasure(m, self.state.robust_belief, a, self.q)
        value = m.discount * (self._measuring_branch(a) - response.game_value) - m.measure_cost
        return value, response

    def _measures(self, value):
        return value >= -self.tie_tolerance

    def is_informative(self, a):
        """False when the next state is known without measuring"""
        rows = self.state.robust_belief.states * self.model.num_actions + a
        entries, _ = gather_rows(self.model.indptr, rows)
        reachable = self.model.successors[entries][self.model.hi[entries] > 0]
        return len(np.unique(reachable)) > 1

    def decide(self):
        if self.state is None:
            raise ContractViolationError("Planner must be reset before deciding")
        a, values = self.control_action()
        mv, response = self.measuring_value(a)
        informative = self.is_informative(a)
        decision = Decision(
            action_pair=ActionPair(a, informative and self._measures(mv)),
            mv_robust=float(mv),
            control_q=float(values[a]),
            chosen_response=response.response_action,
            informative=informative,
        )
        self._pending = (decision, response)
        logger.debug(f"{self.config.label}: {decision.action_pair} mv={mv:.6g}")
        return decision

    def _nature_rows(self, decision):
        if self._pending is not None and self._pending[0] is decision:
            return self._pending[1].rows
        response = worst_case_transition_nomeasure(
            self.model, self.state.robust_belief, decision.control, self.q
        )
        return response.rows

    def advance(self, decision, observation=None):
        """Move the tracked beliefs past ``decision``"""
        if decision.measure != (observation is not None):
            raise ContractViolationError(
                f"Observation {'missing' if decision.measure else 'given'} for action pair {decision.action_pair}"
            )
        own = self._pending is not None and self._pending[0] is decision
        self._committed = decision.robust_next if own and not decision.measure else None
        if decision.measure:
            point = Belief.delta(observation)
            self.state = PlannerState(robust_belief=point, ml_belief=point if self.state.ml_belief is not None else None)
        else:
            robust = robust_belief_update(
                self.model, self.state.robust_belief, decision.action_pair, self._nature_rows(decision)
            )
            self.state = PlannerState(robust_belief=robust, ml_belief=self._advance_ml(decision.control))
        self._pending = None
        return self.state

    def _advance_ml(self, a):
        return None


class MlatmPlanner(RatmPlanner):
    """Measurement-lenient variant: robust control actions, extra measurements"""

    @property
    def ml_model(self):
        return self.solved.ml_model(self.config.variant)

    @property
    def q_ml(self):
        return self.solved.ml_qtable(self.config.variant)

    def _initial_ml_belief(self, start):
        return Belief.delta(start)

    def _pick(self, values, belief_ml=None):
        if self.config.tie_break == SolverConfig.TIE_ML_PREFERRED and belief_ml is not None:
            candidates = tied_indices(values, self.tie_tolerance)
            if len(candidates) > 1:
                ml_values = belief_ml.expectation(self.q_ml.values)[candidates]
                return int(candidates[tied_argmax(ml_values, self.tie_tolerance)])
            return int(candidates[0])
        return super()._pick(values, belief_ml)

    def _predicted_action(self, values, belief_ml):
        # seeded_random draws here; advance() makes the next step execute this draw
        if self.config.tie_break == SolverConfig.TIE_LEXICOGRAPHIC:
            return tied_argmax(values, self.tie_tolerance)
        return self._pick(values, belief_ml)

    def ml_measuring_value(self, a, response):
        """
        Expected regret, under the lenient model, of continuing with the
        robust policy's next action instead of acting on the measured state,
        minus the measuring cost.

        Returns ``(value, robust_next)``.
        """
        m = self.model
        next_ml = self.ml_model.transition(self.state.ml_belief, a)
        next_robust = robust_belief_update(m, self.state.robust_belief, ActionPair(a, False), response.rows)
        robust_next = self._predicted_action(next_robust.expectation(self.q.values), next_ml)

        states = next_ml.states
        reference = self.q.values if self.config.ml_mv_mode == 'robust_actions' else self.q_ml.values
        best = argmax_rows(reference[states], self.tie_tolerance)
        q_ml = self.q_ml.values[states]
        regret = q_ml[np.arange(len(states)), best] - q_ml[:, robust_next]
        return float(-m.measure_cost + m.discount * (next_ml.probs @ regret)), int(robust_next)

    def decide(self):
        if self.state is None:
            raise ContractViolationError("Planner must be reset before deciding")
        a, values = self.control_action()
        mv, response = self.measuring_value(a)
        mv_ml, robust_next = self.ml_measuring_value(a, response)
        informative = self.is_informative(a)
        decision = Decision(
            action_pair=ActionPair(a, informative and (self._measures(mv) or self._measures(mv_ml))),
            mv_robust=float(mv),
            mv_ml=mv_ml,
            control_q=float(values[a]),
            chosen_response=response.response_action,
            informative=informative,
            robust_next=robust_next,
        )
        self._pending = (decision, response)
        logger.debug(f"{self.config.label}: {decision.action_pair} mv={mv:.6g} mv_ml={mv_ml:.6g}")
        return decision

    def _advance_ml(self, a):
        return self.ml_model.transition(self.state.ml_belief, a)


class AtmPlanner(RatmPlanner):
    """Non-robust baseline planning on a single point model"""

    def _solution(self):
        return self.solved.atm_solution(self.config.variant)


PLANNER_CLASSES = {
    'ratm': RatmPlanner,
    'mlatm': MlatmPlanner,
    'atm': AtmPlanner,
}


def build_planner(solved, config):
    """Planner instance for a configuration (or a planner name)"""
    if isinstance(config, str):
        config = PlannerConfig.from_name(config)
    return PLANNER_CLASSES[config.kind](solved, config)


def planner_configs(names, tie_break=SolverConfig.TIE_LEXICOGRAPHIC, ml_mv_mode='robust_actions'):
    """
    Parse a list of planner names with shared options.

    ``ml_preferred`` only changes lenient planners; the others fall back to
    lexicographic ties.
    """
    configs = []
    for name in names:
        kind = name.strip().lower().partition('-')[0]
        mode = tie_break
        if tie_break == SolverConfig.TIE_ML_PREFERRED and kind != 'mlatm':
            mode = SolverConfig.TIE_LEXICOGRAPHIC
        configs.append(PlannerConfig.from_name(name, tie_break=mode, ml_mv_mode=ml_mv_mode))
    return configs
