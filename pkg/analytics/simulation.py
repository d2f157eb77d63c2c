"""
Episode simulation against a nature model and paired-seed batches.

Every episode draws from two independent streams derived from its seed:
``default_rng([seed, 0])`` for nature and ``default_rng([seed, 1])`` for
planner tie-breaking, so planners in one batch face the same nature draws.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.stats import norm

from core.exceptions import DomainError
from core.planners import SolvedModel, build_planner
from core.ram_model import average_point_model
from core.solver_config import SolverConfig
from core.utils import discounted_sum

logger = logging.getLogger('simulation')

Z_95 = float(norm.ppf(0.975))


@dataclass(frozen=True)
class NatureModel:
    """Transition function the simulator samples true next states from"""
    kind: str
    point_model: object
    alpha: float = None

    KINDS = ('rmdp_worst', 'average', 'point')

    @classmethod
    def rmdp_worst(cls, solved_true, alpha=None):
        """Worst-case rows of the fully observable robust problem"""
        if not isinstance(solved_true, SolvedModel):
            solved_true = SolvedModel(solved_true)
        return cls('rmdp_worst', solved_true.robust.rows, alpha)

    @classmethod
    def average(cls, true_model, alpha=None):
        return cls('average', average_point_model(true_model), alpha)

    @classmethod
    def point(cls, point_model):
        return cls('point', point_model)

    @classmethod
    def build(cls, kind, true_model, alpha=None):
        if kind == 'rmdp_worst':
            return cls.rmdp_worst(true_model, alpha)
        if kind == 'average':
            return cls.average(true_model, alpha)
        raise DomainError(f"Nature kind '{kind}' needs an explicit point model")

    def sample(self, s, a, rng):
        pm = self.point_model
        sl = pm.row_slice(s, a)
        cumulative = np.cumsum(pm.probs[sl])
        pos = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side='right'))
        return int(pm.successors[sl][min(pos, len(cumulative) - 1)])


@dataclass(frozen=True)
class StepRecord:
    t: int
    state: int
    control: int
    measure: bool
    mv_robust: float
    mv_ml: float
    reward: float
    cost: float
    belief_entropy: float


@dataclass
class EpisodeResult:
    scalarized_return: float
    nonscalarized_return: float
    discounted_cost: float
    num_measurements: int
    steps: int
    seed: int
    planner: str = ''
    trace: list = field(default_factory=list, repr=False)

    def trace_frame(self):
        return pd.DataFrame([vars(step) for step in self.trace])

    @property
    def measured_steps(self):
        return [step.t for step in self.trace if step.measure]


def run_episode(env, planner, nature, seed, horizon_cap):
    """
    Run one episode until a terminal state or ``horizon_cap`` decisions.

    Returns discounted scalarised and non-scalarised returns; measuring
    costs are discounted like rewards.
    """
    if horizon_cap <= 0:
        raise DomainError(f"Horizon cap must be positive, got {horizon_cap}")
    nature_rng = np.random.default_rng([seed, 0])
    planner.reset(rng=np.random.default_rng([seed, 1]), initial_state=env.initial_state)

    state = env.initial_state
    gamma, c = env.discount, env.measure_cost
    rewards, costs = [], []
    measurements = 0
    trace = []
    t = 0
    while t < horizon_cap and not env.is_terminal(state):
        entropy = planner.state.robust_belief.entropy()
        decision = planner.decide()
        a, measure = decision.control, decision.measure
        reward = env.reward(state, a)
        cost = c if measure else 0.0
        rewards.append(reward)
        costs.append(cost)
        measurements += int(measure)
        trace.append(StepRecord(t=t, state=state, reward=reward, cost=cost, belief_entropy=entropy, **decision.as_row()))

        state = nature.sample(state, a, nature_rng)
        planner.advance(decision, state if measure else None)
        t += 1

    rewards_sum, cost_sum = discounted_sum(rewards, gamma), discounted_sum(costs, gamma)
    return EpisodeResult(
        scalarized_return=rewards_sum - cost_sum,
        nonscalarized_return=rewards_sum,
        discounted_cost=cost_sum,
        num_measurements=measurements,
        steps=t,
        seed=seed,
        planner=planner.config.name,
        trace=trace,
    )


def confidence_half_width(values):
    """95 % normal-approximation half-width; 0 for a single sample"""
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        return 0.0
    return Z_95 * float(values.std(ddof=1)) / np.sqrt(len(values))


@dataclass
class BatchStatistics:
    planner: str
    mean_return: float
    ci_return: float
    mean_nonscalarized: float
    ci_nonscalarized: float
    mean_measurements: float
    ci_measurements: float
    n: int
    results: list = field(default_factory=list, repr=False)

    @classmethod
    def from_results(cls, planner, results):
        scalarized = [r.scalarized_return for r in results]
        nonscalarized = [r.nonscalarized_return for r in results]
        measurements = [r.num_measurements for r in results]
        return cls(
            planner=planner,
            mean_return=float(np.mean(scalarized)),
            ci_return=confidence_half_width(scalarized),
            mean_nonscalarized=float(np.mean(nonscalarized)),
            ci_nonscalarized=confidence_half_width(nonscalarized),
            mean_measurements=float(np.mean(measurements)),
            ci_measurements=confidence_half_width(measurements),
            n=len(results),
            results=results,
        )

    def as_row(self):
        return {
            'planner': self.planner,
            'mean_return': self.mean_return,
            'ci_return': self.ci_return,
            'mean_nonscalarized': self.mean_nonscalarized,
            'ci_nonscalarized': self.ci_nonscalarized,
            'mean_measurements': self.mean_measurements,
            'ci_measurements': self.ci_measurements,
            'n': self.n,
        }


def run_batch(env, planner_cfgs, nature, n_episodes, base_seed=0, solved=None, horizon_cap=None, jobs=1):
    """
    Paired-seed batch: episode ``i`` of every planner uses seed
    ``base_seed + i``.

    ``env`` is the true model (rewards, cost, discount, terminals);
    ``solved`` wraps the planning model and defaults to ``env`` itself.
    Returns one BatchStatistics per planner configuration, in order.
    """
    if n_episodes < 1:
        raise DomainError(f"Need at least one episode, got {n_episodes}")
    solved = solved or SolvedModel(env)
    horizon_cap = horizon_cap or SolverConfig.horizon_cap(env.name)
    solved.warm(planner_cfgs)
    seeds = [base_seed + i for i in range(n_episodes)]

    stats = []
    for config in planner_cfgs:
        started = time.perf_counter()
        prototype = build_planner(solved, config)

        def episode(seed, prototype=prototype):
            return run_episode(env, prototype.clone(), nature, seed, horizon_cap)

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(episode, seeds))
        else:
            results = [episode(seed) for seed in seeds]
        batch = BatchStatistics.from_results(config.name, results)
        stats.append(batch)
        logger.info(
            f"{config.label} on {env.name or 'model'}: mean return {batch.mean_return:.4f} "
            f"± {batch.ci_return:.4f}, {batch.mean_measurements:.2f} measurements "
            f"({n_episodes} episodes, {time.perf_counter() - started:.2f}s)"
        )
    return stats


def paired_differences(base, other):
    """Per-seed scalarised return differences ``base - other``"""
    by_seed = {r.seed: r.scalarized_return for r in other.results}
    return np.array([r.scalarized_return - by_seed[r.seed] for r in base.results])
