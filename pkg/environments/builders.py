"""
Benchmark environments.

Every builder returns a validated-by-construction RamMdp. Toy environments
share the layout ``s0 = 0, s- = 1, s+ = 2, terminal = 3`` with control
actions ``a = 0`` and ``b = 1``.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from core.exceptions import DomainError
from core.ram_model import ConfidenceSpec, PointModel, RamMdp, intervals_from_confidence
from core.solver_config import SolverConfig

logger = logging.getLogger('environments')

S0, S_MINUS, S_PLUS, TOY_TERMINAL = 0, 1, 2, 3
ACTION_A, ACTION_B = 0, 1


def _check_alpha(alpha):
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"Confidence level must lie in (0, 1], got {alpha}")


def _check_cost(c):
    if c < 0:
        raise DomainError(f"Measuring cost must be non-negative, got {c}")


def _check_gamma(gamma):
    if not 0.0 < gamma <= 1.0:
        raise DomainError(f"Discount must lie in (0, 1], got {gamma}")


def _toy_model(first_row, rewards, c, name, num_states=4, initial_state=S0):
    terminal = num_states - 1
    rows = {}
    for s in range(num_states):
        for a in (ACTION_A, ACTION_B):
            rows[(s, a)] = first_row[s] if s in first_row else [(terminal, 1.0, 1.0)]
    return RamMdp.from_rows(
        num_states, 2, rows, rewards, measure_cost=c, discount=1.0,
        initial_state=initial_state, terminal_states=[terminal], name=name,
    )


def build_ab(c=0.0):
    """
    Nature may send s0 anywhere between s- and s+; action a pays 0.8 in s-,
    action b pays 1 in s+.
    """
    _check_cost(c)
    rewards = np.zeros((4, 2))
    rewards[S_MINUS, ACTION_A] = 0.8
    rewards[S_PLUS, ACTION_B] = 1.0
    first_row = {S0: [(S_MINUS, 0.0, 1.0), (S_PLUS, 0.0, 1.0)]}
    return _toy_model(first_row, rewards, c, 'ab')


def build_lucky_unlucky(p_max=0.5, c=0.2, reward_scale=1.0):
    """
    Gamble on action a after the first step: ``-scale`` in s-, ``+scale`` in
    s+. Nature sends at most ``p_max`` of the mass to s-.
    """
    if not 0.0 <= p_max <= 1.0:
        raise DomainError(f"p_max must lie in [0, 1], got {p_max}")
    _check_cost(c)
    rewards = np.zeros((4, 2))
    rewards[S_MINUS, ACTION_A] = -reward_scale
    rewards[S_PLUS, ACTION_A] = reward_scale
    entries = [(S_PLUS, 1.0 - p_max, 1.0)]
    if p_max > 0:
        entries.insert(0, (S_MINUS, 0.0, p_max))
    return _toy_model({S0: entries}, rewards, c, 'lucky-unlucky')


def build_belief_dep(c=0.0):
    """
    Two start states: s0 moves to s- for sure, s1 may end anywhere between s-
    and s+. Layout ``s0 = 0, s1 = 1, s- = 2, s+ = 3, terminal = 4``.
    """
    _check_cost(c)
    s0, s1, s_minus, s_plus = 0, 1, 2, 3
    rewards = np.zeros((5, 2))
    rewards[s_minus, ACTION_A] = 1.0
    rewards[s_plus, ACTION_B] = 1.0
    first_row = {
        s0: [(s_minus, 1.0, 1.0)],
        s1: [(s_minus, 0.0, 1.0), (s_plus, 0.0, 1.0)],
    }
    return _toy_model(first_row, rewards, c, 'belief-dep', num_states=5, initial_state=s1)


# Snakemaze actions, all moves along the unrolled corridor
SAFE_FORWARD, SAFE_BACKWARD, RISKY_FORWARD, RISKY_BACKWARD = range(4)
SNAKE_MOVES = {
    SAFE_FORWARD: ((1, 0.5), (2, 0.5)),
    SAFE_BACKWARD: ((-1, 0.5), (-2, 0.5)),
    RISKY_FORWARD: ((3, 0.6), (0, 0.4)),
    RISKY_BACKWARD: ((-3, 0.6), (0, 0.4)),
}


def snakemaze_point_model(width=10, height=10, c=0.01, step_penalty=0.01, gamma=0.95):
    """Base transition function of the snakemaze before widening"""
    if width * height < 2:
        raise DomainError(f"Snakemaze needs at least two cells, got {width}x{height}")
    _check_cost(c)
    _check_gamma(gamma)
    n = width * height
    goal, terminal = n - 1, n
    cells = np.arange(goal)

    rows, succ, probs = [], [], []
    for action, moves in SNAKE_MOVES.items():
        for shift, p in moves:
            rows.append(cells * 4 + action)
            succ.append(np.clip(cells + shift, 0, n - 1))
            probs.append(np.full(len(cells), p))
    for s in (goal, terminal):
        rows.append(s * 4 + np.arange(4))
        succ.append(np.full(4, terminal))
        probs.append(np.ones(4))

    rewards = np.full((n + 1, 4), -step_penalty)
    rewards[goal] = 1.0
    rewards[terminal] = 0.0
    return PointModel.from_arrays(
        n + 1, 4, np.concatenate(rows), np.concatenate(succ), np.concatenate(probs), rewards,
        measure_cost=c, discount=gamma, initial_state=0, terminal_states=[terminal], name='snakemaze',
    )


def build_snakemaze(width=10, height=10, alpha=1.0, c=0.01, step_penalty=0.01, gamma=0.95):
    """
    Snaking corridor unrolled into a path of ``width * height`` cells.

    Safe moves go 1 or 2 cells (0.5 each), risky moves go 3 cells (0.6) or
    stay (0.4). The last cell pays 1 and leads to the terminal state; every
    other step costs ``step_penalty``.
    """
    _check_alpha(alpha)
    base = snakemaze_point_model(width, height, c, step_penalty, gamma)
    return intervals_from_confidence(ConfidenceSpec(base, alpha))


DRONE_SIZE = 30
DRONE_WIDTH = 6
DRONE_MAX_SPEED = 5
DRONE_MAX_ACCEL = 2
DRONE_GOAL_Y = 27
DRONE_PERTURBATION = {0: 0.68, 1: 0.14, -1: 0.14, 2: 0.02, -2: 0.02}
VELOCITIES = 2 * DRONE_MAX_SPEED + 1
ACCELS = 2 * DRONE_MAX_ACCEL + 1


def drone_cells():
    """Corridor cells, two overlapping 6x30 rectangles forming an L, sorted by (x, y)"""
    xs, ys = np.meshgrid(np.arange(DRONE_SIZE), np.arange(DRONE_SIZE), indexing='ij')
    inside = (ys < DRONE_WIDTH) | (xs < DRONE_WIDTH)
    return np.stack([xs[inside], ys[inside]], axis=1)


def drone_state(cell_lookup, x, y, vx, vy):
    cell = cell_lookup[x, y]
    return (cell * VELOCITIES + (vx + DRONE_MAX_SPEED)) * VELOCITIES + (vy + DRONE_MAX_SPEED)


def _axis_table():
    """Next (position offset, velocity) per axis for every (v, a, w)"""
    v = np.arange(-DRONE_MAX_SPEED, DRONE_MAX_SPEED + 1)[:, None, None]
    a = np.arange(-DRONE_MAX_ACCEL, DRONE_MAX_ACCEL + 1)[None, :, None]
    w = np.array(sorted(DRONE_PERTURBATION))[None, None, :]
    v_new = np.clip(v + a + w, -DRONE_MAX_SPEED, DRONE_MAX_SPEED)
    offset = np.floor_divide(v + v_new, 2)
    return offset, v_new


def drone_point_model(c=0.01, step_penalty=0.01, gamma=0.95):
    """Base (alpha = 1) transition function of the drone corridor"""
    _check_cost(c)
    _check_gamma(gamma)
    cells = drone_cells()
    lookup = np.full((DRONE_SIZE, DRONE_SIZE), -1, dtype=np.int64)
    lookup[cells[:, 0], cells[:, 1]] = np.arange(len(cells))
    num_live = len(cells) * VELOCITIES ** 2
    sink = num_live
    num_actions = ACCELS ** 2

    live = np.arange(num_live)
    cell, rest = np.divmod(live, VELOCITIES ** 2)
    vx_idx, vy_idx = np.divmod(rest, VELOCITIES)
    x, y = cells[cell, 0], cells[cell, 1]
    goal = y > DRONE_GOAL_Y
    moving = np.flatnonzero(~goal)

    offset, v_new = _axis_table()
    w_probs = np.array([DRONE_PERTURBATION[w] for w in sorted(DRONE_PERTURBATION)])
    joint = np.outer(w_probs, w_probs).ravel()

    rows, succ, probs = [], [], []
    for ax in range(ACCELS):
        for ay in range(ACCELS):
            action = ax * ACCELS + ay
            xn = x[moving][:, None, None] + offset[vx_idx[moving], ax][:, :, None]
            yn = y[moving][:, None, None] + offset[vy_idx[moving], ay][:, None, :]
            vxn = v_new[vx_idx[moving], ax][:, :, None] + DRONE_MAX_SPEED
            vyn = v_new[vy_idx[moving], ay][:, None, :] + DRONE_MAX_SPEED
            xn, yn = np.broadcast_arrays(xn, yn)
            in_grid = (xn >= 0) & (xn < DRONE_SIZE) & (yn >= 0) & (yn < DRONE_SIZE)
            target = lookup[np.clip(xn, 0, DRONE_SIZE - 1), np.clip(yn, 0, DRONE_SIZE - 1)]
            valid = in_grid & (target >= 0)
            nxt = (target * VELOCITIES + vxn) * VELOCITIES + vyn
            nxt = np.where(valid, nxt, sink)
            rows.append(np.repeat(moving * num_actions + action, len(joint)))
            succ.append(nxt.reshape(len(moving), -1).ravel())
            probs.append(np.tile(joint, len(moving)))

    for group in (np.flatnonzero(goal), np.array([sink])):
        rows.append((group[:, None] * num_actions + np.arange(num_actions)).ravel())
        succ.append(np.full(len(group) * num_actions, sink))
        probs.append(np.ones(len(group) * num_actions))

    rewards = np.full((num_live + 1, num_actions), -step_penalty)
    rewards[np.flatnonzero(goal)] = 1.0
    rewards[sink] = 0.0
    initial = int(drone_state(lookup, DRONE_SIZE - 1, 2, 0, 0))
    model = PointModel.from_arrays(
        num_live + 1, num_actions, np.concatenate(rows), np.concatenate(succ), np.concatenate(probs),
        rewards, measure_cost=c, discount=gamma, initial_state=initial, terminal_states=[sink], name='drone',
    )
    logger.info(f"Built drone base model with {num_live} live states and {len(model.successors)} entries")
    return model


def build_drone(alpha=0.5, c=0.01, step_penalty=0.01, gamma=0.95):
    """
    Discretised drone in an L-shaped corridor.

    State ``<x, y, vx, vy>`` with velocities in [-5, 5]; 25 accelerations in
    [-2, 2]^2 and independent per-axis perturbations of the new velocity.
    Leaving the corridor ends in the sink; states with ``y > 27`` pay 1 and
    end the episode.
    """
    _check_alpha(alpha)
    base = drone_point_model(c, step_penalty, gamma)
    return intervals_from_confidence(ConfidenceSpec(base, alpha))


ENVIRONMENTS = {
    'ab': (build_ab, {'c': 0.0}),
    'lucky-unlucky': (build_lucky_unlucky, {'p_max': 0.5, 'c': 0.2, 'reward_scale': 1.0}),
    'belief-dep': (build_belief_dep, {'c': 0.0}),
    'snakemaze': (build_snakemaze, {
        'width': 10, 'height': 10, 'alpha': 1.0, 'c': 0.01, 'step_penalty': 0.01, 'gamma': 0.95,
    }),
    'drone': (build_drone, {'alpha': 0.5, 'c': 0.01, 'step_penalty': 0.01, 'gamma': 0.95}),
}

TOY_ENVIRONMENTS = ('ab', 'lucky-unlucky', 'belief-dep')


def environment_params(name, **params):
    """Full parameter set for a builder, coerced to the defaults' types"""
    if name not in ENVIRONMENTS:
        raise DomainError(f"Unknown environment '{name}'; choose from {', '.join(ENVIRONMENTS)}")
    _, defaults = ENVIRONMENTS[name]
    unknown = set(params) - set(defaults)
    if unknown:
        raise DomainError(f"Environment '{name}' has no parameter(s) {', '.join(sorted(unknown))}")
    merged = dict(defaults)
    for key, value in params.items():
        merged[key] = type(defaults[key])(value)
    return merged


def build_environment(name, **params):
    """Build an environment by registry name"""
    builder, _ = ENVIRONMENTS.get(name, (None, None))
    merged = environment_params(name, **params)
    model = builder(**merged)
    logger.info(f"Built {name} with {merged}: {model!r}")
    return model


def horizon_cap(name):
    return SolverConfig.horizon_cap(name)


@dataclass(frozen=True)
class EnvSpec:
    """Environment name plus builder parameters"""
    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'params', environment_params(self.name, **self.params))

    def build(self):
        return build_environment(self.name, **self.params)

    def with_params(self, **params):
        return EnvSpec(self.name, {**self.params, **params})

    @property
    def has_alpha(self):
        return 'alpha' in self.params

    @property
    def horizon_cap(self):
        return horizon_cap(self.name)
