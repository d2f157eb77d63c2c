"""
Runs a validated parameter sweep: builds the true and planning models at
every sweep value, simulates every planner on shared seeds and collects the
batch statistics in sweep order.
"""
import logging
import time

from core.planners import SolvedModel
from core.solver_config import SolverConfig

from .report_generators import SweepReportGenerator
from .simulation import NatureModel, run_batch

logger = logging.getLogger('experiments')


def _nature(config, value, true_model, solved):
    if config.nature == 'average':
        return NatureModel.average(true_model, value if config.param_name == 'alpha' else None)
    if solved.model is true_model:
        return NatureModel.rmdp_worst(solved, value if config.param_name == 'alpha' else None)
    return NatureModel.rmdp_worst(true_model, value)


def run_sweep_value(config, value, jobs=1):
    """Batch statistics of every configured planner at one sweep value"""
    true_model = config.true_env(value).build()
    if config.is_misspecified:
        solved = SolvedModel(config.planning_env(value).build())
    else:
        solved = SolvedModel(true_model)
    nature = _nature(config, value, true_model, solved)
    horizon_cap = config.horizon_cap or SolverConfig.horizon_cap(config.env.name)
    return run_batch(
        true_model, list(config.planners), nature, config.n_episodes,
        base_seed=config.base_seed, solved=solved, horizon_cap=horizon_cap, jobs=jobs,
    )


def run_experiment(config, jobs=1, progress=None):
    """
    Run the whole sweep and return a SweepReportGenerator.

    ``progress`` is called with ``(index, value, stats)`` after every sweep
    value. Output does not depend on ``jobs``.
    """
    started = time.perf_counter()
    report = SweepReportGenerator(config)
    logger.info(
        f"Starting {config.name}: {config.env.name}, {len(config.values)} values of "
        f"{config.param_name}, planners {', '.join(p.name for p in config.planners)}, "
        f"{config.n_episodes} episodes from seed {config.base_seed}"
    )
    for index, value in enumerate(config.values):
        stats = run_sweep_value(config, value, jobs)
        report.add(value, stats)
        if progress:
            progress(index, value, stats)
    logger.info(f"Finished {config.name} in {time.perf_counter() - started:.2f}s")
    return report
